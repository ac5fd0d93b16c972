use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, ConvexShape, Transform, Vec2};
use crate::model::{BirdType, BodyKind, Material, ObjectId};

/// Outline of a body in its local frame.
///
/// Circles, rectangles and hollow rectangles are centred on the body origin.
/// Triangle vertices are given relative to the object position; bodies built
/// from them are re-centred on the centroid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Circle { r: f64 },
    Rect { w: f64, h: f64 },
    Triangle { vertices: [[f64; 2]; 3] },
    Hollow { w: f64, h: f64, wall: f64 },
}

impl Shape {
    pub fn area(&self) -> f64 {
        match self {
            Shape::Circle { r } => std::f64::consts::PI * r * r,
            Shape::Rect { w, h } => w * h,
            Shape::Triangle { vertices } => {
                let [a, b, c] = vertices.map(|v| Vec2::new(v[0], v[1]));
                0.5 * (b - a).cross(c - a).abs()
            }
            Shape::Hollow { w, h, wall } => w * h - (w - 2.0 * wall) * (h - 2.0 * wall),
        }
    }

    /// Tag used in percepts.
    pub fn tag(&self) -> &'static str {
        match self {
            Shape::Circle { .. } => "circle",
            Shape::Rect { .. } => "rect",
            Shape::Triangle { .. } => "triangle",
            Shape::Hollow { .. } => "hollow",
        }
    }

    pub fn scaled(&self, s: f64) -> Shape {
        match self {
            Shape::Circle { r } => Shape::Circle { r: r * s },
            Shape::Rect { w, h } => Shape::Rect { w: w * s, h: h * s },
            Shape::Triangle { vertices } => Shape::Triangle {
                vertices: vertices.map(|v| [v[0] * s, v[1] * s]),
            },
            Shape::Hollow { w, h, wall } => Shape::Hollow {
                w: w * s,
                h: h * s,
                wall: wall * s,
            },
        }
    }

    /// Triangle centroid relative to the object position; zero otherwise.
    pub fn centroid(&self) -> Vec2 {
        match self {
            Shape::Triangle { vertices } => {
                let sum = vertices
                    .iter()
                    .fold(Vec2::ZERO, |acc, v| acc + Vec2::new(v[0], v[1]));
                sum / 3.0
            }
            _ => Vec2::ZERO,
        }
    }

    /// Same outline with its centroid moved to the origin.
    pub fn recentered(&self) -> Shape {
        match self {
            Shape::Triangle { vertices } => {
                let c = self.centroid();
                Shape::Triangle {
                    vertices: vertices.map(|v| [v[0] - c.x, v[1] - c.y]),
                }
            }
            other => other.clone(),
        }
    }

    pub(crate) fn parts(&self) -> Vec<Part> {
        match self {
            Shape::Circle { r } => vec![Part::Circle {
                center: Vec2::ZERO,
                radius: *r,
            }],
            Shape::Rect { w, h } => vec![Part::rect(Vec2::ZERO, *w, *h)],
            Shape::Triangle { vertices } => {
                let mut v: Vec<Vec2> = vertices.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                if (v[1] - v[0]).cross(v[2] - v[0]) < 0.0 {
                    v.swap(1, 2);
                }
                vec![Part::polygon(v)]
            }
            Shape::Hollow { w, h, wall } => {
                let (hw, hh) = (w / 2.0, h / 2.0);
                let inner_h = h - 2.0 * wall;
                vec![
                    Part::rect(Vec2::new(0.0, -hh + wall / 2.0), *w, *wall),
                    Part::rect(Vec2::new(0.0, hh - wall / 2.0), *w, *wall),
                    Part::rect(Vec2::new(-hw + wall / 2.0, 0.0), *wall, inner_h),
                    Part::rect(Vec2::new(hw - wall / 2.0, 0.0), *wall, inner_h),
                ]
            }
        }
    }

    /// World-space convex pieces of this outline placed at `pos`, rotated by
    /// `angle`. The shape must already be centred.
    pub fn world_outline(&self, pos: Vec2, angle: f64) -> Vec<ConvexShape> {
        let xf = Transform::new(pos, angle);
        self.parts().iter().map(|p| p.to_world(&xf)).collect()
    }

    pub fn is_valid(&self) -> bool {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        match self {
            Shape::Circle { r } => pos(*r),
            Shape::Rect { w, h } => pos(*w) && pos(*h),
            Shape::Triangle { vertices } => {
                vertices.iter().all(|v| v[0].is_finite() && v[1].is_finite()) && self.area() > 1e-9
            }
            Shape::Hollow { w, h, wall } => {
                pos(*w) && pos(*h) && pos(*wall) && 2.0 * wall < *w && 2.0 * wall < *h
            }
        }
    }
}

/// Convex collision piece in body-local coordinates.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Part {
    Circle { center: Vec2, radius: f64 },
    Poly(Polygon),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Polygon {
    pub vertices: Vec<Vec2>,
    pub normals: Vec<Vec2>,
}

impl Part {
    pub fn rect(center: Vec2, w: f64, h: f64) -> Part {
        let (hw, hh) = (w / 2.0, h / 2.0);
        Part::polygon(vec![
            center + Vec2::new(-hw, -hh),
            center + Vec2::new(hw, -hh),
            center + Vec2::new(hw, hh),
            center + Vec2::new(-hw, hh),
        ])
    }

    /// Counter-clockwise convex vertices.
    pub fn polygon(vertices: Vec<Vec2>) -> Part {
        let n = vertices.len();
        let normals = (0..n)
            .map(|i| {
                (vertices[(i + 1) % n] - vertices[i])
                    .perp_cw()
                    .normalized()
                    .unwrap_or(Vec2::new(1.0, 0.0))
            })
            .collect();
        Part::Poly(Polygon { vertices, normals })
    }

    /// (area, centroid, second moment about the local origin) per unit density.
    fn mass_data(&self) -> (f64, Vec2, f64) {
        match self {
            Part::Circle { center, radius } => {
                let area = std::f64::consts::PI * radius * radius;
                let i = area * (0.5 * radius * radius + center.length_squared());
                (area, *center, i)
            }
            Part::Poly(p) => {
                let s = p.vertices[0];
                let mut area = 0.0;
                let mut center = Vec2::ZERO;
                let mut inertia = 0.0;
                let n = p.vertices.len();
                for i in 0..n {
                    let e1 = p.vertices[i] - s;
                    let e2 = p.vertices[(i + 1) % n] - s;
                    let d = e1.cross(e2);
                    let tri = 0.5 * d;
                    area += tri;
                    center += (e1 + e2) * (tri / 3.0);
                    let intx2 = e1.x * e1.x + e2.x * e1.x + e2.x * e2.x;
                    let inty2 = e1.y * e1.y + e2.y * e1.y + e2.y * e2.y;
                    inertia += (0.25 / 3.0 * d) * (intx2 + inty2);
                }
                center = center / area;
                let c = center + s;
                let i = inertia + area * (c.length_squared() - center.length_squared());
                (area, c, i)
            }
        }
    }

    pub fn to_world(&self, xf: &Transform) -> ConvexShape {
        match self {
            Part::Circle { center, radius } => ConvexShape::Circle {
                center: xf.apply(*center),
                radius: *radius,
            },
            Part::Poly(p) => ConvexShape::Polygon {
                vertices: p.vertices.iter().map(|v| xf.apply(*v)).collect(),
            },
        }
    }

    fn max_extent(&self) -> f64 {
        match self {
            Part::Circle { center, radius } => center.length() + radius,
            Part::Poly(p) => p
                .vertices
                .iter()
                .map(|v| v.length())
                .fold(0.0, f64::max),
        }
    }
}

/// Physical properties used to construct a body.
#[derive(Clone, Copy, Debug)]
pub struct BodyMaterial {
    pub density: f64,
    pub friction: f64,
    pub restitution: f64,
}

#[derive(Clone, Debug)]
pub struct Body {
    pub id: ObjectId,
    pub kind: BodyKind,
    pub material: Material,
    pub bird: Option<BirdType>,
    pub shape: Shape,
    pub(crate) parts: Arc<[Part]>,
    pub(crate) extent: f64,
    pub pos: Vec2,
    pub angle: f64,
    pub vel: Vec2,
    pub ang_vel: f64,
    pub mass: f64,
    pub inv_mass: f64,
    pub inertia: f64,
    pub inv_inertia: f64,
    pub friction: f64,
    pub restitution: f64,
    pub hp: f64,
    pub max_hp: f64,
    pub alive: bool,
    pub damaged: bool,
    pub(crate) awake: bool,
    pub(crate) sleep_time: f64,
    /// First integration step uses half a gravity kick, which makes the
    /// semi-implicit Euler positions of a free flight exact.
    pub(crate) half_kick: bool,
    /// Egg projectiles explode on first contact.
    pub(crate) detonates_on_contact: bool,
    pub(crate) touching: bool,
}

impl Body {
    /// A dynamic body whose shape is already centred on its origin.
    pub fn dynamic(
        id: ObjectId,
        kind: BodyKind,
        material: Material,
        shape: Shape,
        pos: Vec2,
        angle: f64,
        props: BodyMaterial,
        hp: f64,
    ) -> Body {
        let parts: Vec<Part> = shape.parts();
        let (mut area, mut inertia) = (0.0, 0.0);
        for p in &parts {
            let (a, _, i) = p.mass_data();
            area += a;
            inertia += i;
        }
        let mass = props.density * area;
        let inertia = props.density * inertia;
        let extent = parts.iter().map(Part::max_extent).fold(0.0, f64::max);
        Body {
            id,
            kind,
            material,
            bird: None,
            shape,
            parts: parts.into(),
            extent,
            pos,
            angle,
            vel: Vec2::ZERO,
            ang_vel: 0.0,
            mass,
            inv_mass: 1.0 / mass,
            inertia,
            inv_inertia: if inertia > 0.0 { 1.0 / inertia } else { 0.0 },
            friction: props.friction,
            restitution: props.restitution,
            hp,
            max_hp: hp,
            alive: true,
            damaged: false,
            awake: true,
            sleep_time: 0.0,
            half_kick: false,
            detonates_on_contact: false,
            touching: false,
        }
    }

    /// The immovable ground: one rectangle per `(x0, x1, top)` segment,
    /// extending `depth` below zero.
    pub fn terrain(segments: &[(f64, f64, f64)], depth: f64, friction: f64, restitution: f64) -> Body {
        let parts: Vec<Part> = segments
            .iter()
            .map(|&(x0, x1, h)| {
                let bottom = -depth;
                Part::rect(Vec2::new(0.5 * (x0 + x1), 0.5 * (h + bottom)), x1 - x0, h - bottom)
            })
            .collect();
        let extent = parts.iter().map(Part::max_extent).fold(0.0, f64::max);
        Body {
            id: crate::model::TERRAIN_ID,
            kind: BodyKind::Terrain,
            material: Material::None,
            bird: None,
            shape: Shape::Rect { w: 0.0, h: 0.0 },
            parts: parts.into(),
            extent,
            pos: Vec2::ZERO,
            angle: 0.0,
            vel: Vec2::ZERO,
            ang_vel: 0.0,
            mass: f64::INFINITY,
            inv_mass: 0.0,
            inertia: f64::INFINITY,
            inv_inertia: 0.0,
            friction,
            restitution,
            hp: f64::INFINITY,
            max_hp: f64::INFINITY,
            alive: true,
            damaged: false,
            awake: false,
            sleep_time: 0.0,
            half_kick: false,
            detonates_on_contact: false,
            touching: false,
        }
    }

    pub fn is_static(&self) -> bool {
        self.inv_mass == 0.0
    }

    pub fn is_awake(&self) -> bool {
        self.awake
    }

    pub fn transform(&self) -> Transform {
        Transform::new(self.pos, self.angle)
    }

    /// Loose bound from the origin extent; cheap enough for the broadphase.
    pub(crate) fn loose_aabb(&self) -> Aabb {
        if self.kind == BodyKind::Terrain {
            return self.aabb();
        }
        let r = Vec2::new(self.extent, self.extent);
        Aabb {
            min: self.pos - r,
            max: self.pos + r,
        }
    }

    pub fn aabb(&self) -> Aabb {
        self.world_parts()
            .iter()
            .fold(Aabb::EMPTY, |acc, p| acc.union(p.aabb()))
    }

    pub fn world_parts(&self) -> Vec<ConvexShape> {
        let xf = self.transform();
        self.parts.iter().map(|p| p.to_world(&xf)).collect()
    }

    pub fn speed(&self) -> f64 {
        self.vel.length()
    }

    /// Scale mass and inertia, e.g. when a bird splits.
    pub(crate) fn scale_mass(&mut self, factor: f64) {
        self.mass *= factor;
        self.inv_mass = 1.0 / self.mass;
        self.inertia *= factor;
        self.inv_inertia = if self.inertia > 0.0 { 1.0 / self.inertia } else { 0.0 };
    }

    /// Velocity of the material point at world offset `r` from the origin.
    #[inline]
    pub(crate) fn point_velocity(&self, r: Vec2) -> Vec2 {
        self.vel + Vec2::scalar_cross(self.ang_vel, r)
    }

    pub(crate) fn apply_impulse(&mut self, impulse: Vec2, r: Vec2) {
        self.vel += impulse * self.inv_mass;
        self.ang_vel += self.inv_inertia * r.cross(impulse);
    }

    /// Smallest local dimension; used to bound acceptable overlap.
    pub fn min_dimension(&self) -> f64 {
        match &self.shape {
            Shape::Circle { r } => 2.0 * r,
            Shape::Rect { w, h } => w.min(*h),
            Shape::Triangle { .. } => {
                let aabb = self.aabb();
                aabb.width().min(aabb.height())
            }
            Shape::Hollow { wall, .. } => *wall,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props() -> BodyMaterial {
        BodyMaterial {
            density: 2.0,
            friction: 0.5,
            restitution: 0.0,
        }
    }

    #[test]
    fn rect_mass_and_inertia() {
        let b = Body::dynamic(
            ObjectId(1),
            BodyKind::Block,
            Material::Wood,
            Shape::Rect { w: 2.0, h: 1.0 },
            Vec2::ZERO,
            0.0,
            props(),
            1.0,
        );
        assert!((b.mass - 4.0).abs() < 1e-12);
        // m (w² + h²) / 12
        assert!((b.inertia - 4.0 * 5.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn hollow_mass_matches_area() {
        let shape = Shape::Hollow {
            w: 2.0,
            h: 2.0,
            wall: 0.25,
        };
        let b = Body::dynamic(
            ObjectId(1),
            BodyKind::Block,
            Material::Wood,
            shape.clone(),
            Vec2::ZERO,
            0.0,
            props(),
            1.0,
        );
        assert!((b.mass - 2.0 * shape.area()).abs() < 1e-12);
        // Outer minus inner square: m_o s_o²/6 − m_i s_i²/6 at density 2.
        let expect = 2.0 * (4.0 * 4.0 / 6.0 - 2.25 * 2.25 / 6.0);
        assert!((b.inertia - expect).abs() < 1e-9, "{} vs {}", b.inertia, expect);
    }

    #[test]
    fn circle_inertia() {
        let b = Body::dynamic(
            ObjectId(1),
            BodyKind::Pig,
            Material::None,
            Shape::Circle { r: 0.5 },
            Vec2::ZERO,
            0.0,
            props(),
            1.0,
        );
        assert!((b.inertia - 0.5 * b.mass * 0.25).abs() < 1e-12);
    }

    #[test]
    fn triangle_recentering() {
        let t = Shape::Triangle {
            vertices: [[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]],
        };
        assert_eq!(t.centroid(), Vec2::new(1.0, 1.0));
        let r = t.recentered();
        assert!(r.centroid().length() < 1e-12);
        assert!((r.area() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_shapes() {
        assert!(!Shape::Rect { w: 0.0, h: 1.0 }.is_valid());
        assert!(!Shape::Hollow {
            w: 1.0,
            h: 1.0,
            wall: 0.6
        }
        .is_valid());
        assert!(!Shape::Triangle {
            vertices: [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]
        }
        .is_valid());
    }
}
