//! Narrowphase: contact manifolds between convex parts.
//!
//! Manifolds are stored in body-local coordinates (reference face on one
//! body, clip points on the other) so that the position solver can re-evaluate
//! separation after bodies move, and carry feature ids for warm starting.

use super::body::{Part, Polygon};
use crate::geometry::{Transform, Vec2};

const MAX_VERTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ManifoldKind {
    Circles,
    FaceA,
    FaceB,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct ManifoldPoint {
    /// Clip point in the frame of the incident body (circle centre for
    /// circles).
    pub local_point: Vec2,
    pub id: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Manifold {
    pub kind: ManifoldKind,
    pub local_normal: Vec2,
    pub local_point: Vec2,
    pub points: [ManifoldPoint; 2],
    pub count: usize,
    pub radius_a: f64,
    pub radius_b: f64,
}

impl Manifold {
    fn empty(kind: ManifoldKind) -> Manifold {
        Manifold {
            kind,
            local_normal: Vec2::ZERO,
            local_point: Vec2::ZERO,
            points: [ManifoldPoint {
                local_point: Vec2::ZERO,
                id: 0,
            }; 2],
            count: 0,
            radius_a: 0.0,
            radius_b: 0.0,
        }
    }
}

/// World-space evaluation of a manifold: normal from A to B, contact points
/// and separations.
#[derive(Clone, Copy, Debug)]
pub(crate) struct WorldManifold {
    pub normal: Vec2,
    pub points: [Vec2; 2],
    pub separations: [f64; 2],
}

impl WorldManifold {
    pub fn new(m: &Manifold, xf_a: &Transform, xf_b: &Transform) -> WorldManifold {
        let mut out = WorldManifold {
            normal: Vec2::ZERO,
            points: [Vec2::ZERO; 2],
            separations: [0.0; 2],
        };
        if m.count == 0 {
            return out;
        }
        match m.kind {
            ManifoldKind::Circles => {
                let pa = xf_a.apply(m.local_point);
                let pb = xf_b.apply(m.points[0].local_point);
                let normal = (pb - pa).normalized().unwrap_or(Vec2::new(1.0, 0.0));
                let ca = pa + normal * m.radius_a;
                let cb = pb - normal * m.radius_b;
                out.normal = normal;
                out.points[0] = (ca + cb) * 0.5;
                out.separations[0] = (cb - ca).dot(normal);
            }
            ManifoldKind::FaceA => {
                let normal = xf_a.rot.apply(m.local_normal);
                let plane = xf_a.apply(m.local_point);
                for i in 0..m.count {
                    let clip = xf_b.apply(m.points[i].local_point);
                    let ca = clip + normal * (m.radius_a - (clip - plane).dot(normal));
                    let cb = clip - normal * m.radius_b;
                    out.points[i] = (ca + cb) * 0.5;
                    out.separations[i] = (cb - ca).dot(normal);
                }
                out.normal = normal;
            }
            ManifoldKind::FaceB => {
                let normal = xf_b.rot.apply(m.local_normal);
                let plane = xf_b.apply(m.local_point);
                for i in 0..m.count {
                    let clip = xf_a.apply(m.points[i].local_point);
                    let cb = clip + normal * (m.radius_b - (clip - plane).dot(normal));
                    let ca = clip - normal * m.radius_a;
                    out.points[i] = (ca + cb) * 0.5;
                    out.separations[i] = (ca - cb).dot(normal);
                }
                out.normal = -normal;
            }
        }
        out
    }
}

/// Separation of one manifold point at the current poses, for the position
/// solver: (normal A→B, point, separation).
pub(crate) fn position_point(
    m: &Manifold,
    index: usize,
    xf_a: &Transform,
    xf_b: &Transform,
) -> (Vec2, Vec2, f64) {
    match m.kind {
        ManifoldKind::Circles => {
            let pa = xf_a.apply(m.local_point);
            let pb = xf_b.apply(m.points[0].local_point);
            let normal = (pb - pa).normalized().unwrap_or(Vec2::new(1.0, 0.0));
            let point = (pa + pb) * 0.5;
            let sep = (pb - pa).dot(normal) - m.radius_a - m.radius_b;
            (normal, point, sep)
        }
        ManifoldKind::FaceA => {
            let normal = xf_a.rot.apply(m.local_normal);
            let plane = xf_a.apply(m.local_point);
            let clip = xf_b.apply(m.points[index].local_point);
            let sep = (clip - plane).dot(normal) - m.radius_a - m.radius_b;
            (normal, clip, sep)
        }
        ManifoldKind::FaceB => {
            let normal = xf_b.rot.apply(m.local_normal);
            let plane = xf_b.apply(m.local_point);
            let clip = xf_a.apply(m.points[index].local_point);
            let sep = (clip - plane).dot(normal) - m.radius_a - m.radius_b;
            (-normal, clip, sep)
        }
    }
}

fn feature_id(index_a: usize, index_b: usize, type_a: u8, type_b: u8) -> u32 {
    (index_a as u32 & 0xff)
        | ((index_b as u32 & 0xff) << 8)
        | ((type_a as u32) << 16)
        | ((type_b as u32) << 24)
}

fn flip_id(id: u32) -> u32 {
    let a = id & 0xff;
    let b = (id >> 8) & 0xff;
    let ta = (id >> 16) & 0xff;
    let tb = (id >> 24) & 0xff;
    b | (a << 8) | (tb << 16) | (ta << 24)
}

const VERTEX: u8 = 0;
const FACE: u8 = 1;

/// Manifold between two parts of bodies A and B.
pub(crate) fn collide_parts(
    part_a: &Part,
    xf_a: &Transform,
    part_b: &Part,
    xf_b: &Transform,
    slop: f64,
) -> Option<Manifold> {
    match (part_a, part_b) {
        (
            Part::Circle {
                center: ca,
                radius: ra,
            },
            Part::Circle {
                center: cb,
                radius: rb,
            },
        ) => collide_circles(*ca, *ra, xf_a, *cb, *rb, xf_b),
        (Part::Poly(pa), Part::Circle { center, radius }) => {
            collide_polygon_circle(pa, xf_a, *center, *radius, xf_b)
        }
        (Part::Circle { center, radius }, Part::Poly(pb)) => {
            let mut m = collide_polygon_circle(pb, xf_b, *center, *radius, xf_a)?;
            m.kind = ManifoldKind::FaceB;
            std::mem::swap(&mut m.radius_a, &mut m.radius_b);
            Some(m)
        }
        (Part::Poly(pa), Part::Poly(pb)) => collide_polygons(pa, xf_a, pb, xf_b, slop),
    }
}

fn collide_circles(
    ca: Vec2,
    ra: f64,
    xf_a: &Transform,
    cb: Vec2,
    rb: f64,
    xf_b: &Transform,
) -> Option<Manifold> {
    let pa = xf_a.apply(ca);
    let pb = xf_b.apply(cb);
    let r = ra + rb;
    if (pb - pa).length_squared() > r * r {
        return None;
    }
    let mut m = Manifold::empty(ManifoldKind::Circles);
    m.local_point = ca;
    m.points[0] = ManifoldPoint {
        local_point: cb,
        id: 0,
    };
    m.count = 1;
    m.radius_a = ra;
    m.radius_b = rb;
    Some(m)
}

fn collide_polygon_circle(
    poly: &Polygon,
    xf_p: &Transform,
    center: Vec2,
    radius: f64,
    xf_c: &Transform,
) -> Option<Manifold> {
    let c = xf_p.apply_inv(xf_c.apply(center));
    let n = poly.vertices.len();
    let mut separation = f64::NEG_INFINITY;
    let mut normal_index = 0;
    for i in 0..n {
        let s = poly.normals[i].dot(c - poly.vertices[i]);
        if s > radius {
            return None;
        }
        if s > separation {
            separation = s;
            normal_index = i;
        }
    }
    let v1 = poly.vertices[normal_index];
    let v2 = poly.vertices[(normal_index + 1) % n];
    let mut m = Manifold::empty(ManifoldKind::FaceA);
    m.points[0] = ManifoldPoint {
        local_point: center,
        id: 0,
    };
    m.count = 1;
    m.radius_a = 0.0;
    m.radius_b = radius;

    if separation < f64::EPSILON {
        m.local_normal = poly.normals[normal_index];
        m.local_point = (v1 + v2) * 0.5;
        return Some(m);
    }
    let u1 = (c - v1).dot(v2 - v1);
    let u2 = (c - v2).dot(v1 - v2);
    if u1 <= 0.0 {
        if (c - v1).length_squared() > radius * radius {
            return None;
        }
        m.local_normal = (c - v1).normalized().unwrap_or(poly.normals[normal_index]);
        m.local_point = v1;
    } else if u2 <= 0.0 {
        if (c - v2).length_squared() > radius * radius {
            return None;
        }
        m.local_normal = (c - v2).normalized().unwrap_or(poly.normals[normal_index]);
        m.local_point = v2;
    } else {
        let face_center = (v1 + v2) * 0.5;
        let s = (c - face_center).dot(poly.normals[normal_index]);
        if s > radius {
            return None;
        }
        m.local_normal = poly.normals[normal_index];
        m.local_point = face_center;
    }
    Some(m)
}

#[derive(Clone, Copy)]
struct WorldPoly {
    v: [Vec2; MAX_VERTS],
    n: [Vec2; MAX_VERTS],
    count: usize,
}

impl WorldPoly {
    fn new(p: &Polygon, xf: &Transform) -> WorldPoly {
        let mut w = WorldPoly {
            v: [Vec2::ZERO; MAX_VERTS],
            n: [Vec2::ZERO; MAX_VERTS],
            count: p.vertices.len().min(MAX_VERTS),
        };
        for i in 0..w.count {
            w.v[i] = xf.apply(p.vertices[i]);
            w.n[i] = xf.rot.apply(p.normals[i]);
        }
        w
    }
}

/// Edge of `p1` with the largest separation from `p2`.
fn max_separation(p1: &WorldPoly, p2: &WorldPoly) -> (usize, f64) {
    let mut best_index = 0;
    let mut max_sep = f64::NEG_INFINITY;
    for i in 0..p1.count {
        let n = p1.n[i];
        let v1 = p1.v[i];
        let mut si = f64::INFINITY;
        for j in 0..p2.count {
            let sij = n.dot(p2.v[j] - v1);
            if sij < si {
                si = sij;
            }
        }
        if si > max_sep {
            max_sep = si;
            best_index = i;
        }
    }
    (best_index, max_sep)
}

#[derive(Clone, Copy)]
struct ClipVertex {
    v: Vec2,
    id: u32,
}

fn clip_segment(input: [ClipVertex; 2], normal: Vec2, offset: f64, vertex_index_a: usize) -> ([ClipVertex; 2], usize) {
    let mut out = [input[0]; 2];
    let mut count = 0;
    let d0 = normal.dot(input[0].v) - offset;
    let d1 = normal.dot(input[1].v) - offset;
    if d0 <= 0.0 {
        out[count] = input[0];
        count += 1;
    }
    if d1 <= 0.0 {
        out[count] = input[1];
        count += 1;
    }
    if d0 * d1 < 0.0 && count < 2 {
        let interp = d0 / (d0 - d1);
        let v = input[0].v + (input[1].v - input[0].v) * interp;
        let index_b = ((input[0].id >> 8) & 0xff) as usize;
        out[count] = ClipVertex {
            v,
            id: feature_id(vertex_index_a, index_b, VERTEX, FACE),
        };
        count += 1;
    }
    (out, count)
}

fn collide_polygons(
    pa: &Polygon,
    xf_a: &Transform,
    pb: &Polygon,
    xf_b: &Transform,
    slop: f64,
) -> Option<Manifold> {
    let wa = WorldPoly::new(pa, xf_a);
    let wb = WorldPoly::new(pb, xf_b);
    let (edge_a, sep_a) = max_separation(&wa, &wb);
    if sep_a > 0.0 {
        return None;
    }
    let (edge_b, sep_b) = max_separation(&wb, &wa);
    if sep_b > 0.0 {
        return None;
    }

    let tol = 0.1 * slop;
    let (ref_w, inc_w, ref_local, edge1, flip, inc_xf) = if sep_b > sep_a + tol {
        (&wb, &wa, pb, edge_b, true, xf_a)
    } else {
        (&wa, &wb, pa, edge_a, false, xf_b)
    };

    // Incident edge: the one on the other polygon most anti-parallel to the
    // reference normal.
    let normal1 = ref_w.n[edge1];
    let mut inc_index = 0;
    let mut min_dot = f64::INFINITY;
    for i in 0..inc_w.count {
        let d = normal1.dot(inc_w.n[i]);
        if d < min_dot {
            min_dot = d;
            inc_index = i;
        }
    }
    let i1 = inc_index;
    let i2 = (inc_index + 1) % inc_w.count;
    let incident = [
        ClipVertex {
            v: inc_w.v[i1],
            id: feature_id(edge1, i1, FACE, VERTEX),
        },
        ClipVertex {
            v: inc_w.v[i2],
            id: feature_id(edge1, i2, FACE, VERTEX),
        },
    ];

    let iv1 = edge1;
    let iv2 = (edge1 + 1) % ref_w.count;
    let v11 = ref_w.v[iv1];
    let v12 = ref_w.v[iv2];
    let tangent = (v12 - v11).normalized()?;
    let normal = tangent.perp_cw();
    let front_offset = normal.dot(v11);
    let side_offset1 = -tangent.dot(v11);
    let side_offset2 = tangent.dot(v12);

    let (clip1, n1) = clip_segment(incident, -tangent, side_offset1, iv1);
    if n1 < 2 {
        return None;
    }
    let (clip2, n2) = clip_segment(clip1, tangent, side_offset2, iv2);
    if n2 < 2 {
        return None;
    }

    let mut m = Manifold::empty(if flip {
        ManifoldKind::FaceB
    } else {
        ManifoldKind::FaceA
    });
    m.local_normal = ref_local.normals[edge1];
    m.local_point = (ref_local.vertices[iv1] + ref_local.vertices[iv2]) * 0.5;
    for cv in clip2.iter().take(n2) {
        let separation = normal.dot(cv.v) - front_offset;
        if separation <= 0.0 {
            m.points[m.count] = ManifoldPoint {
                local_point: inc_xf.apply_inv(cv.v),
                id: if flip { flip_id(cv.id) } else { cv.id },
            };
            m.count += 1;
        }
    }
    (m.count > 0).then_some(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxp(w: f64, h: f64) -> Part {
        Part::rect(Vec2::ZERO, w, h)
    }

    #[test]
    fn resting_boxes_make_two_points() {
        let a = boxp(4.0, 1.0);
        let b = boxp(1.0, 1.0);
        let xa = Transform::new(Vec2::new(0.0, 0.0), 0.0);
        let xb = Transform::new(Vec2::new(0.2, 0.99), 0.0);
        let m = collide_parts(&a, &xa, &b, &xb, 0.003).unwrap();
        assert_eq!(m.count, 2);
        let wm = WorldManifold::new(&m, &xa, &xb);
        assert!((wm.normal - Vec2::new(0.0, 1.0)).length() < 1e-12);
        for i in 0..2 {
            assert!((wm.separations[i] + 0.01).abs() < 1e-9);
        }
    }

    #[test]
    fn separated_boxes_do_not_collide() {
        let a = boxp(1.0, 1.0);
        let xa = Transform::new(Vec2::ZERO, 0.0);
        let xb = Transform::new(Vec2::new(1.2, 0.0), 0.3);
        assert!(collide_parts(&a, &xa, &a, &xb, 0.003).is_none());
    }

    #[test]
    fn flipped_reference_keeps_normal_from_a_to_b() {
        // Small box A under big box B: the reference face is B's.
        let a = boxp(1.0, 1.0);
        let b = boxp(4.0, 1.0);
        let xa = Transform::new(Vec2::ZERO, 0.0);
        let xb = Transform::new(Vec2::new(0.0, 0.98), 0.0);
        let m = collide_parts(&a, &xa, &b, &xb, 0.003).unwrap();
        let wm = WorldManifold::new(&m, &xa, &xb);
        assert!(wm.normal.y > 0.99);
        assert!((wm.separations[0] + 0.02).abs() < 1e-9);
    }

    #[test]
    fn circle_on_box() {
        let ground = boxp(10.0, 2.0);
        let ball = Part::Circle {
            center: Vec2::ZERO,
            radius: 0.5,
        };
        let xa = Transform::new(Vec2::ZERO, 0.0);
        let xb = Transform::new(Vec2::new(1.0, 1.49), 0.0);
        let m = collide_parts(&ground, &xa, &ball, &xb, 0.003).unwrap();
        let wm = WorldManifold::new(&m, &xa, &xb);
        assert!((wm.normal.y - 1.0).abs() < 1e-12);
        assert!((wm.separations[0] + 0.01).abs() < 1e-9);
        // Swapped roles keep the A→B convention.
        let m = collide_parts(&ball, &xb, &ground, &xa, 0.003).unwrap();
        let wm = WorldManifold::new(&m, &xb, &xa);
        assert!((wm.normal.y + 1.0).abs() < 1e-12);
        assert!((wm.separations[0] + 0.01).abs() < 1e-9);
        let (n, _, s) = position_point(&m, 0, &xb, &xa);
        assert!((n.y + 1.0).abs() < 1e-12 && (s + 0.01).abs() < 1e-9);
    }

    #[test]
    fn circles() {
        let c = Part::Circle {
            center: Vec2::ZERO,
            radius: 0.5,
        };
        let xa = Transform::new(Vec2::ZERO, 0.0);
        let xb = Transform::new(Vec2::new(0.9, 0.0), 0.0);
        let m = collide_parts(&c, &xa, &c, &xb, 0.003).unwrap();
        let wm = WorldManifold::new(&m, &xa, &xb);
        assert!((wm.normal.x - 1.0).abs() < 1e-12);
        assert!((wm.separations[0] + 0.1).abs() < 1e-12);
        let xb = Transform::new(Vec2::new(1.1, 0.0), 0.0);
        assert!(collide_parts(&c, &xa, &c, &xb, 0.003).is_none());
    }

    #[test]
    fn feature_id_flip_roundtrip() {
        let id = feature_id(3, 1, FACE, VERTEX);
        assert_eq!(flip_id(flip_id(id)), id);
        assert_ne!(flip_id(id), id);
    }
}
