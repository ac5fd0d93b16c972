//! Static scene queries used by planners: which object a planned path runs
//! into first, and which objects hold a block up.

use std::collections::BTreeSet;

use super::{Aabb, GeometryError, Polyline, Vec2};
use crate::model::{BodyKind, Material, ObjectId};

/// A convex piece of an object's outline in world coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexShape {
    Circle { center: Vec2, radius: f64 },
    /// Counter-clockwise vertices.
    Polygon { vertices: Vec<Vec2> },
}

impl ConvexShape {
    pub fn aabb(&self) -> Aabb {
        match self {
            ConvexShape::Circle { center, radius } => Aabb {
                min: *center - Vec2::new(*radius, *radius),
                max: *center + Vec2::new(*radius, *radius),
            },
            ConvexShape::Polygon { vertices } => Aabb::from_points(vertices.iter().copied()),
        }
    }

    /// Smallest parameter `t ∈ [0, 1]` at which the segment `a → b` touches
    /// the shape; 0 when `a` starts inside.
    pub fn segment_hit(&self, a: Vec2, b: Vec2) -> Option<f64> {
        match self {
            ConvexShape::Circle { center, radius } => segment_circle(a, b, *center, *radius),
            ConvexShape::Polygon { vertices } => segment_polygon(a, b, vertices),
        }
    }
}

fn segment_circle(a: Vec2, b: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let d = b - a;
    let f = a - center;
    let c = f.length_squared() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let qa = d.length_squared();
    if qa == 0.0 {
        return None;
    }
    let qb = 2.0 * f.dot(d);
    let disc = qb * qb - 4.0 * qa * c;
    if disc < 0.0 {
        return None;
    }
    let t = (-qb - disc.sqrt()) / (2.0 * qa);
    (0.0..=1.0).contains(&t).then_some(t)
}

/// Cyrus–Beck clipping of a segment against a counter-clockwise polygon.
fn segment_polygon(a: Vec2, b: Vec2, vertices: &[Vec2]) -> Option<f64> {
    let d = b - a;
    let (mut t_in, mut t_out) = (0.0f64, 1.0f64);
    let n = vertices.len();
    for i in 0..n {
        let v0 = vertices[i];
        let v1 = vertices[(i + 1) % n];
        let normal = (v1 - v0).perp_cw();
        let denom = normal.dot(d);
        let num = normal.dot(v0 - a);
        if denom == 0.0 {
            if num < 0.0 {
                return None;
            }
            continue;
        }
        let t = num / denom;
        if denom < 0.0 {
            t_in = t_in.max(t);
        } else {
            t_out = t_out.min(t);
        }
        if t_in > t_out {
            return None;
        }
    }
    Some(t_in)
}

/// An object as seen by the planners: identity, kind, material and outline.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneObject {
    pub id: ObjectId,
    pub kind: BodyKind,
    pub material: Material,
    pub parts: Vec<ConvexShape>,
    pub aabb: Aabb,
}

impl SceneObject {
    pub fn new(id: ObjectId, kind: BodyKind, material: Material, parts: Vec<ConvexShape>) -> Self {
        let aabb = parts.iter().fold(Aabb::EMPTY, |acc, p| acc.union(p.aabb()));
        SceneObject {
            id,
            kind,
            material,
            parts,
            aabb,
        }
    }

    pub fn segment_hit(&self, a: Vec2, b: Vec2) -> Option<f64> {
        let seg_box = Aabb::from_points([a, b]);
        if !seg_box.overlaps(&self.aabb) {
            return None;
        }
        self.parts
            .iter()
            .filter_map(|p| p.segment_hit(a, b))
            .min_by(f64::total_cmp)
    }
}

/// An object hit by a path: which object, where, and on which segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathHit {
    pub id: ObjectId,
    pub point: Vec2,
    pub segment: usize,
    pub t: f64,
}

fn check_target(scene: &[SceneObject], target: ObjectId) -> Result<(), GeometryError> {
    if scene.iter().any(|o| o.id == target) {
        Ok(())
    } else {
        Err(GeometryError::UnknownObject(target))
    }
}

/// First object (other than `target`) that the path runs into. Segments are
/// scanned in order; within a segment the smallest hit parameter wins, then
/// the smallest id, so the result does not depend on scene ordering.
pub fn first_obstruction(
    path: &Polyline,
    scene: &[SceneObject],
    target: ObjectId,
) -> Result<Option<(ObjectId, Vec2)>, GeometryError> {
    if path.points.is_empty() {
        return Err(GeometryError::InvalidParameter("path must be nonempty"));
    }
    check_target(scene, target)?;
    Ok(first_hit(path, scene, |o| o.id != target).map(|h| (h.id, h.point)))
}

fn first_hit<F>(path: &Polyline, scene: &[SceneObject], include: F) -> Option<PathHit>
where
    F: Fn(&SceneObject) -> bool,
{
    if path.points.len() == 1 {
        let p = path.points[0];
        return scene
            .iter()
            .filter(|o| include(o))
            .filter(|o| o.segment_hit(p, p).is_some())
            .min_by_key(|o| o.id)
            .map(|o| PathHit {
                id: o.id,
                point: p,
                segment: 0,
                t: 0.0,
            });
    }
    for (segment, (a, b)) in path.segments().enumerate() {
        let best = scene
            .iter()
            .filter(|o| include(o))
            .filter_map(|o| o.segment_hit(a, b).map(|t| (t, o.id)))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        if let Some((t, id)) = best {
            return Some(PathHit {
                id,
                point: a + (b - a) * t,
                segment,
                t,
            });
        }
    }
    None
}

/// Every object the path passes through before it first touches `target`,
/// in path order. Objects are reported once, at their first contact.
pub fn obstructions_before_target(
    path: &Polyline,
    scene: &[SceneObject],
    target: ObjectId,
) -> Result<Vec<PathHit>, GeometryError> {
    check_target(scene, target)?;
    let target_obj = scene.iter().find(|o| o.id == target).expect("checked");
    let mut hits = Vec::new();
    for (segment, (a, b)) in path.segments().enumerate() {
        let target_t = target_obj.segment_hit(a, b);
        let mut seg_hits: Vec<(f64, ObjectId)> = scene
            .iter()
            .filter(|o| o.id != target)
            .filter(|o| !hits.iter().any(|h: &PathHit| h.id == o.id))
            .filter_map(|o| o.segment_hit(a, b).map(|t| (t, o.id)))
            .filter(|(t, _)| target_t.is_none_or(|tt| *t < tt))
            .collect();
        seg_hits.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        hits.extend(seg_hits.into_iter().map(|(t, id)| PathHit {
            id,
            point: a + (b - a) * t,
            segment,
            t,
        }));
        if target_t.is_some() {
            break;
        }
    }
    Ok(hits)
}

/// Fraction of the smaller object's height used as resting-contact tolerance.
pub const SUPPORT_TOLERANCE: f64 = 0.02;

/// Objects whose top lies within tolerance of the block's bottom and which
/// overlap it horizontally. Terrain pieces report [`crate::model::TERRAIN_ID`].
pub fn find_supporters(
    block: ObjectId,
    scene: &[SceneObject],
) -> Result<BTreeSet<ObjectId>, GeometryError> {
    let a = scene
        .iter()
        .find(|o| o.id == block && o.kind != BodyKind::Terrain)
        .ok_or(GeometryError::UnknownObject(block))?;
    let mut out = BTreeSet::new();
    for b in scene.iter().filter(|o| o.id != block || o.kind == BodyKind::Terrain) {
        let tol = SUPPORT_TOLERANCE * a.aabb.height().min(b.aabb.height());
        let gap = a.aabb.min.y - b.aabb.max.y;
        if gap.abs() <= tol && a.aabb.x_overlap(&b.aabb) > tol {
            out.insert(b.id);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_trajectory;
    use crate::model::TERRAIN_ID;

    fn rect(id: u32, kind: BodyKind, min: (f64, f64), max: (f64, f64)) -> SceneObject {
        let (x0, y0, x1, y1) = (min.0, min.1, max.0, max.1);
        SceneObject::new(
            ObjectId(id),
            kind,
            Material::Wood,
            vec![ConvexShape::Polygon {
                vertices: vec![
                    Vec2::new(x0, y0),
                    Vec2::new(x1, y0),
                    Vec2::new(x1, y1),
                    Vec2::new(x0, y1),
                ],
            }],
        )
    }

    fn pig(id: u32, c: (f64, f64)) -> SceneObject {
        SceneObject::new(
            ObjectId(id),
            BodyKind::Pig,
            Material::None,
            vec![ConvexShape::Circle {
                center: Vec2::new(c.0, c.1),
                radius: 0.5,
            }],
        )
    }

    fn flat_path() -> Polyline {
        Polyline {
            points: (0..=20).map(|k| Vec2::new(k as f64, 1.0)).collect(),
            dt_sample: 0.1,
        }
    }

    #[test]
    fn empty_scene_is_clear() {
        let scene = vec![pig(1, (20.0, 1.0))];
        assert_eq!(first_obstruction(&flat_path(), &scene, ObjectId(1)).unwrap(), None);
    }

    #[test]
    fn block_on_path_obstructs() {
        let scene = vec![pig(1, (20.0, 1.0)), rect(2, BodyKind::Block, (9.6, 0.0), (10.4, 3.0))];
        let (id, p) = first_obstruction(&flat_path(), &scene, ObjectId(1)).unwrap().unwrap();
        assert_eq!(id, ObjectId(2));
        assert!((p.x - 9.6).abs() < 1e-12);
    }

    #[test]
    fn unknown_target_is_error() {
        let scene = vec![pig(1, (20.0, 1.0))];
        assert!(matches!(
            first_obstruction(&flat_path(), &scene, ObjectId(9)),
            Err(GeometryError::UnknownObject(_))
        ));
    }

    /// Oracle: test every (object, segment) pair and take the lexicographic
    /// minimum of (segment, t, id).
    fn brute_force(path: &Polyline, scene: &[SceneObject], target: ObjectId) -> Option<ObjectId> {
        let mut best: Option<(usize, f64, ObjectId)> = None;
        for o in scene.iter().filter(|o| o.id != target) {
            for (k, (a, b)) in path.segments().enumerate() {
                for part in &o.parts {
                    if let Some(t) = part.segment_hit(a, b) {
                        let cand = (k, t, o.id);
                        let better = match best {
                            None => true,
                            Some(bst) => (cand.0, cand.1, cand.2) < (bst.0, bst.1, bst.2),
                        };
                        if better {
                            best = Some(cand);
                        }
                    }
                }
            }
        }
        best.map(|b| b.2)
    }

    #[test]
    fn two_blocks_first_segment_wins() {
        let path = sample_trajectory(0.6, 15.0, 9.8, 1.0 / 120.0, 3.0, -5.0).unwrap();
        let scene = vec![
            pig(1, (19.0, 0.0)),
            rect(5, BodyKind::Block, (14.0, 0.0), (15.0, 6.0)),
            rect(3, BodyKind::Block, (6.0, 2.0), (6.5, 8.0)),
        ];
        let got = first_obstruction(&path, &scene, ObjectId(1)).unwrap().map(|h| h.0);
        assert_eq!(got, brute_force(&path, &scene, ObjectId(1)));
        assert_eq!(got, Some(ObjectId(3)));
    }

    #[test]
    fn tie_within_segment_broken_by_parameter() {
        // Both blocks lie on the same single segment; the nearer one wins even
        // though it has the larger id.
        let path = Polyline {
            points: vec![Vec2::new(0.0, 1.0), Vec2::new(30.0, 1.0)],
            dt_sample: 1.0,
        };
        let scene = vec![
            pig(1, (29.0, 1.0)),
            rect(7, BodyKind::Block, (5.0, 0.0), (6.0, 2.0)),
            rect(4, BodyKind::Block, (12.0, 0.0), (13.0, 2.0)),
        ];
        let got = first_obstruction(&path, &scene, ObjectId(1)).unwrap().map(|h| h.0);
        assert_eq!(got, Some(ObjectId(7)));
        assert_eq!(got, brute_force(&path, &scene, ObjectId(1)));
    }

    #[test]
    fn obstruction_list_stops_at_target() {
        let scene = vec![
            pig(1, (10.0, 1.0)),
            rect(2, BodyKind::Block, (4.0, 0.0), (5.0, 2.0)),
            rect(3, BodyKind::Block, (7.0, 0.0), (8.0, 2.0)),
            rect(4, BodyKind::Block, (14.0, 0.0), (15.0, 2.0)),
        ];
        let hits = obstructions_before_target(&flat_path(), &scene, ObjectId(1)).unwrap();
        let ids: Vec<_> = hits.iter().map(|h| h.id).collect();
        assert_eq!(ids, vec![ObjectId(2), ObjectId(3)]);
    }

    #[test]
    fn supporters() {
        let terrain = rect(0, BodyKind::Terrain, (0.0, -5.0), (80.0, 2.0));
        let left = rect(1, BodyKind::Block, (10.0, 2.0), (10.5, 4.0));
        let right = rect(2, BodyKind::Block, (12.0, 2.0), (12.5, 4.0));
        let beam = rect(3, BodyKind::Block, (9.8, 4.0), (12.8, 4.5));
        let floating = rect(4, BodyKind::Block, (20.0, 6.0), (21.0, 7.0));
        let scene = vec![terrain, left, right, beam, floating];
        let s = find_supporters(ObjectId(1), &scene).unwrap();
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec![TERRAIN_ID]);
        let s = find_supporters(ObjectId(3), &scene).unwrap();
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec![ObjectId(1), ObjectId(2)]);
        assert!(find_supporters(ObjectId(4), &scene).unwrap().is_empty());
        assert!(find_supporters(ObjectId(99), &scene).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_block() -> impl Strategy<Value = (f64, f64, f64, f64)> {
            (2.0f64..30.0, -2.0f64..10.0, 0.3f64..3.0, 0.3f64..3.0)
        }

        proptest! {
            #[test]
            fn permutation_invariant(
                blocks in proptest::collection::vec(arb_block(), 1..8),
                angle in 0.05f64..1.4,
                rot in 0usize..8,
            ) {
                let path = sample_trajectory(angle, 18.0, 9.8, 1.0 / 120.0, 4.0, -5.0).unwrap();
                let mut scene = vec![pig(1, (40.0, 0.0))];
                for (i, (x, y, w, h)) in blocks.iter().enumerate() {
                    scene.push(rect(i as u32 + 2, BodyKind::Block, (*x, *y), (x + w, y + h)));
                }
                let a = first_obstruction(&path, &scene, ObjectId(1)).unwrap();
                let mut shuffled = scene.clone();
                shuffled.rotate_left(rot % scene.len());
                shuffled.reverse();
                let b = first_obstruction(&path, &shuffled, ObjectId(1)).unwrap();
                prop_assert_eq!(a, b);
                prop_assert_eq!(a.map(|h| h.0), brute_force(&path, &scene, ObjectId(1)));
            }

            #[test]
            fn supporters_sit_below(
                blocks in proptest::collection::vec(arb_block(), 2..8),
            ) {
                let scene: Vec<_> = blocks
                    .iter()
                    .enumerate()
                    .map(|(i, (x, y, w, h))| rect(i as u32 + 1, BodyKind::Block, (*x, *y), (x + w, y + h)))
                    .collect();
                for a in &scene {
                    for b in find_supporters(a.id, &scene).unwrap() {
                        let b = scene.iter().find(|o| o.id == b).unwrap();
                        let tol = SUPPORT_TOLERANCE * a.aabb.height().min(b.aabb.height());
                        prop_assert!(b.aabb.max.y <= a.aabb.min.y + tol);
                    }
                }
            }
        }
    }
}
