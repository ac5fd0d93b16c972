//! The agent's view of a game: typed objects in 840×480 screen pixels.

use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexShape, SceneObject, Vec2};
use crate::level::{TERRAIN_DEPTH, WORLD_HEIGHT, WORLD_WIDTH};
use crate::model::{BirdType, BodyKind, Material, ObjectId, TERRAIN_ID};
use crate::physics::{Shape, World};

pub const SCREEN_WIDTH: u32 = 840;
pub const SCREEN_HEIGHT: u32 = 480;

/// Fixed affine map between world units (y up) and screen pixels (y down).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenMap {
    pub scale: f64,
    pub width_px: u32,
    pub height_px: u32,
    pub world_height: f64,
}

impl Default for ScreenMap {
    fn default() -> Self {
        ScreenMap {
            scale: SCREEN_WIDTH as f64 / WORLD_WIDTH,
            width_px: SCREEN_WIDTH,
            height_px: SCREEN_HEIGHT,
            world_height: WORLD_HEIGHT,
        }
    }
}

impl ScreenMap {
    pub fn to_screen(&self, p: Vec2) -> [f64; 2] {
        [p.x * self.scale, (self.world_height - p.y) * self.scale]
    }

    pub fn to_world(&self, px: [f64; 2]) -> Vec2 {
        Vec2::new(px[0] / self.scale, self.world_height - px[1] / self.scale)
    }
}

/// Integer pixel rectangle, inclusive of `x0, y0` and exclusive of `x1, y1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenRect {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelState {
    Playing,
    Solved,
    Lost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerceptObject {
    pub id: ObjectId,
    pub kind: BodyKind,
    pub material: Material,
    /// Outline in pixels, centred on `center`.
    pub shape: Shape,
    pub center: [f64; 2],
    /// Counter-clockwise rotation in world radians.
    pub angle: f64,
    pub bounds: ScreenRect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Percept {
    pub level_id: String,
    pub objects: Vec<PerceptObject>,
    pub current_bird: Option<BirdType>,
    pub birds_remaining: Vec<BirdType>,
    pub level_state: LevelState,
    pub current_score: i64,
    pub time_left: f64,
    pub slingshot: [f64; 2],
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn bounds_of(parts: &[ConvexShape], map: &ScreenMap) -> ScreenRect {
    let aabb = parts
        .iter()
        .fold(crate::geometry::Aabb::EMPTY, |acc, p| acc.union(p.aabb()));
    let [x0, y1] = map.to_screen(aabb.min);
    let [x1, y0] = map.to_screen(aabb.max);
    let cx = |v: f64| (v as i32).clamp(0, map.width_px as i32);
    let cy = |v: f64| (v as i32).clamp(0, map.height_px as i32);
    ScreenRect {
        x0: cx(x0.floor()),
        y0: cy(y0.floor()),
        x1: cx(x1.ceil()),
        y1: cy(y1.ceil()),
    }
}

/// Snapshot of every living body except birds, plus one terrain entry per
/// ground segment.
pub fn snapshot(
    world: &World,
    level_id: &str,
    terrain: &[(f64, f64, f64)],
    level_state: LevelState,
    current_score: i64,
    time_left: f64,
    map: &ScreenMap,
) -> Percept {
    let mut objects = Vec::new();
    for &(x0, x1, h) in terrain {
        let shape = Shape::Rect { w: x1 - x0, h };
        let center = Vec2::new(0.5 * (x0 + x1), 0.5 * h);
        let parts = shape.world_outline(center, 0.0);
        objects.push(PerceptObject {
            id: TERRAIN_ID,
            kind: BodyKind::Terrain,
            material: Material::None,
            shape: shape.scaled(map.scale),
            center: map.to_screen(center).map(round2),
            angle: 0.0,
            bounds: bounds_of(&parts, map),
        });
    }
    for b in world.bodies() {
        if b.is_static() || b.kind == BodyKind::Bird {
            continue;
        }
        objects.push(PerceptObject {
            id: b.id,
            kind: b.kind,
            material: b.material,
            shape: b.shape.scaled(map.scale),
            center: map.to_screen(b.pos).map(round2),
            angle: (b.angle * 1e4).round() / 1e4,
            bounds: bounds_of(&b.world_parts(), map),
        });
    }
    let birds_remaining: Vec<BirdType> = world.birds_queue().iter().copied().collect();
    Percept {
        level_id: level_id.to_string(),
        objects,
        current_bird: birds_remaining.first().copied(),
        birds_remaining,
        level_state,
        current_score,
        time_left,
        slingshot: map.to_screen(world.launch_point()).map(round2),
    }
}

impl Percept {
    pub fn pigs(&self) -> impl Iterator<Item = &PerceptObject> {
        self.objects.iter().filter(|o| o.kind == BodyKind::Pig)
    }

    pub fn object(&self, id: ObjectId) -> Option<&PerceptObject> {
        self.objects.iter().find(|o| o.id == id && o.kind != BodyKind::Terrain)
    }

    /// Launch point in world coordinates.
    pub fn launch_point(&self, map: &ScreenMap) -> Vec2 {
        map.to_world(self.slingshot)
    }

    /// Objects back in world units, for trajectory and support queries.
    /// Ground segments are merged into one terrain object reaching below
    /// the floor.
    pub fn scene(&self, map: &ScreenMap) -> Vec<SceneObject> {
        let mut terrain_parts = Vec::new();
        let mut scene = Vec::new();
        for o in &self.objects {
            if o.kind == BodyKind::Terrain {
                let s = o.world_shape(map);
                if let Shape::Rect { w, h } = s {
                    let c = o.world_center(map);
                    let (top, bottom) = (c.y + h / 2.0, -TERRAIN_DEPTH);
                    let full = Shape::Rect { w, h: top - bottom };
                    let center = Vec2::new(c.x, 0.5 * (top + bottom));
                    terrain_parts.extend(full.world_outline(center, 0.0));
                }
            } else {
                scene.push(SceneObject::new(o.id, o.kind, o.material, o.world_outline(map)));
            }
        }
        if !terrain_parts.is_empty() {
            scene.insert(
                0,
                SceneObject::new(TERRAIN_ID, BodyKind::Terrain, Material::None, terrain_parts),
            );
        }
        scene
    }
}

impl PerceptObject {
    pub fn world_center(&self, map: &ScreenMap) -> Vec2 {
        map.to_world(self.center)
    }

    pub fn world_shape(&self, map: &ScreenMap) -> Shape {
        self.shape.scaled(1.0 / map.scale)
    }

    pub fn world_outline(&self, map: &ScreenMap) -> Vec<ConvexShape> {
        self.world_shape(map).world_outline(self.world_center(map), self.angle)
    }

    pub fn is_terrain(&self) -> bool {
        self.kind == BodyKind::Terrain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_map() {
        let m = ScreenMap::default();
        assert_eq!(m.scale, 10.0);
        let [x, y] = m.to_screen(Vec2::new(42.0, 1.0));
        assert_eq!((x, y), (420.0, 470.0));
        assert_eq!(m.to_world([x, y]), Vec2::new(42.0, 1.0));
    }

    #[test]
    fn bounds_round_outward_and_clamp() {
        let m = ScreenMap::default();
        let parts = vec![ConvexShape::Circle {
            center: Vec2::new(10.01, 10.01),
            radius: 0.5,
        }];
        let r = bounds_of(&parts, &m);
        assert_eq!(r, ScreenRect { x0: 95, y0: 374, x1: 106, y1: 385 });
        let parts = vec![ConvexShape::Circle {
            center: Vec2::new(-1.0, -1.0),
            radius: 0.5,
        }];
        let r = bounds_of(&parts, &m);
        assert_eq!((r.x0, r.x1, r.y0, r.y1), (0, 0, 480, 480));
    }
}
