//! Level documents: schema, loading, world construction, scoring and the
//! stability/solvability validators.

mod score;
mod validate;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geometry::{Rot, Vec2};
use crate::model::{BirdType, BodyKind, Material, ObjectId};
use crate::physics::{Body, BodyMaterial, PhysicsConfig, Shape, World};

pub use score::{score_attempt, AttemptScore, ScoreTable};
pub use validate::{validate_solvability, validate_stability, ValidationReport};

pub const WORLD_WIDTH: f64 = 84.0;
pub const WORLD_HEIGHT: f64 = 48.0;
/// Terrain slabs extend this far below y = 0.
pub const TERRAIN_DEPTH: f64 = 5.0;

#[derive(Debug, Error)]
pub enum LevelError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("disallowed object: {0}")]
    Disallowed(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> LevelError {
    LevelError::Schema {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Block,
    Pig,
    Tnt,
}

impl ObjectKind {
    pub fn body_kind(self) -> BodyKind {
        match self {
            ObjectKind::Block => BodyKind::Block,
            ObjectKind::Pig => BodyKind::Pig,
            ObjectKind::Tnt => BodyKind::Tnt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrainSegment {
    pub x0: f64,
    pub x1: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelObject {
    pub kind: ObjectKind,
    pub material: Material,
    pub shape: Shape,
    pub x: f64,
    pub y: f64,
    pub rot: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub id: String,
    pub slingshot: Vec2,
    pub birds: Vec<BirdType>,
    pub terrain: Vec<TerrainSegment>,
    pub objects: Vec<LevelObject>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

const OBJECT_KINDS: [&str; 3] = ["block", "pig", "tnt"];
const SHAPE_TYPES: [&str; 4] = ["circle", "rect", "triangle", "hollow"];

/// Parses and validates a level document.
pub fn load_level(document: &[u8]) -> Result<Level, LevelError> {
    let value: Value = serde_json::from_slice(document).map_err(|e| LevelError::Parse(e.to_string()))?;
    check_vocabulary(&value)?;
    let level: Level = serde_json::from_value(value).map_err(|e| schema_from_serde(&e))?;
    check_level(&level)?;
    Ok(level)
}

pub fn load_level_file(path: &Path) -> Result<Level, LevelError> {
    let bytes = std::fs::read(path).map_err(|source| LevelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_level(&bytes)
}

/// Loads every `*.json` directly inside `dir`, ordered by file name.
/// Subdirectories (fixtures) are not descended into.
pub fn load_pack(dir: &Path) -> Result<Vec<Level>, LevelError> {
    let io = |source| LevelError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_level_file(p)).collect()
}

pub fn to_json(level: &Level) -> String {
    serde_json::to_string_pretty(level).expect("level serializes")
}

fn schema_from_serde(e: &serde_json::Error) -> LevelError {
    // serde_json reports the offending key in the message; keep it verbatim.
    let msg = e.to_string();
    let field = msg
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "document".to_string());
    schema(field, msg)
}

fn check_vocabulary(value: &Value) -> Result<(), LevelError> {
    let root = value.as_object().ok_or_else(|| schema("document", "expected an object"))?;
    for key in ["id", "slingshot", "birds", "terrain", "objects"] {
        if !root.contains_key(key) {
            return Err(schema(key, "missing"));
        }
    }
    let objects = root["objects"]
        .as_array()
        .ok_or_else(|| schema("objects", "expected an array"))?;
    for (i, o) in objects.iter().enumerate() {
        let kind = o
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| schema(format!("objects[{i}].kind"), "missing or not a string"))?;
        if !OBJECT_KINDS.contains(&kind) {
            return Err(LevelError::Disallowed(format!("objects[{i}] has kind `{kind}`")));
        }
        let ty = o
            .get("shape")
            .and_then(|s| s.get("type"))
            .and_then(Value::as_str)
            .ok_or_else(|| schema(format!("objects[{i}].shape.type"), "missing or not a string"))?;
        if !SHAPE_TYPES.contains(&ty) {
            return Err(LevelError::Disallowed(format!("objects[{i}] has shape `{ty}`")));
        }
        for key in ["material", "x", "y", "rot"] {
            if o.get(key).is_none() {
                return Err(schema(format!("objects[{i}].{key}"), "missing"));
            }
        }
    }
    if let Some(birds) = root["birds"].as_array() {
        for (i, b) in birds.iter().enumerate() {
            let name = b.as_str().unwrap_or_default();
            if !BirdType::ALL.iter().any(|t| t.to_string() == name) {
                return Err(LevelError::Disallowed(format!("birds[{i}] is `{b}`")));
            }
        }
    }
    Ok(())
}

fn check_level(level: &Level) -> Result<(), LevelError> {
    if level.id.trim().is_empty() {
        return Err(schema("id", "must be nonempty"));
    }
    if level.birds.is_empty() {
        return Err(schema("birds", "at least one bird required"));
    }
    if !level.objects.iter().any(|o| o.kind == ObjectKind::Pig) {
        return Err(schema("objects", "at least one pig required"));
    }
    let inside = |x: f64, y: f64| (0.0..=WORLD_WIDTH).contains(&x) && (0.0..=WORLD_HEIGHT).contains(&y);
    if !inside(level.slingshot.x, level.slingshot.y) {
        return Err(schema("slingshot", "outside the world"));
    }

    if level.terrain.is_empty() {
        return Err(schema("terrain", "at least one segment required"));
    }
    let mut x = 0.0;
    for (i, s) in level.terrain.iter().enumerate() {
        if (s.x0 - x).abs() > 1e-9 || !(s.x1 > s.x0) {
            return Err(schema(format!("terrain[{i}]"), "segments must tile [0, width] left to right"));
        }
        if !(0.0..WORLD_HEIGHT).contains(&s.h) {
            return Err(schema(format!("terrain[{i}].h"), "height outside the world"));
        }
        x = s.x1;
    }
    if (x - WORLD_WIDTH).abs() > 1e-9 {
        return Err(schema("terrain", "segments must end at the world width"));
    }

    for (i, o) in level.objects.iter().enumerate() {
        let field = |k: &str| format!("objects[{i}].{k}");
        if !o.shape.is_valid() {
            return Err(schema(field("shape"), "invalid dimensions"));
        }
        if !(o.rot.is_finite()) {
            return Err(schema(field("rot"), "not finite"));
        }
        if !inside(o.x, o.y) {
            return Err(schema(field("x"), "object outside the world"));
        }
        match (o.kind, o.material) {
            (ObjectKind::Block, Material::None) => {
                return Err(schema(field("material"), "blocks need wood, ice or stone"));
            }
            (ObjectKind::Pig | ObjectKind::Tnt, m) if m != Material::None => {
                return Err(schema(field("material"), "pigs and TNT have material `none`"));
            }
            _ => {}
        }
    }
    Ok(())
}

impl Level {
    pub fn pig_count(&self) -> usize {
        self.objects.iter().filter(|o| o.kind == ObjectKind::Pig).count()
    }

    /// Body id of the `i`-th object.
    pub fn object_id(i: usize) -> ObjectId {
        ObjectId(i as u32 + 1)
    }

    /// Fresh simulation of this level. Objects are numbered from 1 in file
    /// order and start awake, so unsupported pieces fall.
    pub fn build_world(&self, config: Arc<PhysicsConfig>) -> World {
        let mut world = World::new(
            Arc::clone(&config),
            WORLD_WIDTH,
            WORLD_HEIGHT,
            self.slingshot,
            self.birds.clone(),
        );
        let segments: Vec<(f64, f64, f64)> = self.terrain.iter().map(|s| (s.x0, s.x1, s.h)).collect();
        world.add_body(Body::terrain(
            &segments,
            TERRAIN_DEPTH,
            config.terrain_friction,
            config.terrain_restitution,
        ));
        for (i, o) in self.objects.iter().enumerate() {
            world.add_body(object_body(Level::object_id(i), o, &config));
        }
        world
    }
}

fn object_body(id: ObjectId, o: &LevelObject, config: &PhysicsConfig) -> Body {
    let offset = Rot::new(o.rot).apply(o.shape.centroid());
    let shape = o.shape.recentered();
    let pos = Vec2::new(o.x, o.y) + offset;
    let (props, hp) = match o.kind {
        ObjectKind::Block => {
            let m = config.material(o.material).expect("blocks have a material");
            (
                BodyMaterial {
                    density: m.density,
                    friction: m.friction,
                    restitution: m.restitution,
                },
                m.hp_per_area * shape.area(),
            )
        }
        ObjectKind::Pig | ObjectKind::Tnt => {
            let p = if o.kind == ObjectKind::Pig { config.pig } else { config.tnt };
            (
                BodyMaterial {
                    density: p.density,
                    friction: p.friction,
                    restitution: p.restitution,
                },
                p.hp,
            )
        }
    };
    Body::dynamic(id, o.kind.body_kind(), o.material, shape, pos, o.rot, props, hp)
}
