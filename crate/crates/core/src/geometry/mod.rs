//! Vector primitives, the projectile trajectory solver and scene queries.

mod scene;
mod trajectory;
mod vec2;

use thiserror::Error;

use crate::model::ObjectId;

pub use scene::{
    find_supporters, first_obstruction, obstructions_before_target, ConvexShape, PathHit,
    SceneObject, SUPPORT_TOLERANCE,
};
pub use trajectory::{
    height_at, position_at, sample_trajectory, solve_launch_angles, time_to_x, Polyline,
    TrajectorySolution, DEFAULT_SAMPLE_DT,
};
pub use vec2::{Aabb, Rot, Transform, Vec2};

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("target must lie ahead of the launch point (x = {x})")]
    TargetNotAhead { x: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
}
