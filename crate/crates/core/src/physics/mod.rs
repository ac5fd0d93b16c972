//! Deterministic fixed-step rigid body simulation with impact damage, bird
//! abilities and explosives.

mod body;
mod collide;
mod config;
mod damage;
mod solver;
mod world;

pub use body::{Body, BodyMaterial, Shape};
pub use config::{
    BirdProps, BirdTable, Blast, BodyProps, DamageModel, MaterialProps, PhysicsConfig,
    SettleParams,
};
pub use damage::{compute_damage, DamageEvent, DamageKind};
pub use world::{ActiveBird, PhysicsError, World};
