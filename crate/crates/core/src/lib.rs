//! Game core: geometry, rigid body physics, levels, scoring and the agent
//! percept.

pub mod game;
pub mod geometry;
pub mod level;
pub mod model;
pub mod percept;
pub mod physics;
