use std::collections::BTreeMap;
use std::sync::Arc;

use birdbench_core::game::{Agent, Game, GameInfo, Shot};
use birdbench_core::level::{Level, LevelObject, ObjectKind, TerrainSegment};
use birdbench_core::model::{BirdType, BodyKind};
use birdbench_core::percept::{Percept, ScreenMap};
use birdbench_core::physics::{DamageKind, PhysicsConfig, Shape};
use rayon::prelude::*;

use crate::planning::{Branch, Planner, MAX_LAUNCH_ANGLE};

/// Rebuilds a level from a percept by inverting the screen map. Poses are
/// taken as reported (positions to 0.001 world units, angles to 1e-4 rad)
/// and every object starts at full health.
pub fn reconstruct_level(percept: &Percept, map: &ScreenMap) -> Level {
    let mut terrain = Vec::new();
    let mut objects = Vec::new();
    for o in &percept.objects {
        let c = o.world_center(map);
        let shape = o.world_shape(map);
        if o.is_terrain() {
            if let Shape::Rect { w, h } = shape {
                terrain.push(TerrainSegment {
                    x0: c.x - w / 2.0,
                    x1: c.x + w / 2.0,
                    h,
                });
            }
            continue;
        }
        let kind = match o.kind {
            BodyKind::Pig => ObjectKind::Pig,
            BodyKind::Tnt => ObjectKind::Tnt,
            _ => ObjectKind::Block,
        };
        objects.push(LevelObject {
            kind,
            material: o.material,
            shape,
            x: c.x,
            y: c.y,
            rot: o.angle,
        });
    }
    Level {
        id: percept.level_id.clone(),
        slingshot: percept.launch_point(map),
        birds: percept.birds_remaining.clone(),
        terrain,
        objects,
        metadata: BTreeMap::new(),
    }
}

/// Result of one simulated candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub index: usize,
    pub shot: Shot,
    pub pigs_killed: u32,
    pub destroyed: u32,
}

impl Rollout {
    /// Ordering key: more pigs, then more destroyed objects, then the
    /// earlier grid index.
    fn key(&self) -> (u32, u32, std::cmp::Reverse<usize>) {
        (self.pigs_killed, self.destroyed, std::cmp::Reverse(self.index))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub angles_per_branch: usize,
    pub tap_fractions: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            angles_per_branch: 20,
            tap_fractions: vec![0.7, 0.85, 0.98],
        }
    }
}

/// Candidate shots in grid order: branch, then angle, then tap fraction.
///
/// Each branch spans the range of launch angles that reach any object in
/// the scene, widened by one degree on each side. Birds without an ability
/// get a single untapped shot per angle.
pub fn candidate_grid(percept: &Percept, info: &GameInfo, spec: &GridSpec) -> Vec<Shot> {
    let planner = Planner::new(percept, info);
    let bird = percept.current_bird.unwrap_or(BirdType::Red);
    let margin = 1f64.to_radians();
    let mut shots = Vec::new();
    for branch in Branch::BOTH {
        let angles: Vec<f64> = planner
            .objects()
            .filter_map(|o| planner.aim_at_object(o, branch))
            .map(|a| a.angle)
            .collect();
        if angles.is_empty() {
            continue;
        }
        let lo = (angles.iter().copied().fold(f64::INFINITY, f64::min) - margin).max(0.0);
        let hi = (angles.iter().copied().fold(f64::NEG_INFINITY, f64::max) + margin).min(MAX_LAUNCH_ANGLE);
        let n = spec.angles_per_branch.max(1);
        for i in 0..n {
            let angle = if n == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            };
            let tag = format!("simulation:{:?}:{i}", branch).to_lowercase();
            if bird == BirdType::Red {
                shots.push(Shot::new(angle, 1.0, 0, tag));
                continue;
            }
            let t_ref = planner.time_to_first_contact(angle);
            for f in &spec.tap_fractions {
                let ms = (f * t_ref * 1000.0).round().max(1.0) as u64;
                shots.push(Shot::new(angle, 1.0, ms, tag.clone()));
            }
        }
    }
    shots
}

/// Plays `shot` on a fresh copy of `level`.
pub fn rollout(level: &Arc<Level>, config: &Arc<PhysicsConfig>, index: usize, shot: &Shot) -> Rollout {
    let mut game = Game::new(Arc::clone(level), Arc::clone(config));
    let pigs_killed = match game.shoot(shot) {
        Ok(o) => o.attempt.pigs_killed,
        Err(_) => 0,
    };
    let destroyed = game
        .world()
        .events()
        .iter()
        .filter(|e| matches!(e.kind, DamageKind::Destroyed | DamageKind::TntDetonated))
        .count() as u32;
    Rollout {
        index,
        shot: shot.clone(),
        pigs_killed,
        destroyed,
    }
}

/// Best rollout over the grid, simulated in parallel. The reduction is a
/// total order on (pigs, destroyed, index), so the answer does not depend
/// on scheduling.
pub fn best_rollout(level: &Arc<Level>, config: &Arc<PhysicsConfig>, grid: &[Shot]) -> Option<Rollout> {
    grid.par_iter()
        .enumerate()
        .map(|(i, s)| rollout(level, config, i, s))
        .max_by_key(|r| r.key())
}

/// Same as [`best_rollout`] on one thread.
pub fn best_rollout_serial(level: &Arc<Level>, config: &Arc<PhysicsConfig>, grid: &[Shot]) -> Option<Rollout> {
    grid.iter()
        .enumerate()
        .map(|(i, s)| rollout(level, config, i, s))
        .max_by_key(|r| r.key())
}

/// Forward-simulates a grid of candidate shots on a reconstructed world and
/// plays the one that kills the most pigs.
#[derive(Default)]
pub struct SimulationAgent {
    spec: GridSpec,
}

impl SimulationAgent {
    pub fn new(spec: GridSpec) -> SimulationAgent {
        SimulationAgent { spec }
    }
}

impl Agent for SimulationAgent {
    fn name(&self) -> &str {
        "simulation"
    }

    fn select_shot(&mut self, percept: &Percept, info: &GameInfo) -> Shot {
        let level = Arc::new(reconstruct_level(percept, &info.screen));
        let config = Arc::new(info.physics.clone());
        let grid = candidate_grid(percept, info, &self.spec);
        match best_rollout(&level, &config, &grid) {
            Some(r) => r.shot,
            None => Shot::new(std::f64::consts::FRAC_PI_4, 1.0, 0, "simulation:fallback"),
        }
    }
}
