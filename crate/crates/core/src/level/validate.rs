use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Level;
use crate::game::{Agent, Game, GameInfo, Shot};
use crate::model::{BodyKind, ObjectId};
use crate::percept::LevelState;
use crate::physics::PhysicsConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub stable: bool,
    pub max_drift: f64,
    pub solvable: Option<bool>,
    pub probe_shots: u32,
    /// Shots of the attempt that solved the level, when one did.
    pub solving_sequence: Vec<Shot>,
}

/// Simulates the level untouched for `t_sim` seconds. Stable iff no object
/// ever moves `eps` or more from its start, and nothing breaks.
pub fn validate_stability(level: &Level, config: Arc<PhysicsConfig>, t_sim: f64, eps: f64) -> ValidationReport {
    let mut world = level.build_world(Arc::clone(&config));
    let start: BTreeMap<ObjectId, _> = world
        .bodies()
        .iter()
        .filter(|b| !b.is_static())
        .map(|b| (b.id, b.pos))
        .collect();
    let mut max_drift = 0.0f64;
    let mut lost = false;
    for _ in 0..config.steps_for(t_sim) {
        world.step();
        for (id, p0) in &start {
            match world.body(*id) {
                Some(b) => max_drift = max_drift.max((b.pos - *p0).length()),
                None => lost = true,
            }
        }
    }
    let broke = world
        .events()
        .iter()
        .any(|e| e.subject_kind != BodyKind::Bird);
    ValidationReport {
        stable: !lost && !broke && max_drift < eps,
        max_drift,
        solvable: None,
        probe_shots: 0,
        solving_sequence: Vec::new(),
    }
}

/// Plays up to `attempts` full attempts with `probe`. A positive answer
/// carries the shots that solved the level; a negative one only means no
/// solution was found.
pub fn validate_solvability(
    level: Arc<Level>,
    config: Arc<PhysicsConfig>,
    probe: &mut dyn Agent,
    attempts: u32,
) -> ValidationReport {
    let info = GameInfo::new((*config).clone());
    let mut report = ValidationReport {
        stable: false,
        max_drift: 0.0,
        solvable: Some(false),
        probe_shots: 0,
        solving_sequence: Vec::new(),
    };
    for _ in 0..attempts {
        let mut game = Game::new(Arc::clone(&level), Arc::clone(&config));
        let mut shots = Vec::new();
        while game.state() == LevelState::Playing {
            let shot = probe.select_shot(&game.percept(0.0), &info);
            report.probe_shots += 1;
            if game.shoot(&shot).is_err() {
                break;
            }
            shots.push(shot);
        }
        if game.state() == LevelState::Solved {
            report.solvable = Some(true);
            report.solving_sequence = shots;
            break;
        }
    }
    report
}
