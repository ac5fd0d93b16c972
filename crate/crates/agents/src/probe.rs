//! Solvability probing with the reference agents.

use std::sync::Arc;

use birdbench_core::level::{validate_solvability, Level, ValidationReport};
use birdbench_core::physics::PhysicsConfig;

use crate::AgentKind;

/// Agent used for the `k`-th probe attempt: the multi-strategy agent, then
/// the simulation agent, then seeded naive agents.
pub fn probe_agent(k: u32) -> (AgentKind, u64) {
    match k {
        0 => (AgentKind::Strategy, 0),
        1 => (AgentKind::Simulation, 0),
        _ => (AgentKind::Naive, u64::from(k)),
    }
}

/// Plays up to `budget` full attempts, one per agent in [`probe_agent`]
/// order, and stops at the first solve.
pub fn probe_solvability(level: &Arc<Level>, config: &Arc<PhysicsConfig>, budget: u32) -> ValidationReport {
    let mut report = ValidationReport {
        solvable: Some(false),
        ..ValidationReport::default()
    };
    for k in 0..budget {
        let (kind, seed) = probe_agent(k);
        let mut agent = kind.build(seed);
        let r = validate_solvability(Arc::clone(level), Arc::clone(config), agent.as_mut(), 1);
        report.probe_shots += r.probe_shots;
        if r.solvable == Some(true) {
            report.solvable = Some(true);
            report.solving_sequence = r.solving_sequence;
            break;
        }
    }
    report
}
