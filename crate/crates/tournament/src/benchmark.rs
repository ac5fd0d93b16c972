use birdbench_agents::AgentKind;
use birdbench_core::level::Level;
use birdbench_core::physics::PhysicsConfig;
use serde::{Deserialize, Serialize};

use crate::leaderboard::level_bests;
use crate::run::{run_stage, StageSetup};
use crate::stage::{Entrant, StageConfig, StageKind};
use crate::TournamentError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: String,
    pub best: i64,
    pub solved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub agent: String,
    pub seed: u64,
    pub budget: f64,
    pub levels: Vec<LevelResult>,
    pub solved: usize,
    pub total: i64,
}

/// Runs one agent alone over a level set for `budget` game seconds.
pub fn benchmark(
    kind: AgentKind,
    seed: u64,
    levels: Vec<Level>,
    budget: f64,
    physics: PhysicsConfig,
) -> Result<BenchmarkReport, TournamentError> {
    let mut stage = StageConfig::new(StageKind::Benchmark, levels.iter().map(|l| l.id.clone()).collect());
    stage.budget = Some(budget);
    stage.validate()?;
    let id = kind.name().to_string();
    let entrants = [Entrant::new(id.clone(), kind, seed)];
    let result = run_stage(StageSetup {
        stage: &stage,
        levels,
        groups: vec![vec![id.clone()]],
        entrants: &entrants,
        physics,
        time_scale: 1.0,
        out_dir: None,
    })?;
    let s = result.leaderboard.get(&id).expect("the only entrant is ranked");
    let bests = level_bests(&result.attempts);
    Ok(BenchmarkReport {
        agent: id,
        seed,
        budget,
        levels: stage
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| LevelResult {
                level: l.clone(),
                best: bests.get(&i).copied().unwrap_or(0),
                solved: bests.contains_key(&i),
            })
            .collect(),
        solved: s.solved,
        total: s.combined,
    })
}
