//! Knockout tournament over the game server: stage configuration,
//! leaderboards, advancement, persisted stage logs with replay, and a
//! single-agent benchmark harness.

pub mod benchmark;
pub mod bracket;
pub mod leaderboard;
pub mod replay;
pub mod run;
pub mod stage;

use std::path::Path;

use birdbench_core::level::{load_pack, LevelError};
use birdbench_core::physics::PhysicsConfig;
use serde::{Deserialize, Serialize};

pub use benchmark::{benchmark, BenchmarkReport};
pub use bracket::{advance, snake_seed, Advance, TieBreak};
pub use leaderboard::{combined_score, level_bests, mvm_table, Leaderboard, Standing};
pub use replay::{replay_stage, verify_replay};
pub use run::{run_stage, StageResult, StageSetup};
pub use stage::{Entrant, PolicyKind, StageConfig, StageKind, TournamentConfig};

#[derive(Debug, thiserror::Error)]
pub enum TournamentError {
    #[error("stage `{0}` is not complete")]
    StageNotComplete(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Level(#[from] LevelError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad stage log: {0}")]
    Log(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage: StageKind,
    pub groups: Vec<Vec<String>>,
    pub leaderboard: Leaderboard,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub advance: Option<Advance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TournamentOutcome {
    pub stages: Vec<StageOutcome>,
    pub champion: Option<String>,
}

/// Groups for a knockout stage nobody advanced into.
fn opening_groups(stage: StageKind, agents: &[String]) -> Vec<Vec<String>> {
    match stage {
        StageKind::Quarterfinal => snake_seed(agents, bracket::group_count(agents.len())),
        _ => vec![agents.to_vec()],
    }
}

/// Runs the configured stages in order. Knockout stages take their groups
/// from the previous knockout stage; benchmark and man-vs-machine stages
/// are played by every entrant. Logs go to `runs_dir/<stage>/` and the
/// outcome to `runs_dir/summary.json`.
pub fn run_tournament(config: &TournamentConfig, physics: PhysicsConfig) -> Result<TournamentOutcome, TournamentError> {
    config.validate()?;
    let pack = load_pack(&config.levels_dir)?;
    let everyone: Vec<String> = config.agents.iter().map(|a| a.id.clone()).collect();
    let mut pending: Option<Vec<Vec<String>>> = None;
    let mut outcome = TournamentOutcome {
        stages: Vec::new(),
        champion: None,
    };
    for stage in &config.stages {
        let groups = if stage.name.is_knockout() {
            pending.take().unwrap_or_else(|| opening_groups(stage.name, &everyone))
        } else {
            vec![everyone.clone()]
        };
        log::info!("{}: {} agents in {} groups", stage.name, groups.iter().map(Vec::len).sum::<usize>(), groups.len());
        let result = run_stage(StageSetup {
            stage,
            levels: run::resolve_levels(&pack, &stage.levels)?,
            groups: groups.clone(),
            entrants: &config.agents,
            physics: physics.clone(),
            time_scale: config.time_scale,
            out_dir: Some(config.runs_dir.join(stage.name.name())),
        })?;
        let adv = if stage.name.is_knockout() {
            let a = advance(stage.name, &result.leaderboard)?;
            if a.champion.is_some() {
                outcome.champion.clone_from(&a.champion);
            }
            pending = Some(a.groups.clone());
            Some(a)
        } else {
            None
        };
        outcome.stages.push(StageOutcome {
            stage: stage.name,
            groups,
            leaderboard: result.leaderboard,
            advance: adv,
        });
    }
    let summary = serde_json::to_string_pretty(&outcome).expect("outcome serializes") + "\n";
    std::fs::create_dir_all(&config.runs_dir).map_err(|source| TournamentError::Io {
        path: config.runs_dir.display().to_string(),
        source,
    })?;
    run::write_text(&Path::new(&config.runs_dir).join("summary.json"), &summary)?;
    Ok(outcome)
}
