use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;

use birdbench_agents::{play, Client, LevelPolicy, LocalTransport, RoundRobin, WeightedResidual};
use birdbench_core::level::Level;
use birdbench_core::physics::PhysicsConfig;
use birdbench_server::{ActionRecord, AttemptRecord, GameServer, ServerConfig, Visibility};
use serde::{Deserialize, Serialize};

use crate::leaderboard::Leaderboard;
use crate::stage::{Entrant, PolicyKind, StageConfig, WATCHDOG_IDLE};
use crate::TournamentError;

pub const ACTIONS_FILE: &str = "actions.jsonl";
pub const ATTEMPTS_FILE: &str = "attempts.jsonl";
pub const LEADERBOARD_FILE: &str = "leaderboard.json";
pub const STAGE_FILE: &str = "stage.json";

/// What a stage directory records about how the stage was set up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub levels: Vec<String>,
    pub visibility: Visibility,
    /// Budget after scaling.
    pub budget: f64,
    pub time_scale: f64,
    /// Agent id to group.
    pub roster: BTreeMap<String, u32>,
}

pub struct StageSetup<'a> {
    pub stage: &'a StageConfig,
    /// The stage's levels, in the order of `stage.levels`.
    pub levels: Vec<Level>,
    pub groups: Vec<Vec<String>>,
    pub entrants: &'a [Entrant],
    pub physics: PhysicsConfig,
    pub time_scale: f64,
    /// Stage directory for the logs; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
}

pub struct StageResult {
    pub leaderboard: Leaderboard,
    pub attempts: Vec<AttemptRecord>,
    pub actions: Vec<ActionRecord>,
    pub server: Arc<GameServer>,
}

/// Picks the named levels out of a pack.
pub fn resolve_levels(pack: &[Level], ids: &[String]) -> Result<Vec<Level>, TournamentError> {
    ids.iter()
        .map(|id| {
            pack.iter()
                .find(|l| &l.id == id)
                .cloned()
                .ok_or_else(|| TournamentError::Config(format!("unknown level `{id}`")))
        })
        .collect()
}

fn roster(groups: &[Vec<String>]) -> Result<BTreeMap<String, u32>, TournamentError> {
    let mut r = BTreeMap::new();
    for (g, members) in groups.iter().enumerate() {
        for a in members {
            if r.insert(a.clone(), g as u32).is_some() {
                return Err(TournamentError::Config(format!("agent `{a}` is in two groups")));
            }
        }
    }
    Ok(r)
}

fn policy_for(e: &Entrant) -> Box<dyn LevelPolicy> {
    match e.policy {
        PolicyKind::RoundRobin => Box::new(RoundRobin::default()),
        PolicyKind::Weighted => Box::new(WeightedResidual::new(e.seed)),
    }
}

fn run_entrant(server: &Arc<GameServer>, e: &Entrant) {
    let mut client = match Client::connect(Box::new(LocalTransport(server.connect())), &e.id) {
        Ok(c) => c,
        Err(err) => {
            log::warn!("{} could not connect: {err}", e.id);
            return;
        }
    };
    let mut agent = e.kind.build(e.seed);
    let mut policy = policy_for(e);
    match play(&mut client, agent.as_mut(), policy.as_mut()) {
        Ok((score, stats)) => log::info!("{}: total {} after {} shots", e.id, score.total, stats.shots),
        Err(err) => log::warn!("{} stopped early: {err}", e.id),
    }
}

/// Plays one stage: every present entrant gets its own session and thread,
/// all against one server. Entrants marked absent never connect and score
/// 0.
pub fn run_stage(setup: StageSetup<'_>) -> Result<StageResult, TournamentError> {
    let stage = setup.stage;
    let roster = roster(&setup.groups)?;
    let mut players = Vec::new();
    for id in roster.keys() {
        let e = setup
            .entrants
            .iter()
            .find(|e| &e.id == id)
            .ok_or_else(|| TournamentError::Config(format!("agent `{id}` is not entered")))?;
        players.push(e.clone());
    }
    let scale = setup.time_scale;
    let config = ServerConfig {
        stage: stage.name.to_string(),
        visibility: stage.visibility(),
        budget: stage.budget() * scale,
        grace: birdbench_server::server::DEFAULT_GRACE * scale,
        watchdog_idle: Some(WATCHDOG_IDLE * scale),
        roster: Some(roster.clone()),
        ..ServerConfig::default()
    };
    let record = StageRecord {
        stage: stage.name.to_string(),
        levels: stage.levels.clone(),
        visibility: config.visibility,
        budget: config.budget,
        time_scale: scale,
        roster: roster.clone(),
    };
    let server = GameServer::new(config, setup.levels, setup.physics);
    thread::scope(|s| {
        for e in players.iter().filter(|e| !e.absent) {
            let server = &server;
            thread::Builder::new()
                .name(e.id.clone())
                .spawn_scoped(s, move || run_entrant(server, e))
                .expect("spawn agent thread");
        }
    });
    server.finish();
    let attempts = server.attempts();
    let actions = server.actions();
    let leaderboard = Leaderboard::from_attempts(stage.name.name(), &stage.levels, &roster, &attempts);
    if let Some(dir) = &setup.out_dir {
        persist(dir, &record, &actions, &attempts, &leaderboard)?;
    }
    Ok(StageResult {
        leaderboard,
        attempts,
        actions,
        server,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TournamentError + '_ {
    move |source| TournamentError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), TournamentError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for r in rows {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, TournamentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| TournamentError::Log(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<(), TournamentError> {
    fs::write(path, text).map_err(io_err(path))
}

fn persist(
    dir: &Path,
    record: &StageRecord,
    actions: &[ActionRecord],
    attempts: &[AttemptRecord],
    leaderboard: &Leaderboard,
) -> Result<(), TournamentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let stage = serde_json::to_string_pretty(record).expect("stage record serializes") + "\n";
    write_text(&dir.join(STAGE_FILE), &stage)?;
    write_jsonl(&dir.join(ACTIONS_FILE), actions)?;
    write_jsonl(&dir.join(ATTEMPTS_FILE), attempts)?;
    write_text(&dir.join(LEADERBOARD_FILE), &leaderboard.to_json())
}
