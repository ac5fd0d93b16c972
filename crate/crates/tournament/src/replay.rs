use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use birdbench_core::game::{Game, Shot};
use birdbench_core::level::Level;
use birdbench_core::percept::LevelState;
use birdbench_core::physics::PhysicsConfig;
use birdbench_server::{Action, ActionRecord, AttemptRecord};

use crate::leaderboard::Leaderboard;
use crate::run::{read_jsonl, resolve_levels, StageRecord, ACTIONS_FILE, LEADERBOARD_FILE, STAGE_FILE};
use crate::TournamentError;

pub struct Replayed {
    pub attempts: Vec<AttemptRecord>,
    pub leaderboard: Leaderboard,
}

struct Session<'a> {
    agent: &'a str,
    levels: &'a [Arc<Level>],
    physics: &'a Arc<PhysicsConfig>,
    current: Option<(usize, Game)>,
    open: bool,
    counts: Vec<u32>,
    out: &'a mut Vec<AttemptRecord>,
}

impl Session<'_> {
    fn close(&mut self) {
        if !self.open {
            return;
        }
        self.open = false;
        let Some((level, game)) = &self.current else {
            return;
        };
        if game.shots() == 0 {
            return;
        }
        self.counts[*level] += 1;
        let score = game.score();
        self.out.push(AttemptRecord {
            agent: self.agent.to_string(),
            level: *level,
            attempt: self.counts[*level],
            shots: game.shots(),
            solved: score.solved,
            total: score.total,
        });
    }

    fn start(&mut self, level: usize) {
        self.close();
        self.current = Some((level, Game::new(Arc::clone(&self.levels[level]), Arc::clone(self.physics))));
        self.open = true;
    }

    fn apply(&mut self, rec: &ActionRecord) -> Result<(), TournamentError> {
        let bad = |msg: &str| TournamentError::Log(format!("{} action {}: {msg}", rec.agent, rec.index));
        match &rec.action {
            Action::LoadLevel { level } => {
                if *level >= self.levels.len() {
                    return Err(bad("level out of range"));
                }
                self.start(*level);
            }
            Action::RestartLevel | Action::WatchdogRestart => {
                let level = self.current.as_ref().ok_or_else(|| bad("no level loaded"))?.0;
                self.start(level);
            }
            Action::Shoot {
                angle_deg,
                speed_fraction,
                tap_ms,
            } => {
                let (_, game) = self.current.as_mut().ok_or_else(|| bad("no level loaded"))?;
                let shot = Shot::new(angle_deg.to_radians(), *speed_fraction, *tap_ms, "");
                let outcome = game.shoot(&shot).map_err(|e| bad(&e.to_string()))?;
                if outcome.level_state != LevelState::Playing {
                    self.close();
                }
            }
        }
        Ok(())
    }
}

/// Re-plays an action log against fresh games and rebuilds the attempt log
/// and leaderboard without any agent code or clock.
pub fn replay_actions(
    record: &StageRecord,
    levels: Vec<Level>,
    physics: PhysicsConfig,
    actions: &[ActionRecord],
) -> Result<Replayed, TournamentError> {
    let levels: Vec<Arc<Level>> = levels.into_iter().map(Arc::new).collect();
    let physics = Arc::new(physics);
    let mut by_agent: BTreeMap<&str, Vec<&ActionRecord>> = BTreeMap::new();
    for a in actions {
        by_agent.entry(a.agent.as_str()).or_default().push(a);
    }
    let mut attempts = Vec::new();
    for (agent, mut recs) in by_agent {
        recs.sort_by_key(|r| r.index);
        let mut s = Session {
            agent,
            levels: &levels,
            physics: &physics,
            current: None,
            open: false,
            counts: vec![0; levels.len()],
            out: &mut attempts,
        };
        for r in recs {
            s.apply(r)?;
        }
        s.close();
    }
    attempts.sort_by(|a, b| (a.agent.as_str(), a.level, a.attempt).cmp(&(b.agent.as_str(), b.level, b.attempt)));
    let leaderboard = Leaderboard::from_attempts(&record.stage, &record.levels, &record.roster, &attempts);
    Ok(Replayed { attempts, leaderboard })
}

/// Replays a persisted stage directory.
pub fn replay_stage(dir: &Path, pack: &[Level], physics: PhysicsConfig) -> Result<Replayed, TournamentError> {
    let path = dir.join(STAGE_FILE);
    let text = fs::read_to_string(&path).map_err(|source| TournamentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let record: StageRecord = serde_json::from_str(&text).map_err(|e| TournamentError::Log(e.to_string()))?;
    let levels = resolve_levels(pack, &record.levels)?;
    let actions: Vec<ActionRecord> = read_jsonl(&dir.join(ACTIONS_FILE))?;
    replay_actions(&record, levels, physics, &actions)
}

/// True when replaying the stage reproduces its persisted leaderboard byte
/// for byte.
pub fn verify_replay(dir: &Path, pack: &[Level], physics: PhysicsConfig) -> Result<bool, TournamentError> {
    let replayed = replay_stage(dir, pack, physics)?;
    let path = dir.join(LEADERBOARD_FILE);
    let stored = fs::read_to_string(&path).map_err(|source| TournamentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(stored == replayed.leaderboard.to_json())
}
