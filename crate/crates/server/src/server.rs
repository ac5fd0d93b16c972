use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};

use birdbench_core::game::{Game, GameError, GameInfo, Shot};
use birdbench_core::level::Level;
use birdbench_core::percept::LevelState;
use birdbench_core::physics::PhysicsConfig;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::best::{BestTable, Visibility};
use crate::clock::{ClockMode, Phase, RoundClock};
use crate::protocol::{ErrorCode, Op, Request, Response};

pub const DEFAULT_GRACE: f64 = 120.0;
pub const DEFAULT_WATCHDOG_IDLE: f64 = 90.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServerConfig {
    pub stage: String,
    pub visibility: Visibility,
    /// Round budget in game seconds.
    pub budget: f64,
    pub grace: f64,
    pub clock: ClockMode,
    /// Restart an agent's level after this many game seconds without an
    /// action; `None` disables the watchdog.
    pub watchdog_idle: Option<f64>,
    /// Allowed agents and their groups; `None` admits anyone into group 0.
    pub roster: Option<BTreeMap<String, u32>>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            stage: "practice".to_string(),
            visibility: Visibility::Global,
            budget: 1800.0,
            grace: DEFAULT_GRACE,
            clock: ClockMode::default(),
            watchdog_idle: Some(DEFAULT_WATCHDOG_IDLE),
            roster: None,
        }
    }
}

/// A state-changing request accepted by the server, or a watchdog restart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    LoadLevel { level: usize },
    RestartLevel,
    Shoot { angle_deg: f64, speed_fraction: f64, tap_ms: u64 },
    WatchdogRestart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub agent: String,
    /// Position in this agent's action sequence.
    pub index: u64,
    /// Game seconds elapsed on the agent's clock when accepted.
    pub clock: f64,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub agent: String,
    pub level: usize,
    /// 1-based count of attempts by this agent at this level.
    pub attempt: u32,
    pub shots: u32,
    pub solved: bool,
    pub total: i64,
}

struct Session {
    agent_id: String,
    group: u32,
    clock: RoundClock,
    level: Option<usize>,
    game: Option<Game>,
    attempt_open: bool,
    attempts: Vec<u32>,
    best: Vec<Option<i64>>,
    actions: u64,
    last_action: f64,
}

/// Shared state of one stage: levels, sessions, the best-score table and
/// the persistent logs.
pub struct GameServer {
    config: ServerConfig,
    levels: Vec<Arc<Level>>,
    physics: Arc<PhysicsConfig>,
    info: GameInfo,
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Session>>>>,
    best: Mutex<BestTable>,
    actions: Mutex<Vec<ActionRecord>>,
    attempts: Mutex<Vec<AttemptRecord>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

type OpResult = Result<Value, (ErrorCode, String)>;

impl GameServer {
    pub fn new(config: ServerConfig, levels: Vec<Level>, physics: PhysicsConfig) -> Arc<GameServer> {
        Arc::new(GameServer {
            info: GameInfo::new(physics.clone()),
            physics: Arc::new(physics),
            levels: levels.into_iter().map(Arc::new).collect(),
            config,
            sessions: Mutex::new(BTreeMap::new()),
            best: Mutex::new(BestTable::default()),
            actions: Mutex::new(Vec::new()),
            attempts: Mutex::new(Vec::new()),
        })
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    pub fn levels(&self) -> &[Arc<Level>] {
        &self.levels
    }

    pub fn connect(self: &Arc<Self>) -> Connection {
        Connection {
            server: Arc::clone(self),
            session: None,
        }
    }

    pub fn best_table(&self) -> BestTable {
        lock(&self.best).clone()
    }

    /// Accepted actions, grouped by agent in acceptance order.
    pub fn actions(&self) -> Vec<ActionRecord> {
        let mut v = lock(&self.actions).clone();
        v.sort_by(|a, b| a.agent.cmp(&b.agent).then(a.index.cmp(&b.index)));
        v
    }

    pub fn attempts(&self) -> Vec<AttemptRecord> {
        let mut v = lock(&self.attempts).clone();
        v.sort_by(|a, b| {
            (a.agent.as_str(), a.level, a.attempt).cmp(&(b.agent.as_str(), b.level, b.attempt))
        });
        v
    }

    /// Closes every open attempt so the attempt log is complete.
    pub fn finish(&self) {
        let sessions: Vec<_> = lock(&self.sessions).values().cloned().collect();
        for s in sessions {
            let mut s = lock(&s);
            self.close_attempt(&mut s);
        }
    }

    /// Session clock reading for an agent, if it has connected.
    pub fn time_left(&self, agent: &str) -> Option<f64> {
        let s = lock(&self.sessions).get(agent).cloned()?;
        let t = lock(&s).clock.time_left();
        Some(t)
    }

    fn record_action(&self, s: &mut Session, action: Action) {
        let rec = ActionRecord {
            agent: s.agent_id.clone(),
            index: s.actions,
            clock: s.clock.elapsed(),
            action,
        };
        s.actions += 1;
        s.last_action = s.clock.elapsed();
        lock(&self.actions).push(rec);
    }

    fn close_attempt(&self, s: &mut Session) {
        if !s.attempt_open {
            return;
        }
        let (Some(level), Some(game)) = (s.level, s.game.as_ref()) else {
            return;
        };
        s.attempt_open = false;
        if game.shots() == 0 {
            return;
        }
        s.attempts[level] += 1;
        let score = game.score();
        lock(&self.attempts).push(AttemptRecord {
            agent: s.agent_id.clone(),
            level,
            attempt: s.attempts[level],
            shots: game.shots(),
            solved: score.solved,
            total: score.total,
        });
    }

    fn start_attempt(&self, s: &mut Session, level: usize) {
        self.close_attempt(s);
        s.level = Some(level);
        s.game = Some(Game::new(Arc::clone(&self.levels[level]), Arc::clone(&self.physics)));
        s.attempt_open = true;
    }

    fn hello(&self, agent_id: &str) -> Result<(Arc<Mutex<Session>>, bool), (ErrorCode, String)> {
        let group = match &self.config.roster {
            Some(r) => *r
                .get(agent_id)
                .ok_or((ErrorCode::Rejected, format!("agent `{agent_id}` is not entered in this stage")))?,
            None => 0,
        };
        let mut sessions = lock(&self.sessions);
        if let Some(s) = sessions.get(agent_id) {
            return Ok((Arc::clone(s), true));
        }
        let n = self.levels.len();
        let s = Arc::new(Mutex::new(Session {
            agent_id: agent_id.to_string(),
            group,
            clock: RoundClock::new(self.config.budget, self.config.grace, self.config.clock),
            level: None,
            game: None,
            attempt_open: false,
            attempts: vec![0; n],
            best: vec![None; n],
            actions: 0,
            last_action: 0.0,
        }));
        sessions.insert(agent_id.to_string(), Arc::clone(&s));
        Ok((s, false))
    }

    fn hello_data(&self, s: &Session, resumed: bool) -> Value {
        json!({
            "agent_id": s.agent_id,
            "group": s.group,
            "stage": self.config.stage,
            "levels": self.levels.len(),
            "level_ids": self.levels.iter().map(|l| l.id.clone()).collect::<Vec<_>>(),
            "time_left": s.clock.time_left(),
            "resumed": resumed,
            "info": self.info,
        })
    }

    fn watchdog(&self, s: &mut Session) {
        let Some(idle) = self.config.watchdog_idle else {
            return;
        };
        let playing = s.game.as_ref().is_some_and(|g| g.state() == LevelState::Playing);
        if playing && s.clock.phase() == Phase::Open && s.clock.elapsed() - s.last_action >= idle {
            let level = s.level.expect("game implies level");
            log::warn!("watchdog restarting level {level} for {}", s.agent_id);
            self.start_attempt(s, level);
            self.record_action(s, Action::WatchdogRestart);
        }
    }

    fn dispatch(&self, s: &mut Session, op: Op) -> OpResult {
        self.watchdog(s);
        match s.clock.phase() {
            Phase::Closed => return Err((ErrorCode::RoundClosed, "the round is over".into())),
            Phase::Grace if op.is_action() => {
                return Err((ErrorCode::RoundClosed, "time is up; only queries are answered".into()));
            }
            _ => {}
        }
        let costs = s.clock.costs();
        let charge = |s: &mut Session, f: fn(&crate::clock::OpCosts) -> f64| {
            if let Some(c) = &costs {
                s.clock.charge(f(c));
            }
        };
        match op {
            Op::Hello { .. } => Err((ErrorCode::IllegalAction, "already authenticated".into())),
            Op::LoadLevel { level } => {
                if level >= self.levels.len() {
                    return Err((ErrorCode::BadArgs, format!("level must be below {}", self.levels.len())));
                }
                charge(s, |c| c.load);
                self.start_attempt(s, level);
                self.record_action(s, Action::LoadLevel { level });
                let l = &self.levels[level];
                Ok(json!({
                    "level": level,
                    "level_id": l.id,
                    "birds": l.birds,
                    "pigs": l.pig_count(),
                }))
            }
            Op::RestartLevel => {
                let level = s.level.ok_or((ErrorCode::NoLevel, "no level loaded".to_string()))?;
                charge(s, |c| c.load);
                self.start_attempt(s, level);
                self.record_action(s, Action::RestartLevel);
                Ok(json!({ "level": level }))
            }
            Op::GetState { debug_svg } => {
                let game = s.game.as_ref().ok_or((ErrorCode::NoLevel, "no level loaded".to_string()))?;
                let mut v = serde_json::to_value(game.percept(s.clock.time_left())).expect("percept serializes");
                if debug_svg {
                    v["debug_svg"] = Value::String(game.world().to_svg(10.0));
                }
                charge(s, |c| c.state);
                Ok(v)
            }
            Op::Shoot {
                angle_deg,
                speed_fraction,
                tap_ms,
            } => {
                let level = s.level.ok_or((ErrorCode::NoLevel, "no level loaded".to_string()))?;
                let game = s.game.as_mut().expect("level implies game");
                let shot = Shot::new(angle_deg.to_radians(), speed_fraction, tap_ms, "");
                let outcome = game.shoot(&shot).map_err(|e| {
                    let code = match e {
                        GameError::OutOfBirds => ErrorCode::OutOfBirds,
                        GameError::LevelOver => ErrorCode::LevelOver,
                        GameError::IllegalAction(_) => ErrorCode::IllegalAction,
                    };
                    (code, e.to_string())
                })?;
                if let Some(c) = &costs {
                    s.clock.charge(c.shot_overhead + outcome.steps as f64 * self.physics.dt);
                }
                self.record_action(
                    s,
                    Action::Shoot {
                        angle_deg,
                        speed_fraction,
                        tap_ms,
                    },
                );
                if outcome.attempt.solved {
                    let total = outcome.attempt.total;
                    let best = s.best[level].map_or(total, |b| b.max(total));
                    s.best[level] = Some(best);
                    lock(&self.best).merge(&s.agent_id, level, total);
                }
                if outcome.level_state != LevelState::Playing {
                    self.close_attempt(s);
                }
                Ok(serde_json::to_value(&outcome).expect("outcome serializes"))
            }
            Op::GetMyScore => {
                charge(s, |c| c.query);
                let levels: Vec<Value> = (0..self.levels.len())
                    .map(|i| {
                        json!({
                            "level": i,
                            "best": s.best[i].unwrap_or(0),
                            "solved": s.best[i].is_some(),
                            "attempts": s.attempts[i],
                        })
                    })
                    .collect();
                let total: i64 = s.best.iter().flatten().sum();
                Ok(json!({ "levels": levels, "total": total }))
            }
            Op::GetBestScores => {
                charge(s, |c| c.query);
                let groups: BTreeMap<String, u32> = match &self.config.roster {
                    Some(r) => r.clone(),
                    None => lock(&self.sessions).keys().map(|k| (k.clone(), 0)).collect(),
                };
                let levels = lock(&self.best).visible_best(
                    &s.agent_id,
                    self.config.visibility,
                    &groups,
                    self.levels.len(),
                );
                Ok(json!({ "scope": self.config.visibility, "levels": levels }))
            }
            Op::TimeLeft => {
                charge(s, |c| c.query);
                Ok(json!({ "time_left": s.clock.time_left(), "phase": s.clock.phase() }))
            }
        }
    }
}

/// One client connection. The session is attached by `HELLO` and survives
/// the connection, so a reconnecting agent resumes where it left off.
pub struct Connection {
    server: Arc<GameServer>,
    session: Option<Arc<Mutex<Session>>>,
}

impl Connection {
    pub fn handle(&mut self, req: &Request) -> Response {
        let seq = req.seq.clone();
        let op = match Op::parse(req) {
            Ok(op) => op,
            Err((code, msg)) => return Response::err(seq, code, msg),
        };
        if let Op::Hello { agent_id } = &op {
            if self.session.is_some() {
                return Response::err(seq, ErrorCode::IllegalAction, "already authenticated");
            }
            return match self.server.hello(agent_id) {
                Ok((s, resumed)) => {
                    let data = self.server.hello_data(&lock(&s), resumed);
                    self.session = Some(s);
                    Response::ok(seq, data)
                }
                Err((code, msg)) => Response::err(seq, code, msg),
            };
        }
        let Some(session) = &self.session else {
            return Response::err(seq, ErrorCode::NotAuthenticated, "send HELLO first");
        };
        let mut s = lock(session);
        match self.server.dispatch(&mut s, op) {
            Ok(data) => Response::ok(seq, data),
            Err((code, msg)) => Response::err(seq, code, msg),
        }
    }

    /// Handles one raw line and returns the response line (no newline).
    pub fn handle_line(&mut self, line: &str) -> String {
        let value: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                return Response::err(Value::Null, ErrorCode::Malformed, format!("invalid JSON: {e}")).to_line()
            }
        };
        let seq = value.get("seq").cloned().unwrap_or(Value::Null);
        match serde_json::from_value::<Request>(value) {
            Ok(req) => self.handle(&req).to_line(),
            Err(e) => Response::err(seq, ErrorCode::Malformed, format!("not a request: {e}")).to_line(),
        }
    }

    pub fn agent_id(&self) -> Option<String> {
        self.session.as_ref().map(|s| lock(s).agent_id.clone())
    }
}
