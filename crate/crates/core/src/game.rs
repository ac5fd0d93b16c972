//! One attempt at a level: the world, its score and the shot loop, plus the
//! agent interface.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::level::{score_attempt, AttemptScore, Level, ScoreTable, WORLD_HEIGHT, WORLD_WIDTH};
use crate::model::BirdType;
use crate::percept::{snapshot, LevelState, Percept, ScreenMap};
use crate::physics::{PhysicsConfig, PhysicsError, World};

/// An agent action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    /// Launch angle in radians above the horizontal.
    pub angle: f64,
    pub speed_fraction: f64,
    /// Delay from launch to the ability tap; 0 means no tap.
    pub tap_ms: u64,
    /// Short tag naming the reasoning that produced the shot.
    #[serde(default)]
    pub rationale: String,
}

impl Shot {
    pub fn new(angle: f64, speed_fraction: f64, tap_ms: u64, rationale: impl Into<String>) -> Shot {
        Shot {
            angle,
            speed_fraction,
            tap_ms,
            rationale: rationale.into(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.angle.is_finite()
            && (0.0..std::f64::consts::FRAC_PI_2).contains(&self.angle)
            && self.speed_fraction.is_finite()
            && (0.0..=1.0).contains(&self.speed_fraction)
    }
}

/// Static facts about the game shared with agents at handshake.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameInfo {
    pub physics: PhysicsConfig,
    pub screen: ScreenMap,
    pub world_width: f64,
    pub world_height: f64,
    pub score_table: ScoreTable,
}

impl GameInfo {
    pub fn new(physics: PhysicsConfig) -> GameInfo {
        GameInfo {
            physics,
            screen: ScreenMap::default(),
            world_width: WORLD_WIDTH,
            world_height: WORLD_HEIGHT,
            score_table: ScoreTable::default(),
        }
    }
}

impl Default for GameInfo {
    fn default() -> Self {
        GameInfo::new(PhysicsConfig::default())
    }
}

/// A shot-selecting policy.
pub trait Agent: Send {
    fn name(&self) -> &str;
    fn select_shot(&mut self, percept: &Percept, info: &GameInfo) -> Shot;
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("no birds left")]
    OutOfBirds,
    #[error("level is over")]
    LevelOver,
    #[error("illegal action: {0}")]
    IllegalAction(&'static str),
}

impl From<PhysicsError> for GameError {
    fn from(e: PhysicsError) -> Self {
        match e {
            PhysicsError::OutOfBirds => GameError::OutOfBirds,
            PhysicsError::IllegalAction(m) => GameError::IllegalAction(m),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotOutcome {
    pub score_delta: i64,
    pub attempt: AttemptScore,
    pub level_state: LevelState,
    /// Simulated steps until the scene settled.
    pub steps: usize,
    pub bird: BirdType,
}

#[derive(Clone, Debug)]
pub struct Game {
    level: Arc<Level>,
    config: Arc<PhysicsConfig>,
    table: ScoreTable,
    world: World,
    terrain: Vec<(f64, f64, f64)>,
    state: LevelState,
    shots: u32,
}

impl Game {
    pub fn new(level: Arc<Level>, config: Arc<PhysicsConfig>) -> Game {
        let world = level.build_world(Arc::clone(&config));
        let terrain = level.terrain.iter().map(|s| (s.x0, s.x1, s.h)).collect();
        Game {
            level,
            config,
            table: ScoreTable::default(),
            world,
            terrain,
            state: LevelState::Playing,
            shots: 0,
        }
    }

    pub fn level(&self) -> &Arc<Level> {
        &self.level
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn state(&self) -> LevelState {
        self.state
    }

    pub fn shots(&self) -> u32 {
        self.shots
    }

    /// Starts a fresh attempt at the same level.
    pub fn restart(&mut self) {
        *self = Game::new(Arc::clone(&self.level), Arc::clone(&self.config));
    }

    pub fn score(&self) -> AttemptScore {
        score_attempt(
            self.world.events(),
            self.world.birds_queue().len() as u32,
            self.state == LevelState::Solved,
            &self.table,
        )
    }

    pub fn percept(&self, time_left: f64) -> Percept {
        snapshot(
            &self.world,
            &self.level.id,
            &self.terrain,
            self.state,
            self.score().total,
            time_left,
            &ScreenMap::default(),
        )
    }

    /// Fires the next bird and simulates until the scene settles.
    pub fn shoot(&mut self, shot: &Shot) -> Result<ShotOutcome, GameError> {
        let bird = *self.world.birds_queue().front().ok_or(GameError::OutOfBirds)?;
        if self.state != LevelState::Playing {
            return Err(GameError::LevelOver);
        }
        if !shot.is_valid() {
            return Err(GameError::IllegalAction("shot parameters out of range"));
        }
        let before = self.score().total;
        self.world.launch_bird(shot.angle, shot.speed_fraction)?;
        if shot.tap_ms > 0 && bird.ability() != crate::model::Ability::None {
            self.world.schedule_tap(shot.tap_ms as f64 / 1000.0);
        }
        let p = self.config.settle;
        let steps = self.world.settle(p.v_eps, p.k_steps, p.t_cap);
        self.world.end_shot();
        self.shots += 1;
        if self.world.living_pigs() == 0 {
            self.state = LevelState::Solved;
        } else if self.world.birds_queue().is_empty() {
            self.state = LevelState::Lost;
        }
        let attempt = self.score();
        Ok(ShotOutcome {
            score_delta: attempt.total - before,
            attempt,
            level_state: self.state,
            steps,
            bird,
        })
    }

    /// Launch point of the slingshot in world units.
    pub fn launch_point(&self) -> Vec2 {
        self.world.launch_point()
    }
}
