use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use birdbench_agents::AgentKind;
use birdbench_server::Visibility;
use serde::{Deserialize, Serialize};

use crate::TournamentError;

pub const COMPETITION_LEVELS: usize = 8;
pub const COMPETITION_BUDGET: f64 = 1800.0;
pub const MVM_LEVELS: usize = 4;
pub const MVM_BUDGET: f64 = 600.0;
/// Idle time before the watchdog restarts a level, before scaling.
pub const WATCHDOG_IDLE: f64 = 90.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Qualification,
    Quarterfinal,
    Semifinal,
    Grandfinal,
    Benchmark,
    Mvm,
}

impl StageKind {
    pub const ALL: [StageKind; 6] = [
        StageKind::Qualification,
        StageKind::Quarterfinal,
        StageKind::Semifinal,
        StageKind::Grandfinal,
        StageKind::Benchmark,
        StageKind::Mvm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StageKind::Qualification => "qualification",
            StageKind::Quarterfinal => "quarterfinal",
            StageKind::Semifinal => "semifinal",
            StageKind::Grandfinal => "grandfinal",
            StageKind::Benchmark => "benchmark",
            StageKind::Mvm => "mvm",
        }
    }

    /// The knockout stage that follows, if any.
    pub fn next(self) -> Option<StageKind> {
        match self {
            StageKind::Qualification => Some(StageKind::Quarterfinal),
            StageKind::Quarterfinal => Some(StageKind::Semifinal),
            StageKind::Semifinal => Some(StageKind::Grandfinal),
            _ => None,
        }
    }

    pub fn is_knockout(self) -> bool {
        !matches!(self, StageKind::Benchmark | StageKind::Mvm)
    }

    pub fn default_budget(self) -> f64 {
        match self {
            StageKind::Mvm => MVM_BUDGET,
            _ => COMPETITION_BUDGET,
        }
    }

    /// Required number of levels; `None` for benchmarks, which take any
    /// nonempty set.
    pub fn level_count(self) -> Option<usize> {
        match self {
            StageKind::Benchmark => None,
            StageKind::Mvm => Some(MVM_LEVELS),
            _ => Some(COMPETITION_LEVELS),
        }
    }

    /// Only quarter-final groups are kept from seeing each other's scores.
    pub fn default_visibility(self) -> Visibility {
        match self {
            StageKind::Quarterfinal => Visibility::Group,
            _ => Visibility::Global,
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StageKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StageKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub name: StageKind,
    /// Level ids from the level directory, in play order.
    pub levels: Vec<String>,
    /// Round budget in seconds before scaling; defaults by stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility: Option<Visibility>,
}

impl StageConfig {
    pub fn new(name: StageKind, levels: Vec<String>) -> StageConfig {
        StageConfig {
            name,
            levels,
            budget: None,
            visibility: None,
        }
    }

    pub fn budget(&self) -> f64 {
        self.budget.unwrap_or(self.name.default_budget())
    }

    pub fn visibility(&self) -> Visibility {
        self.visibility.unwrap_or(self.name.default_visibility())
    }

    pub fn validate(&self) -> Result<(), TournamentError> {
        let n = self.levels.len();
        let ok = match self.name.level_count() {
            Some(k) => n == k,
            None => n > 0,
        };
        if !ok {
            let want = self.name.level_count().map_or("at least 1".to_string(), |k| k.to_string());
            return Err(TournamentError::Config(format!("{} needs {want} levels, got {n}", self.name)));
        }
        if !(self.budget() >= 0.0 && self.budget().is_finite()) {
            return Err(TournamentError::Config(format!("{}: budget must be a finite non-negative number", self.name)));
        }
        Ok(())
    }
}

/// Which level an agent plays next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    #[default]
    RoundRobin,
    Weighted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entrant {
    pub id: String,
    pub kind: AgentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub policy: PolicyKind,
    /// Entered but never connects.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub absent: bool,
}

impl Entrant {
    pub fn new(id: impl Into<String>, kind: AgentKind, seed: u64) -> Entrant {
        Entrant {
            id: id.into(),
            kind,
            seed,
            policy: PolicyKind::RoundRobin,
            absent: false,
        }
    }
}

fn default_scale() -> f64 {
    1.0
}

fn default_runs() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TournamentConfig {
    pub levels_dir: PathBuf,
    #[serde(default = "default_runs")]
    pub runs_dir: PathBuf,
    /// Multiplies every budget, grace window and watchdog period.
    #[serde(default = "default_scale")]
    pub time_scale: f64,
    pub agents: Vec<Entrant>,
    pub stages: Vec<StageConfig>,
}

impl TournamentConfig {
    pub fn from_json(text: &str) -> Result<TournamentConfig, TournamentError> {
        let c: TournamentConfig = serde_json::from_str(text).map_err(|e| TournamentError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), TournamentError> {
        if !(self.time_scale > 0.0 && self.time_scale.is_finite()) {
            return Err(TournamentError::Config("time_scale must be positive".into()));
        }
        let mut ids: Vec<&str> = self.agents.iter().map(|a| a.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(TournamentError::Config(format!("agent id `{}` entered twice", w[0])));
        }
        if self.agents.is_empty() {
            return Err(TournamentError::Config("no agents entered".into()));
        }
        for s in &self.stages {
            s.validate()?;
        }
        Ok(())
    }
}
