//! Client SDK for the game server and the reference agents: naive,
//! trajectory-blocking, multi-strategy and internal simulation.

pub mod blocking;
pub mod client;
pub mod naive;
pub mod planning;
pub mod policy;
pub mod probe;
pub mod runner;
pub mod simulation;
pub mod strategy;
pub mod tap;

use std::fmt;
use std::str::FromStr;

use birdbench_core::game::Agent;
use serde::{Deserialize, Serialize};

pub use blocking::BlockingAgent;
pub use client::{Client, ClientError, LocalTransport, MyScore, TcpTransport, Transport};
pub use naive::NaiveAgent;
pub use policy::{LevelPolicy, RoundRobin, WeightedResidual};
pub use probe::probe_solvability;
pub use runner::{play, PlayStats};
pub use simulation::SimulationAgent;
pub use strategy::StrategyAgent;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Naive,
    Blocking,
    Strategy,
    Simulation,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [
        AgentKind::Naive,
        AgentKind::Blocking,
        AgentKind::Strategy,
        AgentKind::Simulation,
    ];

    /// A fresh agent; only the naive agent uses the seed.
    pub fn build(self, seed: u64) -> Box<dyn Agent> {
        match self {
            AgentKind::Naive => Box::new(NaiveAgent::new(seed)),
            AgentKind::Blocking => Box::new(BlockingAgent::new()),
            AgentKind::Strategy => Box::new(StrategyAgent::new()),
            AgentKind::Simulation => Box::new(SimulationAgent::default()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Naive => "naive",
            AgentKind::Blocking => "blocking",
            AgentKind::Strategy => "strategy",
            AgentKind::Simulation => "simulation",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown agent kind `{s}` (expected naive, blocking, strategy or simulation)"))
    }
}
