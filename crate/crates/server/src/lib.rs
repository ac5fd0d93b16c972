//! Game server: a line-delimited JSON protocol over TCP, per-agent sessions
//! with round clocks, and shared best-score tables.

pub mod best;
pub mod clock;
pub mod protocol;
pub mod server;
pub mod tcp;

pub use best::{BestTable, LevelBest, Visibility};
pub use clock::{ClockMode, OpCosts, Phase, RoundClock};
pub use protocol::{ErrorBody, ErrorCode, Op, Request, Response, OPS};
pub use server::{Action, ActionRecord, AttemptRecord, Connection, GameServer, ServerConfig};
pub use tcp::{serve, TcpHandle, DEFAULT_PORT};
