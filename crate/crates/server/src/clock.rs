use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Game-time cost of each kind of request when the clock is simulated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpCosts {
    /// Added to the simulated settle time of every shot.
    pub shot_overhead: f64,
    pub load: f64,
    pub state: f64,
    pub query: f64,
}

impl Default for OpCosts {
    fn default() -> Self {
        OpCosts {
            shot_overhead: 5.0,
            load: 2.0,
            state: 0.5,
            query: 0.1,
        }
    }
}

/// How round time passes.
///
/// `Simulated` charges a fixed cost per request (shots also pay their settle
/// time), which makes a round a pure function of the request sequence.
/// `Wall` uses real elapsed time multiplied by `time_scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ClockMode {
    Simulated(OpCosts),
    Wall { time_scale: f64 },
}

impl Default for ClockMode {
    fn default() -> Self {
        ClockMode::Simulated(OpCosts::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Open,
    /// Budget spent; queries still answered so agents can save their state.
    Grace,
    Closed,
}

#[derive(Clone, Debug)]
pub struct RoundClock {
    budget: f64,
    grace: f64,
    mode: ClockMode,
    charged: f64,
    /// Elapsed time when the budget ran out, which may overshoot the budget
    /// by the request that crossed it.
    expired_at: Option<f64>,
    started: Instant,
}

impl RoundClock {
    pub fn new(budget: f64, grace: f64, mode: ClockMode) -> RoundClock {
        RoundClock {
            budget,
            grace,
            mode,
            charged: 0.0,
            expired_at: None,
            started: Instant::now(),
        }
    }

    pub fn mode(&self) -> ClockMode {
        self.mode
    }

    pub fn costs(&self) -> Option<OpCosts> {
        match self.mode {
            ClockMode::Simulated(c) => Some(c),
            ClockMode::Wall { .. } => None,
        }
    }

    /// Game seconds since the round started.
    pub fn elapsed(&self) -> f64 {
        match self.mode {
            ClockMode::Simulated(_) => self.charged,
            ClockMode::Wall { time_scale } => self.started.elapsed().as_secs_f64() * time_scale,
        }
    }

    pub fn time_left(&self) -> f64 {
        (self.budget - self.elapsed()).max(0.0)
    }

    pub fn phase(&self) -> Phase {
        let e = self.elapsed();
        if e < self.budget {
            Phase::Open
        } else if e < self.expired_at.unwrap_or(self.budget).max(self.budget) + self.grace {
            Phase::Grace
        } else {
            Phase::Closed
        }
    }

    /// Advances a simulated clock; no effect on wall clocks. The grace
    /// window starts once the request that exhausted the budget completes.
    pub fn charge(&mut self, seconds: f64) {
        if let ClockMode::Simulated(_) = self.mode {
            let open = self.charged < self.budget;
            self.charged += seconds.max(0.0);
            if open && self.charged >= self.budget {
                self.expired_at = Some(self.charged);
            }
        }
    }
}
