use birdbench_core::game::{Agent, GameInfo, Shot};
use birdbench_core::model::BirdType;
use birdbench_core::percept::Percept;
use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::planning::{Aim, Branch, Planner};
use crate::tap::tap_ms;

/// Random pig, random reachable trajectory, per-bird tap fraction of the
/// flight time.
///
/// Draws come from SplitMix64 seeded directly with the seed value: one draw
/// picks the pig (`next % n` over pigs with a reachable branch, in id order),
/// and a second picks the branch (`next % 2`, 0 = low) only when both are
/// reachable.
pub struct NaiveAgent {
    rng: SplitMix64,
}

impl NaiveAgent {
    pub fn new(seed: u64) -> NaiveAgent {
        NaiveAgent {
            rng: SplitMix64::from_seed(seed.to_le_bytes()),
        }
    }

    fn pick(&mut self, options: &[Vec<Aim>]) -> Aim {
        let i = (self.rng.next_u64() % options.len() as u64) as usize;
        let aims = &options[i];
        let j = if aims.len() == 2 {
            (self.rng.next_u64() % 2) as usize
        } else {
            0
        };
        aims[j].clone()
    }
}

/// 45 degrees at full draw: the longest reach.
fn max_range_shot(bird: BirdType, planner: &Planner, rationale: &str) -> Shot {
    let angle = std::f64::consts::FRAC_PI_4;
    Shot::new(angle, 1.0, tap_ms(bird, planner.time_to_first_contact(angle)), rationale)
}

impl Agent for NaiveAgent {
    fn name(&self) -> &str {
        "naive"
    }

    fn select_shot(&mut self, percept: &Percept, info: &GameInfo) -> Shot {
        let planner = Planner::new(percept, info);
        let bird = percept.current_bird.unwrap_or(BirdType::Red);
        let pigs = planner.pigs();
        let options: Vec<Vec<Aim>> = pigs
            .iter()
            .map(|p| {
                Branch::BOTH
                    .iter()
                    .filter_map(|&b| planner.aim_at_object(p, b))
                    .collect::<Vec<_>>()
            })
            .filter(|aims| !aims.is_empty())
            .collect();
        if options.is_empty() {
            return max_range_shot(bird, &planner, "naive:fallback");
        }
        let aim = self.pick(&options);
        Shot::new(aim.angle, 1.0, tap_ms(bird, aim.time), "naive")
    }
}
