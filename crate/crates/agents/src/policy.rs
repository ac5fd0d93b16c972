//! Which level to play next.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::client::MyScore;

pub trait LevelPolicy: Send {
    /// Next level to load given the agent's own scores; `None` stops play.
    fn next_level(&mut self, scores: &MyScore) -> Option<usize>;

    /// Called after a level is loaded, with its bird and pig counts.
    fn observe_level(&mut self, _level: usize, _birds: usize, _pigs: usize) {}
}

/// Cycles through unsolved levels in index order. Once everything is
/// solved it keeps cycling through all levels to raise the scores.
#[derive(Default)]
pub struct RoundRobin {
    last: Option<usize>,
}

impl LevelPolicy for RoundRobin {
    fn next_level(&mut self, scores: &MyScore) -> Option<usize> {
        let n = scores.levels.len();
        if n == 0 {
            return None;
        }
        let start = self.last.map_or(0, |l| (l + 1) % n);
        let order = (0..n).map(|k| (start + k) % n);
        let pick = order
            .clone()
            .find(|&i| !scores.levels[i].solved)
            .unwrap_or(start);
        self.last = Some(pick);
        Some(pick)
    }
}

/// Picks levels at random with probability proportional to the points
/// still thought to be available there.
///
/// A level's potential is estimated from its pig and bird counts once seen
/// (5000 per pig plus 10000 per spare bird), or a flat default before that.
/// The residual is the potential minus the agent's own best, floored so
/// that solved levels keep a small chance.
pub struct WeightedResidual {
    rng: SplitMix64,
    potential: Vec<Option<f64>>,
}

const DEFAULT_POTENTIAL: f64 = 30_000.0;
const RESIDUAL_FLOOR: f64 = 1_000.0;

impl WeightedResidual {
    pub fn new(seed: u64) -> WeightedResidual {
        WeightedResidual {
            rng: SplitMix64::from_seed(seed.to_le_bytes()),
            potential: Vec::new(),
        }
    }

    pub fn weights(&self, scores: &MyScore) -> Vec<f64> {
        scores
            .levels
            .iter()
            .map(|l| {
                let p = self.potential.get(l.level).copied().flatten().unwrap_or(DEFAULT_POTENTIAL);
                (p - l.best as f64).max(RESIDUAL_FLOOR)
            })
            .collect()
    }
}

impl LevelPolicy for WeightedResidual {
    fn next_level(&mut self, scores: &MyScore) -> Option<usize> {
        let w = self.weights(scores);
        let total: f64 = w.iter().sum();
        if w.is_empty() || !(total > 0.0) {
            return None;
        }
        let mut x = self.rng.random::<f64>() * total;
        for (i, wi) in w.iter().enumerate() {
            if x < *wi {
                return Some(i);
            }
            x -= wi;
        }
        Some(w.len() - 1)
    }

    fn observe_level(&mut self, level: usize, birds: usize, pigs: usize) {
        if self.potential.len() <= level {
            self.potential.resize(level + 1, None);
        }
        self.potential[level] = Some(5000.0 * pigs as f64 + 10_000.0 * birds.saturating_sub(1) as f64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::LevelScore;

    fn scores(solved: &[bool]) -> MyScore {
        MyScore {
            levels: solved
                .iter()
                .enumerate()
                .map(|(i, &s)| LevelScore {
                    level: i,
                    best: if s { 20_000 } else { 0 },
                    solved: s,
                    attempts: 1,
                })
                .collect(),
            total: 0,
        }
    }

    #[test]
    fn round_robin_skips_solved() {
        let mut p = RoundRobin::default();
        let s = scores(&[false, true, false]);
        assert_eq!(p.next_level(&s), Some(0));
        assert_eq!(p.next_level(&s), Some(2));
        assert_eq!(p.next_level(&s), Some(0));
        let all = scores(&[true, true, true]);
        assert_eq!(p.next_level(&all), Some(1));
        assert_eq!(p.next_level(&all), Some(2));
    }

    #[test]
    fn weighted_prefers_unsolved() {
        let mut p = WeightedResidual::new(1);
        p.observe_level(0, 3, 1);
        p.observe_level(1, 3, 1);
        let s = scores(&[true, false]);
        let w = p.weights(&s);
        assert_eq!(w, vec![5000.0, 25000.0]);
        let picks = (0..6000).filter(|_| p.next_level(&s) == Some(1)).count();
        assert!((4700..5300).contains(&picks), "{picks}");
    }
}
