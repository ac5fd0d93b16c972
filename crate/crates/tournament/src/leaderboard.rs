use std::cmp::Ordering;
use std::collections::BTreeMap;

use birdbench_server::AttemptRecord;
use serde::{Deserialize, Serialize};

/// Best solved total per level. Unsolved attempts never count.
pub fn level_bests<'a>(history: impl IntoIterator<Item = &'a AttemptRecord>) -> BTreeMap<usize, i64> {
    let mut best = BTreeMap::new();
    for a in history.into_iter().filter(|a| a.solved) {
        best.entry(a.level)
            .and_modify(|b: &mut i64| *b = (*b).max(a.total))
            .or_insert(a.total);
    }
    best
}

/// Sum over levels of the best solved total.
pub fn combined_score<'a>(history: impl IntoIterator<Item = &'a AttemptRecord>) -> i64 {
    level_bests(history).values().sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Standing {
    /// 1-based, unique.
    pub rank: usize,
    pub agent: String,
    pub group: u32,
    pub combined: i64,
    /// Highest score on any single level.
    pub max_single: i64,
    pub solved: usize,
    /// Best solved score per stage level, 0 where unsolved.
    pub level_best: Vec<i64>,
}

/// Ranking order: combined score, then best single level, then agent id.
pub fn rank_cmp(a: &Standing, b: &Standing) -> Ordering {
    b.combined
        .cmp(&a.combined)
        .then(b.max_single.cmp(&a.max_single))
        .then(a.agent.cmp(&b.agent))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub stage: String,
    pub levels: Vec<String>,
    /// Every session's budget has run out.
    pub complete: bool,
    pub standings: Vec<Standing>,
}

impl Leaderboard {
    /// Ranks every entrant, including those with no attempts.
    pub fn from_attempts(
        stage: &str,
        levels: &[String],
        entrants: &BTreeMap<String, u32>,
        attempts: &[AttemptRecord],
    ) -> Leaderboard {
        let standings = entrants
            .iter()
            .map(|(agent, &group)| {
                let bests = level_bests(attempts.iter().filter(|a| &a.agent == agent));
                let level_best: Vec<i64> = (0..levels.len()).map(|i| bests.get(&i).copied().unwrap_or(0)).collect();
                Standing {
                    rank: 0,
                    agent: agent.clone(),
                    group,
                    combined: bests.values().sum(),
                    max_single: bests.values().copied().max().unwrap_or(0),
                    solved: bests.len(),
                    level_best,
                }
            })
            .collect();
        Leaderboard::ranked(stage, levels.to_vec(), standings)
    }

    /// A board from bare totals, one group, as in published result tables.
    pub fn from_totals(stage: &str, totals: &[(&str, i64)]) -> Leaderboard {
        let standings = totals
            .iter()
            .map(|&(agent, total)| Standing {
                rank: 0,
                agent: agent.to_string(),
                group: 0,
                combined: total,
                max_single: 0,
                solved: 0,
                level_best: Vec::new(),
            })
            .collect();
        Leaderboard::ranked(stage, Vec::new(), standings)
    }

    fn ranked(stage: &str, levels: Vec<String>, mut standings: Vec<Standing>) -> Leaderboard {
        standings.sort_by(rank_cmp);
        for (i, s) in standings.iter_mut().enumerate() {
            s.rank = i + 1;
        }
        Leaderboard {
            stage: stage.to_string(),
            levels,
            complete: true,
            standings,
        }
    }

    pub fn get(&self, agent: &str) -> Option<&Standing> {
        self.standings.iter().find(|s| s.agent == agent)
    }

    pub fn groups(&self) -> Vec<u32> {
        let mut g: Vec<u32> = self.standings.iter().map(|s| s.group).collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    /// Standings of one group, in rank order.
    pub fn group(&self, group: u32) -> Vec<&Standing> {
        self.standings.iter().filter(|s| s.group == group).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("leaderboard serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MvmRow {
    pub name: String,
    pub human: bool,
    pub total: i64,
}

/// Agents and human players on one table, highest total first. Humans win
/// ties.
pub fn mvm_table(agents: &Leaderboard, humans: &[(&str, i64)]) -> Vec<MvmRow> {
    let mut rows: Vec<MvmRow> = agents
        .standings
        .iter()
        .map(|s| MvmRow {
            name: s.agent.clone(),
            human: false,
            total: s.combined,
        })
        .chain(humans.iter().map(|&(name, total)| MvmRow {
            name: name.to_string(),
            human: true,
            total,
        }))
        .collect();
    rows.sort_by(|a, b| {
        b.total
            .cmp(&a.total)
            .then(b.human.cmp(&a.human))
            .then(a.name.cmp(&b.name))
    });
    rows
}
