use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Who may see whose high scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Group,
    Global,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelBest {
    pub level: usize,
    pub best: i64,
    /// Agent holding the best score, absent when nobody has solved it.
    pub holder: Option<String>,
}

/// Best solved score per (agent, level). Updates only ever raise a value,
/// so merges commute.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestTable {
    scores: BTreeMap<String, BTreeMap<usize, i64>>,
}

impl BestTable {
    pub fn merge(&mut self, agent: &str, level: usize, score: i64) -> i64 {
        let slot = self
            .scores
            .entry(agent.to_string())
            .or_default()
            .entry(level)
            .or_insert(score);
        *slot = (*slot).max(score);
        *slot
    }

    pub fn get(&self, agent: &str, level: usize) -> Option<i64> {
        self.scores.get(agent).and_then(|m| m.get(&level)).copied()
    }

    pub fn combined(&self, agent: &str) -> i64 {
        self.scores.get(agent).map_or(0, |m| m.values().sum())
    }

    /// Highest single-level score of an agent; used to break ties.
    pub fn max_single(&self, agent: &str) -> i64 {
        self.scores
            .get(agent)
            .and_then(|m| m.values().max().copied())
            .unwrap_or(0)
    }

    pub fn agents(&self) -> impl Iterator<Item = &String> {
        self.scores.keys()
    }

    /// Per-level best among the agents `viewer` is allowed to see.
    pub fn visible_best(
        &self,
        viewer: &str,
        scope: Visibility,
        groups: &BTreeMap<String, u32>,
        levels: usize,
    ) -> Vec<LevelBest> {
        let viewer_group = groups.get(viewer);
        let visible = |agent: &str| match scope {
            Visibility::Global => true,
            Visibility::Group => agent == viewer || (viewer_group.is_some() && groups.get(agent) == viewer_group),
        };
        (0..levels)
            .map(|level| {
                let mut best = LevelBest {
                    level,
                    best: 0,
                    holder: None,
                };
                for (agent, m) in &self.scores {
                    if !visible(agent) {
                        continue;
                    }
                    if let Some(&s) = m.get(&level) {
                        if best.holder.is_none() || s > best.best {
                            best.best = s;
                            best.holder = Some(agent.clone());
                        }
                    }
                }
                best
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn merge_keeps_maximum() {
        let mut t = BestTable::default();
        assert_eq!(t.merge("a", 0, 8000), 8000);
        assert_eq!(t.merge("a", 0, 12000), 12000);
        assert_eq!(t.merge("a", 0, 5000), 12000);
        assert_eq!(t.combined("a"), 12000);
    }

    proptest! {
        #[test]
        fn group_scope_never_leaks(
            assignment in prop::collection::vec(0u32..3, 2..8),
            scores in prop::collection::vec((0usize..8, 0usize..4, 0i64..100_000), 0..40),
        ) {
            let agents: Vec<String> = (0..assignment.len()).map(|i| format!("agent{i}")).collect();
            let groups: BTreeMap<String, u32> = agents.iter().cloned().zip(assignment.iter().copied()).collect();
            let mut t = BestTable::default();
            for (a, level, s) in &scores {
                if *a < agents.len() {
                    t.merge(&agents[*a], *level, *s);
                }
            }
            for viewer in &agents {
                for lb in t.visible_best(viewer, Visibility::Group, &groups, 4) {
                    if let Some(h) = &lb.holder {
                        prop_assert_eq!(groups[h], groups[viewer]);
                    }
                    let oracle = agents
                        .iter()
                        .filter(|a| groups[*a] == groups[viewer])
                        .filter_map(|a| t.get(a, lb.level))
                        .max()
                        .unwrap_or(0);
                    prop_assert_eq!(lb.best, oracle);
                }
            }
        }
    }
}
