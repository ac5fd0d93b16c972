use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::BodyKind;
use crate::physics::{DamageEvent, DamageKind};

/// Point values for an attempt. These are this project's choice; only the
/// two scoring bases (damage and birds left) are fixed by the game.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub pig: i64,
    pub block_destroyed: i64,
    pub block_damaged: i64,
    pub tnt: i64,
    pub bird_bonus: i64,
}

impl Default for ScoreTable {
    fn default() -> Self {
        ScoreTable {
            pig: 5000,
            block_destroyed: 500,
            block_damaged: 200,
            tnt: 1000,
            bird_bonus: 10000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptScore {
    pub damage_points: i64,
    pub pigs_killed: u32,
    pub birds_remaining: u32,
    pub solved: bool,
    pub total: i64,
}

pub fn score_attempt(
    events: &[DamageEvent],
    birds_remaining: u32,
    solved: bool,
    table: &ScoreTable,
) -> AttemptScore {
    let mut damage = 0;
    let mut pigs = 0;
    let mut damaged = BTreeSet::new();
    let mut destroyed = BTreeSet::new();
    for e in events {
        match (e.kind, e.subject_kind) {
            (DamageKind::PigKilled, _) => {
                pigs += 1;
                damage += table.pig;
            }
            (DamageKind::TntDetonated, _) => damage += table.tnt,
            (DamageKind::Destroyed, BodyKind::Block) => {
                destroyed.insert(e.subject);
                damage += table.block_destroyed;
            }
            (DamageKind::Damaged, BodyKind::Block) => {
                damaged.insert(e.subject);
            }
            _ => {}
        }
    }
    damage += table.block_damaged * damaged.difference(&destroyed).count() as i64;
    let bonus = if solved {
        table.bird_bonus * birds_remaining as i64
    } else {
        0
    };
    AttemptScore {
        damage_points: damage,
        pigs_killed: pigs,
        birds_remaining,
        solved,
        total: damage + bonus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObjectId;
    use proptest::prelude::*;

    fn ev(subject: u32, subject_kind: BodyKind, kind: DamageKind) -> DamageEvent {
        DamageEvent {
            step: 0,
            subject: ObjectId(subject),
            subject_kind,
            kind,
            amount: 1.0,
        }
    }

    fn sample_log() -> Vec<DamageEvent> {
        let mut log = Vec::new();
        for p in [1, 2] {
            log.push(ev(p, BodyKind::Pig, DamageKind::Damaged));
            log.push(ev(p, BodyKind::Pig, DamageKind::PigKilled));
        }
        for b in [3, 4, 5] {
            log.push(ev(b, BodyKind::Block, DamageKind::Damaged));
            log.push(ev(b, BodyKind::Block, DamageKind::Destroyed));
        }
        log
    }

    #[test]
    fn empty_unsolved_is_zero() {
        assert_eq!(score_attempt(&[], 3, false, &ScoreTable::default()).total, 0);
    }

    #[test]
    fn solved_with_bonus() {
        let s = score_attempt(&sample_log(), 1, true, &ScoreTable::default());
        assert_eq!(s.total, 21500);
        assert_eq!(s.pigs_killed, 2);
    }

    #[test]
    fn bonus_only_when_solved() {
        assert_eq!(score_attempt(&sample_log(), 1, false, &ScoreTable::default()).total, 11500);
    }

    #[test]
    fn damaged_block_counts_once() {
        let log = vec![
            ev(7, BodyKind::Block, DamageKind::Damaged),
            ev(7, BodyKind::Block, DamageKind::Damaged),
            ev(8, BodyKind::Tnt, DamageKind::Damaged),
            ev(8, BodyKind::Tnt, DamageKind::TntDetonated),
        ];
        assert_eq!(score_attempt(&log, 0, false, &ScoreTable::default()).total, 1200);
    }

    fn arb_log(ids: std::ops::Range<u32>) -> impl Strategy<Value = Vec<DamageEvent>> {
        let kinds = prop_oneof![
            Just((BodyKind::Pig, DamageKind::PigKilled)),
            Just((BodyKind::Block, DamageKind::Destroyed)),
            Just((BodyKind::Block, DamageKind::Damaged)),
            Just((BodyKind::Tnt, DamageKind::TntDetonated)),
        ];
        prop::collection::vec((ids, kinds), 0..20).prop_map(|v| {
            let mut seen = BTreeSet::new();
            v.into_iter()
                .filter(|(id, (_, k))| *k == DamageKind::Damaged || seen.insert(*id))
                .map(|(id, (sk, k))| ev(id, sk, k))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn disjoint_logs_add(a in arb_log(1..50), b in arb_log(50..100)) {
            let t = ScoreTable::default();
            let joined: Vec<_> = a.iter().chain(&b).cloned().collect();
            let sum = score_attempt(&a, 0, false, &t).total + score_attempt(&b, 0, false, &t).total;
            prop_assert_eq!(score_attempt(&joined, 0, false, &t).total, sum);
        }
    }
}
