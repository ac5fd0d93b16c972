use serde::{Deserialize, Serialize};

use crate::leaderboard::{Leaderboard, Standing};
use crate::stage::StageKind;
use crate::TournamentError;

pub const SEMIFINAL_SIZE: usize = 4;
pub const FINAL_SIZE: usize = 2;

/// Agents level on combined score whose order was settled by a tie-break.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieBreak {
    pub combined: i64,
    /// In the order the tie-break put them.
    pub agents: Vec<String>,
    /// `max-single` or `agent-id`.
    pub decided_by: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Advance {
    pub from: StageKind,
    pub to: Option<StageKind>,
    /// Groups of the next stage, best seed first.
    pub groups: Vec<Vec<String>>,
    pub champion: Option<String>,
    pub tie_breaks: Vec<TieBreak>,
}

/// Number of groups for `n` agents: as few as possible with every group
/// holding 3 or 4 agents, or a single group when no such split exists.
pub fn group_count(n: usize) -> usize {
    let g = n.div_ceil(4);
    if g >= 1 && 3 * g <= n {
        g
    } else {
        1
    }
}

/// Deals ranked agents into `groups` groups in the order 0, 1, .., g-1,
/// g-1, .., 0, 0, 1, ..
pub fn snake_seed(ranked: &[String], groups: usize) -> Vec<Vec<String>> {
    let g = groups.max(1);
    let mut out = vec![Vec::new(); g];
    for (i, a) in ranked.iter().enumerate() {
        let lap = i / g;
        let k = i % g;
        let idx = if lap.is_multiple_of(2) { k } else { g - 1 - k };
        out[idx].push(a.clone());
    }
    out
}

/// Tie-breaks among the leading `take` standings, including ties that
/// straddle the cut.
fn tie_breaks(standings: &[Standing], take: usize) -> Vec<TieBreak> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < standings.len() && i < take {
        let j = standings[i..]
            .iter()
            .position(|s| s.combined != standings[i].combined)
            .map_or(standings.len(), |p| i + p);
        if j - i > 1 {
            let run = &standings[i..j];
            let by_single = run.windows(2).all(|w| w[0].max_single != w[1].max_single);
            out.push(TieBreak {
                combined: standings[i].combined,
                agents: run.iter().map(|s| s.agent.clone()).collect(),
                decided_by: if by_single { "max-single" } else { "agent-id" }.to_string(),
            });
        }
        i = j;
    }
    out
}

/// Who goes through from a finished stage, and into which groups.
///
/// Qualification seeds the quarter-final groups by snake order over the
/// qualification ranking; the quarter-final sends the top four across all
/// groups to the semi-final; the semi-final sends the top two to the grand
/// final; the grand final names the champion.
pub fn advance(stage: StageKind, board: &Leaderboard) -> Result<Advance, TournamentError> {
    if !board.complete {
        return Err(TournamentError::StageNotComplete(stage.to_string()));
    }
    let ranked: Vec<String> = board.standings.iter().map(|s| s.agent.clone()).collect();
    let (groups, take) = match stage {
        StageKind::Qualification => {
            let g = group_count(ranked.len());
            (snake_seed(&ranked, g), ranked.len())
        }
        StageKind::Quarterfinal => {
            let k = SEMIFINAL_SIZE.min(ranked.len());
            (vec![ranked[..k].to_vec()], k)
        }
        StageKind::Semifinal => {
            let k = FINAL_SIZE.min(ranked.len());
            (vec![ranked[..k].to_vec()], k)
        }
        _ => (Vec::new(), 1.min(ranked.len())),
    };
    let ties = tie_breaks(&board.standings, take);
    for t in &ties {
        log::info!(
            "{stage}: {} tied on {}, ordered by {}",
            t.agents.join(", "),
            t.combined,
            t.decided_by
        );
    }
    let champion = match stage {
        StageKind::Grandfinal => ranked.first().cloned(),
        _ => None,
    };
    Ok(Advance {
        from: stage,
        to: stage.next(),
        groups,
        champion,
        tie_breaks: ties,
    })
}
