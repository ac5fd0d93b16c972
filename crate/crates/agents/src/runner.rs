use birdbench_core::game::Agent;
use birdbench_core::percept::LevelState;
use birdbench_server::ErrorCode;

use crate::client::{Client, ClientError, MyScore};
use crate::policy::LevelPolicy;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PlayStats {
    pub levels_loaded: u32,
    pub shots: u32,
}

fn round_over(e: &ClientError) -> bool {
    e.code() == Some(ErrorCode::RoundClosed)
}

/// Plays until the round closes or the policy stops, then returns the
/// server's final account of the agent's scores.
///
/// Each visit plays one attempt: load, then observe and shoot until the
/// level is solved or lost.
pub fn play(
    client: &mut Client,
    agent: &mut dyn Agent,
    policy: &mut dyn LevelPolicy,
) -> Result<(MyScore, PlayStats), ClientError> {
    let info = client.info().clone();
    let mut stats = PlayStats::default();
    let mut last = client.my_score()?;
    'visits: while let Some(level) = policy.next_level(&last) {
        match client.load_level(level) {
            Ok(l) => policy.observe_level(level, l.birds.len(), l.pigs),
            Err(e) if round_over(&e) => break,
            Err(e) => return Err(e),
        }
        stats.levels_loaded += 1;
        loop {
            let percept = match client.get_state() {
                Ok(p) => p,
                Err(e) if round_over(&e) => break 'visits,
                Err(e) => return Err(e),
            };
            if percept.level_state != LevelState::Playing {
                break;
            }
            let shot = agent.select_shot(&percept, &info);
            match client.shoot(&shot) {
                Ok(o) => {
                    stats.shots += 1;
                    log::debug!("{} level {level}: {} -> {:?}", agent.name(), shot.rationale, o.level_state);
                    if o.level_state != LevelState::Playing {
                        break;
                    }
                }
                Err(e) if round_over(&e) => break 'visits,
                Err(e) => return Err(e),
            }
        }
        match client.my_score() {
            Ok(s) => last = s,
            Err(e) if round_over(&e) => break,
            Err(e) => return Err(e),
        }
    }
    match client.my_score() {
        Ok(s) => Ok((s, stats)),
        Err(e) if round_over(&e) => Ok((last, stats)),
        Err(e) => Err(e),
    }
}
