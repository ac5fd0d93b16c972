use birdbench_core::game::{Agent, GameInfo, Shot};
use birdbench_core::model::{BirdType, BodyKind, Material, ObjectId};
use birdbench_core::percept::Percept;

use crate::planning::{Branch, Planner};
use crate::tap::{tap_for, TapPolicy};

/// Cost of passing through one block of `material` with `bird`. Materials
/// the bird is strong against cost nothing; otherwise a base cost (stone
/// is three times harder than wood or ice) divided by the bird's
/// effectiveness.
pub fn penalty(bird: BirdType, material: Material) -> f64 {
    let base = match material {
        Material::Wood | Material::Ice => 1.0,
        Material::Stone => 3.0,
        Material::None => return 0.0,
    };
    let eff = bird.effectiveness(material);
    if eff >= 2.0 {
        0.0
    } else {
        base / eff
    }
}

/// Blocks of each material crossed before the target.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BlockCounts {
    pub wood: u32,
    pub ice: u32,
    pub stone: u32,
}

impl BlockCounts {
    pub fn utility(&self, bird: BirdType) -> f64 {
        self.wood as f64 * penalty(bird, Material::Wood)
            + self.ice as f64 * penalty(bird, Material::Ice)
            + self.stone as f64 * penalty(bird, Material::Stone)
    }
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub target: ObjectId,
    pub branch: Branch,
    pub counts: BlockCounts,
    pub penalty: f64,
    pub shot: Shot,
}

/// Scores every pig and TNT on both branches. Paths that meet the ground
/// before the target are dropped.
pub fn candidates(percept: &Percept, info: &GameInfo) -> Vec<Candidate> {
    let planner = Planner::new(percept, info);
    let bird = percept.current_bird.unwrap_or(BirdType::Red);
    let mut out = Vec::new();
    let mut targets: Vec<_> = planner
        .objects()
        .filter(|o| matches!(o.kind, BodyKind::Pig | BodyKind::Tnt))
        .collect();
    targets.sort_by_key(|o| o.id);
    for t in targets {
        for branch in Branch::BOTH {
            let Some(aim) = planner.aim_at_object(t, branch) else {
                continue;
            };
            let hits = planner.blockers(&aim);
            let mut counts = BlockCounts::default();
            let mut grounded = false;
            for h in &hits {
                match planner.kind_of(h.id) {
                    Some(BodyKind::Terrain) => grounded = true,
                    Some(BodyKind::Block) => match planner.scene_object(h.id).map(|o| o.material) {
                        Some(Material::Wood) => counts.wood += 1,
                        Some(Material::Ice) => counts.ice += 1,
                        Some(Material::Stone) => counts.stone += 1,
                        _ => {}
                    },
                    _ => {}
                }
            }
            if grounded {
                continue;
            }
            let obstacle = planner.time_to_first_obstacle(&aim);
            out.push(Candidate {
                target: t.id,
                branch,
                counts,
                penalty: counts.utility(bird),
                shot: Shot::new(
                    aim.angle,
                    1.0,
                    tap_for(bird, TapPolicy::FirstObstacle, aim.time, obstacle),
                    format!("blocking:{}:{:?}", t.id.0, branch).to_lowercase(),
                ),
            });
        }
    }
    out
}

/// Chooses the least obstructed pig or TNT for the current bird.
#[derive(Default)]
pub struct BlockingAgent;

impl BlockingAgent {
    pub fn new() -> BlockingAgent {
        BlockingAgent
    }
}

impl Agent for BlockingAgent {
    fn name(&self) -> &str {
        "blocking"
    }

    fn select_shot(&mut self, percept: &Percept, info: &GameInfo) -> Shot {
        let best = candidates(percept, info).into_iter().min_by(|a, b| {
            a.penalty
                .total_cmp(&b.penalty)
                .then(a.branch.cmp(&b.branch))
                .then(a.target.cmp(&b.target))
        });
        match best {
            Some(c) => c.shot,
            None => Shot::new(std::f64::consts::FRAC_PI_4, 1.0, 0, "blocking:fallback"),
        }
    }
}
