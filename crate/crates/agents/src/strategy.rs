use std::collections::{BTreeMap, BTreeSet};

use birdbench_core::game::{Agent, GameInfo, Shot};
use birdbench_core::geometry::{find_supporters, obstructions_before_target, Aabb, PathHit};
use birdbench_core::model::{BirdType, BodyKind, Material, ObjectId, TERRAIN_ID};
use birdbench_core::percept::{Percept, PerceptObject};
use birdbench_core::physics::Shape;

use crate::planning::{Aim, Branch, Planner};
use crate::tap::{tap_for, TapPolicy};

/// The shot generators, in tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    MultiPig,
    Tnt,
    SupportCollapse,
    HighRound,
    Direct,
}

impl Strategy {
    pub fn tag(self) -> &'static str {
        match self {
            Strategy::MultiPig => "multi-pig",
            Strategy::Tnt => "tnt",
            Strategy::SupportCollapse => "support-collapse",
            Strategy::HighRound => "high-round",
            Strategy::Direct => "direct",
        }
    }
}

/// Utility weights. Hand-set; there is no training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weights {
    pub multi_pig: f64,
    pub tnt_pig: f64,
    pub tnt_stone: f64,
    pub tnt_chain: f64,
    pub support_pig: f64,
    pub high_round_pig: f64,
    pub direct: f64,
    /// Horizontal reach of a falling round block.
    pub round_reach: f64,
}

pub const WEIGHTS: Weights = Weights {
    multi_pig: 1.0,
    tnt_pig: 0.9,
    tnt_stone: 0.3,
    tnt_chain: 0.5,
    support_pig: 0.8,
    high_round_pig: 0.7,
    direct: 1.0,
    round_reach: 10.0,
};

#[derive(Clone, Debug)]
pub struct StrategyScore {
    pub strategy: Strategy,
    pub target: ObjectId,
    pub branch: Branch,
    pub shot: Shot,
    pub utility: f64,
    /// Nothing but pigs lies between the sling and the target.
    pub clear: bool,
}

struct Eval<'a> {
    planner: Planner<'a>,
    bird: BirdType,
    weights: Weights,
    tnt_radius: f64,
    out: Vec<StrategyScore>,
}

impl<'a> Eval<'a> {
    fn push(&mut self, strategy: Strategy, target: &PerceptObject, utility: f64) {
        for branch in Branch::BOTH {
            if let Some(aim) = self.planner.aim_at_object(target, branch) {
                self.push_aim(strategy, aim, utility);
            }
        }
    }

    fn push_aim(&mut self, strategy: Strategy, aim: Aim, utility: f64) {
        let blockers = self.planner.blockers(&aim);
        if blockers.iter().any(|h| h.id == TERRAIN_ID) {
            return;
        }
        let clear = blockers
            .iter()
            .all(|h| self.planner.kind_of(h.id) == Some(BodyKind::Pig));
        let tap = tap_for(self.bird, TapPolicy::TotalLength, aim.time, None);
        let rationale = format!("{}:{}", strategy.tag(), aim.target.0);
        self.out.push(StrategyScore {
            strategy,
            target: aim.target,
            branch: aim.branch,
            shot: Shot::new(aim.angle, 1.0, tap, rationale),
            utility,
            clear,
        });
    }

    /// Everything the path crosses before it reaches the ground.
    fn hits_to_ground(&self, aim: &Aim) -> Vec<PathHit> {
        obstructions_before_target(&self.planner.path(aim.angle), &self.planner.scene, TERRAIN_ID).unwrap_or_default()
    }

    fn multi_pig(&mut self) {
        let pigs: Vec<PerceptObject> = self.planner.pigs().into_iter().cloned().collect();
        for p in &pigs {
            for branch in Branch::BOTH {
                let Some(aim) = self.planner.aim_at_object(p, branch) else {
                    continue;
                };
                let n = self
                    .hits_to_ground(&aim)
                    .iter()
                    .take_while(|h| self.planner.kind_of(h.id) == Some(BodyKind::Pig))
                    .count();
                if n >= 2 {
                    let u = self.weights.multi_pig * n as f64;
                    self.push_aim(Strategy::MultiPig, aim, u);
                }
            }
        }
    }

    fn tnt(&mut self) {
        let objects: Vec<PerceptObject> = self.planner.objects().cloned().collect();
        for t in objects.iter().filter(|o| o.kind == BodyKind::Tnt) {
            let c = self.planner.center(t);
            let near = |o: &&PerceptObject| o.id != t.id && self.planner.center(o).distance(c) < self.tnt_radius;
            let pigs = objects.iter().filter(near).filter(|o| o.kind == BodyKind::Pig).count();
            let stones = objects.iter().filter(near).filter(|o| o.material == Material::Stone).count();
            let chain = objects.iter().filter(near).filter(|o| o.kind == BodyKind::Tnt).count();
            let u = self.weights.tnt_pig * pigs as f64
                + self.weights.tnt_stone * stones as f64
                + self.weights.tnt_chain * chain as f64;
            if pigs > 0 {
                self.push(Strategy::Tnt, t, u);
            }
        }
    }

    fn support_collapse(&mut self) {
        let scene = &self.planner.scene;
        let mut resting_on: BTreeMap<ObjectId, BTreeSet<ObjectId>> = BTreeMap::new();
        for o in scene.iter().filter(|o| o.kind != BodyKind::Terrain) {
            if let Ok(sup) = find_supporters(o.id, scene) {
                for s in sup {
                    resting_on.entry(s).or_default().insert(o.id);
                }
            }
        }
        let objects: Vec<PerceptObject> = self.planner.objects().cloned().collect();
        let pigs: Vec<&PerceptObject> = objects.iter().filter(|o| o.kind == BodyKind::Pig).collect();
        let mut pending = Vec::new();
        for w in objects
            .iter()
            .filter(|o| o.kind == BodyKind::Block && matches!(o.material, Material::Wood | Material::Ice))
        {
            let mut load = BTreeSet::new();
            let mut stack = vec![w.id];
            while let Some(id) = stack.pop() {
                for &above in resting_on.get(&id).into_iter().flatten() {
                    if load.insert(above) {
                        stack.push(above);
                    }
                }
            }
            let load_blocks: Vec<_> = scene
                .iter()
                .filter(|o| load.contains(&o.id) && o.kind == BodyKind::Block)
                .collect();
            if load_blocks.is_empty() {
                continue;
            }
            let bbox = load_blocks.iter().fold(Aabb::EMPTY, |acc, o| acc.union(o.aabb));
            let reach = bbox.height();
            let threatened = pigs
                .iter()
                .filter(|p| {
                    let c = self.planner.center(p);
                    load.contains(&p.id)
                        || (c.y < bbox.max.y && c.x > bbox.min.x - reach && c.x < bbox.max.x + reach)
                })
                .count();
            if threatened > 0 {
                pending.push((w.clone(), self.weights.support_pig * threatened as f64));
            }
        }
        for (w, u) in pending {
            self.push(Strategy::SupportCollapse, &w, u);
        }
    }

    fn high_round(&mut self) {
        let objects: Vec<PerceptObject> = self.planner.objects().cloned().collect();
        let pigs: Vec<&PerceptObject> = objects.iter().filter(|o| o.kind == BodyKind::Pig).collect();
        for r in objects
            .iter()
            .filter(|o| o.kind == BodyKind::Block && matches!(o.shape, Shape::Circle { .. }))
        {
            let rc = self.planner.center(r);
            let below = pigs
                .iter()
                .filter(|p| {
                    let c = self.planner.center(p);
                    c.y < rc.y && (c.x - rc.x).abs() < self.weights.round_reach
                })
                .count();
            if below > 0 {
                let u = self.weights.high_round_pig * below as f64;
                self.push(Strategy::HighRound, r, u);
            }
        }
    }

    fn direct(&mut self) {
        let pigs: Vec<PerceptObject> = self.planner.pigs().into_iter().cloned().collect();
        for p in &pigs {
            self.push(Strategy::Direct, p, self.weights.direct);
        }
    }
}

/// Every candidate from the five generators. Direct shots at pigs are
/// always generated, so there is a candidate whenever a pig is reachable.
pub fn evaluate(percept: &Percept, info: &GameInfo, weights: Weights) -> Vec<StrategyScore> {
    let mut e = Eval {
        planner: Planner::new(percept, info),
        bird: percept.current_bird.unwrap_or(BirdType::Red),
        weights,
        tnt_radius: info.physics.tnt_blast.radius,
        out: Vec::new(),
    };
    e.multi_pig();
    e.tnt();
    e.support_collapse();
    e.high_round();
    e.direct();
    e.out
}

/// Highest utility, restricted to clear paths when any exist. Ties go to
/// the earlier strategy, then the smaller target id, then the low branch.
pub fn choose(scores: &[StrategyScore]) -> Option<&StrategyScore> {
    let any_clear = scores.iter().any(|s| s.clear);
    scores.iter().filter(|s| s.clear || !any_clear).min_by(|a, b| {
        b.utility
            .total_cmp(&a.utility)
            .then(a.strategy.cmp(&b.strategy))
            .then(a.target.cmp(&b.target))
            .then(a.branch.cmp(&b.branch))
    })
}

/// Picks among pig, TNT, structural and round-object shots by estimated
/// utility.
pub struct StrategyAgent {
    weights: Weights,
}

impl Default for StrategyAgent {
    fn default() -> Self {
        StrategyAgent { weights: WEIGHTS }
    }
}

impl StrategyAgent {
    pub fn new() -> StrategyAgent {
        StrategyAgent::default()
    }

    pub fn with_weights(weights: Weights) -> StrategyAgent {
        StrategyAgent { weights }
    }
}

impl Agent for StrategyAgent {
    fn name(&self) -> &str {
        "strategy"
    }

    fn select_shot(&mut self, percept: &Percept, info: &GameInfo) -> Shot {
        let scores = evaluate(percept, info, self.weights);
        match choose(&scores) {
            Some(s) => s.shot.clone(),
            None => Shot::new(std::f64::consts::FRAC_PI_4, 1.0, 0, "strategy:fallback"),
        }
    }
}
