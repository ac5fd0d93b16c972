use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::body::{Body, BodyMaterial, Shape};
use super::collide::{collide_parts, Manifold, WorldManifold};
use super::damage::{breaking_impulse, compute_damage, DamageEvent, DamageKind};
use super::solver::{Constraint, SolverBody};
use super::{Blast, PhysicsConfig};
use crate::geometry::{Aabb, Vec2};
use crate::model::{Ability, BirdType, BodyKind, Material, ObjectId};

const MAX_TRANSLATION: f64 = 2.0;
const MAX_ROTATION: f64 = 0.5 * std::f64::consts::PI;
const WARM_MATCH_DISTANCE: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhysicsError {
    #[error("no birds left")]
    OutOfBirds,
    #[error("illegal action: {0}")]
    IllegalAction(&'static str),
}

/// The bird launched by the current shot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActiveBird {
    pub id: ObjectId,
    pub bird: BirdType,
    pub armed: bool,
    pub launch_step: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct ContactKey {
    a: ObjectId,
    b: ObjectId,
    part_a: u16,
    part_b: u16,
}

#[derive(Clone, Copy, Debug, Default)]
struct CachedPoint {
    id: u32,
    point: Vec2,
    normal: f64,
    tangent: f64,
}

#[derive(Clone, Debug)]
struct Contact {
    key: ContactKey,
    manifold: Manifold,
}

#[derive(Clone, Copy, Debug)]
struct PendingBlast {
    center: Vec2,
    blast: Blast,
    bird: Option<BirdType>,
    source: ObjectId,
}

/// Mutable physics state of one game instance.
#[derive(Clone, Debug)]
pub struct World {
    config: Arc<PhysicsConfig>,
    width: f64,
    height: f64,
    launch_point: Vec2,
    bodies: Vec<Body>,
    next_id: u32,
    birds_queue: VecDeque<BirdType>,
    active: Option<ActiveBird>,
    scheduled_tap: Option<u64>,
    step_index: u64,
    events: Vec<DamageEvent>,
    cache: BTreeMap<ContactKey, [CachedPoint; 2]>,
    last_min_separation: Vec<(ObjectId, ObjectId, f64)>,
}

impl World {
    pub fn new(
        config: Arc<PhysicsConfig>,
        width: f64,
        height: f64,
        launch_point: Vec2,
        birds: Vec<BirdType>,
    ) -> World {
        World {
            config,
            width,
            height,
            launch_point,
            bodies: Vec::new(),
            next_id: 1,
            birds_queue: birds.into(),
            active: None,
            scheduled_tap: None,
            step_index: 0,
            events: Vec::new(),
            cache: BTreeMap::new(),
            last_min_separation: Vec::new(),
        }
    }

    pub fn config(&self) -> &PhysicsConfig {
        &self.config
    }

    pub fn shared_config(&self) -> Arc<PhysicsConfig> {
        Arc::clone(&self.config)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn launch_point(&self) -> Vec2 {
        self.launch_point
    }

    /// Inserts a body, keeping the collection ordered by id.
    pub fn add_body(&mut self, body: Body) {
        self.next_id = self.next_id.max(body.id.0 + 1);
        let at = self.bodies.partition_point(|b| b.id < body.id);
        assert!(
            self.bodies.get(at).is_none_or(|b| b.id != body.id),
            "duplicate body id {}",
            body.id
        );
        self.bodies.insert(at, body);
    }

    fn fresh_id(&mut self) -> ObjectId {
        let id = ObjectId(self.next_id);
        self.next_id += 1;
        id
    }

    pub fn bodies(&self) -> &[Body] {
        &self.bodies
    }

    pub fn body(&self, id: ObjectId) -> Option<&Body> {
        self.index_of(id).map(|i| &self.bodies[i])
    }

    pub fn body_mut(&mut self, id: ObjectId) -> Option<&mut Body> {
        self.index_of(id).map(|i| &mut self.bodies[i])
    }

    fn index_of(&self, id: ObjectId) -> Option<usize> {
        self.bodies.binary_search_by(|b| b.id.cmp(&id)).ok()
    }

    pub fn birds_queue(&self) -> &VecDeque<BirdType> {
        &self.birds_queue
    }

    pub fn active_bird(&self) -> Option<&ActiveBird> {
        self.active.as_ref()
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.config.dt
    }

    pub fn events(&self) -> &[DamageEvent] {
        &self.events
    }

    pub fn living_pigs(&self) -> usize {
        self.bodies.iter().filter(|b| b.kind == BodyKind::Pig).count()
    }

    /// Largest linear speed over all dynamic bodies.
    pub fn max_speed(&self) -> f64 {
        self.bodies
            .iter()
            .filter(|b| !b.is_static())
            .map(Body::speed)
            .fold(0.0, f64::max)
    }

    fn all_calm(&self, v_eps: f64) -> bool {
        self.bodies
            .iter()
            .filter(|b| !b.is_static() && b.awake)
            .all(|b| b.speed() < v_eps && b.ang_vel.abs() < v_eps)
    }

    /// Places the front bird at the launch point with the given velocity.
    pub fn launch_bird(&mut self, angle: f64, speed_fraction: f64) -> Result<ObjectId, PhysicsError> {
        if self.active.is_some() {
            return Err(PhysicsError::IllegalAction("a bird is already in flight"));
        }
        if !(angle.is_finite() && speed_fraction.is_finite()) || !(0.0..=1.0).contains(&speed_fraction) {
            return Err(PhysicsError::IllegalAction("launch parameters out of range"));
        }
        let bird = self.birds_queue.pop_front().ok_or(PhysicsError::OutOfBirds)?;
        let id = self.fresh_id();
        let props = *self.config.birds.get(bird);
        let mut body = Body::dynamic(
            id,
            BodyKind::Bird,
            Material::None,
            Shape::Circle { r: props.radius },
            self.launch_point,
            0.0,
            BodyMaterial {
                density: props.density,
                friction: props.friction,
                restitution: props.restitution,
            },
            f64::INFINITY,
        );
        body.bird = Some(bird);
        body.vel = Vec2::from_angle(angle) * (speed_fraction * self.config.launch_speed);
        body.half_kick = true;
        self.add_body(body);
        self.active = Some(ActiveBird {
            id,
            bird,
            armed: bird.ability() != Ability::None,
            launch_step: self.step_index,
        });
        self.scheduled_tap = None;
        Ok(id)
    }

    /// Arranges for the ability to fire `delay` seconds after launch.
    pub fn schedule_tap(&mut self, delay: f64) {
        if let Some(active) = &self.active {
            let steps = (delay / self.config.dt).round().max(0.0) as u64;
            self.scheduled_tap = Some(active.launch_step + steps);
        }
    }

    pub fn activate_ability(&mut self) -> Result<(), PhysicsError> {
        let active = self
            .active
            .ok_or(PhysicsError::IllegalAction("no bird in flight"))?;
        if !active.armed {
            return Err(PhysicsError::IllegalAction("ability already used"));
        }
        let Some(index) = self.index_of(active.id) else {
            return Err(PhysicsError::IllegalAction("bird no longer in play"));
        };
        let cfg = Arc::clone(&self.config);
        match active.bird.ability() {
            Ability::None => return Err(PhysicsError::IllegalAction("bird has no ability")),
            Ability::Split3 => {
                let original = self.bodies[index].clone();
                self.bodies[index].scale_mass(1.0 / 3.0);
                self.bodies[index].awake = true;
                let spread = cfg.split_angle_deg.to_radians();
                for turn in [-spread, spread] {
                    let mut child = original.clone();
                    child.id = self.fresh_id();
                    child.scale_mass(1.0 / 3.0);
                    child.vel = original.vel.rotated(crate::geometry::Rot::new(turn));
                    child.awake = true;
                    child.sleep_time = 0.0;
                    self.add_body(child);
                }
            }
            Ability::Boost => {
                let b = &mut self.bodies[index];
                b.vel *= cfg.boost_factor;
                b.awake = true;
            }
            Ability::Blast => {
                let center = self.bodies[index].pos;
                self.bodies.remove(index);
                self.detonate(PendingBlast {
                    center,
                    blast: cfg.black_blast,
                    bird: Some(BirdType::Black),
                    source: active.id,
                });
            }
            Ability::EggBomb => {
                let (pos, radius) = {
                    let b = &mut self.bodies[index];
                    b.vel = Vec2::new(b.vel.x, cfg.white_rebound_speed);
                    b.ang_vel = 0.0;
                    b.awake = true;
                    (b.pos, b.extent)
                };
                let id = self.fresh_id();
                let mut egg = Body::dynamic(
                    id,
                    BodyKind::Bird,
                    Material::None,
                    Shape::Circle { r: cfg.egg_radius },
                    pos - Vec2::new(0.0, radius + cfg.egg_radius + 0.05),
                    0.0,
                    BodyMaterial {
                        density: cfg.egg_density,
                        friction: 0.5,
                        restitution: 0.0,
                    },
                    f64::INFINITY,
                );
                egg.bird = Some(BirdType::White);
                egg.vel = Vec2::new(0.0, -cfg.egg_speed);
                egg.detonates_on_contact = true;
                self.add_body(egg);
            }
        }
        if let Some(a) = &mut self.active {
            a.armed = false;
        }
        Ok(())
    }

    /// Removes every bird body and clears the active bird; called once a
    /// shot has settled.
    pub fn end_shot(&mut self) {
        self.bodies.retain(|b| b.kind != BodyKind::Bird);
        self.active = None;
        self.scheduled_tap = None;
    }

    /// Steps until every body moves slower than `v_eps` for `k_steps`
    /// consecutive steps, or until `t_cap` seconds have been simulated.
    /// Returns the number of steps taken.
    pub fn settle(&mut self, v_eps: f64, k_steps: usize, t_cap: f64) -> usize {
        let cap = self.config.steps_for(t_cap);
        let mut calm = 0;
        let mut taken = 0;
        while taken < cap {
            self.step();
            taken += 1;
            if self.all_calm(v_eps) {
                calm += 1;
                if calm >= k_steps {
                    break;
                }
            } else {
                calm = 0;
            }
        }
        taken
    }

    /// Advances the world by one fixed step.
    pub fn step(&mut self) {
        let cfg = Arc::clone(&self.config);
        let dt = cfg.dt;

        if self.scheduled_tap == Some(self.step_index) {
            self.scheduled_tap = None;
            let _ = self.activate_ability();
        }

        // Velocity integration.
        for b in self.bodies.iter_mut() {
            if b.is_static() || !b.awake {
                continue;
            }
            let kick = if b.half_kick { 0.5 } else { 1.0 };
            b.half_kick = false;
            b.vel.y -= kick * cfg.gravity * dt;
            if cfg.linear_damping > 0.0 {
                b.vel *= 1.0 / (1.0 + dt * cfg.linear_damping);
            }
            b.ang_vel *= 1.0 / (1.0 + dt * cfg.angular_damping);
            if b.touching && matches!(b.shape, Shape::Circle { .. }) {
                let f = 1.0 / (1.0 + dt * cfg.rolling_damping);
                b.vel *= f;
                b.ang_vel *= f;
            }
        }

        let mut contacts = self.collide_with_wakes();
        for b in self.bodies.iter_mut() {
            b.touching = false;
        }
        for c in contacts.iter().filter(|c| c.manifold.count > 0) {
            for id in [c.key.a, c.key.b] {
                if let Some(i) = self.index_of(id) {
                    self.bodies[i].touching = true;
                }
            }
        }

        self.resolve_impacts(&mut contacts);

        // Contacts only survive if both bodies still exist.
        let mut bodies: Vec<SolverBody> = self
            .bodies
            .iter()
            .map(|b| SolverBody {
                v: b.vel,
                w: b.ang_vel,
                c: b.pos,
                a: b.angle,
                inv_mass: if b.awake || b.is_static() { b.inv_mass } else { 0.0 },
                inv_inertia: if b.awake || b.is_static() { b.inv_inertia } else { 0.0 },
            })
            .collect();

        let mut constraints = Vec::with_capacity(contacts.len());
        let mut keys = Vec::with_capacity(contacts.len());
        for c in &contacts {
            let (Some(a), Some(b)) = (self.index_of(c.key.a), self.index_of(c.key.b)) else {
                continue;
            };
            let (ba, bb) = (&self.bodies[a], &self.bodies[b]);
            let friction = (ba.friction * bb.friction).sqrt();
            let restitution = ba.restitution.max(bb.restitution);
            let mut warm = [(0.0, 0.0); 2];
            if let Some(old) = self.cache.get(&c.key) {
                // Aligned equal-width faces clip to the same points under
                // different feature ids from step to step, so fall back to
                // matching by position.
                let wm = WorldManifold::new(&c.manifold, &ba.transform(), &bb.transform());
                let live: Vec<&CachedPoint> = old.iter().filter(|o| o.normal != 0.0 || o.tangent != 0.0).collect();
                for (i, p) in c.manifold.points[..c.manifold.count].iter().enumerate() {
                    let hit = live.iter().find(|o| o.id == p.id).or_else(|| {
                        live.iter()
                            .filter(|o| o.point.distance(wm.points[i]) < WARM_MATCH_DISTANCE)
                            .min_by(|x, y| x.point.distance(wm.points[i]).total_cmp(&y.point.distance(wm.points[i])))
                    });
                    if let Some(hit) = hit {
                        warm[i] = (hit.normal, hit.tangent);
                    }
                }
            }
            constraints.push(Constraint::new(
                a,
                b,
                c.manifold,
                friction,
                restitution,
                warm,
                &bodies,
                &cfg,
            ));
            keys.push(c.key);
        }

        for c in &constraints {
            c.warm_start(&mut bodies);
        }
        for _ in 0..cfg.velocity_iterations {
            for c in &mut constraints {
                c.solve_velocity(&mut bodies);
            }
        }

        self.cache.clear();
        for (key, c) in keys.iter().zip(&constraints) {
            let mut pts = [CachedPoint::default(); 2];
            for i in 0..c.count {
                pts[i] = CachedPoint {
                    id: c.manifold.points[i].id,
                    point: bodies[c.a].c + c.points[i].r_a,
                    normal: c.points[i].normal_impulse,
                    tangent: c.points[i].tangent_impulse,
                };
            }
            self.cache.insert(*key, pts);
        }

        // Position integration.
        for (sb, b) in bodies.iter_mut().zip(&self.bodies) {
            if b.is_static() || !b.awake {
                continue;
            }
            let mut translation = sb.v * dt;
            if translation.length_squared() > MAX_TRANSLATION * MAX_TRANSLATION {
                let scale = MAX_TRANSLATION / translation.length();
                sb.v *= scale;
                translation *= scale;
            }
            let mut rotation = sb.w * dt;
            if rotation.abs() > MAX_ROTATION {
                let scale = MAX_ROTATION / rotation.abs();
                sb.w *= scale;
                rotation *= scale;
            }
            sb.c += translation;
            sb.a += rotation;
        }

        let mut min_seps = vec![0.0f64; constraints.len()];
        for _ in 0..cfg.position_iterations {
            for (c, ms) in constraints.iter().zip(min_seps.iter_mut()) {
                *ms = c.solve_position(&mut bodies, &cfg);
            }
        }
        self.last_min_separation = constraints
            .iter()
            .zip(&min_seps)
            .map(|(c, s)| (self.bodies[c.a].id, self.bodies[c.b].id, *s))
            .collect();

        for (sb, b) in bodies.iter().zip(self.bodies.iter_mut()) {
            if b.is_static() || !b.awake {
                continue;
            }
            b.vel = sb.v;
            b.ang_vel = sb.w;
            b.pos = sb.c;
            b.angle = sb.a;
        }

        self.update_sleep(&constraints);
        self.remove_out_of_bounds();
        self.step_index += 1;
    }

    /// Broadphase plus narrowphase. Sleeping bodies touched by awake ones
    /// are woken and the pass repeats until no further body wakes.
    fn collide_with_wakes(&mut self) -> Vec<Contact> {
        loop {
            let contacts = self.collide();
            let mut woke = false;
            for c in &contacts {
                let (Some(a), Some(b)) = (self.index_of(c.key.a), self.index_of(c.key.b)) else {
                    continue;
                };
                for (x, y) in [(a, b), (b, a)] {
                    let other_awake = self.bodies[y].awake && !self.bodies[y].is_static();
                    let me = &mut self.bodies[x];
                    if other_awake && !me.is_static() && !me.awake {
                        me.awake = true;
                        me.sleep_time = 0.0;
                        woke = true;
                    }
                }
            }
            if !woke {
                return contacts;
            }
        }
    }

    fn collide(&self) -> Vec<Contact> {
        let n = self.bodies.len();
        let boxes: Vec<Aabb> = self.bodies.iter().map(Body::loose_aabb).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            boxes[i]
                .min
                .x
                .total_cmp(&boxes[j].min.x)
                .then(self.bodies[i].id.cmp(&self.bodies[j].id))
        });
        let mut pairs = Vec::new();
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if boxes[j].min.x > boxes[i].max.x {
                    break;
                }
                if !boxes[i].overlaps(&boxes[j]) {
                    continue;
                }
                let (a, b) = if self.bodies[i].id < self.bodies[j].id { (i, j) } else { (j, i) };
                let (ba, bb) = (&self.bodies[a], &self.bodies[b]);
                if ba.kind == BodyKind::Bird && bb.kind == BodyKind::Bird {
                    continue;
                }
                let active_a = ba.awake && !ba.is_static();
                let active_b = bb.awake && !bb.is_static();
                if !(active_a || active_b) {
                    continue;
                }
                pairs.push((a, b));
            }
        }
        pairs.sort_unstable();

        let mut contacts = Vec::new();
        for (a, b) in pairs {
            let (ba, bb) = (&self.bodies[a], &self.bodies[b]);
            let (xa, xb) = (ba.transform(), bb.transform());
            let other_box = boxes[b];
            for (ia, pa) in ba.parts.iter().enumerate() {
                if ba.is_static() && ba.parts.len() > 1 && !pa.to_world(&xa).aabb().overlaps(&other_box) {
                    continue;
                }
                for (ib, pb) in bb.parts.iter().enumerate() {
                    if let Some(m) = collide_parts(pa, &xa, pb, &xb, self.config.linear_slop) {
                        contacts.push(Contact {
                            key: ContactKey {
                                a: ba.id,
                                b: bb.id,
                                part_a: ia as u16,
                                part_b: ib as u16,
                            },
                            manifold: m,
                        });
                    }
                }
            }
        }
        contacts
    }

    /// Impact damage, destruction, egg detonation and blasts for this
    /// step's new contacts. Destroyed bodies are removed before the solve.
    fn resolve_impacts(&mut self, contacts: &mut Vec<Contact>) {
        let cfg = Arc::clone(&self.config);
        // Strongest pre-solve impact per body pair.
        let mut impacts: BTreeMap<(ObjectId, ObjectId), (f64, Vec2)> = BTreeMap::new();
        for c in contacts.iter() {
            let (Some(a), Some(b)) = (self.index_of(c.key.a), self.index_of(c.key.b)) else {
                continue;
            };
            let (ba, bb) = (&self.bodies[a], &self.bodies[b]);
            let wm = WorldManifold::new(&c.manifold, &ba.transform(), &bb.transform());
            for i in 0..c.manifold.count {
                let ra = wm.points[i] - ba.pos;
                let rb = wm.points[i] - bb.pos;
                let approach = -(bb.point_velocity(rb) - ba.point_velocity(ra)).dot(wm.normal);
                if approach <= 0.0 {
                    continue;
                }
                let rna = ra.cross(wm.normal);
                let rnb = rb.cross(wm.normal);
                let k = ba.inv_mass + bb.inv_mass + ba.inv_inertia * rna * rna + bb.inv_inertia * rnb * rnb;
                if k <= 0.0 {
                    continue;
                }
                let e = if approach > cfg.restitution_threshold {
                    ba.restitution.max(bb.restitution)
                } else {
                    0.0
                };
                let j = approach * (1.0 + e) / k;
                let entry = impacts.entry((ba.id, bb.id)).or_insert((0.0, wm.normal));
                if j > entry.0 {
                    *entry = (j, wm.normal);
                }
            }
        }

        let mut blasts = VecDeque::new();
        // Eggs burst on first touch.
        for c in contacts.iter() {
            for id in [c.key.a, c.key.b] {
                if let Some(i) = self.index_of(id) {
                    let egg = &self.bodies[i];
                    if egg.detonates_on_contact && egg.alive {
                        blasts.push_back(PendingBlast {
                            center: egg.pos,
                            blast: cfg.egg_blast,
                            bird: egg.bird,
                            source: egg.id,
                        });
                        self.bodies[i].alive = false;
                    }
                }
            }
        }

        for (&(ida, idb), &(j, normal)) in &impacts {
            let (Some(a), Some(b)) = (self.index_of(ida), self.index_of(idb)) else {
                continue;
            };
            if !self.bodies[a].alive || !self.bodies[b].alive {
                continue;
            }
            let bird_a = self.bodies[a].bird;
            let bird_b = self.bodies[b].bird;
            for (slot, (x, impactor)) in [(a, bird_b), (b, bird_a)].into_iter().enumerate() {
                let body = &self.bodies[x];
                if !body.kind.is_damageable() {
                    continue;
                }
                let dmg = compute_damage(&cfg.damage, body.material, body.mass, j, impactor);
                if dmg > 0.0 {
                    let breaking = breaking_impulse(&cfg.damage, body.material, body.mass, body.hp, impactor);
                    if self.apply_damage(x, dmg, &mut blasts) {
                        // The survivor loses only the momentum needed to break
                        // through.
                        let y = if slot == 0 { b } else { a };
                        let push = if slot == 0 { normal } else { -normal };
                        let other = &mut self.bodies[y];
                        if !other.is_static() && other.alive {
                            other.apply_impulse(push * j.min(breaking), Vec2::ZERO);
                        }
                    }
                }
            }
        }

        while let Some(blast) = blasts.pop_front() {
            self.apply_blast(blast, &mut blasts);
        }

        if self.bodies.iter().any(|b| !b.alive) {
            self.bodies.retain(|b| b.alive);
            contacts.retain(|c| {
                self.index_of(c.key.a).is_some() && self.index_of(c.key.b).is_some()
            });
        }
    }

    /// Subtracts `dmg` from body `i`, logging events. Returns true when the
    /// body was destroyed.
    fn apply_damage(&mut self, i: usize, dmg: f64, blasts: &mut VecDeque<PendingBlast>) -> bool {
        let step = self.step_index;
        let tnt_blast = self.config.tnt_blast;
        let b = &mut self.bodies[i];
        if !b.alive || dmg <= 0.0 {
            return false;
        }
        b.hp -= dmg;
        b.damaged = true;
        self.events.push(DamageEvent {
            step,
            subject: b.id,
            subject_kind: b.kind,
            kind: DamageKind::Damaged,
            amount: dmg,
        });
        if b.hp > 0.0 {
            return false;
        }
        b.alive = false;
        let kind = match b.kind {
            BodyKind::Pig => DamageKind::PigKilled,
            BodyKind::Tnt => {
                blasts.push_back(PendingBlast {
                    center: b.pos,
                    blast: tnt_blast,
                    bird: None,
                    source: b.id,
                });
                DamageKind::TntDetonated
            }
            _ => DamageKind::Destroyed,
        };
        self.events.push(DamageEvent {
            step,
            subject: b.id,
            subject_kind: b.kind,
            kind,
            amount: dmg,
        });
        true
    }

    fn detonate(&mut self, blast: PendingBlast) {
        let mut queue = VecDeque::from([blast]);
        while let Some(b) = queue.pop_front() {
            self.apply_blast(b, &mut queue);
        }
        self.bodies.retain(|b| b.alive);
    }

    /// Radial impulse, falling off linearly with centre distance, plus the
    /// matching damage. Chained TNT is queued.
    fn apply_blast(&mut self, blast: PendingBlast, queue: &mut VecDeque<PendingBlast>) {
        let cfg = Arc::clone(&self.config);
        for i in 0..self.bodies.len() {
            let b = &self.bodies[i];
            if b.is_static() || !b.alive || b.id == blast.source {
                continue;
            }
            let offset = b.pos - blast.center;
            let j = blast.blast.impulse_at(offset.length());
            if j <= 0.0 {
                continue;
            }
            let dir = offset.normalized().unwrap_or(Vec2::new(0.0, 1.0));
            let b = &mut self.bodies[i];
            b.apply_impulse(dir * j, Vec2::ZERO);
            b.awake = true;
            b.sleep_time = 0.0;
            if b.kind.is_damageable() {
                let dmg = compute_damage(&cfg.damage, b.material, b.mass, j, blast.bird);
                self.apply_damage(i, dmg, queue);
            }
        }
    }

    fn update_sleep(&mut self, constraints: &[Constraint]) {
        let cfg = Arc::clone(&self.config);
        let n = self.bodies.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for c in constraints {
            if self.bodies[c.a].is_static() || self.bodies[c.b].is_static() {
                continue;
            }
            let (ra, rb) = (find(&mut parent, c.a), find(&mut parent, c.b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        for b in self.bodies.iter_mut() {
            if b.is_static() || !b.awake {
                continue;
            }
            if b.speed() > cfg.sleep_linear || b.ang_vel.abs() > cfg.sleep_angular {
                b.sleep_time = 0.0;
            } else {
                b.sleep_time += cfg.dt;
            }
        }
        let mut island_min = vec![f64::INFINITY; n];
        for i in 0..n {
            let b = &self.bodies[i];
            if b.is_static() {
                continue;
            }
            let r = find(&mut parent, i);
            let t = if b.awake { b.sleep_time } else { f64::INFINITY };
            island_min[r] = island_min[r].min(t);
        }
        for i in 0..n {
            if self.bodies[i].is_static() || !self.bodies[i].awake {
                continue;
            }
            let r = find(&mut parent, i);
            if island_min[r] >= cfg.time_to_sleep {
                let b = &mut self.bodies[i];
                b.awake = false;
                b.vel = Vec2::ZERO;
                b.ang_vel = 0.0;
            }
        }
    }

    fn remove_out_of_bounds(&mut self) {
        let m = self.config.kill_margin;
        let (w, h) = (self.width, self.height);
        let outside = |p: Vec2| p.x < -m || p.x > w + m || p.y < -m || p.y > h + 4.0 * m;
        let step = self.step_index;
        let mut any = false;
        for b in self.bodies.iter_mut() {
            if b.is_static() || !outside(b.pos) {
                continue;
            }
            any = true;
            b.alive = false;
            if b.kind.is_damageable() {
                let remaining = b.hp.max(0.0);
                self.events.push(DamageEvent {
                    step,
                    subject: b.id,
                    subject_kind: b.kind,
                    kind: DamageKind::Damaged,
                    amount: remaining,
                });
                b.hp = 0.0;
                b.damaged = true;
                let kind = match b.kind {
                    BodyKind::Pig => DamageKind::PigKilled,
                    BodyKind::Tnt => DamageKind::TntDetonated,
                    _ => DamageKind::Destroyed,
                };
                self.events.push(DamageEvent {
                    step,
                    subject: b.id,
                    subject_kind: b.kind,
                    kind,
                    amount: remaining,
                });
            }
        }
        if any {
            self.bodies.retain(|b| b.alive);
        }
    }

    /// Deepest overlap after the last step, as a fraction of the smaller
    /// body dimension of each touching pair.
    pub fn max_penetration_ratio(&self) -> f64 {
        let mut worst = 0.0f64;
        for &(a, b, sep) in &self.last_min_separation {
            let dims = [a, b]
                .iter()
                .filter_map(|id| self.body(*id))
                .filter(|b| !b.is_static())
                .map(Body::min_dimension)
                .fold(f64::INFINITY, f64::min);
            if dims.is_finite() && dims > 0.0 {
                worst = worst.max(-sep / dims);
            }
        }
        worst
    }

    /// SHA-256 over a canonical encoding of every body, the queue, the
    /// active bird and the event log.
    pub fn state_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.step_index.to_le_bytes());
        for b in &self.bodies {
            h.update(b.id.0.to_le_bytes());
            h.update([b.kind as u8, b.material as u8, b.awake as u8, b.damaged as u8]);
            for x in [b.pos.x, b.pos.y, b.angle, b.vel.x, b.vel.y, b.ang_vel, b.hp, b.mass] {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        for bird in &self.birds_queue {
            h.update([*bird as u8]);
        }
        if let Some(a) = &self.active {
            h.update(a.id.0.to_le_bytes());
            h.update([a.armed as u8]);
        }
        for e in &self.events {
            h.update(e.step.to_le_bytes());
            h.update(e.subject.0.to_le_bytes());
            h.update([e.kind as u8]);
            h.update(e.amount.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Outline drawing of the current state, for humans reading logs.
    pub fn to_svg(&self, scale: f64) -> String {
        let (w, h) = (self.width * scale, self.height * scale);
        let mut s = format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
        );
        for b in &self.bodies {
            let color = match (b.kind, b.material) {
                (BodyKind::Terrain, _) => "#6b4f2a",
                (BodyKind::Pig, _) => "#4caf50",
                (BodyKind::Bird, _) => "#d32f2f",
                (BodyKind::Tnt, _) => "#ff9800",
                (_, Material::Wood) => "#c8a165",
                (_, Material::Ice) => "#9ad7f0",
                (_, Material::Stone) => "#8d8d8d",
                _ => "#000000",
            };
            for part in b.world_parts() {
                match part {
                    crate::geometry::ConvexShape::Circle { center, radius } => {
                        let _ = write!(
                            s,
                            r#"<circle cx="{:.1}" cy="{:.1}" r="{:.1}" fill="{color}"/>"#,
                            center.x * scale,
                            h - center.y * scale,
                            radius * scale
                        );
                    }
                    crate::geometry::ConvexShape::Polygon { vertices } => {
                        let pts: Vec<String> = vertices
                            .iter()
                            .map(|v| format!("{:.1},{:.1}", v.x * scale, h - v.y.max(-1.0) * scale))
                            .collect();
                        let _ = write!(s, r#"<polygon points="{}" fill="{color}"/>"#, pts.join(" "));
                    }
                }
            }
        }
        s.push_str("</svg>");
        s
    }
}
