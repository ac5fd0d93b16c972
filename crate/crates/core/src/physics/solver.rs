//! Sequential-impulse contact solver with warm starting, a two-point block
//! solver for resting faces, and non-linear position correction.

use super::collide::{position_point, Manifold, WorldManifold};
use super::PhysicsConfig;
use crate::geometry::{Transform, Vec2};

const MAX_CONDITION: f64 = 1000.0;

/// Velocity-level state of one body during a step.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SolverBody {
    pub v: Vec2,
    pub w: f64,
    pub c: Vec2,
    pub a: f64,
    pub inv_mass: f64,
    pub inv_inertia: f64,
}

impl SolverBody {
    fn transform(&self) -> Transform {
        Transform::new(self.c, self.a)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct ConstraintPoint {
    pub r_a: Vec2,
    pub r_b: Vec2,
    pub normal_impulse: f64,
    pub tangent_impulse: f64,
    pub normal_mass: f64,
    pub tangent_mass: f64,
    pub velocity_bias: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct Constraint {
    pub a: usize,
    pub b: usize,
    pub manifold: Manifold,
    pub normal: Vec2,
    pub friction: f64,
    pub points: [ConstraintPoint; 2],
    pub count: usize,
    /// Inverse of the 2×2 normal mass matrix when the block solver applies.
    block: Option<([[f64; 2]; 2], [[f64; 2]; 2])>,
}

impl Constraint {
    /// Builds the velocity constraint from a manifold at the poses in
    /// `bodies`, seeding accumulated impulses from `warm`.
    pub fn new(
        a: usize,
        b: usize,
        manifold: Manifold,
        friction: f64,
        restitution: f64,
        warm: [(f64, f64); 2],
        bodies: &[SolverBody],
        config: &PhysicsConfig,
    ) -> Constraint {
        let ba = &bodies[a];
        let bb = &bodies[b];
        let wm = WorldManifold::new(&manifold, &ba.transform(), &bb.transform());
        let normal = wm.normal;
        let tangent = Vec2::new(normal.y, -normal.x);
        let (ma, mb, ia, ib) = (ba.inv_mass, bb.inv_mass, ba.inv_inertia, bb.inv_inertia);
        let mut points = [ConstraintPoint::default(); 2];
        for i in 0..manifold.count {
            let p = &mut points[i];
            p.normal_impulse = warm[i].0;
            p.tangent_impulse = warm[i].1;
            p.r_a = wm.points[i] - ba.c;
            p.r_b = wm.points[i] - bb.c;
            let rna = p.r_a.cross(normal);
            let rnb = p.r_b.cross(normal);
            let kn = ma + mb + ia * rna * rna + ib * rnb * rnb;
            p.normal_mass = if kn > 0.0 { 1.0 / kn } else { 0.0 };
            let rta = p.r_a.cross(tangent);
            let rtb = p.r_b.cross(tangent);
            let kt = ma + mb + ia * rta * rta + ib * rtb * rtb;
            p.tangent_mass = if kt > 0.0 { 1.0 / kt } else { 0.0 };
            let v_rel = normal.dot(
                bb.v + Vec2::scalar_cross(bb.w, p.r_b) - ba.v - Vec2::scalar_cross(ba.w, p.r_a),
            );
            if v_rel < -config.restitution_threshold {
                p.velocity_bias = -restitution * v_rel;
            }
        }

        let mut block = None;
        if manifold.count == 2 {
            let p1 = &points[0];
            let p2 = &points[1];
            let rn1a = p1.r_a.cross(normal);
            let rn1b = p1.r_b.cross(normal);
            let rn2a = p2.r_a.cross(normal);
            let rn2b = p2.r_b.cross(normal);
            let k11 = ma + mb + ia * rn1a * rn1a + ib * rn1b * rn1b;
            let k22 = ma + mb + ia * rn2a * rn2a + ib * rn2b * rn2b;
            let k12 = ma + mb + ia * rn1a * rn2a + ib * rn1b * rn2b;
            let det = k11 * k22 - k12 * k12;
            if k11 * k11 < MAX_CONDITION * det {
                let inv = 1.0 / det;
                block = Some((
                    [[k11, k12], [k12, k22]],
                    [[k22 * inv, -k12 * inv], [-k12 * inv, k11 * inv]],
                ));
            }
        }

        Constraint {
            a,
            b,
            manifold,
            normal,
            friction,
            points,
            count: manifold.count,
            block,
        }
    }

    pub fn warm_start(&self, bodies: &mut [SolverBody]) {
        let tangent = Vec2::new(self.normal.y, -self.normal.x);
        let (ma, mb) = (bodies[self.a].inv_mass, bodies[self.b].inv_mass);
        let (ia, ib) = (bodies[self.a].inv_inertia, bodies[self.b].inv_inertia);
        for p in &self.points[..self.count] {
            let imp = self.normal * p.normal_impulse + tangent * p.tangent_impulse;
            let ba = &mut bodies[self.a];
            ba.w -= ia * p.r_a.cross(imp);
            ba.v -= imp * ma;
            let bb = &mut bodies[self.b];
            bb.w += ib * p.r_b.cross(imp);
            bb.v += imp * mb;
        }
    }

    pub fn solve_velocity(&mut self, bodies: &mut [SolverBody]) {
        let (a, b) = (self.a, self.b);
        let (ma, mb) = (bodies[a].inv_mass, bodies[b].inv_mass);
        let (ia, ib) = (bodies[a].inv_inertia, bodies[b].inv_inertia);
        let (mut va, mut wa) = (bodies[a].v, bodies[a].w);
        let (mut vb, mut wb) = (bodies[b].v, bodies[b].w);
        let normal = self.normal;
        let tangent = Vec2::new(normal.y, -normal.x);

        for p in &mut self.points[..self.count] {
            let dv = vb + Vec2::scalar_cross(wb, p.r_b) - va - Vec2::scalar_cross(wa, p.r_a);
            let vt = dv.dot(tangent);
            let max_f = self.friction * p.normal_impulse;
            let new = (p.tangent_impulse - p.tangent_mass * vt).clamp(-max_f, max_f);
            let lambda = new - p.tangent_impulse;
            p.tangent_impulse = new;
            let imp = tangent * lambda;
            va -= imp * ma;
            wa -= ia * p.r_a.cross(imp);
            vb += imp * mb;
            wb += ib * p.r_b.cross(imp);
        }

        match self.block {
            Some((k, inv)) => {
                let (p1, p2) = (self.points[0], self.points[1]);
                let a1 = p1.normal_impulse;
                let a2 = p2.normal_impulse;
                let dv1 = vb + Vec2::scalar_cross(wb, p1.r_b) - va - Vec2::scalar_cross(wa, p1.r_a);
                let dv2 = vb + Vec2::scalar_cross(wb, p2.r_b) - va - Vec2::scalar_cross(wa, p2.r_a);
                let bx = dv1.dot(normal) - p1.velocity_bias - (k[0][0] * a1 + k[0][1] * a2);
                let by = dv2.dot(normal) - p2.velocity_bias - (k[1][0] * a1 + k[1][1] * a2);
                let x = block_solve(k, inv, p1.normal_mass, p2.normal_mass, bx, by);
                if let Some((x1, x2)) = x {
                    let d1 = x1 - a1;
                    let d2 = x2 - a2;
                    let i1 = normal * d1;
                    let i2 = normal * d2;
                    va -= (i1 + i2) * ma;
                    wa -= ia * (p1.r_a.cross(i1) + p2.r_a.cross(i2));
                    vb += (i1 + i2) * mb;
                    wb += ib * (p1.r_b.cross(i1) + p2.r_b.cross(i2));
                    self.points[0].normal_impulse = x1;
                    self.points[1].normal_impulse = x2;
                }
            }
            None => {
                for p in &mut self.points[..self.count] {
                    let dv = vb + Vec2::scalar_cross(wb, p.r_b) - va - Vec2::scalar_cross(wa, p.r_a);
                    let vn = dv.dot(normal);
                    let new = (p.normal_impulse - p.normal_mass * (vn - p.velocity_bias)).max(0.0);
                    let lambda = new - p.normal_impulse;
                    p.normal_impulse = new;
                    let imp = normal * lambda;
                    va -= imp * ma;
                    wa -= ia * p.r_a.cross(imp);
                    vb += imp * mb;
                    wb += ib * p.r_b.cross(imp);
                }
            }
        }

        bodies[a].v = va;
        bodies[a].w = wa;
        bodies[b].v = vb;
        bodies[b].w = wb;
    }

    /// One Gauss-Seidel pass of position correction; returns the deepest
    /// separation seen.
    pub fn solve_position(&self, bodies: &mut [SolverBody], config: &PhysicsConfig) -> f64 {
        let (a, b) = (self.a, self.b);
        let (ma, mb) = (bodies[a].inv_mass, bodies[b].inv_mass);
        let (ia, ib) = (bodies[a].inv_inertia, bodies[b].inv_inertia);
        let mut min_sep = 0.0f64;
        for i in 0..self.count {
            let xa = bodies[a].transform();
            let xb = bodies[b].transform();
            let (normal, point, sep) = position_point(&self.manifold, i, &xa, &xb);
            min_sep = min_sep.min(sep);
            let ra = point - bodies[a].c;
            let rb = point - bodies[b].c;
            let c = (config.baumgarte * (sep + config.linear_slop)).clamp(-config.max_correction, 0.0);
            let rna = ra.cross(normal);
            let rnb = rb.cross(normal);
            let k = ma + mb + ia * rna * rna + ib * rnb * rnb;
            let impulse = if k > 0.0 { -c / k } else { 0.0 };
            let p = normal * impulse;
            let ba = &mut bodies[a];
            ba.c -= p * ma;
            ba.a -= ia * ra.cross(p);
            let bb = &mut bodies[b];
            bb.c += p * mb;
            bb.a += ib * rb.cross(p);
        }
        min_sep
    }
}

/// Mixed linear complementarity solve for two contact points sharing a
/// normal. Returns the new accumulated impulses, or `None` if no case applies.
fn block_solve(
    k: [[f64; 2]; 2],
    inv: [[f64; 2]; 2],
    nm1: f64,
    nm2: f64,
    bx: f64,
    by: f64,
) -> Option<(f64, f64)> {
    // Both points active.
    let x1 = -(inv[0][0] * bx + inv[0][1] * by);
    let x2 = -(inv[1][0] * bx + inv[1][1] * by);
    if x1 >= 0.0 && x2 >= 0.0 {
        return Some((x1, x2));
    }
    // Only the first.
    let x1 = -nm1 * bx;
    let vn2 = k[1][0] * x1 + by;
    if x1 >= 0.0 && vn2 >= 0.0 {
        return Some((x1, 0.0));
    }
    // Only the second.
    let x2 = -nm2 * by;
    let vn1 = k[0][1] * x2 + bx;
    if x2 >= 0.0 && vn1 >= 0.0 {
        return Some((0.0, x2));
    }
    // Neither.
    if bx >= 0.0 && by >= 0.0 {
        return Some((0.0, 0.0));
    }
    None
}
