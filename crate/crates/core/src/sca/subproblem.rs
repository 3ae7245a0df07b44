//! Convexified trajectory subproblem and its barrier solver.
//!
//! One subproblem instance is the convex program built around the current
//! linearization point of the outer loop. Variables are the per-slot
//! velocities (the boundary velocities are fixed at rest) plus per-slot
//! epigraph variables: thrust-correction magnitude `A` and induced-power
//! slack `B` for straight flight, or the thrust radical `S` for vertical
//! flight. Bilinear terms are replaced by convex quadratic upper bounds that
//! touch the original at the linearization point, and the induced-slack
//! bound is linearized, so the program majorizes the true energy and agrees
//! with it at the point. Solved with a log-barrier Newton method on the
//! banded KKT system; the single displacement equality is handled by a
//! bordered solve.

use crate::error::Error;
use crate::kinematics::KinematicLimits;
use crate::propulsion::{AirframeParams, PowerConstants, VerticalDirection};

use super::band::BandMatrix;
use super::bounds::{induced_slack_coefficients, ProductBound};
use super::ScaSettings;

const B_MIN: f64 = 1e-9;
const S_MIN: f64 = 1e-9;
const BARRIER_GROWTH: f64 = 20.0;
const MAX_NEWTON_ITERS: usize = 80;
const MAX_BARRIER_STAGES: usize = 48;
/// Constraint slacks below this are treated as boundary contact.
const SLACK_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Straight {
        p0: f64,
        p1: f64,
        c1: f64,
        c2: f64,
        c3: f64,
        c4: f64,
        c5: f64,
    },
    Vertical {
        /// +1 for climb, -1 for descent (sign of the `m a` thrust term).
        sign: f64,
        weight: f64,
        mass: f64,
        /// `2 / (rho * disc_area)`.
        inv_loading: f64,
    },
}

#[derive(Debug, Clone, Copy, Default)]
struct SlotLin {
    /// Bound for the `+a v` (straight) or `sign a S` (vertical) product.
    bound_pos: f64,
    /// Bound for the `-a v` product (straight only), stored as its dhat.
    bound_neg: f64,
    /// Tangent slope of `-c2 v^2` at the point (straight only).
    tan_slope: f64,
    /// Tangent intercept of `-c2 v^2` at the point (straight only).
    tan_icpt: f64,
    /// Linearized induced-slack coefficients (straight only).
    r2_a: f64,
    r2_v: f64,
    r2_0: f64,
    /// Thrust radical at the point (vertical only).
    shat: f64,
}

/// One convexified trajectory subproblem.
#[derive(Debug, Clone)]
pub struct ConvexSubproblem {
    kind: Kind,
    n_slots: usize,
    dt: f64,
    distance: f64,
    v_max: f64,
    a_max: f64,
    constant_term: f64,
    lin_v: Vec<f64>,
    slot: Vec<SlotLin>,
}

/// Solution of a subproblem.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    /// Raw variable vector in the subproblem's layout.
    pub x: Vec<f64>,
    /// Surrogate objective value, J (includes the segment's constant terms).
    pub objective: f64,
    /// Infinity norm of the stationarity residual at the returned iterate.
    pub kkt_residual: f64,
    /// Barrier duality-gap estimate at the returned iterate, J.
    pub duality_gap: f64,
    /// Set when an iteration cap was reached before the target gap.
    pub degraded: bool,
}

impl ConvexSubproblem {
    /// Builds a straight-flight subproblem around per-slot linearization
    /// velocities (`lin_slot_v[n]` is the velocity of slot `n + 1`; the last
    /// slot is the fixed rest boundary and its entry must be 0).
    pub fn straight(
        consts: &PowerConstants<f64>,
        limits: &KinematicLimits<f64>,
        dt: f64,
        distance: f64,
        lin_slot_v: &[f64],
    ) -> Self {
        let kind = Kind::Straight {
            p0: consts.p0_watt,
            p1: consts.p1_watt,
            c1: consts.c1,
            c2: consts.c2,
            c3: consts.c3,
            c4: consts.c4,
            c5: consts.c5,
        };
        Self::build(kind, limits, dt, distance, lin_slot_v, 0.0)
    }

    /// Builds a vertical-flight subproblem (descent or climb). The constant
    /// part of the energy (base power over the window plus the potential
    /// boundary term) is carried into the reported objective.
    pub fn vertical(
        direction: VerticalDirection,
        consts: &PowerConstants<f64>,
        airframe: &AirframeParams<f64>,
        limits: &KinematicLimits<f64>,
        dt: f64,
        distance: f64,
        lin_slot_v: &[f64],
    ) -> Self {
        let sign = match direction {
            VerticalDirection::Descent => -1.0,
            VerticalDirection::Climb => 1.0,
        };
        let kind = Kind::Vertical {
            sign,
            weight: airframe.weight_newton,
            mass: airframe.mass_kg,
            inv_loading: 2.0 / (airframe.air_density * airframe.rotor_disc_area),
        };
        let n = lin_slot_v.len();
        let constant = consts.p2_watt * dt * n as f64 + 0.5 * airframe.weight_newton * distance;
        Self::build(kind, limits, dt, distance, lin_slot_v, constant)
    }

    fn build(
        kind: Kind,
        limits: &KinematicLimits<f64>,
        dt: f64,
        distance: f64,
        lin_slot_v: &[f64],
        constant_term: f64,
    ) -> Self {
        let n = lin_slot_v.len();
        assert!(n >= 2, "need at least two slots");
        assert!(lin_slot_v[n - 1] == 0.0, "last slot is the rest boundary");
        let lin_v = lin_slot_v.to_vec();
        let mut lin_a = vec![0.0; n];
        for i in 0..n {
            let prev = if i == 0 { 0.0 } else { lin_v[i - 1] };
            lin_a[i] = (lin_v[i] - prev) / dt;
        }
        let mut slot = vec![SlotLin::default(); n];
        for i in 0..n {
            let (v, a) = (lin_v[i], lin_a[i]);
            match kind {
                Kind::Straight { c2, c3, c4, .. } => {
                    let x = c2 * v * v + c3 * a * v;
                    let a_hat = x.abs();
                    let (r2_a, r2_v, r2_0) = induced_slack_coefficients(c4, a_hat, v);
                    slot[i] = SlotLin {
                        bound_pos: ProductBound::at_point(1.0, a, v).dhat,
                        bound_neg: ProductBound::at_point(-1.0, a, v).dhat,
                        tan_slope: -2.0 * c2 * v,
                        tan_icpt: c2 * v * v,
                        r2_a,
                        r2_v,
                        r2_0,
                        shat: 0.0,
                    };
                }
                Kind::Vertical {
                    sign,
                    weight,
                    mass,
                    inv_loading,
                } => {
                    let shat = (v * v + inv_loading * (weight + sign * mass * a)).sqrt();
                    slot[i] = SlotLin {
                        bound_pos: ProductBound::at_point(sign, a, shat).dhat,
                        shat,
                        ..SlotLin::default()
                    };
                }
            }
        }
        Self {
            kind,
            n_slots: n,
            dt,
            distance,
            v_max: limits.v_max,
            a_max: limits.a_max,
            constant_term,
            lin_v,
            slot,
        }
    }

    pub fn slots(&self) -> usize {
        self.n_slots
    }

    fn extras(&self) -> usize {
        match self.kind {
            Kind::Straight { .. } => 2,
            Kind::Vertical { .. } => 1,
        }
    }

    fn block(&self) -> usize {
        1 + self.extras()
    }

    pub fn dim(&self) -> usize {
        (self.n_slots - 1) * self.block() + self.extras()
    }

    fn half_bandwidth(&self) -> usize {
        self.block() + self.extras()
    }

    /// Index of velocity variable `v_n` for slots `1..n_slots` (1-based).
    #[inline]
    fn iv(&self, n: usize) -> usize {
        (n - 1) * self.block()
    }

    /// Index of extra `j` of slot `n` (1-based slot).
    #[inline]
    fn iext(&self, n: usize, j: usize) -> usize {
        if n < self.n_slots {
            (n - 1) * self.block() + 1 + j
        } else {
            (n - 1) * self.block() + j
        }
    }

    /// Velocity of slot `n` in `0..=n_slots` (boundaries are fixed at rest).
    #[inline]
    fn v_at(&self, x: &[f64], n: usize) -> f64 {
        if n == 0 || n == self.n_slots {
            0.0
        } else {
            x[self.iv(n)]
        }
    }

    /// Per-slot velocities (length `n_slots`, last entry 0) of an iterate.
    pub fn slot_velocities(&self, x: &[f64]) -> Vec<f64> {
        (1..=self.n_slots).map(|n| self.v_at(x, n)).collect()
    }

    pub fn num_constraints(&self) -> usize {
        let n = self.n_slots;
        // v bounds on free velocities, two acceleration bounds per slot,
        // plus the per-slot epigraph constraints.
        2 * (n - 1)
            + 2 * n
            + n * match self.kind {
                Kind::Straight { .. } => 3,
                Kind::Vertical { .. } => 1,
            }
            + n // B_MIN / S_MIN floors
    }

    /// Surrogate objective at an iterate, J (with constant terms).
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        let mut total = self.constant_term;
        for n in 1..=self.n_slots {
            let v = self.v_at(x, n);
            let a = (v - self.v_at(x, n - 1)) / self.dt;
            match self.kind {
                Kind::Straight { p0, p1, c1, c5, .. } => {
                    let aa = x[self.iext(n, 0)];
                    let b = x[self.iext(n, 1)];
                    total += self.dt
                        * (p0 * (1.0 + c1 * v * v) + p1 * (1.0 + aa * aa) / b + c5 * v * v * v);
                }
                Kind::Vertical { weight, mass, .. } => {
                    let s = x[self.iext(n, 0)];
                    let pb = ProductBound {
                        sa: self.vertical_sign(),
                        dhat: self.slot[n - 1].bound_pos,
                    };
                    total += self.dt * (0.5 * weight * s + 0.5 * mass * pb.value(a, s));
                }
            }
        }
        total
    }

    fn vertical_sign(&self) -> f64 {
        match self.kind {
            Kind::Vertical { sign, .. } => sign,
            Kind::Straight { .. } => 1.0,
        }
    }

    /// Writes all constraint values `g_i(x)` (feasible means `g_i < 0`).
    fn constraint_values(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for n in 1..=self.n_slots {
            let vp = self.v_at(x, n - 1);
            let vc = self.v_at(x, n);
            let a = (vc - vp) / self.dt;
            if n < self.n_slots {
                out.push(-vc);
                out.push(vc - self.v_max);
            }
            out.push(a - self.a_max);
            out.push(-a - self.a_max);
            let lin = &self.slot[n - 1];
            match self.kind {
                Kind::Straight { c2, c3, .. } => {
                    let aa = x[self.iext(n, 0)];
                    let b = x[self.iext(n, 1)];
                    let pb_pos = ProductBound {
                        sa: 1.0,
                        dhat: lin.bound_pos,
                    };
                    let pb_neg = ProductBound {
                        sa: -1.0,
                        dhat: lin.bound_neg,
                    };
                    out.push(c2 * vc * vc + c3 * pb_pos.value(a, vc) - aa);
                    out.push(lin.tan_slope * vc + lin.tan_icpt + c3 * pb_neg.value(a, vc) - aa);
                    out.push(b * b - (lin.r2_a * aa + lin.r2_v * vc + lin.r2_0));
                    out.push(B_MIN - b);
                }
                Kind::Vertical {
                    sign,
                    weight,
                    mass,
                    inv_loading,
                } => {
                    let s = x[self.iext(n, 0)];
                    out.push(
                        vc * vc + inv_loading * (weight + sign * mass * a) - 2.0 * lin.shat * s
                            + lin.shat * lin.shat,
                    );
                    out.push(S_MIN - s);
                }
            }
        }
    }

    fn is_strictly_feasible(&self, x: &[f64], scratch: &mut Vec<f64>) -> bool {
        self.constraint_values(x, scratch);
        scratch.iter().all(|&g| g < -SLACK_FLOOR)
    }

    /// Barrier potential `t f(x) + Phi(x)`; `+inf` outside the domain.
    fn barrier_value(&self, x: &[f64], t: f64, scratch: &mut Vec<f64>) -> f64 {
        self.constraint_values(x, scratch);
        let mut phi = 0.0;
        for &g in scratch.iter() {
            if g >= -SLACK_FLOOR {
                return f64::INFINITY;
            }
            phi -= (-g).ln();
        }
        t * self.objective_at(x) + phi
    }

    /// Assembles the gradient and Hessian of `t f + Phi` at `x`.
    fn assemble(&self, x: &[f64], t: f64, grad: &mut [f64], hess: &mut BandMatrix) {
        grad.fill(0.0);
        hess.reset();
        let dt = self.dt;
        let inv_dt = 1.0 / dt;

        // Sparse scatter helpers over optional variable indices.
        let add_g = |grad: &mut [f64], idx: Option<usize>, v: f64| {
            if let Some(i) = idx {
                grad[i] += v;
            }
        };
        let add_h = |hess: &mut BandMatrix, i: Option<usize>, j: Option<usize>, v: f64| {
            if let (Some(mut a), Some(mut b)) = (i, j) {
                if a < b {
                    std::mem::swap(&mut a, &mut b);
                }
                hess.add(a, b, v);
            }
        };
        // Rank-one barrier term grad*grad^T / g^2 over a sparse gradient.
        let rank_one = |hess: &mut BandMatrix, entries: &[(Option<usize>, f64)], inv_g2: f64| {
            for (k, &(ia, da)) in entries.iter().enumerate() {
                if ia.is_none() || da == 0.0 {
                    continue;
                }
                for &(ib, db) in &entries[..=k] {
                    if ib.is_none() || db == 0.0 {
                        continue;
                    }
                    add_h(hess, ia, ib, da * db * inv_g2);
                }
            }
        };

        for n in 1..=self.n_slots {
            let ivp = if n >= 2 { Some(self.iv(n - 1)) } else { None };
            let ivc = if n < self.n_slots {
                Some(self.iv(n))
            } else {
                None
            };
            let vp = self.v_at(x, n - 1);
            let vc = self.v_at(x, n);
            let a = (vc - vp) * inv_dt;
            let lin = &self.slot[n - 1];

            // --- objective contribution ---
            match self.kind {
                Kind::Straight { p0, p1, c1, c5, .. } => {
                    let iaa = Some(self.iext(n, 0));
                    let ibb = Some(self.iext(n, 1));
                    let aa = x[iaa.unwrap()];
                    let b = x[ibb.unwrap()];
                    add_g(grad, ivc, t * dt * (2.0 * p0 * c1 * vc + 3.0 * c5 * vc * vc));
                    add_h(hess, ivc, ivc, t * dt * (2.0 * p0 * c1 + 6.0 * c5 * vc));
                    add_g(grad, iaa, t * dt * 2.0 * p1 * aa / b);
                    add_g(grad, ibb, -t * dt * p1 * (1.0 + aa * aa) / (b * b));
                    add_h(hess, iaa, iaa, t * dt * 2.0 * p1 / b);
                    add_h(hess, iaa, ibb, -t * dt * 2.0 * p1 * aa / (b * b));
                    add_h(hess, ibb, ibb, t * dt * 2.0 * p1 * (1.0 + aa * aa) / (b * b * b));
                }
                Kind::Vertical { sign, weight, mass, .. } => {
                    let is = Some(self.iext(n, 0));
                    let s = x[is.unwrap()];
                    let pb = ProductBound {
                        sa: sign,
                        dhat: lin.bound_pos,
                    };
                    let (da, ds) = pb.grad(a, s);
                    let (haa, has, hss) = pb.hess();
                    let w = t * dt * 0.5 * mass;
                    add_g(grad, is, t * dt * 0.5 * weight + w * ds);
                    add_g(grad, ivc, w * da * inv_dt);
                    add_g(grad, ivp, -w * da * inv_dt);
                    // chain rule for a = (vc - vp)/dt
                    add_h(hess, ivc, ivc, w * haa * inv_dt * inv_dt);
                    add_h(hess, ivp, ivp, w * haa * inv_dt * inv_dt);
                    add_h(hess, ivc, ivp, -w * haa * inv_dt * inv_dt);
                    add_h(hess, is, ivc, w * has * inv_dt);
                    add_h(hess, is, ivp, -w * has * inv_dt);
                    add_h(hess, is, is, w * hss);
                }
            }

            // --- barrier contributions ---
            let barrier = |hess: &mut BandMatrix,
                               grad: &mut [f64],
                               g: f64,
                               entries: &[(Option<usize>, f64)],
                               curvature: &[(Option<usize>, Option<usize>, f64)]| {
                let inv_ng = 1.0 / (-g).max(SLACK_FLOOR);
                for &(idx, d) in entries {
                    if let Some(i) = idx {
                        grad[i] += d * inv_ng;
                    }
                }
                rank_one(hess, entries, inv_ng * inv_ng);
                for &(i, j, h) in curvature {
                    add_h(hess, i, j, h * inv_ng);
                }
            };

            if let Some(ic) = ivc {
                barrier(hess, grad, -vc, &[(Some(ic), -1.0)], &[]);
                barrier(hess, grad, vc - self.v_max, &[(Some(ic), 1.0)], &[]);
            }
            barrier(
                hess,
                grad,
                a - self.a_max,
                &[(ivc, inv_dt), (ivp, -inv_dt)],
                &[],
            );
            barrier(
                hess,
                grad,
                -a - self.a_max,
                &[(ivc, -inv_dt), (ivp, inv_dt)],
                &[],
            );

            match self.kind {
                Kind::Straight { c2, c3, .. } => {
                    let iaa = Some(self.iext(n, 0));
                    let ibb = Some(self.iext(n, 1));
                    let aa = x[iaa.unwrap()];
                    let b = x[ibb.unwrap()];

                    for (pb_dhat, sa, with_tangent) in
                        [(lin.bound_pos, 1.0, false), (lin.bound_neg, -1.0, true)]
                    {
                        let pb = ProductBound { sa, dhat: pb_dhat };
                        let g = if with_tangent {
                            lin.tan_slope * vc + lin.tan_icpt + c3 * pb.value(a, vc) - aa
                        } else {
                            c2 * vc * vc + c3 * pb.value(a, vc) - aa
                        };
                        let (da, dq) = pb.grad(a, vc);
                        let (haa, haq, hqq) = pb.hess();
                        let dvc_direct = if with_tangent {
                            lin.tan_slope + c3 * dq
                        } else {
                            2.0 * c2 * vc + c3 * dq
                        };
                        let entries = [
                            (ivc, c3 * da * inv_dt + dvc_direct),
                            (ivp, -c3 * da * inv_dt),
                            (iaa, -1.0),
                        ];
                        // Hessian of g in (vp, vc): chain rule through
                        // a = (vc - vp)/dt, plus 2 c2 (non-tangent case).
                        let h_aa = c3 * haa * inv_dt * inv_dt;
                        let h_avc = c3 * haq * inv_dt;
                        let direct = if with_tangent { 0.0 } else { 2.0 * c2 };
                        let curvature = [
                            (ivc, ivc, h_aa + 2.0 * h_avc + c3 * hqq + direct),
                            (ivp, ivp, h_aa),
                            (ivc, ivp, -h_aa - h_avc),
                        ];
                        barrier(hess, grad, g, &entries, &curvature);
                    }

                    let g_b = b * b - (lin.r2_a * aa + lin.r2_v * vc + lin.r2_0);
                    barrier(
                        hess,
                        grad,
                        g_b,
                        &[(ibb, 2.0 * b), (iaa, -lin.r2_a), (ivc, -lin.r2_v)],
                        &[(ibb, ibb, 2.0)],
                    );
                    barrier(hess, grad, B_MIN - b, &[(ibb, -1.0)], &[]);
                }
                Kind::Vertical {
                    sign,
                    weight,
                    mass,
                    inv_loading,
                } => {
                    let is = Some(self.iext(n, 0));
                    let s = x[is.unwrap()];
                    let g_s = vc * vc + inv_loading * (weight + sign * mass * a)
                        - 2.0 * lin.shat * s
                        + lin.shat * lin.shat;
                    let da_coeff = inv_loading * sign * mass * inv_dt;
                    barrier(
                        hess,
                        grad,
                        g_s,
                        &[
                            (ivc, 2.0 * vc + da_coeff),
                            (ivp, -da_coeff),
                            (is, -2.0 * lin.shat),
                        ],
                        &[(ivc, ivc, 2.0)],
                    );
                    barrier(hess, grad, S_MIN - s, &[(is, -1.0)], &[]);
                }
            }
        }
    }

    /// Strictly feasible start at the linearization point: velocities are
    /// nudged off their bounds and the epigraph variables are lifted off
    /// their active constraints.
    pub fn initial_point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        let v_floor = 1e-4 * self.v_max;
        let v_cap = self.v_max * (1.0 - 1e-6);
        for n in 1..self.n_slots {
            x[self.iv(n)] = self.lin_v[n - 1].clamp(v_floor, v_cap);
        }
        // restore the displacement equality after clamping
        let total: f64 = (1..self.n_slots).map(|n| x[self.iv(n)]).sum::<f64>() * self.dt;
        if total > 0.0 && self.distance > 0.0 {
            let scale = self.distance / total;
            for n in 1..self.n_slots {
                x[self.iv(n)] = (x[self.iv(n)] * scale).clamp(v_floor * 0.5, v_cap);
            }
        }
        for n in 1..=self.n_slots {
            let vc = self.v_at(&x, n);
            let a = (vc - self.v_at(&x, n - 1)) / self.dt;
            let lin = &self.slot[n - 1];
            match self.kind {
                Kind::Straight { c2, c3, .. } => {
                    let pb_pos = ProductBound {
                        sa: 1.0,
                        dhat: lin.bound_pos,
                    };
                    let pb_neg = ProductBound {
                        sa: -1.0,
                        dhat: lin.bound_neg,
                    };
                    let lb1 = c2 * vc * vc + c3 * pb_pos.value(a, vc);
                    let lb2 = lin.tan_slope * vc + lin.tan_icpt + c3 * pb_neg.value(a, vc);
                    let aa = lb1.max(lb2) + 1e-4 * (1.0 + lb1.abs().max(lb2.abs()));
                    let r2 = lin.r2_a * aa + lin.r2_v * vc + lin.r2_0;
                    let b = r2.max(4.0 * B_MIN * B_MIN).sqrt() * (1.0 - 1e-4);
                    x[self.iext(n, 0)] = aa;
                    x[self.iext(n, 1)] = b;
                }
                Kind::Vertical {
                    sign,
                    weight,
                    mass,
                    inv_loading,
                } => {
                    let rhs = vc * vc + inv_loading * (weight + sign * mass * a);
                    let s_lb = 0.5 * (rhs + lin.shat * lin.shat) / lin.shat;
                    x[self.iext(n, 0)] = s_lb * (1.0 + 1e-4) + 1e-9;
                }
            }
        }
        x
    }

    /// Epigraph variables set to their cheapest feasible values for fixed
    /// per-slot velocities (`slot_v` of length `n_slots - 1`; the rest
    /// boundary is implied). Returns `None` when the velocities violate the
    /// kinematic constraints. Used by brute-force oracles.
    pub fn assemble_with_optimal_extras(&self, slot_v: &[f64]) -> Option<Vec<f64>> {
        assert_eq!(slot_v.len(), self.n_slots - 1);
        let mut x = vec![0.0; self.dim()];
        for n in 1..self.n_slots {
            x[self.iv(n)] = slot_v[n - 1];
        }
        let tol = 1e-9;
        for n in 1..=self.n_slots {
            let vc = self.v_at(&x, n);
            let a = (vc - self.v_at(&x, n - 1)) / self.dt;
            if vc < -tol || vc > self.v_max + tol || a.abs() > self.a_max + tol {
                return None;
            }
            let lin = &self.slot[n - 1];
            match self.kind {
                Kind::Straight { c2, c3, .. } => {
                    let pb_pos = ProductBound {
                        sa: 1.0,
                        dhat: lin.bound_pos,
                    };
                    let pb_neg = ProductBound {
                        sa: -1.0,
                        dhat: lin.bound_neg,
                    };
                    let lb1 = c2 * vc * vc + c3 * pb_pos.value(a, vc);
                    let lb2 = lin.tan_slope * vc + lin.tan_icpt + c3 * pb_neg.value(a, vc);
                    let a_lb = lb1.max(lb2).max(0.0);
                    // minimize (1 + A^2) / sqrt(r2(A)) over A >= a_lb
                    let r2 = |aa: f64| (lin.r2_a * aa + lin.r2_v * vc + lin.r2_0).max(B_MIN * B_MIN);
                    let f = |aa: f64| (1.0 + aa * aa) / r2(aa).sqrt();
                    let (a_star, _) =
                        crate::search::golden_section_min(f, a_lb, a_lb + 10.0, 1e-10, 200);
                    let a_star = a_star.max(a_lb);
                    x[self.iext(n, 0)] = a_star;
                    x[self.iext(n, 1)] = r2(a_star).sqrt();
                }
                Kind::Vertical {
                    sign,
                    weight,
                    mass,
                    inv_loading,
                } => {
                    let rhs = vc * vc + inv_loading * (weight + sign * mass * a);
                    x[self.iext(n, 0)] = 0.5 * (rhs + lin.shat * lin.shat) / lin.shat;
                }
            }
        }
        Some(x)
    }

    /// Maximal violation of the original (non-linearized) epigraph
    /// relations at an iterate: how far `A` sits from the true correction
    /// magnitude and `B`/`S` from the true radical.
    pub fn slack_residuals(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 1..=self.n_slots {
            let vc = self.v_at(x, n);
            let a = (vc - self.v_at(x, n - 1)) / self.dt;
            match self.kind {
                Kind::Straight { c2, c3, c4, .. } => {
                    let aa = x[self.iext(n, 0)];
                    let b = x[self.iext(n, 1)];
                    let x_true = c2 * vc * vc + c3 * a * vc;
                    let b_true =
                        ((1.0 + aa * aa + (c4 * vc * vc).powi(2)).sqrt() + c4 * vc * vc).sqrt();
                    worst = worst.max((aa - x_true.abs()).abs());
                    worst = worst.max((b - b_true).abs());
                }
                Kind::Vertical {
                    sign,
                    weight,
                    mass,
                    inv_loading,
                } => {
                    let s = x[self.iext(n, 0)];
                    let s_true = (vc * vc + inv_loading * (weight + sign * mass * a)).sqrt();
                    worst = worst.max((s - s_true).abs());
                }
            }
        }
        worst
    }
}

/// Solves a subproblem by the log-barrier Newton method.
///
/// `start` must be strictly feasible; [`ConvexSubproblem::initial_point`]
/// provides one. On an iteration cap the best iterate is returned with the
/// `degraded` flag set.
pub fn solve_convex_subproblem(
    model: &ConvexSubproblem,
    start: Option<&[f64]>,
    settings: &ScaSettings,
) -> Result<SubproblemSolution, Error> {
    let owned_start;
    let start = match start {
        Some(s) => s,
        None => {
            owned_start = model.initial_point();
            &owned_start
        }
    };
    let dim = model.dim();
    assert_eq!(start.len(), dim);

    // A zero-displacement segment admits only the rest point, which sits on
    // the boundary of every velocity constraint; return it analytically.
    if model.distance <= 0.0 {
        let x = model
            .assemble_with_optimal_extras(&vec![0.0; model.slots() - 1])
            .expect("rest point is feasible");
        return Ok(SubproblemSolution {
            objective: model.objective_at(&x),
            kkt_residual: 0.0,
            duality_gap: 0.0,
            degraded: false,
            x,
        });
    }

    let mut scratch = Vec::with_capacity(model.num_constraints());
    if !model.is_strictly_feasible(start, &mut scratch) {
        return Err(Error::Solver(
            "subproblem start point is not strictly feasible".into(),
        ));
    }

    // Displacement equality row: dt on every free velocity.
    let mut eq = vec![0.0; dim];
    for n in 1..model.slots() {
        eq[model.iv(n)] = model.dt;
    }

    let m = model.num_constraints() as f64;
    let scale = model.objective_at(start).abs().max(1.0);
    let gap_target = settings.subproblem_kkt_tol.max(1e-12) * scale;
    let mut t = (m / (0.05 * scale)).max(1.0);
    let mut x = start.to_vec();
    let mut grad = vec![0.0; dim];
    let mut hess = BandMatrix::new(dim, model.half_bandwidth());
    let mut degraded = false;
    let mut nu = 0.0;

    let mut stage = 0;
    loop {
        // Newton centering at the current barrier weight.
        let mut centered = false;
        for _ in 0..MAX_NEWTON_ITERS {
            model.assemble(&x, t, &mut grad, &mut hess);
            let mut y1 = grad.clone();
            let mut y2 = eq.clone();
            let h_scale = hess.max_abs().max(1.0);
            if !hess.is_finite() {
                model.constraint_values(&x, &mut scratch);
                let (worst_idx, worst_g) = scratch
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(i, &g)| (i, g))
                    .unwrap_or((0, f64::NAN));
                return Err(Error::Solver(format!(
                    "subproblem Hessian has non-finite entries (t = {t:.3e}, tightest slack {worst_g:.3e} at constraint {worst_idx})"
                )));
            }
            let mut ridge = 0.0;
            loop {
                let mut factor = hess.clone();
                if ridge > 0.0 {
                    for i in 0..dim {
                        factor.add(i, i, ridge);
                    }
                }
                match factor.cholesky() {
                    Ok(()) => {
                        factor.solve(&mut y1);
                        factor.solve(&mut y2);
                        break;
                    }
                    Err(_) => {
                        ridge = if ridge == 0.0 {
                            1e-14 * h_scale
                        } else {
                            ridge * 100.0
                        };
                        if ridge > 1e-2 * h_scale {
                            return Err(Error::Solver(
                                "subproblem Hessian factorization failed".into(),
                            ));
                        }
                        y1.copy_from_slice(&grad);
                        y2.copy_from_slice(&eq);
                    }
                }
            }
            let c_y1: f64 = eq.iter().zip(&y1).map(|(c, y)| c * y).sum();
            let c_y2: f64 = eq.iter().zip(&y2).map(|(c, y)| c * y).sum();
            nu = if c_y2.abs() > 0.0 { -c_y1 / c_y2 } else { 0.0 };
            let dx: Vec<f64> = (0..dim).map(|i| -(y1[i] + nu * y2[i])).collect();
            // Newton decrement is affine-invariant: absolute threshold.
            let decrement: f64 = -grad.iter().zip(&dx).map(|(g, d)| g * d).sum::<f64>();
            if decrement * 0.5 <= 1e-9 {
                centered = true;
                break;
            }

            // Backtrack into the domain, then Armijo.
            let psi0 = model.barrier_value(&x, t, &mut scratch);
            let slope: f64 = grad.iter().zip(&dx).map(|(g, d)| g * d).sum();
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi + alpha * di).collect();
                let psi = model.barrier_value(&trial, t, &mut scratch);
                if psi.is_finite() && psi <= psi0 + 0.25 * alpha * slope {
                    x = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                centered = true; // stuck at numerical resolution
                break;
            }
        }
        if !centered {
            degraded = true;
        }
        if m / t <= gap_target {
            break;
        }
        stage += 1;
        if stage >= MAX_BARRIER_STAGES {
            degraded = true;
            break;
        }
        // Land exactly on the target barrier weight instead of overshooting
        // it; overshooting drives active slacks below float resolution.
        t = (t * BARRIER_GROWTH).min(1.05 * m / gap_target);
    }

    // Stationarity residual of the original problem at the returned point.
    model.assemble(&x, t, &mut grad, &mut hess);
    let kkt_residual = grad
        .iter()
        .zip(&eq)
        .map(|(g, c)| ((g + nu * c) / t).abs())
        .fold(0.0f64, f64::max);

    Ok(SubproblemSolution {
        objective: model.objective_at(&x),
        kkt_residual,
        duality_gap: m / t,
        degraded,
        x,
    })
}
