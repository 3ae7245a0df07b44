//! Energy-optimal user visiting order.
//!
//! The tour is encoded as a stage/user assignment with a quadratic coupling
//! between consecutive stages. A Lagrangian dual with projected subgradient
//! updates drives per-user stage selections; because the raw per-user argmin
//! can collide (two users picking one stage), every iterate is repaired into
//! a permutation by an optimal assignment on the current stage-cost matrix
//! and the cheapest repaired tour seen anywhere in the run is kept. An
//! exhaustive search over all permutations serves as the optimality oracle
//! for small instances.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Symmetric matrix of minimal leg energies, J. Index 0 is the depot; users
/// are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl EnergyMatrix {
    /// Builds a matrix from a closure mapping `(row, col)` with symmetry
    /// enforced by construction (each unordered pair evaluated once).
    pub fn from_pairwise(
        size: usize,
        mut leg_energy: impl FnMut(usize, usize) -> Result<f64, Error>,
    ) -> Result<Self, Error> {
        let mut entries = vec![0.0; size * size];
        for i in 0..size {
            for j in (i + 1)..size {
                let e = leg_energy(i, j)?;
                entries[i * size + j] = e;
                entries[j * size + i] = e;
            }
        }
        Ok(Self { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of users (size minus the depot).
    pub fn users(&self) -> usize {
        self.size - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.size < 2 {
            return Err(Error::invalid("size", self.size as f64, "need depot plus at least one user"));
        }
        for i in 0..self.size {
            if self.get(i, i) != 0.0 {
                return Err(Error::invalid("diagonal", self.get(i, i), "must be zero"));
            }
            for j in 0..self.size {
                let e = self.get(i, j);
                if !(e >= 0.0) || !e.is_finite() {
                    return Err(Error::invalid("entry", e, "must be finite and non-negative"));
                }
                if e != self.get(j, i) {
                    return Err(Error::invalid("entry", e, "matrix must be symmetric"));
                }
            }
        }
        Ok(())
    }
}

/// Builds the leg-energy matrix for a depot and user layout.
///
/// `planner` maps a leg distance in meters to the minimal propulsion energy
/// for that leg; failures are annotated with the offending pair.
pub fn pairwise_energy_matrix(
    depot: (f64, f64),
    users: &[(f64, f64)],
    mut planner: impl FnMut(f64) -> Result<f64, Error>,
) -> Result<EnergyMatrix, Error> {
    if users.is_empty() {
        return Err(Error::invalid("users", 0.0, "need at least one user"));
    }
    let mut points = Vec::with_capacity(users.len() + 1);
    points.push(depot);
    points.extend_from_slice(users);
    EnergyMatrix::from_pairwise(points.len(), |i, j| {
        let (xi, yi) = points[i];
        let (xj, yj) = points[j];
        let d = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt();
        planner(d).map_err(|e| Error::Solver(format!("leg ({i}, {j}) at distance {d:.3} m: {e}")))
    })
}

/// A visiting order: a permutation of the 1-based user ids and its closed
/// tour cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitOrder {
    pub order: Vec<usize>,
    pub total_energy: f64,
}

/// Cost of the closed tour depot -> order -> depot.
pub fn tour_cost(energy: &EnergyMatrix, order: &[usize]) -> f64 {
    let mut cost = energy.get(0, order[0]);
    for pair in order.windows(2) {
        cost += energy.get(pair[0], pair[1]);
    }
    cost + energy.get(*order.last().unwrap(), 0)
}

fn canonical_direction(energy: &EnergyMatrix, mut order: Vec<usize>) -> Vec<usize> {
    let forward = tour_cost(energy, &order);
    let mut reversed = order.clone();
    reversed.reverse();
    let backward = tour_cost(energy, &reversed);
    if backward < forward || (backward == forward && reversed < order) {
        order = reversed;
    }
    order
}

/// Settings of the dual/subgradient order solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualSettings {
    pub max_iters: usize,
    /// Iterations over which the dual objective must stall to declare
    /// convergence.
    pub stall_window: usize,
    /// Relative stall tolerance on the dual objective.
    pub rel_tol: f64,
    /// Base step size; defaults to mean(E) / K when unset.
    pub step_scale: Option<f64>,
}

impl Default for DualSettings {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            stall_window: 20,
            rel_tol: 1e-6,
            step_scale: None,
        }
    }
}

/// Final multiplier state of the dual solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub step_scale: f64,
}

/// Per-iteration trace of the dual solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualTrace {
    pub dual_objectives: Vec<f64>,
    /// Tour cost of the repaired assignment at each iteration.
    pub primal_costs: Vec<f64>,
    /// Number of stage collisions in the raw per-user argmin.
    pub infeasibility_counts: Vec<usize>,
    pub converged: bool,
    /// Whether the returned order came from repair rather than a collision
    /// free argmin.
    pub repaired: bool,
    pub final_state: DualState,
}

struct Multipliers {
    k_users: usize,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    lambda: Vec<f64>,
    mu: Vec<f64>,
}

impl Multipliers {
    fn new(k_users: usize) -> Self {
        let cube = k_users.saturating_sub(1) * k_users * k_users;
        Self {
            k_users,
            beta: vec![0.0; k_users],
            gamma: vec![0.0; cube],
            lambda: vec![0.0; cube],
            mu: vec![0.0; cube],
        }
    }

    /// Index into the (stage, previous user, current user) cube; `stage`
    /// ranges over 2..=K.
    #[inline]
    fn idx(&self, stage: usize, prev_user: usize, cur_user: usize) -> usize {
        ((stage - 2) * self.k_users + (prev_user - 1)) * self.k_users + (cur_user - 1)
    }
}

/// Stage-cost coefficients of the dual inner problem: entry `[k-1][l-1]` is
/// the Lagrangian coefficient of assigning user `l` to stage `k`.
fn stage_costs(energy: &EnergyMatrix, m: &Multipliers) -> Vec<Vec<f64>> {
    let k_users = m.k_users;
    let mut costs = vec![vec![0.0; k_users]; k_users];
    for stage in 1..=k_users {
        for user in 1..=k_users {
            let mut c = m.beta[stage - 1];
            if stage == 1 {
                c += energy.get(0, user);
            }
            if stage == k_users {
                c += energy.get(user, 0);
            }
            if stage + 1 <= k_users {
                for i in 1..=k_users {
                    let id = m.idx(stage + 1, user, i);
                    c += m.gamma[id] - m.lambda[id];
                }
            }
            if stage >= 2 {
                for i in 1..=k_users {
                    let id = m.idx(stage, i, user);
                    c += m.gamma[id] - m.mu[id];
                }
            }
            costs[stage - 1][user - 1] = c;
        }
    }
    costs
}

/// Per-user stage argmin (ties to the smallest stage).
fn argmin_stages(costs: &[Vec<f64>]) -> Vec<usize> {
    let k_users = costs.len();
    (1..=k_users)
        .map(|user| {
            let mut best = 1;
            for stage in 2..=k_users {
                if costs[stage - 1][user - 1] < costs[best - 1][user - 1] {
                    best = stage;
                }
            }
            best
        })
        .collect()
}

/// Polishes a repaired tour with 2-opt segment reversals until no move
/// improves the closed tour cost. Part of the feasibility repair: the
/// assignment step restores one-user-per-stage, this step removes the
/// crossings the stage costs cannot see.
fn two_opt(energy: &EnergyMatrix, order: &mut Vec<usize>) {
    let k = order.len();
    if k < 3 {
        return;
    }
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..k - 1 {
            for j in i + 1..k {
                let before = if i == 0 { 0 } else { order[i - 1] };
                let after = if j == k - 1 { 0 } else { order[j + 1] };
                let old = energy.get(before, order[i]) + energy.get(order[j], after);
                let new = energy.get(before, order[j]) + energy.get(order[i], after);
                if new < old - 1e-12 * old.max(1.0) {
                    order[i..=j].reverse();
                    improved = true;
                }
            }
        }
    }
}

/// Minimum-cost one-to-one stage/user assignment for a finite cost matrix
/// (`costs[stage][user]`), returned as the user visited at each stage
/// (1-based). Hungarian algorithm with potentials, O(K^3).
pub fn recover_assignment(costs: &[Vec<f64>]) -> Vec<usize> {
    let n = costs.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut min_slack = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = costs[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < min_slack[j] {
                        min_slack[j] = cur;
                        way[j] = j0;
                    }
                    if min_slack[j] < delta {
                        delta = min_slack[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut user_at_stage = vec![0usize; n];
    for j in 1..=n {
        user_at_stage[matched_row[j] - 1] = j;
    }
    user_at_stage
}

/// Visiting order by the dual/subgradient method with assignment repair.
pub fn solve_order_dual(
    energy: &EnergyMatrix,
    settings: &DualSettings,
) -> Result<(VisitOrder, DualTrace), Error> {
    energy.validate()?;
    let k_users = energy.users();
    if k_users == 1 {
        let order = vec![1];
        let cost = tour_cost(energy, &order);
        return Ok((
            VisitOrder {
                order,
                total_energy: cost,
            },
            DualTrace {
                dual_objectives: vec![cost],
                primal_costs: vec![cost],
                infeasibility_counts: vec![0],
                converged: true,
                repaired: false,
                final_state: DualState {
                    beta: vec![0.0],
                    gamma: vec![],
                    lambda: vec![],
                    mu: vec![],
                    step_scale: 0.0,
                },
            },
        ));
    }

    let mean_energy = {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..energy.size() {
            for j in 0..energy.size() {
                if i != j {
                    sum += energy.get(i, j);
                    count += 1;
                }
            }
        }
        sum / count as f64
    };
    let step_scale = settings
        .step_scale
        .unwrap_or(mean_energy / k_users as f64)
        .max(f64::MIN_POSITIVE);

    let mut m = Multipliers::new(k_users);
    let mut v_aux = vec![0.0; m.gamma.len()];
    let mut trace = DualTrace {
        dual_objectives: Vec::new(),
        primal_costs: Vec::new(),
        infeasibility_counts: Vec::new(),
        converged: false,
        repaired: false,
        final_state: DualState {
            beta: vec![],
            gamma: vec![],
            lambda: vec![],
            mu: vec![],
            step_scale,
        },
    };
    let mut best: Option<VisitOrder> = None;
    let mut raw_feasible_seen = false;

    for iter in 1..=settings.max_iters {
        let costs = stage_costs(energy, &m);

        // Inner minimizers: per-user stage choice and auxiliary couplers.
        let stage_of_user = argmin_stages(&costs);
        for stage in 2..=k_users {
            for prev in 1..=k_users {
                for cur in 1..=k_users {
                    let id = m.idx(stage, prev, cur);
                    let drive = m.gamma[id] - m.lambda[id] - m.mu[id];
                    let e = energy.get(prev, cur);
                    v_aux[id] = if e > 0.0 {
                        (drive / (2.0 * e)).max(0.0)
                    } else if drive > 0.0 {
                        1.0
                    } else {
                        0.0
                    };
                }
            }
        }

        // Dual objective at the inner minimizers.
        let mut dual = -m.beta.iter().sum::<f64>();
        for user in 1..=k_users {
            dual += costs[stage_of_user[user - 1] - 1][user - 1];
        }
        for stage in 2..=k_users {
            for prev in 1..=k_users {
                for cur in 1..=k_users {
                    let id = m.idx(stage, prev, cur);
                    let drive = m.gamma[id] - m.lambda[id] - m.mu[id];
                    dual -= m.gamma[id];
                    dual += energy.get(prev, cur) * v_aux[id] * v_aux[id] - drive * v_aux[id];
                }
            }
        }
        trace.dual_objectives.push(dual);

        // Raw assignment: w[stage][user] indicator built from the argmin.
        let mut users_at_stage = vec![Vec::new(); k_users + 1];
        for (user0, &stage) in stage_of_user.iter().enumerate() {
            users_at_stage[stage].push(user0 + 1);
        }
        let collisions = users_at_stage
            .iter()
            .filter(|users| users.len() > 1)
            .map(|users| users.len() - 1)
            .sum::<usize>();
        trace.infeasibility_counts.push(collisions);

        // Repaired permutation for primal tracking.
        let mut repaired = recover_assignment(&costs);
        two_opt(energy, &mut repaired);
        let cost = tour_cost(energy, &repaired);
        trace.primal_costs.push(cost);
        if collisions == 0 {
            raw_feasible_seen = true;
        }
        if best.as_ref().is_none_or(|b| cost < b.total_energy) {
            best = Some(VisitOrder {
                order: repaired,
                total_energy: cost,
            });
        }

        // Projected subgradient step.
        let phi = step_scale / (iter as f64).sqrt();
        let w = |stage: usize, user: usize| -> f64 {
            if stage_of_user[user - 1] == stage {
                1.0
            } else {
                0.0
            }
        };
        for stage in 1..=k_users {
            let load: f64 = users_at_stage[stage].len() as f64;
            m.beta[stage - 1] += phi * (load - 1.0);
        }
        for stage in 2..=k_users {
            for prev in 1..=k_users {
                for cur in 1..=k_users {
                    let id = m.idx(stage, prev, cur);
                    let w_prev = w(stage - 1, prev);
                    let w_cur = w(stage, cur);
                    let v = v_aux[id];
                    m.gamma[id] = (m.gamma[id] + phi * (w_prev + w_cur - 1.0 - v)).max(0.0);
                    m.lambda[id] = (m.lambda[id] + phi * (v - w_prev)).max(0.0);
                    m.mu[id] = (m.mu[id] + phi * (v - w_cur)).max(0.0);
                }
            }
        }

        // Stall detection on the dual objective.
        let window = settings.stall_window.max(2);
        if trace.dual_objectives.len() > window {
            let tail = &trace.dual_objectives[trace.dual_objectives.len() - window..];
            let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if (hi - lo).abs() <= settings.rel_tol * hi.abs().max(1.0) {
                trace.converged = true;
                break;
            }
        }
    }

    // Final answer: assignment repair on the converged costs, against the
    // best tour encountered during the run.
    let costs = stage_costs(energy, &m);
    let mut final_order = recover_assignment(&costs);
    two_opt(energy, &mut final_order);
    let final_cost = tour_cost(energy, &final_order);
    if best.as_ref().is_none_or(|b| final_cost < b.total_energy) {
        best = Some(VisitOrder {
            order: final_order,
            total_energy: final_cost,
        });
    }
    let mut best = best.expect("at least one iteration ran");
    best.order = canonical_direction(energy, best.order);
    best.total_energy = tour_cost(energy, &best.order);

    trace.repaired = !raw_feasible_seen;
    trace.final_state = DualState {
        beta: m.beta,
        gamma: m.gamma,
        lambda: m.lambda,
        mu: m.mu,
        step_scale,
    };
    Ok((best, trace))
}

/// Exhaustive-search optimal order; guarded to at most 10 users.
pub fn solve_order_exhaustive(energy: &EnergyMatrix) -> Result<VisitOrder, Error> {
    energy.validate()?;
    let k_users = energy.users();
    const LIMIT: usize = 10;
    if k_users > LIMIT {
        return Err(Error::SizeLimit {
            what: "exhaustive order search",
            size: k_users,
            limit: LIMIT,
        });
    }
    let mut perm: Vec<usize> = (1..=k_users).collect();
    let mut best = VisitOrder {
        order: perm.clone(),
        total_energy: tour_cost(energy, &perm),
    };
    // Lexicographic next-permutation enumeration keeps the first optimum in
    // lexicographic order deterministic.
    while next_permutation(&mut perm) {
        let cost = tour_cost(energy, &perm);
        if cost < best.total_energy {
            best = VisitOrder {
                order: perm.clone(),
                total_energy: cost,
            };
        }
    }
    Ok(best)
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn matrix_from_distances(depot: (f64, f64), users: &[(f64, f64)]) -> EnergyMatrix {
        // Distance itself as a stand-in leg energy: monotone in distance.
        pairwise_energy_matrix(depot, users, |d| Ok(d)).unwrap()
    }

    #[test]
    fn matrix_is_symmetric_with_zero_diagonal() {
        let m = matrix_from_distances((0.0, 0.0), &[(3.0, 4.0), (6.0, 8.0), (6.0, 8.0)]);
        m.validate().unwrap();
        assert_eq!(m.get(1, 2), m.get(2, 1));
        assert_relative_eq!(m.get(0, 1), 5.0);
        // coincident users have a zero leg
        assert_eq!(m.get(2, 3), 0.0);
    }

    #[test]
    fn matrix_entries_grow_with_distance() {
        let m = matrix_from_distances((0.0, 0.0), &[(20.0, 0.0), (1000.0, 0.0)]);
        assert!(m.get(0, 2) > m.get(0, 1));
    }

    #[test]
    fn planner_failure_names_the_pair() {
        let err = pairwise_energy_matrix((0.0, 0.0), &[(1.0, 0.0)], |_d| {
            Err(Error::Solver("boom".into()))
        })
        .unwrap_err();
        assert!(err.to_string().contains("leg (0, 1)"));
    }

    #[test]
    fn single_user_order_is_out_and_back() {
        let m = matrix_from_distances((0.0, 0.0), &[(10.0, 0.0)]);
        let (order, trace) = solve_order_dual(&m, &DualSettings::default()).unwrap();
        assert_eq!(order.order, vec![1]);
        assert_relative_eq!(order.total_energy, 20.0);
        assert!(trace.converged);
    }

    #[test]
    fn symmetric_pair_breaks_tie_lexicographically() {
        let m = matrix_from_distances((0.0, 0.0), &[(10.0, 0.0), (-10.0, 0.0)]);
        let (order, _) = solve_order_dual(&m, &DualSettings::default()).unwrap();
        assert_eq!(order.order, vec![1, 2]);
    }

    #[test]
    fn collinear_users_visit_in_line_order() {
        // Leg energy with a fixed start/stop overhead on top of the linear
        // per-meter cost (as a rest-to-rest leg has): sweeping the line in
        // order is then strictly optimal.
        let users = [(100.0, 0.0), (200.0, 0.0), (300.0, 0.0)];
        let m = pairwise_energy_matrix((0.0, 0.0), &users, |d| Ok(9.0 * d + 60.0 * d.sqrt()))
            .unwrap();
        let exhaustive = solve_order_exhaustive(&m).unwrap();
        let (dual, _) = solve_order_dual(&m, &DualSettings::default()).unwrap();
        assert!(
            exhaustive.order == vec![1, 2, 3] || exhaustive.order == vec![3, 2, 1],
            "exhaustive order {:?}",
            exhaustive.order
        );
        assert!(
            dual.order == vec![1, 2, 3] || dual.order == vec![3, 2, 1],
            "order {:?}",
            dual.order
        );
        assert_relative_eq!(dual.total_energy, exhaustive.total_energy, max_relative = 1e-12);
    }

    #[test]
    fn tour_cost_is_reversal_invariant() {
        let m = matrix_from_distances(
            (12.0, -4.0),
            &[(100.0, 3.0), (-50.0, 40.0), (7.0, 300.0), (90.0, -120.0)],
        );
        let order = vec![3, 1, 4, 2];
        let mut reversed = order.clone();
        reversed.reverse();
        assert_relative_eq!(
            tour_cost(&m, &order),
            tour_cost(&m, &reversed),
            max_relative = 1e-12
        );
    }

    #[test]
    fn exhaustive_refuses_large_instances() {
        let users: Vec<(f64, f64)> = (0..11).map(|i| (i as f64, 0.0)).collect();
        let m = matrix_from_distances((0.0, 0.0), &users);
        assert!(matches!(
            solve_order_exhaustive(&m),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn hungarian_picks_dominant_diagonal() {
        let costs = vec![
            vec![1.0, 10.0, 10.0],
            vec![10.0, 1.0, 10.0],
            vec![10.0, 10.0, 1.0],
        ];
        assert_eq!(recover_assignment(&costs), vec![1, 2, 3]);
    }

    #[test]
    fn hungarian_resolves_contested_stage() {
        // Both users prefer stage 1; the cheaper combined split assigns
        // user 2 to stage 1 (total 3.0 versus 12.0).
        let costs = vec![vec![2.0, 1.0], vec![2.0, 10.0]];
        assert_eq!(recover_assignment(&costs), vec![2, 1]);
    }

    #[test]
    fn hungarian_matches_brute_force_on_random_costs() {
        let mut state = 0x243F_6A88_85A3_08D3u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (u32::MAX as f64)
        };
        for n in 2..=6 {
            for _case in 0..20 {
                let costs: Vec<Vec<f64>> =
                    (0..n).map(|_| (0..n).map(|_| next() * 100.0).collect()).collect();
                let assignment = recover_assignment(&costs);
                let mut seen = vec![false; n + 1];
                let mut total = 0.0;
                for (stage0, &user) in assignment.iter().enumerate() {
                    assert!(!seen[user], "not a permutation");
                    seen[user] = true;
                    total += costs[stage0][user - 1];
                }
                // brute force over all permutations
                let mut perm: Vec<usize> = (1..=n).collect();
                let mut best = f64::INFINITY;
                loop {
                    let cost: f64 = perm
                        .iter()
                        .enumerate()
                        .map(|(stage0, &user)| costs[stage0][user - 1])
                        .sum();
                    best = best.min(cost);
                    if !next_permutation(&mut perm) {
                        break;
                    }
                }
                assert_relative_eq!(total, best, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn dual_multipliers_stay_non_negative() {
        let m = matrix_from_distances(
            (0.0, 0.0),
            &[(100.0, 3.0), (-50.0, 40.0), (7.0, 300.0), (90.0, -120.0)],
        );
        let (_, trace) = solve_order_dual(&m, &DualSettings::default()).unwrap();
        assert!(trace.final_state.gamma.iter().all(|&g| g >= 0.0));
        assert!(trace.final_state.lambda.iter().all(|&l| l >= 0.0));
        assert!(trace.final_state.mu.iter().all(|&mu| mu >= 0.0));
    }

    #[test]
    fn dual_matches_exhaustive_on_a_fixed_instance() {
        let m = matrix_from_distances(
            (500.0, 500.0),
            &[
                (120.0, 40.0),
                (900.0, 150.0),
                (430.0, 980.0),
                (700.0, 700.0),
                (60.0, 610.0),
            ],
        );
        let exhaustive = solve_order_exhaustive(&m).unwrap();
        let (dual, _) = solve_order_dual(&m, &DualSettings::default()).unwrap();
        assert_relative_eq!(dual.total_energy, exhaustive.total_energy, max_relative = 1e-9);
    }
}
