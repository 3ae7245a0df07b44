//! Full mission assembly: visiting order, per-user hover heights, stage
//! energies, sweeps and plan output.
//!
//! A mission visits every user once and returns to the depot. Each stage
//! flies a straight leg at cruise altitude, descends to the hover height,
//! exchanges energy and data, and climbs back. The stage decomposition makes
//! the hover height a one-dimensional search per user: the vertical flight
//! cost falls with height while the hover cost rises, and the planner scans
//! a height grid and polishes the best cell with a golden-section step.
//! Vertical refinements are memoized by drop distance and straight legs by
//! length, which makes sweeps over radio parameters cheap.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hover::{
    height_bound, solve_fd, solve_hd, ChannelParams, DuplexMode, HoverSolution, RadioParams,
    UserComm,
};
use crate::kinematics::{validate, DiscreteTrajectory};
use crate::order::{
    pairwise_energy_matrix, solve_order_dual, solve_order_exhaustive, DualTrace, EnergyMatrix,
    VisitOrder,
};
use crate::propulsion::{derive_constants, PowerConstants};
use crate::sca::{
    feasible_straight_reference, optimize_straight, optimize_vertical, VerticalPlan,
};
use crate::scenario::Scenario;
use crate::search::golden_section_min;

/// One fly-descend-hover-climb stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagePlan {
    /// 1-based user id.
    pub user: usize,
    pub inbound: DiscreteTrajectory<f64>,
    pub descent: DiscreteTrajectory<f64>,
    pub climb: DiscreteTrajectory<f64>,
    pub hover: HoverSolution,
    /// Hover height above the user, m.
    pub hover_height: f64,
    /// Straight-leg energy, J.
    pub e1: f64,
    /// Descent energy, J.
    pub e2: f64,
    /// Hover energy, J.
    pub e3: f64,
    /// Climb energy, J.
    pub e4: f64,
}

impl StagePlan {
    pub fn stage_energy(&self) -> f64 {
        self.e1 + self.e2 + self.e3 + self.e4
    }
}

/// A complete mission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionPlan {
    pub order: VisitOrder,
    pub stages: Vec<StagePlan>,
    pub return_trajectory: DiscreteTrajectory<f64>,
    /// Energy of the final leg back to the depot, J.
    pub return_energy: f64,
    pub total_energy: f64,
    /// Notes about solver decisions (cross-check corrections etc.).
    pub diagnostics: Vec<String>,
}

/// Shared solver state for one scenario: derived constants plus memoized
/// vertical and straight refinements.
pub struct PlannerContext {
    pub consts: PowerConstants<f64>,
    vertical_cache: HashMap<u64, VerticalPlan>,
    straight_cache: HashMap<u64, (DiscreteTrajectory<f64>, f64)>,
}

impl PlannerContext {
    pub fn new(scenario: &Scenario) -> Result<Self, Error> {
        Ok(Self {
            consts: derive_constants(&scenario.airframe)?,
            vertical_cache: HashMap::new(),
            straight_cache: HashMap::new(),
        })
    }

    /// Vertical excursion for a drop distance, memoized.
    fn vertical(&mut self, scenario: &Scenario, drop: f64) -> Result<VerticalPlan, Error> {
        if let Some(hit) = self.vertical_cache.get(&drop.to_bits()) {
            return Ok(hit.clone());
        }
        let plan = optimize_vertical(
            drop,
            &scenario.limits,
            &self.consts,
            &scenario.airframe,
            &scenario.solver.sca,
        )?;
        self.vertical_cache.insert(drop.to_bits(), plan.clone());
        Ok(plan)
    }

    /// Straight leg trajectory and energy, memoized by distance.
    fn leg(
        &mut self,
        scenario: &Scenario,
        distance: f64,
        refined: bool,
    ) -> Result<(DiscreteTrajectory<f64>, f64), Error> {
        let key = (distance * if refined { 1.0 } else { -1.0 }).to_bits();
        if let Some(hit) = self.straight_cache.get(&key) {
            return Ok(hit.clone());
        }
        let result = if refined {
            let (traj, energy, _) = optimize_straight(
                distance,
                &scenario.limits,
                &self.consts,
                &scenario.solver.sca,
            )?;
            (traj, energy)
        } else {
            feasible_straight_reference(
                distance,
                &scenario.limits,
                &self.consts,
                &scenario.solver.sca,
            )?
        };
        self.straight_cache.insert(key, result.clone());
        Ok(result)
    }
}

fn solve_hover(
    mode: DuplexMode,
    height: f64,
    channel: &ChannelParams,
    radio: &RadioParams,
    comm: &UserComm,
    hover_power: f64,
) -> Result<HoverSolution, Error> {
    match mode {
        DuplexMode::Hd => solve_hd(height, channel, radio, comm, hover_power),
        DuplexMode::Fd => solve_fd(height, channel, radio, comm, hover_power),
    }
}

/// Per-user hover-height optimization: grid scan plus golden-section polish
/// of V1 (vertical flight) + V2/V3 (hover). The returned stage carries no
/// inbound leg yet; [`plan_mission`] attaches it once the order is known.
pub fn optimize_stage_height(
    scenario: &Scenario,
    user_index: usize,
    ctx: &mut PlannerContext,
) -> Result<StagePlan, Error> {
    let user = &scenario.users[user_index];
    let comm = user.comm();
    let radio = scenario.radio.to_params();
    let channel = scenario.channel;
    let hover_power = ctx.consts.hover_power();
    let grid = scenario.solver.height_grid;
    let cruise = scenario.cruise_altitude_m;

    // Grid ceiling: harvested power must at least cover the receive circuit;
    // the zero-delay FD regime has the stricter closed-form bound. Per-height
    // feasibility beyond this is decided by the hover solver itself.
    let cap = match scenario.mode {
        DuplexMode::Hd => height_bound(DuplexMode::Hd, &channel, &radio, &comm),
        DuplexMode::Fd if comm.circuit_delay < 1e-12 => {
            height_bound(DuplexMode::Fd, &channel, &radio, &comm)
        }
        DuplexMode::Fd => height_bound(DuplexMode::Hd, &channel, &radio, &comm),
    };
    let upper = (cap - grid.bound_margin).min(cruise);
    if upper < grid.min_height {
        return Err(Error::Infeasible(format!(
            "user {}: no feasible hover height in [{}, {}]",
            user_index + 1,
            grid.min_height,
            upper
        )));
    }

    let mut best: Option<(f64, f64)> = None; // (objective, height)
    let evaluate = |ctx: &mut PlannerContext, h: f64| -> Result<f64, Error> {
        let vertical = ctx.vertical(scenario, cruise - h)?;
        match solve_hover(scenario.mode, h, &channel, &radio, &comm, hover_power) {
            Ok(hover) => Ok(vertical.total_energy() + hover.hover_energy),
            Err(Error::Infeasible(_)) | Err(Error::InfeasibleHeight { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    let mut h = grid.min_height;
    while h <= upper + 1e-12 {
        let value = evaluate(ctx, h)?;
        if best.is_none_or(|(b, _)| value < b) {
            best = Some((value, h));
        }
        h += grid.step;
    }
    let value_at_upper = evaluate(ctx, upper)?;
    if best.is_none_or(|(b, _)| value_at_upper < b) {
        best = Some((value_at_upper, upper));
    }
    let (best_value, best_h) = best.expect("grid has at least one point");
    if !best_value.is_finite() {
        return Err(Error::Infeasible(format!(
            "user {}: hover infeasible at every grid height up to {upper:.2} m",
            user_index + 1
        )));
    }

    // Golden-section polish inside the best cell.
    let lo = (best_h - grid.step).max(grid.min_height);
    let hi = (best_h + grid.step).min(upper);
    let mut refine_err = None;
    let (refined_h, refined_value) = golden_section_min(
        |h| match evaluate(ctx, h) {
            Ok(v) => v,
            Err(e) => {
                refine_err = Some(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        grid.refine_tol,
        120,
    );
    if let Some(e) = refine_err {
        return Err(e);
    }
    let h_star = if refined_value < best_value {
        refined_h
    } else {
        best_h
    };

    let vertical = ctx.vertical(scenario, cruise - h_star)?;
    let hover = solve_hover(scenario.mode, h_star, &channel, &radio, &comm, hover_power)?;
    Ok(StagePlan {
        user: user_index + 1,
        inbound: DiscreteTrajectory::empty(),
        descent: vertical.descent.clone(),
        climb: vertical.climb.clone(),
        hover,
        hover_height: h_star,
        e1: 0.0,
        e2: vertical.descent_energy,
        e3: hover.hover_energy,
        e4: vertical.climb_energy,
    })
}

/// Builds the leg-energy matrix for the visiting-order solver.
pub fn order_energy_matrix(
    scenario: &Scenario,
    ctx: &mut PlannerContext,
) -> Result<EnergyMatrix, Error> {
    let refined = scenario.solver.refine_order_matrix;
    pairwise_energy_matrix(scenario.depot, &scenario.user_positions(), |d| {
        ctx.leg(scenario, d, refined).map(|(_, e)| e)
    })
}

/// Visiting order with the exhaustive cross-check applied for small fleets.
pub fn plan_order(
    scenario: &Scenario,
    ctx: &mut PlannerContext,
    diagnostics: &mut Vec<String>,
) -> Result<(VisitOrder, DualTrace), Error> {
    let matrix = order_energy_matrix(scenario, ctx)?;
    let (mut order, trace) = solve_order_dual(&matrix, &scenario.solver.dual)?;
    if scenario.users.len() <= 8 {
        let exhaustive = solve_order_exhaustive(&matrix)?;
        if exhaustive.total_energy < order.total_energy * (1.0 - 1e-12) {
            diagnostics.push(format!(
                "dual order cost {:.3} J corrected to exhaustive optimum {:.3} J",
                order.total_energy, exhaustive.total_energy
            ));
            order = exhaustive;
        }
    }
    Ok((order, trace))
}

/// Plans the full mission for a scenario.
pub fn plan_mission(scenario: &Scenario) -> Result<MissionPlan, Error> {
    let mut ctx = PlannerContext::new(scenario)?;
    plan_mission_with(scenario, &mut ctx)
}

/// [`plan_mission`] with a caller-provided context. The context's caches
/// stay valid as long as the airframe, the kinematic limits and the SCA
/// settings are unchanged; sweeps exploit this to reuse leg and vertical
/// refinements across points.
pub fn plan_mission_with(
    scenario: &Scenario,
    ctx: &mut PlannerContext,
) -> Result<MissionPlan, Error> {
    scenario.validate()?;
    let mut diagnostics = Vec::new();

    // Hover-height optimization per user; report all infeasible users.
    let mut stages_by_user = Vec::with_capacity(scenario.users.len());
    let mut infeasible = Vec::new();
    for index in 0..scenario.users.len() {
        match optimize_stage_height(scenario, index, ctx) {
            Ok(stage) => stages_by_user.push(Some(stage)),
            Err(e) => {
                stages_by_user.push(None);
                infeasible.push(format!("user {}: {e}", index + 1));
            }
        }
    }
    if !infeasible.is_empty() {
        return Err(Error::Infeasible(infeasible.join("; ")));
    }

    let (order, _trace) = plan_order(scenario, ctx, &mut diagnostics)?;

    // Attach the straight legs along the chosen order.
    let refined_legs = scenario.solver.refine_legs;
    let positions = scenario.user_positions();
    let point_of = |id: usize| -> (f64, f64) {
        if id == 0 {
            scenario.depot
        } else {
            positions[id - 1]
        }
    };
    let mut stages = Vec::with_capacity(order.order.len());
    let mut previous = 0usize;
    let mut total = 0.0;
    for &user_id in &order.order {
        let (px, py) = point_of(previous);
        let (cx, cy) = point_of(user_id);
        let distance = ((cx - px).powi(2) + (cy - py).powi(2)).sqrt();
        let (inbound, e1) = ctx.leg(scenario, distance, refined_legs)?;
        let mut stage = stages_by_user[user_id - 1]
            .clone()
            .expect("stage exists for every user");
        stage.inbound = inbound;
        stage.e1 = e1;
        total += stage.stage_energy();
        stages.push(stage);
        previous = user_id;
    }
    let (px, py) = point_of(previous);
    let distance = ((scenario.depot.0 - px).powi(2) + (scenario.depot.1 - py).powi(2)).sqrt();
    let (return_trajectory, return_energy) = ctx.leg(scenario, distance, refined_legs)?;
    total += return_energy;

    let plan = MissionPlan {
        order,
        stages,
        return_trajectory,
        return_energy,
        total_energy: total,
        diagnostics,
    };
    debug_assert!(plan_is_kinematically_valid(scenario, &plan));
    Ok(plan)
}

fn plan_is_kinematically_valid(scenario: &Scenario, plan: &MissionPlan) -> bool {
    for stage in &plan.stages {
        let drop = scenario.cruise_altitude_m - stage.hover_height;
        let end = *stage.inbound.positions.last().unwrap();
        if !validate(&stage.inbound, &scenario.limits, (0.0, end), true).is_feasible() {
            return false;
        }
        for traj in [&stage.descent, &stage.climb] {
            if !validate(traj, &scenario.limits, (0.0, drop), true).is_feasible() {
                return false;
            }
        }
    }
    true
}

/// Axis of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SweepAxis {
    /// Cruise altitude, m.
    H,
    /// Per-user demand, bits.
    D,
    /// Bandwidth, Hz.
    B,
    /// UAV broadcast power, W.
    P,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "H" => Ok(SweepAxis::H),
            "D" => Ok(SweepAxis::D),
            "B" => Ok(SweepAxis::B),
            "P" => Ok(SweepAxis::P),
            other => Err(Error::Scenario(format!(
                "unknown sweep axis `{other}` (expected H, D, B or P)"
            ))),
        }
    }
}

/// Applies one sweep point to a scenario copy.
pub fn apply_sweep_value(scenario: &Scenario, axis: SweepAxis, value: f64) -> Scenario {
    let mut out = scenario.clone();
    match axis {
        SweepAxis::H => out.cruise_altitude_m = value,
        SweepAxis::D => {
            for user in out.users.iter_mut() {
                user.demand_bits = value;
            }
        }
        SweepAxis::B => out.radio.bandwidth_hz = value,
        SweepAxis::P => out.radio.uav_tx_power_w = value,
    }
    out
}

/// Aggregates of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepData {
    /// Full mission energy, J.
    pub total_j: f64,
    /// Summed hover energy, J.
    pub hover_j: f64,
    /// Summed vertical (descent + climb) energy, J.
    pub flight_j: f64,
    /// Mean optimized hover height, m.
    pub mean_h_m: f64,
}

/// One row of a sweep: the point, the mode, and the result or the failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub mode: DuplexMode,
    pub outcome: Result<SweepData, String>,
}

/// Sweep table over one axis, possibly for both duplexing modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

/// Runs the mission planner over each `(value, mode)` point. Failures are
/// recorded in their row and the sweep continues.
pub fn sweep(
    scenario: &Scenario,
    axis: SweepAxis,
    values: &[f64],
    modes: &[DuplexMode],
) -> Result<SweepTable, Error> {
    if values.is_empty() {
        return Err(Error::Scenario("sweep needs at least one value".into()));
    }
    let mut ctx = PlannerContext::new(scenario)?;
    let mut rows = Vec::with_capacity(values.len() * modes.len());
    for &mode in modes {
        for &value in values {
            let mut point = apply_sweep_value(scenario, axis, value);
            point.mode = mode;
            let outcome = plan_mission_with(&point, &mut ctx)
                .map(|plan| summarize(&plan))
                .map_err(|e| e.to_string());
            rows.push(SweepRow {
                axis_value: value,
                mode,
                outcome,
            });
        }
    }
    Ok(SweepTable { axis, rows })
}

fn summarize(plan: &MissionPlan) -> SweepData {
    let hover_j: f64 = plan.stages.iter().map(|s| s.e3).sum();
    let flight_j: f64 = plan.stages.iter().map(|s| s.e2 + s.e4).sum();
    let mean_h_m =
        plan.stages.iter().map(|s| s.hover_height).sum::<f64>() / plan.stages.len() as f64;
    SweepData {
        total_j: plan.total_energy,
        hover_j,
        flight_j,
        mean_h_m,
    }
}

/// Output format of [`emit_plan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanFormat {
    Human,
    Csv,
}

/// Plan CSV column schema.
pub const PLAN_CSV_HEADER: &str =
    "stage,user,h_m,t1_s,t2_s,t3_s,t4_s,rho,p_user_W,E1_J,E2_J,E3_J,E4_J,E_stage_J";

/// Sweep CSV column schema.
pub const SWEEP_CSV_HEADER: &str = "axis_value,total_J,hover_J,flight_J,mean_h_m,mode";

/// Renders a mission plan. The CSV format emits [`PLAN_CSV_HEADER`] plus one
/// row per stage and a final `return` row carrying only the leg energy.
pub fn emit_plan(plan: &MissionPlan, format: PlanFormat) -> String {
    match format {
        PlanFormat::Csv => {
            let mut out = String::from(PLAN_CSV_HEADER);
            out.push('\n');
            for (k, stage) in plan.stages.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    k + 1,
                    stage.user,
                    stage.hover_height,
                    stage.inbound.duration(),
                    stage.descent.duration(),
                    stage.hover.hover_time,
                    stage.climb.duration(),
                    stage.hover.time_split,
                    stage.hover.user_tx_power,
                    stage.e1,
                    stage.e2,
                    stage.e3,
                    stage.e4,
                    stage.stage_energy(),
                ));
            }
            out.push_str(&format!(
                "return,0,0,{},0,0,0,0,0,{},0,0,0,{}\n",
                plan.return_trajectory.duration(),
                plan.return_energy,
                plan.return_energy,
            ));
            out
        }
        PlanFormat::Human => {
            let mut out = String::new();
            out.push_str(&format!(
                "visiting order: {:?} (tour matrix cost {:.3} J)\n",
                plan.order.order, plan.order.total_energy
            ));
            for (k, stage) in plan.stages.iter().enumerate() {
                out.push_str(&format!(
                    "stage {}: user {} at h = {:.3} m\n  t1 = {:.2} s, t2 = {:.2} s, t3 = {:.4} s, t4 = {:.2} s\n  \
                     harvest fraction = {:.4}, user tx power = {:.3e} W\n  \
                     E1 = {:.2} J, E2 = {:.2} J, E3 = {:.2} J, E4 = {:.2} J (stage {:.2} J)\n",
                    k + 1,
                    stage.user,
                    stage.hover_height,
                    stage.inbound.duration(),
                    stage.descent.duration(),
                    stage.hover.hover_time,
                    stage.climb.duration(),
                    stage.hover.time_split,
                    stage.hover.user_tx_power,
                    stage.e1,
                    stage.e2,
                    stage.e3,
                    stage.e4,
                    stage.stage_energy(),
                ));
            }
            out.push_str(&format!(
                "return leg: {:.2} s, {:.2} J\ntotal energy: {:.2} J\n",
                plan.return_trajectory.duration(),
                plan.return_energy,
                plan.total_energy
            ));
            for note in &plan.diagnostics {
                out.push_str(&format!("note: {note}\n"));
            }
            out
        }
    }
}

/// Renders a sweep table as CSV ([`SWEEP_CSV_HEADER`] schema). Failed rows
/// carry NaN aggregates; the error text goes to the table's diagnostics.
pub fn emit_sweep(table: &SweepTable) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        match &row.outcome {
            Ok(data) => out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.axis_value,
                data.total_j,
                data.hover_j,
                data.flight_j,
                data.mean_h_m,
                row.mode.label()
            )),
            Err(_) => out.push_str(&format!(
                "{},NaN,NaN,NaN,NaN,{}\n",
                row.axis_value,
                row.mode.label()
            )),
        }
    }
    out
}
