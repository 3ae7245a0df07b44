//! End-to-end behavior of the mission planner: energy accounting, plan
//! emission, determinism and edge cases.

use wpcn_core::hover::DuplexMode;
use wpcn_core::planner::*;
use wpcn_core::scenario::{Scenario, UserConfig};

fn small_scenario() -> Scenario {
    let mut scenario = Scenario::default();
    scenario.depot = (500.0, 500.0);
    for position in [(120.0, 40.0), (900.0, 150.0), (430.0, 980.0)] {
        scenario.users.push(UserConfig {
            position,
            ..UserConfig::default()
        });
    }
    // Feasible-profile legs keep this suite fast; the SCA path is covered by
    // its own tests and the acceptance suite.
    scenario.solver.refine_legs = false;
    scenario
}

#[test]
fn stage_energies_resum_to_the_total() {
    let plan = plan_mission(&small_scenario()).unwrap();
    let resummed: f64 =
        plan.stages.iter().map(|s| s.e1 + s.e2 + s.e3 + s.e4).sum::<f64>() + plan.return_energy;
    assert!(((resummed - plan.total_energy) / plan.total_energy).abs() < 1e-9);
    for stage in &plan.stages {
        assert!(((stage.stage_energy() - (stage.e1 + stage.e2 + stage.e3 + stage.e4))
            / stage.stage_energy())
        .abs()
            < 1e-12);
        assert!(stage.hover_height < 8.24);
        assert!(stage.hover_height <= 120.0);
    }
}

#[test]
fn csv_emission_matches_schema_and_resums() {
    let plan = plan_mission(&small_scenario()).unwrap();
    let csv = emit_plan(&plan, PlanFormat::Csv);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), PLAN_CSV_HEADER);
    let columns = PLAN_CSV_HEADER.split(',').count();
    let mut stage_sum = 0.0;
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), columns, "row `{line}`");
        stage_sum += fields[columns - 1].parse::<f64>().unwrap();
        rows += 1;
    }
    assert_eq!(rows, plan.stages.len() + 1); // stages plus the return row
    assert!(((stage_sum - plan.total_energy) / plan.total_energy).abs() < 1e-9);
    // the return row carries only the leg energy
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("return,0,"));
}

#[test]
fn planning_is_deterministic() {
    let scenario = small_scenario();
    let a = emit_plan(&plan_mission(&scenario).unwrap(), PlanFormat::Csv);
    let b = emit_plan(&plan_mission(&scenario).unwrap(), PlanFormat::Csv);
    assert_eq!(a, b);
}

#[test]
fn single_user_at_depot_needs_no_horizontal_flight() {
    let mut scenario = Scenario::default();
    scenario.depot = (0.0, 0.0);
    scenario.users.push(UserConfig {
        position: (0.0, 0.0),
        ..UserConfig::default()
    });
    let plan = plan_mission(&scenario).unwrap();
    assert_eq!(plan.order.order, vec![1]);
    assert_eq!(plan.stages[0].e1, 0.0);
    assert_eq!(plan.return_energy, 0.0);
    // stage energy is vertical plus hover only
    let stage = &plan.stages[0];
    assert!(stage.e2 > 0.0 && stage.e4 > 0.0 && stage.e3 > 0.0);
    assert!((plan.total_energy - stage.stage_energy()).abs() < 1e-9);
}

#[test]
fn infeasible_users_are_listed() {
    let mut scenario = small_scenario();
    // Demand is fine, but the receive circuit outdraws any harvest below the
    // minimum grid height.
    scenario.users[1].rx_circuit_power_w = 10.0;
    let err = plan_mission(&scenario).unwrap_err();
    let message = err.to_string();
    assert!(message.contains("user 2"), "{message}");
}

#[test]
fn hd_beats_fd_at_defaults() {
    let scenario = small_scenario();
    let hd = plan_mission(&scenario).unwrap();
    let mut fd_scenario = scenario.clone();
    fd_scenario.mode = DuplexMode::Fd;
    let fd = plan_mission(&fd_scenario).unwrap();
    assert!(hd.total_energy <= fd.total_energy);
}

#[test]
fn sweep_emits_rows_for_every_point_and_survives_failures() {
    let mut scenario = small_scenario();
    scenario.users.truncate(2);
    // A bandwidth low enough to still work plus an absurd negative one that
    // must fail during validation of that point.
    let table = sweep(
        &scenario,
        SweepAxis::B,
        &[20e6, -1.0],
        &[DuplexMode::Hd],
    )
    .unwrap();
    assert_eq!(table.rows.len(), 2);
    assert!(table.rows[0].outcome.is_ok());
    assert!(table.rows[1].outcome.is_err());
    let csv = emit_sweep(&table);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_CSV_HEADER);
    assert_eq!(lines.count(), 2);
    assert!(csv.contains("NaN"));
}

#[test]
fn plan_beats_random_visiting_orders() {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let mut scenario = Scenario::default();
    scenario.depot = (500.0, 500.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..6 {
        use rand::Rng;
        scenario.users.push(UserConfig {
            position: (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)),
            ..UserConfig::default()
        });
    }
    scenario.solver.refine_legs = false;
    let plan = plan_mission(&scenario).unwrap();

    // Rebuild the tour cost of random permutations over the same leg model.
    let mut ctx = PlannerContext::new(&scenario).unwrap();
    let matrix = order_energy_matrix(&scenario, &mut ctx).unwrap();
    let mut wins = 0;
    let trials = 40;
    for _ in 0..trials {
        let mut perm: Vec<usize> = (1..=scenario.users.len()).collect();
        perm.shuffle(&mut rng);
        let random_cost = wpcn_core::order::tour_cost(&matrix, &perm);
        if plan.order.total_energy <= random_cost + 1e-9 {
            wins += 1;
        }
    }
    assert!(wins * 100 >= trials * 95, "beat only {wins}/{trials} random orders");
}
