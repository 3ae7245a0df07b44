//! Grid-search oracle for the convexified trajectory subproblem: on a tiny
//! instance the barrier solver must match a dense enumeration over the free
//! velocities (with the epigraph variables set optimally per slot).

use wpcn_core::kinematics::KinematicLimits;
use wpcn_core::propulsion::{derive_constants, AirframeParams};
use wpcn_core::sca::{solve_convex_subproblem, ConvexSubproblem, ScaSettings};

fn model_for(distance: f64, n: usize, dt: f64) -> ConvexSubproblem {
    let airframe = AirframeParams::<f64>::default();
    let consts = derive_constants(&airframe).unwrap();
    let limits = KinematicLimits {
        v_max: 30.0,
        a_max: 5.0,
    };
    // Linearize around a mild constant-speed guess.
    let cruise = distance / (dt * (n - 1) as f64);
    let mut lin = vec![cruise; n - 1];
    lin.push(0.0);
    ConvexSubproblem::straight(&consts, &limits, dt, distance, &lin)
}

#[test]
fn solver_matches_dense_grid_search_on_tiny_instance() {
    let n = 8usize;
    let dt = 0.6;
    let distance = 4.2;
    let model = model_for(distance, n, dt);
    let settings = ScaSettings::default();
    let solution = solve_convex_subproblem(&model, None, &settings).unwrap();

    // Dense grid over v_1..v_6; v_7 solves the displacement equality.
    let free = n - 2;
    let v_cap: f64 = 2.6; // generous cap around the optimum region
    let points = 13usize;
    let mut best = f64::INFINITY;
    let mut index = vec![0usize; free];
    loop {
        let mut v: Vec<f64> = index
            .iter()
            .map(|&i| i as f64 * v_cap / (points - 1) as f64)
            .collect();
        let used: f64 = v.iter().sum::<f64>() * dt;
        let last = (distance - used) / dt;
        if last >= 0.0 {
            v.push(last);
            if let Some(x) = model.assemble_with_optimal_extras(&v) {
                best = best.min(model.objective_at(&x));
            }
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == free {
                break;
            }
            index[k] += 1;
            if index[k] < points {
                break;
            }
            index[k] = 0;
            k += 1;
        }
        if k == free {
            break;
        }
    }

    assert!(best.is_finite(), "grid search found no feasible point");
    let gap = (solution.objective - best).abs() / best;
    assert!(
        gap < 0.01,
        "solver {} vs grid {} ({}% apart)",
        solution.objective,
        best,
        gap * 100.0
    );
    // The solver is a lower envelope of the grid up to grid resolution.
    assert!(solution.objective <= best * (1.0 + 1e-9));
}

#[test]
fn zero_distance_model_keeps_the_rest_point() {
    let airframe = AirframeParams::<f64>::default();
    let consts = derive_constants(&airframe).unwrap();
    let limits = KinematicLimits {
        v_max: 30.0,
        a_max: 5.0,
    };
    let lin = vec![0.0; 10];
    let model = ConvexSubproblem::straight(&consts, &limits, 0.25, 0.0, &lin);
    let solution = solve_convex_subproblem(&model, None, &ScaSettings::default()).unwrap();
    // All velocities stay at rest and the objective is the hover cost.
    let hover = consts.hover_power() * 0.25 * 10.0;
    assert!((solution.objective - hover).abs() <= 1e-3 * hover);
    for v in model.slot_velocities(&solution.x) {
        assert!(v.abs() < 1e-3, "velocity {v} did not stay at rest");
    }
}

#[test]
fn solver_reports_gap_within_tolerance() {
    let model = model_for(35.0, 24, 0.5);
    let settings = ScaSettings::default();
    let solution = solve_convex_subproblem(&model, None, &settings).unwrap();
    assert!(!solution.degraded);
    let scale = solution.objective.abs().max(1.0);
    assert!(
        solution.duality_gap <= settings.subproblem_kkt_tol * scale * 1.5,
        "gap {} at objective {}",
        solution.duality_gap,
        solution.objective
    );
    assert!(solution.kkt_residual.is_finite());
}
