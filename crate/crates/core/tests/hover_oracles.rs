//! Brute-force cross-checks of the hover solvers.

use wpcn_core::hover::*;

const HOVER_POWER: f64 = 168.4846;

fn defaults() -> (ChannelParams, RadioParams, UserComm) {
    (
        ChannelParams::default(),
        RadioParams::default(),
        UserComm::default(),
    )
}

#[test]
fn hd_grid_oracle_confirms_closed_form_at_defaults() {
    let (ch, radio, user) = defaults();
    for h in [0.5, 1.0, 2.0, 4.0] {
        let closed = solve_hd(h, &ch, &radio, &user, HOVER_POWER).unwrap();
        let oracle = oracle_hd_grid(h, &ch, &radio, &user, HOVER_POWER, 240).unwrap();
        let gap = (closed.hover_time - oracle.hover_time).abs() / closed.hover_time;
        assert!(gap < 5e-3, "h = {h}: closed {}, oracle {}", closed.hover_time, oracle.hover_time);
        // The closed form can only undercut the grid.
        assert!(closed.hover_time <= oracle.hover_time * (1.0 + 1e-6));
    }
}

#[test]
fn hd_grid_oracle_is_converged_in_resolution() {
    let (ch, radio, user) = defaults();
    let coarse = oracle_hd_grid(2.0, &ch, &radio, &user, HOVER_POWER, 160).unwrap();
    let fine = oracle_hd_grid(2.0, &ch, &radio, &user, HOVER_POWER, 320).unwrap();
    let gap = (coarse.hover_time - fine.hover_time).abs() / fine.hover_time;
    assert!(gap < 1e-3, "coarse {} vs fine {}", coarse.hover_time, fine.hover_time);
}

#[test]
fn hd_oracle_agrees_on_infeasibility() {
    let (ch, radio, user) = defaults();
    let bound = height_bound(DuplexMode::Hd, &ch, &radio, &user);
    let closed = solve_hd(bound + 0.5, &ch, &radio, &user, HOVER_POWER);
    let oracle = oracle_hd_grid(bound + 0.5, &ch, &radio, &user, HOVER_POWER, 100);
    assert!(closed.is_err() && oracle.is_err());
}

#[test]
fn fd_bisection_matches_scan_oracle_in_covered_regime() {
    let (ch, radio, mut user) = defaults();
    // Heights below the sustained-power bound, where the residual has a
    // single sign change.
    for (h, delay) in [(0.25, 2.0), (0.3, 1.0), (0.35, 0.5)] {
        user.circuit_delay = delay;
        let solved = solve_fd(h, &ch, &radio, &user, HOVER_POWER).unwrap();
        let (root, monotone) = oracle_fd_scan(h, &ch, &radio, &user, 400).unwrap();
        assert!(
            (solved.hover_time - root).abs() <= 1e-6,
            "h = {h}: {} vs {}",
            solved.hover_time,
            root
        );
        assert!(monotone, "residual not monotone down to the root at h = {h}");
        assert!(solved.hover_time > user.circuit_delay);
    }
}

#[test]
fn fd_energy_balance_binds_at_the_root() {
    let (ch, radio, user) = defaults();
    for h in [0.3, 1.0, 2.0] {
        let solved = solve_fd(h, &ch, &radio, &user, HOVER_POWER).unwrap();
        let gap = energy_balance_gap(&solved, h, &ch, &radio, &user);
        let harvested = radio.harvest_efficiency
            * radio.uav_tx_power
            * expected_channel_gain(h, &ch).unwrap()
            * solved.harvest_time;
        assert!(gap.abs() <= 1e-9 * harvested, "h = {h}: gap {gap}");
        let bits = achieved_bits(&solved, h, &ch, &radio);
        assert!(((bits - user.demand_bits) / user.demand_bits).abs() <= 1e-9);
    }
}

#[test]
fn fd_reports_no_root_as_infeasible() {
    let (ch, radio, user) = defaults();
    // Far above any workable height the residual never reaches zero.
    let result = solve_fd(6.0, &ch, &radio, &user, HOVER_POWER);
    assert!(result.is_err());
}
