//! Quadrature oracles for the energy models: the discrete slot sums must
//! agree with fine-grid midpoint integration of the analytic profiles.

use wpcn_core::kinematics::{discretize, feasible_profile, KinematicLimits};
use wpcn_core::propulsion::{
    derive_constants, straight_energy, straight_power, vertical_energy, vertical_power,
    AirframeParams, VerticalDirection,
};

fn setup() -> (AirframeParams<f64>, wpcn_core::PowerConstants, KinematicLimits<f64>) {
    let airframe = AirframeParams::<f64>::default();
    let consts = derive_constants(&airframe).unwrap();
    let limits = KinematicLimits {
        v_max: 30.0,
        a_max: 5.0,
    };
    (airframe, consts, limits)
}

/// Midpoint quadrature of the straight-flight power over an analytic
/// profile. The acceleration is the profile's piecewise-constant ramp value.
fn straight_quadrature(
    profile: &wpcn_core::VelocityProfile,
    consts: &wpcn_core::PowerConstants,
    steps: usize,
) -> f64 {
    let dt = profile.duration / steps as f64;
    let ramp = profile.peak_speed / profile.accel;
    (0..steps)
        .map(|i| {
            let t = (i as f64 + 0.5) * dt;
            let v = profile.velocity(t);
            let a = if t < ramp {
                profile.accel
            } else if t > profile.duration - ramp {
                -profile.accel
            } else {
                0.0
            };
            dt * straight_power(v, a, consts).unwrap()
        })
        .sum()
}

fn vertical_quadrature(
    profile: &wpcn_core::VelocityProfile,
    direction: VerticalDirection,
    consts: &wpcn_core::PowerConstants,
    airframe: &AirframeParams<f64>,
    steps: usize,
) -> f64 {
    let dt = profile.duration / steps as f64;
    let ramp = profile.peak_speed / profile.accel;
    (0..steps)
        .map(|i| {
            let t = (i as f64 + 0.5) * dt;
            let v = profile.velocity(t);
            let a = if t < ramp {
                profile.accel
            } else if t > profile.duration - ramp {
                -profile.accel
            } else {
                0.0
            };
            dt * vertical_power(v, a, direction, consts, airframe).unwrap()
        })
        .sum()
}

#[test]
fn straight_energy_matches_quadrature_oracle() {
    let (_, consts, limits) = setup();
    for d in [20.0, 180.0, 700.0] {
        let profile = feasible_profile(d, &limits).unwrap();
        let oracle = straight_quadrature(&profile, &consts, 400_000);
        let traj = discretize(&profile, 400).unwrap();
        let discrete = straight_energy(&traj, &consts).unwrap();
        let gap = (discrete - oracle).abs() / oracle;
        assert!(gap < 5e-3, "d = {d}: discrete {discrete}, oracle {oracle}");
    }
}

#[test]
fn straight_energy_converges_under_slot_refinement() {
    let (_, consts, limits) = setup();
    let profile = feasible_profile(120.0, &limits).unwrap();
    let coarse = straight_energy(&discretize(&profile, 200).unwrap(), &consts).unwrap();
    let fine = straight_energy(&discretize(&profile, 400).unwrap(), &consts).unwrap();
    assert!(
        ((fine - coarse) / fine).abs() < 1e-2,
        "doubling slots moved the energy from {coarse} to {fine}"
    );
    let finer = straight_energy(&discretize(&profile, 800).unwrap(), &consts).unwrap();
    assert!(((finer - fine) / finer).abs() < 5e-3, "halving the step changed {fine} -> {finer}");
}

#[test]
fn vertical_energy_matches_quadrature_oracle_both_ways() {
    let (airframe, consts, limits) = setup();
    let profile = feasible_profile(118.0, &limits).unwrap();
    let traj = discretize(&profile, 400).unwrap();
    let mut total_discrete = 0.0;
    let mut total_oracle = 0.0;
    for direction in [VerticalDirection::Descent, VerticalDirection::Climb] {
        let oracle = vertical_quadrature(&profile, direction, &consts, &airframe, 400_000);
        let discrete = vertical_energy(&traj, direction, &consts, &airframe).unwrap();
        let gap = (discrete - oracle).abs() / oracle;
        assert!(gap < 5e-3, "{direction:?}: discrete {discrete}, oracle {oracle}");
        total_discrete += discrete;
        total_oracle += oracle;
    }
    assert!(((total_discrete - total_oracle) / total_oracle).abs() < 5e-3);
}

#[test]
fn vertical_energy_converges_under_slot_refinement() {
    let (airframe, consts, limits) = setup();
    let profile = feasible_profile(118.0, &limits).unwrap();
    let coarse = vertical_energy(
        &discretize(&profile, 200).unwrap(),
        VerticalDirection::Descent,
        &consts,
        &airframe,
    )
    .unwrap();
    let fine = vertical_energy(
        &discretize(&profile, 400).unwrap(),
        VerticalDirection::Descent,
        &consts,
        &airframe,
    )
    .unwrap();
    assert!(((fine - coarse) / fine).abs() < 5e-3);
}
