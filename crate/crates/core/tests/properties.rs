//! Property tests for the structural invariants of the models.

use proptest::prelude::*;

use wpcn_core::kinematics::{discretize, feasible_profile, validate, KinematicLimits};
use wpcn_core::propulsion::{
    derive_constants, straight_power, vertical_power, AirframeParams, VerticalDirection,
};
use wpcn_core::sca::bounds::{induced_slack_bound, ProductBound};

fn airframe_strategy() -> impl Strategy<Value = AirframeParams<f64>> {
    (
        1.0..100.0f64,   // weight
        0.8..1.4f64,     // air density
        0.005..0.05f64,  // flat plate area
        0.1..0.8f64,     // rotor radius
        0.05..2.0f64,    // disc area
        100.0..600.0f64, // blade angular velocity
        0.2..1.0f64,     // fuselage drag ratio
        0.02..0.1f64,    // solidity
        0.005..0.05f64,  // profile drag coefficient
        0.05..0.3f64,    // induced power factor
    )
        .prop_map(
            |(weight, rho, plate, radius, disc, omega, drag, solidity, delta, induced)| {
                AirframeParams {
                    weight_newton: weight,
                    air_density: rho,
                    flat_plate_area: plate,
                    rotor_radius: radius,
                    rotor_disc_area: disc,
                    blade_angular_velocity: omega,
                    fuselage_drag_ratio: drag,
                    rotor_solidity: solidity,
                    profile_drag_coeff: delta,
                    induced_power_factor: induced,
                    mass_kg: weight / 9.8,
                    gravity: 9.8,
                }
            },
        )
}

proptest! {
    /// Hover consistency: at rest both power models collapse to p0 + p1.
    #[test]
    fn hover_identity_holds_for_random_airframes(airframe in airframe_strategy()) {
        let consts = derive_constants(&airframe).unwrap();
        let hover = consts.hover_power();
        let straight = straight_power(0.0, 0.0, &consts).unwrap();
        prop_assert!(((straight - hover) / hover).abs() < 1e-9);
        for dir in [VerticalDirection::Descent, VerticalDirection::Climb] {
            let vertical = vertical_power(0.0, 0.0, dir, &consts, &airframe).unwrap();
            prop_assert!(((vertical - hover) / hover).abs() < 1e-9);
        }
    }

    /// Powers stay finite and positive across the operating envelope.
    #[test]
    fn straight_power_is_finite_positive(
        airframe in airframe_strategy(),
        v in 0.0..60.0f64,
        a in -10.0..10.0f64,
    ) {
        let consts = derive_constants(&airframe).unwrap();
        let p = straight_power(v, a, &consts).unwrap();
        prop_assert!(p.is_finite() && p > 0.0, "P({v}, {a}) = {p}");
        prop_assert!(p >= consts.p2_watt * (1.0 - 1e-12));
    }

    /// Discretized feasible profiles always validate.
    #[test]
    fn feasible_profiles_discretize_cleanly(
        d in 0.0..2000.0f64,
        slots in 100usize..400,
    ) {
        let limits = KinematicLimits { v_max: 30.0, a_max: 5.0 };
        let profile = feasible_profile(d, &limits).unwrap();
        let traj = discretize(&profile, slots).unwrap();
        let report = validate(&traj, &limits, (0.0, d), true);
        prop_assert!(report.is_feasible(), "{:?}", report.violations);
    }

    /// The bilinear bound majorizes the product everywhere and touches it at
    /// the linearization point.
    #[test]
    fn product_bound_majorizes(
        a in -30.0..30.0f64,
        v in -30.0..30.0f64,
        a_lin in -30.0..30.0f64,
        v_lin in -30.0..30.0f64,
    ) {
        let bound = ProductBound::at_point(1.0, a_lin, v_lin);
        prop_assert!(bound.value(a, v) >= a * v - 1e-9 * (1.0 + (a * v).abs()));
        let at_point = bound.value(a_lin, v_lin);
        prop_assert!((at_point - a_lin * v_lin).abs() <= 1e-9 * (1.0 + (a_lin * v_lin).abs()));
        // mirrored variant bounds the negated product
        let neg = ProductBound::at_point(-1.0, a_lin, v_lin);
        prop_assert!(neg.value(a, v) >= -a * v - 1e-9 * (1.0 + (a * v).abs()));
    }

    /// The induced-slack tangent plane under-estimates the true relation.
    #[test]
    fn induced_slack_bound_minorizes(
        aa in 0.0..40.0f64,
        v in 0.0..35.0f64,
        aa_lin in 0.0..40.0f64,
        v_lin in 0.0..35.0f64,
    ) {
        let c4 = 0.030808750000000002;
        let truth = (1.0 + aa * aa + (c4 * v * v).powi(2)).sqrt() + c4 * v * v;
        let bound = induced_slack_bound(c4, aa_lin, v_lin, aa, v);
        prop_assert!(bound <= truth + 1e-9 * truth);
        let at_point = induced_slack_bound(c4, aa_lin, v_lin, aa_lin, v_lin);
        let truth_at = (1.0 + aa_lin * aa_lin + (c4 * v_lin * v_lin).powi(2)).sqrt()
            + c4 * v_lin * v_lin;
        prop_assert!((at_point - truth_at).abs() <= 1e-9 * truth_at);
    }

    /// Assignment repair always returns a permutation.
    #[test]
    fn recover_assignment_is_a_permutation(
        raw in proptest::collection::vec(0.0..100.0f64, 16..=36),
    ) {
        let n = (raw.len() as f64).sqrt() as usize;
        let costs: Vec<Vec<f64>> =
            (0..n).map(|i| raw[i * n..(i + 1) * n].to_vec()).collect();
        let assignment = wpcn_core::order::recover_assignment(&costs);
        let mut seen = vec![false; n + 1];
        prop_assert_eq!(assignment.len(), n);
        for user in assignment {
            prop_assert!(user >= 1 && user <= n && !seen[user]);
            seen[user] = true;
        }
    }
}
