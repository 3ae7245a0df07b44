//! Rotary-wing propulsion power and energy models.
//!
//! Straight (constant-altitude) flight uses a profile + induced + parasite
//! power decomposition in which the thrust correction depends on the speed
//! and on the product of acceleration and speed. Vertical flight uses a
//! climb/descent power model driven by the instantaneous rotor thrust.
//! Energies integrate the per-slot powers of a [`DiscreteTrajectory`] with a
//! left-endpoint rectangle rule; the vertical model additionally carries
//! closed-form boundary terms for the potential and kinetic contributions.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::kinematics::DiscreteTrajectory;
use crate::real::Real;

/// Physical constants of the airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
#[serde(default, deny_unknown_fields)]
pub struct AirframeParams<R: Real> {
    /// Aircraft weight in Newton.
    pub weight_newton: R,
    /// Air density in kg/m^3.
    pub air_density: R,
    /// Fuselage equivalent flat plate area in m^2.
    pub flat_plate_area: R,
    /// Rotor radius in m.
    pub rotor_radius: R,
    /// Rotor disc area in m^2.
    pub rotor_disc_area: R,
    /// Blade angular velocity in rad/s.
    pub blade_angular_velocity: R,
    /// Fuselage drag ratio (dimensionless).
    pub fuselage_drag_ratio: R,
    /// Rotor solidity (dimensionless).
    pub rotor_solidity: R,
    /// Profile drag coefficient of the blade section (dimensionless).
    pub profile_drag_coeff: R,
    /// Incremental correction factor to induced power (dimensionless).
    pub induced_power_factor: R,
    /// Aircraft mass in kg.
    pub mass_kg: R,
    /// Gravitational acceleration in m/s^2.
    pub gravity: R,
}

impl<R: Real> Default for AirframeParams<R> {
    /// Typical values for a small rotary-wing UAV.
    fn default() -> Self {
        Self {
            weight_newton: R::c(20.0),
            air_density: R::c(1.225),
            flat_plate_area: R::c(0.0151),
            rotor_radius: R::c(0.4),
            rotor_disc_area: R::c(0.503),
            blade_angular_velocity: R::c(300.0),
            fuselage_drag_ratio: R::c(0.6),
            rotor_solidity: R::c(0.05),
            profile_drag_coeff: R::c(0.012),
            induced_power_factor: R::c(0.1),
            mass_kg: R::c(2.04),
            gravity: R::c(9.8),
        }
    }
}

impl<R: Real> AirframeParams<R> {
    /// Checks that every field is strictly positive.
    pub fn validate(&self) -> Result<(), Error> {
        let fields: [(&'static str, R); 12] = [
            ("weight_newton", self.weight_newton),
            ("air_density", self.air_density),
            ("flat_plate_area", self.flat_plate_area),
            ("rotor_radius", self.rotor_radius),
            ("rotor_disc_area", self.rotor_disc_area),
            ("blade_angular_velocity", self.blade_angular_velocity),
            ("fuselage_drag_ratio", self.fuselage_drag_ratio),
            ("rotor_solidity", self.rotor_solidity),
            ("profile_drag_coeff", self.profile_drag_coeff),
            ("induced_power_factor", self.induced_power_factor),
            ("mass_kg", self.mass_kg),
            ("gravity", self.gravity),
        ];
        for (name, value) in fields {
            if !(value > R::zero()) || !value.is_finite() {
                return Err(Error::invalid(name, value.as_f64(), "must be strictly positive"));
            }
        }
        Ok(())
    }

    /// Warnings about internally inconsistent values. The weight is allowed
    /// to disagree with `mass * gravity` by up to 2% (typical published
    /// constants are rounded that coarsely); larger gaps are reported but do
    /// not reject the airframe.
    pub fn consistency_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        let implied = self.mass_kg * self.gravity;
        let rel = ((self.weight_newton - implied) / implied).abs();
        if rel > R::c(0.02) {
            warnings.push(format!(
                "weight_newton = {} differs from mass_kg * gravity = {} by {:.2}%",
                self.weight_newton,
                implied,
                rel.as_f64() * 100.0
            ));
        }
        warnings
    }
}

/// Derived power constants of the propulsion model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct PowerConstants<R: Real> {
    /// Blade profile power at hover, W.
    pub p0_watt: R,
    /// Induced power at hover, W.
    pub p1_watt: R,
    /// Base power of the vertical-flight model, W.
    pub p2_watt: R,
    /// Profile power speed coefficient, s^2/m^2.
    pub c1: R,
    /// Thrust correction speed-squared coefficient, s^2/m^2.
    pub c2: R,
    /// Thrust correction acceleration coefficient, s^2/m.
    pub c3: R,
    /// Induced velocity coefficient, s^2/m^2.
    pub c4: R,
    /// Parasite drag coefficient, kg/m.
    pub c5: R,
}

impl<R: Real> PowerConstants<R> {
    /// Power required to hover, W.
    pub fn hover_power(&self) -> R {
        self.p0_watt + self.p1_watt
    }
}

/// Direction of a vertical flight segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerticalDirection {
    Descent,
    Climb,
}

/// Derives the power constants from the airframe.
pub fn derive_constants<R: Real>(airframe: &AirframeParams<R>) -> Result<PowerConstants<R>, Error> {
    airframe.validate()?;
    let rho = airframe.air_density;
    let disc = airframe.rotor_disc_area;
    let weight = airframe.weight_newton;
    let omega = airframe.blade_angular_velocity;
    let radius = airframe.rotor_radius;
    let solidity = airframe.rotor_solidity;

    let tip_cubed = (omega * radius).powi(3);
    let p0 = airframe.profile_drag_coeff / R::c(8.0) * rho * solidity * disc * tip_cubed;
    let induced_ref = weight.powf(R::c(1.5)) / (R::c(2.0) * rho * disc).sqrt();
    let p1 = (R::one() + airframe.induced_power_factor) * induced_ref;
    let p2 = p0 + airframe.induced_power_factor * induced_ref;

    Ok(PowerConstants {
        p0_watt: p0,
        p1_watt: p1,
        p2_watt: p2,
        c1: R::c(3.0) / (omega * radius).powi(2),
        c2: rho * airframe.flat_plate_area / (R::c(2.0) * weight),
        c3: airframe.mass_kg / weight,
        c4: rho * disc / weight,
        c5: R::c(0.5) * airframe.fuselage_drag_ratio * rho * solidity * disc,
    })
}

/// Thrust correction term entering the induced power: `c2 v^2 + c3 a v`.
#[inline]
pub fn thrust_correction<R: Real>(speed: R, accel: R, consts: &PowerConstants<R>) -> R {
    consts.c2 * speed * speed + consts.c3 * accel * speed
}

/// Induced-velocity slack `sqrt(sqrt(1 + x^2 + c4^2 v^4) + c4 v^2)`; the
/// induced power is `p1 (1 + x^2) / b` with `b` this value.
#[inline]
pub fn induced_slack<R: Real>(correction: R, speed: R, consts: &PowerConstants<R>) -> R {
    let v2 = speed * speed;
    let kappa_sq = R::one() + correction * correction;
    ((kappa_sq + (consts.c4 * v2).powi(2)).sqrt() + consts.c4 * v2).sqrt()
}

/// Propulsion power in straight flight at a fixed altitude, W.
pub fn straight_power<R: Real>(speed: R, accel: R, consts: &PowerConstants<R>) -> Result<R, Error> {
    if !(speed >= R::zero()) {
        return Err(Error::invalid("speed", speed.as_f64(), "must be non-negative"));
    }
    let v2 = speed * speed;
    let x = thrust_correction(speed, accel, consts);
    let kappa_sq = R::one() + x * x;
    // (1 + x^2) / b is the rationalized form of
    // sqrt(1 + x^2) * sqrt(sqrt(1 + x^2 + c4^2 v^4) - c4 v^2); it avoids the
    // cancellation in the raw expression at high speed.
    let induced = consts.p1_watt * kappa_sq / induced_slack(x, speed, consts);
    Ok(consts.p0_watt * (R::one() + consts.c1 * v2) + induced + consts.c5 * v2 * speed)
}

/// Rotor thrust in vertical flight, N. Fails when the commanded acceleration
/// is not dominated by gravity or would require non-positive thrust.
fn vertical_thrust<R: Real>(
    accel: R,
    direction: VerticalDirection,
    airframe: &AirframeParams<R>,
) -> Result<R, Error> {
    if accel.abs() >= airframe.gravity {
        return Err(Error::ModelDomain(format!(
            "vertical acceleration {} m/s^2 must stay below gravity {} m/s^2",
            accel, airframe.gravity
        )));
    }
    let ma = airframe.mass_kg * accel;
    let thrust = match direction {
        VerticalDirection::Descent => airframe.weight_newton - ma,
        VerticalDirection::Climb => airframe.weight_newton + ma,
    };
    if !(thrust > R::zero()) {
        return Err(Error::ModelDomain(format!(
            "vertical thrust {} N must be positive",
            thrust
        )));
    }
    Ok(thrust)
}

/// Propulsion power in vertical flight, W.
///
/// `speed` is the magnitude of the vertical velocity; `accel` is its rate of
/// change along the direction of travel.
pub fn vertical_power<R: Real>(
    speed: R,
    accel: R,
    direction: VerticalDirection,
    consts: &PowerConstants<R>,
    airframe: &AirframeParams<R>,
) -> Result<R, Error> {
    if !(speed >= R::zero()) {
        return Err(Error::invalid("speed", speed.as_f64(), "must be non-negative"));
    }
    let thrust = vertical_thrust(accel, direction, airframe)?;
    let half = R::c(0.5);
    let induced =
        half * thrust * (speed * speed + R::c(2.0) * thrust / (airframe.air_density * airframe.rotor_disc_area)).sqrt();
    Ok(consts.p2_watt + half * thrust * speed + induced)
}

fn check_trajectory<R: Real>(traj: &DiscreteTrajectory<R>) -> Result<(), Error> {
    let report = traj.internal_consistency();
    if let Some(v) = report.first() {
        return Err(Error::ModelDomain(format!(
            "trajectory fails finite-difference consistency at slot {}: {}",
            v.index, v.kind
        )));
    }
    Ok(())
}

/// Propulsion energy of a straight-flight trajectory, J.
///
/// Sums `step * straight_power(v_n, a_n)` over the slots. Slots with
/// negative velocity are evaluated with the speed magnitude and the
/// acceleration reflected accordingly, which leaves the thrust correction
/// invariant.
pub fn straight_energy<R: Real>(
    traj: &DiscreteTrajectory<R>,
    consts: &PowerConstants<R>,
) -> Result<R, Error> {
    check_trajectory(traj)?;
    if traj.step == R::zero() {
        return Ok(R::zero());
    }
    let mut total = R::zero();
    for n in 1..traj.positions.len() {
        let v = traj.velocities[n];
        let a = traj.accels[n];
        let (speed, accel) = if v < R::zero() { (-v, -a) } else { (v, a) };
        total = total + traj.step * straight_power(speed, accel, consts)?;
    }
    Ok(total)
}

/// Propulsion energy of a vertical trajectory, J.
///
/// Uses the closed-form boundary terms
/// `p2 T0 + (W/2)(q_N - q_0) -/+ (m/4)(v_N^2 - v_0^2)` plus the slot-summed
/// thrust radical. The sign of the kinetic term follows the direction
/// (descent subtracts, climb adds).
pub fn vertical_energy<R: Real>(
    traj: &DiscreteTrajectory<R>,
    direction: VerticalDirection,
    consts: &PowerConstants<R>,
    airframe: &AirframeParams<R>,
) -> Result<R, Error> {
    check_trajectory(traj)?;
    if traj.step == R::zero() {
        return Ok(R::zero());
    }
    let n_slots = traj.positions.len() - 1;
    let duration = traj.step * R::from_usize(n_slots).unwrap();
    let half = R::c(0.5);
    let quarter = R::c(0.25);

    let dq = traj.positions[n_slots] - traj.positions[0];
    let dv2 = traj.velocities[n_slots].powi(2) - traj.velocities[0].powi(2);
    let kinetic = match direction {
        VerticalDirection::Descent => -quarter * airframe.mass_kg * dv2,
        VerticalDirection::Climb => quarter * airframe.mass_kg * dv2,
    };
    let mut total = consts.p2_watt * duration + half * airframe.weight_newton * dq + kinetic;

    let rho_disc = airframe.air_density * airframe.rotor_disc_area;
    for n in 1..=n_slots {
        let v = traj.velocities[n].abs();
        let thrust = vertical_thrust(traj.accels[n], direction, airframe)?;
        total = total + traj.step * half * thrust * (v * v + R::c(2.0) * thrust / rho_disc).sqrt();
    }
    Ok(total)
}
