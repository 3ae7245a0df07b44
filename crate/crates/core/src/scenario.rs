//! Scenario ingestion and emission.
//!
//! Scenarios are TOML documents with sections `airframe`, `limits`,
//! `channel`, `radio`, `mode`, `solver`, `depot` and a `users` array. Every
//! section is optional except the users; omitted values fall back to the
//! built-in defaults. Radio quantities carry field units in their names:
//! noise density in dBm/Hz, self-interference in dB, demands in bits.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hover::{
    db_to_ratio, dbm_per_hz_to_w_per_hz, ChannelParams, DuplexMode, RadioParams, UserComm,
};
use crate::kinematics::KinematicLimits;
use crate::order::DualSettings;
use crate::propulsion::AirframeParams;
use crate::sca::ScaSettings;

/// Height-grid settings of the per-user hover-height search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeightGridSettings {
    /// Lowest hover height considered, m.
    pub min_height: f64,
    /// Grid step, m.
    pub step: f64,
    /// Safety margin kept below the feasibility bound, m.
    pub bound_margin: f64,
    /// Golden-section refinement tolerance, m.
    pub refine_tol: f64,
}

impl Default for HeightGridSettings {
    fn default() -> Self {
        Self {
            min_height: 0.1,
            step: 0.05,
            bound_margin: 0.01,
            refine_tol: 1e-4,
        }
    }
}

/// Solver knobs of the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub sca: ScaSettings,
    pub dual: DualSettings,
    pub height_grid: HeightGridSettings,
    /// Use SCA-refined energies in the visiting-order matrix instead of the
    /// feasible-profile energies (slower, rarely changes the order).
    pub refine_order_matrix: bool,
    /// Refine the straight mission legs with SCA (otherwise the feasible
    /// profiles are flown).
    pub refine_legs: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            sca: ScaSettings::default(),
            dual: DualSettings::default(),
            height_grid: HeightGridSettings::default(),
            refine_order_matrix: false,
            refine_legs: true,
        }
    }
}

/// Radio section as written in scenario files (log-scale units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    /// UAV broadcast power, W.
    pub uav_tx_power_w: f64,
    /// System bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Noise power spectral density, dBm/Hz.
    pub noise_psd_dbm_hz: f64,
    /// Energy harvesting efficiency in (0, 1).
    pub harvest_efficiency: f64,
    /// Effective self-interference coefficient, dB.
    pub self_interference_db: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            uav_tx_power_w: 1.0,
            bandwidth_hz: 20e6,
            noise_psd_dbm_hz: -174.0,
            harvest_efficiency: 0.9,
            self_interference_db: -100.0,
        }
    }
}

impl RadioConfig {
    pub fn to_params(self) -> RadioParams {
        RadioParams {
            uav_tx_power: self.uav_tx_power_w,
            bandwidth: self.bandwidth_hz,
            noise_psd: dbm_per_hz_to_w_per_hz(self.noise_psd_dbm_hz),
            harvest_efficiency: self.harvest_efficiency,
            self_interference: db_to_ratio(self.self_interference_db),
        }
    }
}

/// One user entry in a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserConfig {
    /// Ground position (x, y), m.
    pub position: (f64, f64),
    /// Minimal upload demand, bits.
    pub demand_bits: f64,
    /// Receive-circuit power, W.
    pub rx_circuit_power_w: f64,
    /// Transmit-circuit power, W.
    pub tx_circuit_power_w: f64,
    /// Power amplifier efficiency in (0, 1].
    pub pa_efficiency: f64,
    /// Energy-circuit processing delay (FD), s.
    pub circuit_delay_s: f64,
}

impl Default for UserConfig {
    fn default() -> Self {
        Self {
            position: (0.0, 0.0),
            demand_bits: 1e6,
            rx_circuit_power_w: 1e-6,
            tx_circuit_power_w: 1e-3,
            pa_efficiency: 0.9,
            circuit_delay_s: 2.0,
        }
    }
}

impl UserConfig {
    pub fn comm(&self) -> UserComm {
        UserComm {
            demand_bits: self.demand_bits,
            rx_circuit_power: self.rx_circuit_power_w,
            tx_circuit_power: self.tx_circuit_power_w,
            pa_efficiency: self.pa_efficiency,
            circuit_delay: self.circuit_delay_s,
        }
    }
}

/// A full mission scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub mode: DuplexMode,
    /// Cruise altitude between users, m.
    pub cruise_altitude_m: f64,
    /// Depot position (x, y), m.
    pub depot: (f64, f64),
    pub airframe: AirframeParams<f64>,
    pub limits: KinematicLimits<f64>,
    pub channel: ChannelParams,
    pub radio: RadioConfig,
    pub solver: SolverSettings,
    pub users: Vec<UserConfig>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            mode: DuplexMode::Hd,
            cruise_altitude_m: 120.0,
            depot: (0.0, 0.0),
            airframe: AirframeParams::default(),
            limits: KinematicLimits::default(),
            channel: ChannelParams::default(),
            radio: RadioConfig::default(),
            solver: SolverSettings::default(),
            users: Vec::new(),
        }
    }
}

impl Scenario {
    /// Validates every section and cross-field constraint.
    pub fn validate(&self) -> Result<(), Error> {
        self.airframe.validate()?;
        self.limits.validate()?;
        self.channel.validate()?;
        self.radio.to_params().validate()?;
        if !(self.cruise_altitude_m > 0.0) || !self.cruise_altitude_m.is_finite() {
            return Err(Error::invalid(
                "cruise_altitude_m",
                self.cruise_altitude_m,
                "must be strictly positive",
            ));
        }
        if !self.depot.0.is_finite() || !self.depot.1.is_finite() {
            return Err(Error::invalid("depot", self.depot.0, "must be finite"));
        }
        if self.users.is_empty() {
            return Err(Error::Scenario("scenario has no users".into()));
        }
        for (i, user) in self.users.iter().enumerate() {
            if !user.position.0.is_finite() || !user.position.1.is_finite() {
                return Err(Error::Scenario(format!(
                    "users[{i}].position must be finite"
                )));
            }
            user.comm()
                .validate()
                .map_err(|e| Error::Scenario(format!("users[{i}]: {e}")))?;
        }
        Ok(())
    }

    /// Non-fatal consistency warnings (e.g. weight vs mass).
    pub fn warnings(&self) -> Vec<String> {
        self.airframe.consistency_warnings()
    }

    /// Parses and validates a scenario document.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| Error::Scenario(format!("parse error: {e}")))?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Emits the scenario as a TOML document; `parse` of the output yields
    /// an identical scenario.
    pub fn emit(&self) -> Result<String, Error> {
        toml::to_string(self).map_err(|e| Error::Scenario(format!("emit error: {e}")))
    }

    pub fn user_positions(&self) -> Vec<(f64, f64)> {
        self.users.iter().map(|u| u.position).collect()
    }
}
