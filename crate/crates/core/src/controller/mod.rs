//! Thrust-tilting control stack.
//!
//! The primary objective (velocity or position tracking) fixes the thrust
//! magnitude and the inertial angular velocity of the thrust direction. A
//! secondary objective (body direction or full attitude) proposes a body
//! angular velocity. The tilt law reconciles both under the tilt-angle
//! limit, always honouring the primary objective, and an inner loop turns
//! the resulting angular-velocity command into a body torque.

mod inner;
mod primary;
mod rates;
mod secondary;
mod tilt;

pub use inner::{inner_torque, InnerLoopMode};
pub use primary::{
    integrator_accel, primary_position, primary_velocity, sigma, PrimaryCommand, PrimaryContext,
};
pub use rates::{RateFilter, RateSource};
pub use secondary::{secondary_attitude, secondary_direction, SecondaryCommand, SecondaryObjective};
pub use tilt::{priority_residual, tilt_and_omega, TiltCommand};

use crate::geom::{Mat3, Vec3};
use crate::plant::{Environment, VehicleParams, VehicleState};
use crate::reference::ReferenceSample;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("thrust target vanishes (|F| = {0:e} N)")]
    SingularThrust(f64),
    #[error("thrust direction antipodal to its target (u . u_r = {0})")]
    AntipodalDirection(f64),
    #[error("body axis antipodal to the secondary target (k . eta = {0})")]
    AntipodalSecondary(f64),
    #[error("attitude error {0} rad too close to pi")]
    NearAntipodalAttitude(f64),
    #[error("thrust direction outside the tilt cone (|u12| = {0})")]
    TiltOutsideLimit(f64),
}

/// Feedback gains. Defaults are the values used for the reference runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gains {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    /// Tilt-rate gain of the saturated tilt law.
    pub k_u: f64,
    pub k_omega: f64,
    /// Weight of the bounded position integral; 0 disables it.
    pub k_i: f64,
    pub beta: f64,
    pub eta: f64,
    pub k_z: f64,
    pub k_zdot: f64,
    pub zddot_max: f64,
    pub delta_z: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Gains {
            k1: 1.2,
            k2: 0.34,
            k3: 12.8,
            k4: 10.0,
            k_u: 16.0,
            k_omega: 20.0,
            k_i: 1.0,
            beta: 0.36,
            eta: 6.0,
            k_z: 4.0,
            k_zdot: 4.0,
            zddot_max: 0.5,
            delta_z: 1.0,
        }
    }
}

impl Gains {
    pub fn violations(&self) -> Vec<String> {
        let positive = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("k_u", self.k_u),
            ("k_omega", self.k_omega),
            ("beta", self.beta),
            ("eta", self.eta),
            ("k_z", self.k_z),
            ("k_zdot", self.k_zdot),
            ("zddot_max", self.zddot_max),
            ("delta_z", self.delta_z),
        ];
        let mut out: Vec<String> = positive
            .iter()
            .filter(|(_, v)| !(*v > 0.0 && v.is_finite()))
            .map(|(n, _)| format!("gains.{n} must be > 0"))
            .collect();
        if !(self.k_i >= 0.0 && self.k_i.is_finite()) {
            out.push("gains.k_i must be >= 0".into());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimaryMode {
    Velocity,
    Position,
}

/// Numerical guards around the singular configurations of the laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Minimal `|F|`, N.
    pub min_force: f64,
    /// Minimal `1 + u . u_r` (and `1 + k . eta`).
    pub antipodal_margin: f64,
    /// Minimal `pi - theta` for the attitude law, rad.
    pub attitude_margin: f64,
    /// Clamp on the secondary angular velocity, rad/s.
    pub max_secondary_rate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            min_force: 1e-3,
            antipodal_margin: 1e-6,
            attitude_margin: 1e-3,
            max_secondary_rate: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub gains: Gains,
    pub primary: PrimaryMode,
    pub secondary: SecondaryObjective,
    pub inner_loop: InnerLoopMode,
    pub rate_source: RateSource,
    /// Time constant of the differentiating filters, s.
    pub rate_filter_tau: f64,
    pub tolerances: Tolerances,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            gains: Gains::default(),
            primary: PrimaryMode::Position,
            secondary: SecondaryObjective::default(),
            inner_loop: InnerLoopMode::PaperSim,
            rate_source: RateSource::Filtered,
            rate_filter_tau: 0.02,
            tolerances: Tolerances::default(),
        }
    }
}

impl ControllerConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.gains.violations();
        out.extend(self.secondary.violations());
        if !(self.rate_filter_tau > 0.0) {
            out.push("controller.rate_filter_tau must be > 0".into());
        }
        let t = &self.tolerances;
        if !(t.min_force > 0.0) {
            out.push("tolerances.min_force must be > 0".into());
        }
        if !(t.antipodal_margin > 0.0 && t.antipodal_margin < 1.0) {
            out.push("tolerances.antipodal_margin must lie in (0, 1)".into());
        }
        if !(t.attitude_margin > 0.0 && t.attitude_margin < std::f64::consts::PI) {
            out.push("tolerances.attitude_margin must lie in (0, pi)".into());
        }
        if !(t.max_secondary_rate > 0.0) {
            out.push("tolerances.max_secondary_rate must be > 0".into());
        }
        out
    }
}

/// Internal memory of the controller between calls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    /// Bounded integral of the position error, m.
    pub z: Vec3,
    pub z_dot: Vec3,
    pub thrust_rates: RateFilter,
    /// Differentiates the angular-velocity command for the full inner loop.
    pub omega_cmd_rate: Option<(Vec3, Vec3)>,
}

impl Default for ControllerState {
    fn default() -> Self {
        ControllerState {
            z: Vec3::zeros(),
            z_dot: Vec3::zeros(),
            thrust_rates: RateFilter::default(),
            omega_cmd_rate: None,
        }
    }
}

/// Everything produced by one controller update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub primary: PrimaryCommand,
    pub secondary: SecondaryCommand,
    pub tilt: TiltCommand,
    /// Body torque demand, N m.
    pub torque: Vec3,
}

/// The full stack with its internal state.
#[derive(Debug, Clone)]
pub struct Controller {
    config: ControllerConfig,
    params: VehicleParams,
    inertia: Mat3,
    state: ControllerState,
}

impl Controller {
    pub fn new(config: ControllerConfig, params: VehicleParams) -> Self {
        let inertia = params.inertia.matrix();
        Controller {
            config,
            params,
            inertia,
            state: ControllerState::default(),
        }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    /// Computes the command for the interval `[t, t + dt]` and advances the
    /// internal state. On error the internal state is left untouched.
    pub fn update(
        &mut self,
        t: f64,
        dt: f64,
        vehicle: &VehicleState,
        reference: &ReferenceSample,
        env: &Environment,
    ) -> Result<ControlOutput, ControllerError> {
        let cfg = &self.config;
        let ctx = PrimaryContext {
            state: vehicle,
            reference,
            wind: env.wind_velocity(t),
            wind_rate: env.wind_acceleration(t),
            params: &self.params,
            gains: &cfg.gains,
            tolerances: &cfg.tolerances,
        };
        let (primary, mut next) = match cfg.primary {
            PrimaryMode::Velocity => primary_velocity(&ctx, cfg.rate_source, cfg.rate_filter_tau, &self.state, dt)?,
            PrimaryMode::Position => primary_position(&ctx, cfg.rate_source, cfg.rate_filter_tau, &self.state, dt)?,
        };
        let secondary = cfg.secondary.command(vehicle, &cfg.gains, &cfg.tolerances)?;
        let tilt = tilt_and_omega(vehicle, &primary, &secondary, &cfg.gains, &self.params)?;

        let torque = match cfg.inner_loop {
            InnerLoopMode::PaperSim => inner_torque(
                vehicle,
                &tilt.omega,
                None,
                None,
                &self.inertia,
                &cfg.gains,
                InnerLoopMode::PaperSim,
            ),
            InnerLoopMode::Full => {
                let (filter, omega_rate) =
                    rates::filtered_vector_rate(self.state.omega_cmd_rate, tilt.omega, dt, cfg.rate_filter_tau);
                next.omega_cmd_rate = Some(filter);
                let gamma_e = self.params.parasitic(&vehicle.thrust_dir, primary.thrust);
                inner_torque(
                    vehicle,
                    &tilt.omega,
                    Some(&omega_rate),
                    Some(&gamma_e),
                    &self.inertia,
                    &cfg.gains,
                    InnerLoopMode::Full,
                )
            }
        };
        self.state = next;
        Ok(ControlOutput {
            primary,
            secondary,
            tilt,
            torque,
        })
    }
}
