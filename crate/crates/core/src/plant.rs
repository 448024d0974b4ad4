//! Rigid-body model of the tilted-thrust vehicle.
//!
//! Translational dynamics `m a = m g + F_a - T u`, Euler's rotational
//! equation with a parasitic torque, and tilt kinematics. The state is
//! advanced with fixed-step RK4; the attitude is propagated on SO(3) through
//! the exponential map (Munthe-Kaas form) so it never leaves the group.

use crate::geom::{so3_exp, Mat3, Rotation, UnitVec3, Vec2, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STANDARD_GRAVITY: f64 = 9.81;
pub const MAX_STEP: f64 = 0.02;
/// Slack on the tilt cone and on `u . u_dot = 0`.
pub const TILT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("invalid vehicle parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("step size {0} s outside (0, {MAX_STEP}]")]
    InvalidStep(f64),
    #[error("invalid plant input: {0}")]
    InvalidInput(String),
    #[error("integration failure at t = {t:.6} s: {reason}")]
    IntegrationFailure { t: f64, reason: String },
}

/// Inertia given either by its principal moments or as a full matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Inertia {
    Diagonal([f64; 3]),
    Full([[f64; 3]; 3]),
}

impl Inertia {
    pub fn matrix(&self) -> Mat3 {
        match self {
            Inertia::Diagonal(d) => Mat3::from_diagonal(&Vec3::new(d[0], d[1], d[2])),
            Inertia::Full(rows) => Mat3::from_fn(|r, c| rows[r][c]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// kg m^2, body axes
    pub inertia: Inertia,
    /// Signed height of the rotor pivot plane along body `k`, m.
    pub pivot_height: f64,
    /// Rotor arm length, m.
    pub arm_length: f64,
    /// Rotor thrust coefficient, N s^2.
    pub rotor_thrust_coeff: f64,
    /// Rotor drag-torque coefficient, N m s^2.
    pub rotor_drag_coeff: f64,
    /// Body drag coefficient, kg/m.
    pub body_drag_coeff: f64,
    /// Induced drag coefficient, kg/s.
    pub induced_drag_coeff: f64,
    /// Sine of the maximal tilt angle between thrust axis and body `k`.
    pub tilt_limit: f64,
    /// m/s^2
    pub gravity: f64,
    /// Torque acting on the body besides the rotor wrench.
    #[serde(default)]
    pub parasitic_torque: ParasiticModel,
}

/// Disturbance torque added to the rotor torque in the Euler equation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParasiticModel {
    /// The rotor torque map already contains the pivot-offset moment.
    #[default]
    None,
    /// Adds `(h k) x (-T u)`, the moment of the thrust applied at the pivot
    /// plane, on top of the rotor torque.
    ThrustMoment,
}

impl VehicleParams {
    /// The simulated quadrotor used in the reference runs. Rotor coefficients
    /// are not part of the published table and only scale rotor speeds.
    pub fn reference_quadrotor() -> Self {
        VehicleParams {
            mass: 1.5,
            inertia: Inertia::Diagonal([0.028, 0.028, 0.06]),
            pivot_height: 0.05,
            arm_length: 0.2,
            rotor_thrust_coeff: 1e-5,
            rotor_drag_coeff: 1e-6,
            body_drag_coeff: 0.0092,
            induced_drag_coeff: 0.025,
            tilt_limit: (std::f64::consts::PI / 6.0).sin(),
            gravity: STANDARD_GRAVITY,
            parasitic_torque: ParasiticModel::None,
        }
    }

    /// Disturbance torque under the configured model, body coordinates.
    pub fn parasitic(&self, thrust_dir: &Vec3, thrust: f64) -> Vec3 {
        match self.parasitic_torque {
            ParasiticModel::None => Vec3::zeros(),
            ParasiticModel::ThrustMoment => parasitic_torque(thrust_dir, thrust, self),
        }
    }

    pub fn max_tilt_angle(&self) -> f64 {
        self.tilt_limit.asin()
    }

    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                out.push(msg.to_string());
            }
        };
        check(self.mass > 0.0 && self.mass.is_finite(), "mass must be > 0");
        let i = self.inertia.matrix();
        let symmetric = (i - i.transpose()).abs().max() <= 1e-12 * i.abs().max();
        check(symmetric, "inertia must be symmetric");
        check(
            symmetric && i.cholesky().is_some(),
            "inertia must be positive definite",
        );
        check(self.arm_length > 0.0, "arm_length must be > 0");
        check(self.pivot_height.is_finite(), "pivot_height must be finite");
        check(self.rotor_thrust_coeff > 0.0, "rotor_thrust_coeff must be > 0");
        check(self.rotor_drag_coeff > 0.0, "rotor_drag_coeff must be > 0");
        check(self.body_drag_coeff >= 0.0, "body_drag_coeff must be >= 0");
        check(self.induced_drag_coeff >= 0.0, "induced_drag_coeff must be >= 0");
        check(
            self.tilt_limit > 0.0 && self.tilt_limit < 1.0,
            "tilt_limit must lie in (0, 1)",
        );
        check(
            self.gravity >= 0.0 && self.gravity.is_finite(),
            "gravity must be >= 0",
        );
        out
    }
}

/// Wind velocity w.r.t. the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Wind {
    Constant {
        velocity: [f64; 3],
    },
    /// `mean + amplitude sin(angular_frequency t)`, componentwise.
    Sinusoidal {
        mean: [f64; 3],
        amplitude: [f64; 3],
        angular_frequency: f64,
    },
}

impl Default for Wind {
    fn default() -> Self {
        Wind::Constant {
            velocity: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    #[serde(default)]
    pub wind: Wind,
}

impl Environment {
    pub fn calm() -> Self {
        Environment::default()
    }

    pub fn wind_velocity(&self, t: f64) -> Vec3 {
        match self.wind {
            Wind::Constant { velocity } => Vec3::from(velocity),
            Wind::Sinusoidal {
                mean,
                amplitude,
                angular_frequency,
            } => Vec3::from(mean) + Vec3::from(amplitude) * (angular_frequency * t).sin(),
        }
    }

    pub fn wind_acceleration(&self, t: f64) -> Vec3 {
        match self.wind {
            Wind::Constant { .. } => Vec3::zeros(),
            Wind::Sinusoidal {
                amplitude,
                angular_frequency,
                ..
            } => Vec3::from(amplitude) * (angular_frequency * (angular_frequency * t).cos()),
        }
    }

    pub fn is_finite(&self) -> bool {
        let probe = self.wind_velocity(0.0);
        probe.iter().all(|c| c.is_finite())
            && match self.wind {
                Wind::Sinusoidal {
                    amplitude,
                    angular_frequency,
                    ..
                } => amplitude.iter().all(|a| a.is_finite()) && angular_frequency.is_finite(),
                Wind::Constant { .. } => true,
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Inertial, m.
    pub position: Vec3,
    /// Inertial, m/s.
    pub velocity: Vec3,
    /// Body to inertial.
    pub attitude: Rotation,
    /// Body coordinates, rad/s.
    pub angular_velocity: Vec3,
    /// Thrust direction in body coordinates.
    pub thrust_dir: UnitVec3,
}

impl VehicleState {
    /// Level, untilted, at rest.
    pub fn at_rest(position: Vec3) -> Self {
        VehicleState {
            position,
            velocity: Vec3::zeros(),
            attitude: Rotation::identity(),
            angular_velocity: Vec3::zeros(),
            thrust_dir: UnitVec3::E3,
        }
    }

    pub fn thrust_dir_inertial(&self) -> Vec3 {
        self.attitude.to_inertial(&self.thrust_dir)
    }

    /// Angle between the thrust axis and body `k`, rad.
    pub fn tilt_angle(&self) -> f64 {
        self.thrust_dir.xy().norm().min(1.0).asin()
    }

    /// Angle between body `k` and the inertial vertical, rad.
    pub fn inclination(&self) -> f64 {
        self.attitude.matrix()[(2, 2)].clamp(-1.0, 1.0).acos()
    }

    pub fn violations(&self, tilt_limit: f64) -> Vec<String> {
        let mut out = Vec::new();
        let finite = self
            .position
            .iter()
            .chain(self.velocity.iter())
            .chain(self.angular_velocity.iter())
            .chain(self.attitude.matrix().iter())
            .all(|c| c.is_finite());
        if !finite {
            out.push("non-finite state component".into());
        }
        if self.attitude.orthogonality_error() > 1e-9 {
            out.push("attitude left SO(3)".into());
        }
        if (self.thrust_dir.norm() - 1.0).abs() > TILT_TOL {
            out.push(format!("|u| = {}", self.thrust_dir.norm()));
        }
        if self.thrust_dir.z <= 0.0 {
            out.push("u3 <= 0".into());
        }
        let tilt = self.thrust_dir.xy().norm();
        if tilt > tilt_limit + TILT_TOL {
            out.push(format!("|u12| = {tilt} exceeds {tilt_limit}"));
        }
        out
    }
}

/// Thrust direction in body coordinates whose `xy` part is `u12`, with the
/// third component rebuilt on the lower (`u3 > 0`) hemisphere.
pub fn thrust_dir_from_xy(u12: Vec2) -> Option<UnitVec3> {
    let r2 = u12.norm_squared();
    if r2 >= 1.0 || !r2.is_finite() {
        return None;
    }
    UnitVec3::new(Vec3::new(u12.x, u12.y, (1.0 - r2).sqrt())).ok()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantInput {
    /// Thrust magnitude, N.
    pub thrust: f64,
    /// Body torque, N m.
    pub torque: Vec3,
    /// Rate of the body-frame thrust direction, tangent to the sphere.
    pub tilt_rate: Vec3,
}

impl PlantInput {
    pub fn hover(params: &VehicleParams) -> Self {
        PlantInput {
            thrust: params.mass * params.gravity,
            torque: Vec3::zeros(),
            tilt_rate: Vec3::zeros(),
        }
    }
}

/// `F_a = f1 + f2 u`, with `f1` independent of the vehicle attitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroForce {
    pub f1: Vec3,
    pub f2: f64,
}

pub fn aero_force(velocity: &Vec3, u_inertial: &Vec3, wind: &Vec3, p: &VehicleParams) -> AeroForce {
    let va = velocity - wind;
    AeroForce {
        f1: -va * (p.body_drag_coeff * va.norm() + p.induced_drag_coeff),
        f2: p.induced_drag_coeff * va.dot(u_inertial),
    }
}

/// Jacobian of `f1` w.r.t. the apparent velocity.
pub fn aero_f1_jacobian(apparent_velocity: &Vec3, p: &VehicleParams) -> Mat3 {
    let speed = apparent_velocity.norm();
    let mut jac = Mat3::identity() * -(p.induced_drag_coeff + p.body_drag_coeff * speed);
    if speed > 0.0 {
        jac -= apparent_velocity * apparent_velocity.transpose() * (p.body_drag_coeff / speed);
    }
    jac
}

/// Moment about the CoM of the thrust `-T u` acting at the pivot plane
/// `h k`, in body coordinates.
pub fn parasitic_torque(thrust_dir: &Vec3, thrust: f64, p: &VehicleParams) -> Vec3 {
    (Vec3::z() * p.pivot_height).cross(&(thrust_dir * -thrust))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub position: Vec3,
    pub velocity: Vec3,
    /// `R_dot = R skew(body_rate)`.
    pub body_rate: Vec3,
    pub angular_velocity: Vec3,
    pub thrust_dir: Vec3,
}

/// Simulated vehicle: parameters plus cached inertia factors.
#[derive(Debug, Clone)]
pub struct Plant {
    params: VehicleParams,
    inertia: Mat3,
    inertia_inv: Mat3,
}

impl Plant {
    pub fn new(params: VehicleParams) -> Result<Self, PlantError> {
        let violations = params.violations();
        if !violations.is_empty() {
            return Err(PlantError::InvalidParams(violations));
        }
        let inertia = params.inertia.matrix();
        let inertia_inv = inertia
            .try_inverse()
            .ok_or_else(|| PlantError::InvalidParams(vec!["inertia not invertible".into()]))?;
        Ok(Plant {
            params,
            inertia,
            inertia_inv,
        })
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn inertia(&self) -> &Mat3 {
        &self.inertia
    }

    fn translational_accel(&self, velocity: &Vec3, u_inertial: &Vec3, thrust: f64, wind: &Vec3) -> Vec3 {
        let p = &self.params;
        let aero = aero_force(velocity, u_inertial, wind, p);
        Vec3::z() * p.gravity + (aero.f1 + u_inertial * (aero.f2 - thrust)) / p.mass
    }

    fn angular_accel(&self, omega: &Vec3, thrust_dir: &Vec3, input: &PlantInput) -> Vec3 {
        let gamma_e = self.params.parasitic(thrust_dir, input.thrust);
        self.inertia_inv * (-omega.cross(&(self.inertia * omega)) + gamma_e + input.torque)
    }

    pub fn derivative(&self, state: &VehicleState, input: &PlantInput, env: &Environment, t: f64) -> StateDerivative {
        let u_inertial = state.thrust_dir_inertial();
        StateDerivative {
            position: state.velocity,
            velocity: self.translational_accel(&state.velocity, &u_inertial, input.thrust, &env.wind_velocity(t)),
            body_rate: state.angular_velocity,
            angular_velocity: self.angular_accel(&state.angular_velocity, &state.thrust_dir, input),
            thrust_dir: input.tilt_rate,
        }
    }

    fn check_input(&self, state: &VehicleState, input: &PlantInput) -> Result<(), PlantError> {
        let finite = input.thrust.is_finite()
            && input.torque.iter().all(|c| c.is_finite())
            && input.tilt_rate.iter().all(|c| c.is_finite());
        if !finite {
            return Err(PlantError::InvalidInput("non-finite input".into()));
        }
        if input.thrust < 0.0 {
            return Err(PlantError::InvalidInput(format!("negative thrust {}", input.thrust)));
        }
        let radial = state.thrust_dir.dot(&input.tilt_rate);
        if radial.abs() > TILT_TOL {
            return Err(PlantError::InvalidInput(format!(
                "tilt rate not tangent to the unit sphere (u . u_dot = {radial:e})"
            )));
        }
        Ok(())
    }

    /// One RK4 step with the input held over `[t, t + dt]`.
    ///
    /// Position, velocity and angular velocity use classical RK4. The
    /// attitude increment is integrated in the Lie algebra with the
    /// third-order truncation of `dexp^-1` (sufficient for fourth order) and
    /// mapped back with the exponential. The tilt components `u12` move
    /// linearly under the held rate, and `u3` is rebuilt on the sphere.
    pub fn step(
        &self,
        state: &VehicleState,
        input: &PlantInput,
        env: &Environment,
        t: f64,
        dt: f64,
    ) -> Result<VehicleState, PlantError> {
        if !(dt > 0.0 && dt <= MAX_STEP) {
            return Err(PlantError::InvalidStep(dt));
        }
        self.check_input(state, input)?;

        let fail = |reason: String| PlantError::IntegrationFailure { t, reason };
        let u12_0 = state.thrust_dir.xy();
        let u12_rate = Vec2::new(input.tilt_rate.x, input.tilt_rate.y);
        let thrust_dir_at = |tau: f64| {
            thrust_dir_from_xy(u12_0 + u12_rate * tau)
                .ok_or_else(|| fail("thrust direction left the lower hemisphere".into()))
        };

        #[derive(Clone, Copy)]
        struct Stage {
            x: Vec3,
            v: Vec3,
            w: Vec3,
            phi: Vec3,
        }
        let eval = |tau: f64, s: &Stage| -> Result<Stage, PlantError> {
            let u = thrust_dir_at(tau)?;
            let r = state.attitude.matrix() * so3_exp(&s.phi);
            let u_inertial = r * u.as_vec();
            let wind = env.wind_velocity(t + tau);
            let phi_dot = s.w + s.phi.cross(&s.w) * 0.5 + s.phi.cross(&s.phi.cross(&s.w)) / 12.0;
            Ok(Stage {
                x: s.v,
                v: self.translational_accel(&s.v, &u_inertial, input.thrust, &wind),
                w: self.angular_accel(&s.w, &u, input),
                phi: phi_dot,
            })
        };
        let axpy = |s: &Stage, k: &Stage, h: f64| Stage {
            x: s.x + k.x * h,
            v: s.v + k.v * h,
            w: s.w + k.w * h,
            phi: s.phi + k.phi * h,
        };

        let s0 = Stage {
            x: state.position,
            v: state.velocity,
            w: state.angular_velocity,
            phi: Vec3::zeros(),
        };
        let k1 = eval(0.0, &s0)?;
        let k2 = eval(0.5 * dt, &axpy(&s0, &k1, 0.5 * dt))?;
        let k3 = eval(0.5 * dt, &axpy(&s0, &k2, 0.5 * dt))?;
        let k4 = eval(dt, &axpy(&s0, &k3, dt))?;
        let comb = |a: Vec3, b: Vec3, c: Vec3, d: Vec3| (a + (b + c) * 2.0 + d) * (dt / 6.0);

        let next = VehicleState {
            position: s0.x + comb(k1.x, k2.x, k3.x, k4.x),
            velocity: s0.v + comb(k1.v, k2.v, k3.v, k4.v),
            angular_velocity: s0.w + comb(k1.w, k2.w, k3.w, k4.w),
            attitude: state
                .attitude
                .compose(&Rotation::exp(&comb(k1.phi, k2.phi, k3.phi, k4.phi)))
                .reorthonormalized(),
            thrust_dir: thrust_dir_at(dt)?,
        };
        let violations = next.violations(self.params.tilt_limit);
        if violations.is_empty() {
            Ok(next)
        } else {
            Err(fail(violations.join("; ")))
        }
    }
}
