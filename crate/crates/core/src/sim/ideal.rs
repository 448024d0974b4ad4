//! Closed loop with a perfect inner loop: the body angular velocity equals
//! its command at every instant and no parasitic torque acts. Used to study
//! the primary law on its own.

use crate::controller::{
    primary_velocity, tilt_and_omega, ControllerError, ControllerState, Gains, PrimaryCommand, PrimaryContext,
    RateSource, SecondaryObjective, TiltCommand, Tolerances,
};
use crate::geom::{Rotation, UnitVec3, Vec3};
use crate::plant::{aero_force, Environment, VehicleParams, VehicleState};
use crate::reference::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Rotation,
    /// Body coordinates.
    pub thrust_dir: UnitVec3,
}

impl IdealState {
    /// Full vehicle state with the body at rest (the loop never uses `omega`).
    pub fn vehicle(&self) -> VehicleState {
        VehicleState {
            position: self.position,
            velocity: self.velocity,
            attitude: self.attitude,
            angular_velocity: Vec3::zeros(),
            thrust_dir: self.thrust_dir,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdealLoop {
    pub params: VehicleParams,
    pub gains: Gains,
    pub tolerances: Tolerances,
    pub secondary: SecondaryObjective,
    pub trajectory: Trajectory,
    pub environment: Environment,
}

#[derive(Clone, Copy)]
struct Rate {
    x: Vec3,
    v: Vec3,
    phi: Vec3,
    u: Vec3,
}

impl IdealLoop {
    /// Velocity tracking with exact reference-rate feedforward.
    pub fn command(&self, t: f64, s: &IdealState) -> Result<(PrimaryCommand, TiltCommand), ControllerError> {
        let vehicle = s.vehicle();
        let reference = self.trajectory.sample(t);
        let ctx = PrimaryContext {
            state: &vehicle,
            reference: &reference,
            wind: self.environment.wind_velocity(t),
            wind_rate: self.environment.wind_acceleration(t),
            params: &self.params,
            gains: &self.gains,
            tolerances: &self.tolerances,
        };
        let (primary, _) = primary_velocity(&ctx, RateSource::Analytic, 1.0, &ControllerState::default(), 1.0)?;
        let secondary = self.secondary.command(&vehicle, &self.gains, &self.tolerances)?;
        let tilt = tilt_and_omega(&vehicle, &primary, &secondary, &self.gains, &self.params)?;
        Ok((primary, tilt))
    }

    pub fn lyapunov(&self, t: f64, s: &IdealState) -> Result<f64, ControllerError> {
        Ok(self.command(t, s)?.0.lyapunov)
    }

    fn rate(&self, t: f64, phi: &Vec3, s: &IdealState) -> Result<Rate, ControllerError> {
        let (primary, tilt) = self.command(t, s)?;
        let p = &self.params;
        let u_i = s.attitude.to_inertial(&s.thrust_dir);
        let aero = aero_force(&s.velocity, &u_i, &self.environment.wind_velocity(t), p);
        let accel = Vec3::z() * p.gravity + (aero.f1 + u_i * (aero.f2 - primary.thrust)) / p.mass;
        let w = tilt.omega;
        Ok(Rate {
            x: s.velocity,
            v: accel,
            phi: w + phi.cross(&w) * 0.5 + phi.cross(&phi.cross(&w)) / 12.0,
            u: tilt.tilt_rate,
        })
    }

    fn stage(&self, base: &IdealState, phi: &Vec3, u: &Vec3, x: Vec3, v: Vec3) -> IdealState {
        IdealState {
            position: x,
            velocity: v,
            attitude: base.attitude.compose(&Rotation::exp(phi)),
            thrust_dir: self.project_to_cone(u),
        }
    }

    /// Normalizes and, if needed, pulls `u12` back onto the cone boundary
    /// (stage values may overshoot it by a few ulps times `dt^2`).
    fn project_to_cone(&self, u: &Vec3) -> UnitVec3 {
        let u = u.normalize();
        let limit = self.params.tilt_limit;
        let r = u.xy().norm();
        let u12 = if r > limit { u.xy() * (limit / r) } else { u.xy() };
        crate::plant::thrust_dir_from_xy(u12).expect("inside the cone")
    }

    /// One RK4 step (attitude in the Lie algebra).
    pub fn step(&self, t: f64, s: &IdealState, dt: f64) -> Result<IdealState, ControllerError> {
        let zero = Vec3::zeros();
        let u0 = s.thrust_dir.into_inner();
        let k1 = self.rate(t, &zero, s)?;
        let at = |k: &Rate, h: f64| {
            let phi = k.phi * h;
            (phi, self.stage(s, &phi, &(u0 + k.u * h), s.position + k.x * h, s.velocity + k.v * h))
        };
        let (phi2, s2) = at(&k1, 0.5 * dt);
        let k2 = self.rate(t + 0.5 * dt, &phi2, &s2)?;
        let (phi3, s3) = at(&k2, 0.5 * dt);
        let k3 = self.rate(t + 0.5 * dt, &phi3, &s3)?;
        let (phi4, s4) = at(&k3, dt);
        let k4 = self.rate(t + dt, &phi4, &s4)?;
        let comb = |a: Vec3, b: Vec3, c: Vec3, d: Vec3| (a + (b + c) * 2.0 + d) * (dt / 6.0);
        let phi = comb(k1.phi, k2.phi, k3.phi, k4.phi);
        let next = self.stage(
            s,
            &phi,
            &(u0 + comb(k1.u, k2.u, k3.u, k4.u)),
            s.position + comb(k1.x, k2.x, k3.x, k4.x),
            s.velocity + comb(k1.v, k2.v, k3.v, k4.v),
        );
        Ok(IdealState {
            attitude: next.attitude.reorthonormalized(),
            ..next
        })
    }
}
