//! Primary objective: thrust magnitude and inertial tilt rate of the thrust
//! direction for velocity or position tracking.

use super::rates::{RateFilter, RateSource};
use super::{ControllerError, ControllerState, Gains, Tolerances};
use crate::geom::{sat, Mat3, UnitVec3, Vec3};
use crate::plant::{aero_f1_jacobian, aero_force, VehicleParams, VehicleState};
use crate::reference::ReferenceSample;

/// Inputs shared by both primary laws.
#[derive(Debug, Clone, Copy)]
pub struct PrimaryContext<'a> {
    pub state: &'a VehicleState,
    pub reference: &'a ReferenceSample,
    /// Wind velocity and its time derivative, inertial.
    pub wind: Vec3,
    pub wind_rate: Vec3,
    pub params: &'a VehicleParams,
    pub gains: &'a Gains,
    pub tolerances: &'a Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryCommand {
    /// `T - F2`, N.
    pub thrust_bar: f64,
    /// Thrust magnitude to apply, N.
    pub thrust: f64,
    /// Angular velocity of the thrust direction w.r.t. the inertial frame,
    /// inertial coordinates.
    pub tilt_rate_inertial: Vec3,
    /// `|F|`, N.
    pub thrust_ref: f64,
    /// `F / |F|`, inertial.
    pub dir_ref: UnitVec3,
    pub thrust_ref_rate: f64,
    pub dir_ref_rate: Vec3,
    /// Velocity error fed to the law (`v - v_r`, plus `k_I z_dot` in position mode).
    pub velocity_error: Vec3,
    /// Lyapunov function and its predicted derivative.
    pub lyapunov: f64,
    pub lyapunov_rate: f64,
    /// Second derivative of the bounded integral (zero in velocity mode).
    pub integrator_accel: Vec3,
}

/// Bounded function of the integral-augmented position error. Slope
/// `beta` at the origin, norm tending to `eta` far away.
pub fn sigma(y: &Vec3, beta: f64, eta: f64) -> Vec3 {
    y * (beta / (beta * beta * y.norm_squared() / (eta * eta) + 1.0).sqrt())
}

fn sigma_jacobian(y: &Vec3, beta: f64, eta: f64) -> Mat3 {
    let s = 1.0 / (beta * beta * y.norm_squared() / (eta * eta) + 1.0).sqrt();
    Mat3::identity() * (beta * s) - y * y.transpose() * (beta.powi(3) * s.powi(3) / (eta * eta))
}

fn sat_jacobian(x: &Vec3, limit: f64) -> Mat3 {
    let n = x.norm();
    if n <= limit {
        Mat3::identity()
    } else {
        let d = x / n;
        (Mat3::identity() - d * d.transpose()) * (limit / n)
    }
}

/// Second derivative of the bounded position integral `z`.
pub fn integrator_accel(z: &Vec3, z_dot: &Vec3, pos_error: &Vec3, g: &Gains) -> Vec3 {
    let inner = sat(&(z + pos_error / g.k_z), g.delta_z);
    -z_dot * g.k_zdot + sat(&((inner - z) * g.k_z), g.zddot_max / 2.0)
}

fn integrator_jerk(z: &Vec3, z_dot: &Vec3, pos_error: &Vec3, vel_error: &Vec3, g: &Gains) -> Vec3 {
    let y = z + pos_error / g.k_z;
    let w = (sat(&y, g.delta_z) - z) * g.k_z;
    let w_dot = (sat_jacobian(&y, g.delta_z) * (z_dot + vel_error / g.k_z) - z_dot) * g.k_z;
    -integrator_accel(z, z_dot, pos_error, g) * g.k_zdot + sat_jacobian(&w, g.zddot_max / 2.0) * w_dot
}

/// Target force and the part of its derivative that does not depend on the
/// vehicle acceleration.
struct ThrustTarget {
    force: Vec3,
    force_rate_partial: Vec3,
    velocity_error: Vec3,
    integrator_accel: Vec3,
}

fn velocity_target(ctx: &PrimaryContext) -> ThrustTarget {
    let p = ctx.params;
    let f1 = aero_force(&ctx.state.velocity, &Vec3::z(), &ctx.wind, p).f1;
    ThrustTarget {
        force: Vec3::z() * (p.mass * p.gravity) + f1 - ctx.reference.acceleration * p.mass,
        force_rate_partial: -ctx.reference.jerk * p.mass,
        velocity_error: ctx.state.velocity - ctx.reference.velocity,
        integrator_accel: Vec3::zeros(),
    }
}

fn position_target(ctx: &PrimaryContext, cstate: &ControllerState) -> ThrustTarget {
    let g = ctx.gains;
    let m = ctx.params.mass;
    let base = velocity_target(ctx);
    let pos_error = ctx.state.position - ctx.reference.position;
    let vel_error = base.velocity_error;
    let (z, z_dot) = (cstate.z, cstate.z_dot);

    let xi = pos_error + z * g.k_i;
    let xi_dot = vel_error + z_dot * g.k_i;
    let z_ddot = integrator_accel(&z, &z_dot, &pos_error, g);
    let z_dddot = integrator_jerk(&z, &z_dot, &pos_error, &vel_error, g);

    ThrustTarget {
        force: base.force + z_ddot * (m * g.k_i) + sigma(&xi, g.beta, g.eta) * m,
        force_rate_partial: base.force_rate_partial
            + z_dddot * (m * g.k_i)
            + sigma_jacobian(&xi, g.beta, g.eta) * xi_dot * m,
        velocity_error: xi_dot,
        integrator_accel: z_ddot,
    }
}

fn apply_law(
    ctx: &PrimaryContext,
    target: &ThrustTarget,
    rate_source: RateSource,
    filter: &RateFilter,
    tau: f64,
    dt: f64,
) -> Result<(PrimaryCommand, RateFilter), ControllerError> {
    let p = ctx.params;
    let g = ctx.gains;
    let m = p.mass;
    let u = ctx.state.thrust_dir_inertial();

    let thrust_ref = target.force.norm();
    let ve = target.velocity_error;
    if !(thrust_ref > ctx.tolerances.min_force) {
        // At rest on target with nothing to oppose: idle with the current
        // direction instead of failing.
        if g.k1 * m * ve.norm() < ctx.tolerances.min_force {
            return Ok((idle_command(ctx, target, &u), *filter));
        }
        return Err(ControllerError::SingularThrust(thrust_ref));
    }
    let dir_ref = UnitVec3::normalize(target.force).ok_or(ControllerError::SingularThrust(thrust_ref))?;
    let ur = dir_ref.into_inner();
    let align = u.dot(&ur);
    if align <= -1.0 + ctx.tolerances.antipodal_margin {
        return Err(ControllerError::AntipodalDirection(align));
    }

    let thrust_bar = thrust_ref * align + g.k1 * m * u.dot(&ve);
    let aero = aero_force(&ctx.state.velocity, &u, &ctx.wind, p);
    let thrust = thrust_bar + aero.f2;

    let (next_filter, thrust_ref_rate, dir_ref_rate) = match rate_source {
        RateSource::Filtered => filter.estimate(thrust_ref, &dir_ref, dt, tau),
        RateSource::Analytic => {
            let accel = Vec3::z() * p.gravity + (aero.f1 - u * thrust_bar) / m;
            let apparent = ctx.state.velocity - ctx.wind;
            let force_rate = target.force_rate_partial + aero_f1_jacobian(&apparent, p) * (accel - ctx.wind_rate);
            let tr_rate = ur.dot(&force_rate);
            (*filter, tr_rate, (force_rate - ur * tr_rate) / thrust_ref)
        }
    };

    let one_plus = 1.0 + align;
    let k3_bar = 2.0 * thrust_ref_rate * one_plus / thrust_ref;
    let u_x_ur = u.cross(&ur);
    let tilt_rate_inertial = u.cross(&ve) * (g.k2 * m / thrust_ref) + u_x_ur * ((g.k3 + k3_bar) / (one_plus * one_plus))
        - u.cross(&u.cross(&ur.cross(&dir_ref_rate)));

    let scale = thrust_ref * thrust_ref / (m * m);
    let lyapunov = scale * (1.0 - align) / g.k2 + 0.5 * ve.norm_squared();
    let lyapunov_rate =
        -(g.k3 / g.k2) * scale * u_x_ur.norm_squared() / (one_plus * one_plus) - g.k1 * u.dot(&ve).powi(2);

    Ok((
        PrimaryCommand {
            thrust_bar,
            thrust,
            tilt_rate_inertial,
            thrust_ref,
            dir_ref,
            thrust_ref_rate,
            dir_ref_rate,
            velocity_error: ve,
            lyapunov,
            lyapunov_rate,
            integrator_accel: target.integrator_accel,
        },
        next_filter,
    ))
}

fn idle_command(ctx: &PrimaryContext, target: &ThrustTarget, u: &Vec3) -> PrimaryCommand {
    let ve = target.velocity_error;
    let thrust_bar = ctx.gains.k1 * ctx.params.mass * u.dot(&ve);
    let aero = aero_force(&ctx.state.velocity, u, &ctx.wind, ctx.params);
    PrimaryCommand {
        thrust_bar,
        thrust: thrust_bar + aero.f2,
        tilt_rate_inertial: Vec3::zeros(),
        thrust_ref: target.force.norm(),
        dir_ref: UnitVec3::normalize(*u).unwrap_or(UnitVec3::E3),
        thrust_ref_rate: 0.0,
        dir_ref_rate: Vec3::zeros(),
        velocity_error: ve,
        lyapunov: 0.5 * ve.norm_squared(),
        lyapunov_rate: -ctx.gains.k1 * u.dot(&ve).powi(2),
        integrator_accel: target.integrator_accel,
    }
}

/// Reference-velocity stabilization. Only the rate filter of `cstate` is
/// touched.
pub fn primary_velocity(
    ctx: &PrimaryContext,
    rate_source: RateSource,
    tau: f64,
    cstate: &ControllerState,
    dt: f64,
) -> Result<(PrimaryCommand, ControllerState), ControllerError> {
    let target = velocity_target(ctx);
    let (cmd, filter) = apply_law(ctx, &target, rate_source, &cstate.thrust_rates, tau, dt)?;
    Ok((
        cmd,
        ControllerState {
            thrust_rates: filter,
            ..*cstate
        },
    ))
}

/// Reference-position tracking with the bounded integral `z`, which is
/// advanced over `dt` (RK4, position error extrapolated with the current
/// velocity error).
pub fn primary_position(
    ctx: &PrimaryContext,
    rate_source: RateSource,
    tau: f64,
    cstate: &ControllerState,
    dt: f64,
) -> Result<(PrimaryCommand, ControllerState), ControllerError> {
    let target = position_target(ctx, cstate);
    let (cmd, filter) = apply_law(ctx, &target, rate_source, &cstate.thrust_rates, tau, dt)?;

    let g = ctx.gains;
    let pos_error = ctx.state.position - ctx.reference.position;
    let vel_error = ctx.state.velocity - ctx.reference.velocity;
    let f = |tau: f64, z: &Vec3, zd: &Vec3| (*zd, integrator_accel(z, zd, &(pos_error + vel_error * tau), g));
    let (z0, zd0) = (cstate.z, cstate.z_dot);
    let (a1, b1) = f(0.0, &z0, &zd0);
    let (a2, b2) = f(0.5 * dt, &(z0 + a1 * (0.5 * dt)), &(zd0 + b1 * (0.5 * dt)));
    let (a3, b3) = f(0.5 * dt, &(z0 + a2 * (0.5 * dt)), &(zd0 + b2 * (0.5 * dt)));
    let (a4, b4) = f(dt, &(z0 + a3 * dt), &(zd0 + b3 * dt));

    Ok((
        cmd,
        ControllerState {
            z: z0 + (a1 + (a2 + a3) * 2.0 + a4) * (dt / 6.0),
            z_dot: zd0 + (b1 + (b2 + b3) * 2.0 + b4) * (dt / 6.0),
            thrust_rates: filter,
            ..*cstate
        },
    ))
}
