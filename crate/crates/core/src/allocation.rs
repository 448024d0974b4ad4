//! Rotor-speed allocation for the quadrotor whose four rotor axes tilt
//! together along the thrust direction.
//!
//! Rotor `i` sits at pivot `h k + d e_i` (`e = i, -j, -i, j`), produces
//! thrust `mu w_i^2 u` and drag torque `lambda_i kappa w_i^2 u` with
//! `lambda = +1` for odd and `-1` for even rotors.

use crate::geom::{UnitVec3, Vec3};
use crate::plant::VehicleParams;
use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest `u3` for which the allocation matrix is treated as invertible.
pub const MIN_U3: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocationError {
    #[error("allocation matrix singular: u3 = {0}")]
    Singular(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotorLimits {
    /// Upper bound on each squared rotor speed, rad^2/s^2.
    pub max_speed_sq: Option<f64>,
}

impl Default for RotorLimits {
    fn default() -> Self {
        // 1500 rad/s, roughly six times hover thrust with the default coefficients
        RotorLimits {
            max_speed_sq: Some(1500.0 * 1500.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorCommand {
    pub speeds_sq: [f64; 4],
    pub feasible: bool,
    /// Amount removed from each unconstrained solution (positive when
    /// clipped down, negative when raised to zero).
    pub clip: [f64; 4],
    pub thrust: f64,
    pub torque: Vec3,
}

/// `[T; Gamma] = A [w1^2 .. w4^2]`.
pub fn build_allocation_matrix(u: &UnitVec3, p: &VehicleParams) -> Result<Matrix4<f64>, AllocationError> {
    let (u1, u2, u3) = (u.x, u.y, u.z);
    if u3 <= MIN_U3 {
        return Err(AllocationError::Singular(u3));
    }
    let (mu, ka, h, d) = (p.rotor_thrust_coeff, p.rotor_drag_coeff, p.pivot_height, p.arm_length);
    #[rustfmt::skip]
    let a = Matrix4::new(
        mu,                       mu,                       mu,                       mu,
        -h*mu*u2 + ka*u1,         -h*mu*u2 - d*mu*u3 - ka*u1, -h*mu*u2 + ka*u1,       -h*mu*u2 + d*mu*u3 - ka*u1,
        h*mu*u1 - d*mu*u3 + ka*u2, h*mu*u1 - ka*u2,          h*mu*u1 + d*mu*u3 + ka*u2, h*mu*u1 - ka*u2,
        d*mu*u2 + ka*u3,          d*mu*u1 - ka*u3,          -d*mu*u2 + ka*u3,         -d*mu*u1 - ka*u3,
    );
    Ok(a)
}

/// `8 kappa d^2 mu^3 u3`.
pub fn allocation_determinant(u: &UnitVec3, p: &VehicleParams) -> f64 {
    8.0 * p.rotor_drag_coeff * p.arm_length.powi(2) * p.rotor_thrust_coeff.powi(3) * u.z
}

pub fn forward(speeds_sq: &[f64; 4], u: &UnitVec3, p: &VehicleParams) -> Result<(f64, Vec3), AllocationError> {
    let w = build_allocation_matrix(u, p)? * Vector4::from(*speeds_sq);
    Ok((w[0], Vec3::new(w[1], w[2], w[3])))
}

/// Solves for squared rotor speeds. Out-of-range entries are clamped
/// componentwise; the reported wrench is always the forward map of the
/// emitted speeds.
pub fn allocate(
    thrust: f64,
    torque: &Vec3,
    u: &UnitVec3,
    p: &VehicleParams,
    limits: &RotorLimits,
) -> Result<RotorCommand, AllocationError> {
    let a = build_allocation_matrix(u, p)?;
    let demand = Vector4::new(thrust, torque.x, torque.y, torque.z);
    let raw = a
        .lu()
        .solve(&demand)
        .ok_or(AllocationError::Singular(u.z))?;

    let upper = limits.max_speed_sq.unwrap_or(f64::INFINITY);
    let mut speeds_sq = [0.0; 4];
    let mut clip = [0.0; 4];
    for i in 0..4 {
        speeds_sq[i] = raw[i].clamp(0.0, upper);
        clip[i] = raw[i] - speeds_sq[i];
    }
    let achieved = a * Vector4::from(speeds_sq);
    Ok(RotorCommand {
        speeds_sq,
        feasible: clip.iter().all(|&c| c == 0.0),
        clip,
        thrust: achieved[0],
        torque: Vec3::new(achieved[1], achieved[2], achieved[3]),
    })
}
