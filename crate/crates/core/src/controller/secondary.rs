//! Secondary objective: body angular velocity that would stabilize a body
//! direction or a full attitude if the thrust tilt were unlimited.

use super::{ControllerError, Gains, Tolerances};
use crate::geom::{rotation_error_vector, Rotation, UnitVec3, Vec3};
use crate::plant::VehicleState;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SecondaryObjective {
    /// Align body `k` with an inertial direction; `yaw_rate` drives the
    /// free rotation about `k`.
    Direction {
        target: [f64; 3],
        #[serde(default)]
        yaw_rate: f64,
    },
    /// Full attitude, given as a rotation vector (zero = level, north).
    Attitude {
        #[serde(default)]
        target: [f64; 3],
    },
}

impl Default for SecondaryObjective {
    fn default() -> Self {
        SecondaryObjective::Attitude { target: [0.0; 3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondaryCommand {
    /// Body coordinates, rad/s.
    pub omega: Vec3,
    /// The attitude law hit its rate clamp.
    pub clamped: bool,
}

impl SecondaryObjective {
    pub fn command(&self, state: &VehicleState, gains: &Gains, tol: &Tolerances) -> Result<SecondaryCommand, ControllerError> {
        match *self {
            SecondaryObjective::Direction { target, yaw_rate } => {
                // validated at config load
                let eta = UnitVec3::normalize(Vec3::from(target)).unwrap_or(UnitVec3::E3);
                secondary_direction(state, &eta, yaw_rate, gains, tol)
            }
            SecondaryObjective::Attitude { target } => {
                secondary_attitude(state, &Rotation::exp(&Vec3::from(target)), gains, tol)
            }
        }
    }

    pub fn violations(&self) -> Vec<String> {
        match *self {
            SecondaryObjective::Direction { target, yaw_rate } => {
                let mut v = Vec::new();
                if UnitVec3::normalize(Vec3::from(target)).is_none() {
                    v.push("secondary.target must be a non-zero finite vector".into());
                }
                if !yaw_rate.is_finite() {
                    v.push("secondary.yaw_rate must be finite".into());
                }
                v
            }
            SecondaryObjective::Attitude { target } => {
                if target.iter().all(|c| c.is_finite()) {
                    Vec::new()
                } else {
                    vec!["secondary.target must be finite".into()]
                }
            }
        }
    }
}

/// `omega* = k4 / (1 + k.eta)^2 k x eta + lambda k`, body coordinates.
pub fn secondary_direction(
    state: &VehicleState,
    eta: &UnitVec3,
    yaw_rate: f64,
    gains: &Gains,
    tol: &Tolerances,
) -> Result<SecondaryCommand, ControllerError> {
    let eta_body = state.attitude.to_body(eta);
    let align = eta_body.z;
    if align <= -1.0 + tol.antipodal_margin {
        return Err(ControllerError::AntipodalSecondary(align));
    }
    let k = Vec3::z();
    Ok(SecondaryCommand {
        omega: k.cross(&eta_body) * (gains.k4 / (1.0 + align).powi(2)) + k * yaw_rate,
        clamped: false,
    })
}

/// `omega* = -k4 tan(theta/2) nu`, body coordinates, clamped in norm.
pub fn secondary_attitude(
    state: &VehicleState,
    target: &Rotation,
    gains: &Gains,
    tol: &Tolerances,
) -> Result<SecondaryCommand, ControllerError> {
    let err = rotation_error_vector(&state.attitude, target);
    if err.angle >= std::f64::consts::PI - tol.attitude_margin {
        return Err(ControllerError::NearAntipodalAttitude(err.angle));
    }
    let omega = err.axis.into_inner() * (-gains.k4 * (err.angle / 2.0).tan());
    let norm = omega.norm();
    if norm > tol.max_secondary_rate {
        Ok(SecondaryCommand {
            omega: omega * (tol.max_secondary_rate / norm),
            clamped: true,
        })
    } else {
        Ok(SecondaryCommand { omega, clamped: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn with_attitude(r: Rotation) -> VehicleState {
        VehicleState {
            attitude: r,
            ..VehicleState::at_rest(Vec3::zeros())
        }
    }

    #[test]
    fn direction_aligned_is_pure_yaw() {
        let g = Gains::default();
        let r = Rotation::exp(&Vec3::new(0.2, -0.4, 0.9));
        let s = with_attitude(r);
        let eta = UnitVec3::normalize(r.k()).unwrap();
        let cmd = secondary_direction(&s, &eta, 0.7, &g, &Tolerances::default()).unwrap();
        assert_relative_eq!(cmd.omega, Vec3::new(0.0, 0.0, 0.7), epsilon = 1e-12);
    }

    #[test]
    fn direction_orthogonal_has_unit_gain() {
        let g = Gains::default();
        let s = with_attitude(Rotation::identity());
        let cmd = secondary_direction(&s, &UnitVec3::E1, 0.0, &g, &Tolerances::default()).unwrap();
        assert_relative_eq!(cmd.omega.norm(), g.k4, epsilon = 1e-12);
    }

    #[test]
    fn direction_antipodal_rejected() {
        let s = with_attitude(Rotation::identity());
        let eta = UnitVec3::normalize(-Vec3::z()).unwrap();
        assert!(matches!(
            secondary_direction(&s, &eta, 0.0, &Gains::default(), &Tolerances::default()),
            Err(ControllerError::AntipodalSecondary(_))
        ));
    }

    #[test]
    fn attitude_cases() {
        let g = Gains::default();
        let tol = Tolerances::default();
        let r_d = Rotation::exp(&Vec3::new(0.1, 0.2, -0.3));
        let cmd = secondary_attitude(&with_attitude(r_d), &r_d, &g, &tol).unwrap();
        assert_eq!(cmd.omega, Vec3::zeros());

        let quarter = r_d.compose(&Rotation::from_axis_angle(&UnitVec3::E1, FRAC_PI_2));
        let cmd = secondary_attitude(&with_attitude(quarter), &r_d, &g, &tol).unwrap();
        assert_relative_eq!(cmd.omega.norm(), g.k4, epsilon = 1e-12);
        assert_relative_eq!(cmd.omega, Vec3::new(-g.k4, 0.0, 0.0), epsilon = 1e-12);

        let axis = UnitVec3::normalize(Vec3::new(1.0, -1.0, 2.0)).unwrap();
        let small = r_d.compose(&Rotation::from_axis_angle(&axis, 1e-4));
        let cmd = secondary_attitude(&with_attitude(small), &r_d, &g, &tol).unwrap();
        let linear = axis.into_inner() * (-g.k4 / 2.0 * 1e-4);
        assert!((cmd.omega - linear).norm() < 1e-9 * linear.norm());
    }

    #[test]
    fn attitude_near_pi_clamps_then_errors() {
        let g = Gains::default();
        let tol = Tolerances::default();
        // tan(theta/2) * k4 = 50 at theta ~ 2.94
        let big = Rotation::from_axis_angle(&UnitVec3::E2, 3.0);
        let cmd = secondary_attitude(&with_attitude(big), &Rotation::identity(), &g, &tol).unwrap();
        assert!(cmd.clamped);
        assert_relative_eq!(cmd.omega.norm(), tol.max_secondary_rate, epsilon = 1e-12);

        let flipped = Rotation::from_axis_angle(&UnitVec3::E2, PI - 1e-4);
        assert!(matches!(
            secondary_attitude(&with_attitude(flipped), &Rotation::identity(), &g, &tol),
            Err(ControllerError::NearAntipodalAttitude(_))
        ));
    }

    proptest! {
        #[test]
        fn direction_command_turns_k_toward_eta(
            rv in prop::array::uniform3(-2.0f64..2.0),
            dir in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let s = with_attitude(Rotation::exp(&Vec3::from(rv)));
            let eta = UnitVec3::normalize(Vec3::from(dir));
            prop_assume!(eta.is_some());
            let eta = eta.unwrap();
            let eta_b = s.attitude.to_body(&eta);
            prop_assume!(eta_b.z > -0.99);
            let cmd = secondary_direction(&s, &eta, 0.0, &Gains::default(), &Tolerances::default()).unwrap();
            prop_assert!(cmd.omega.dot(&Vec3::z().cross(&eta_b)) >= 0.0);
            // d/dt (k . eta) = (omega x k) . eta_b >= 0
            prop_assert!(cmd.omega.cross(&Vec3::z()).dot(&eta_b) >= -1e-12);
        }
    }
}
