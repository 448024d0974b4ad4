//! Saturated tilt law and the resulting body angular-velocity command.

use super::{ControllerError, Gains, PrimaryCommand, SecondaryCommand};
use crate::geom::{sat, Vec2, Vec3};
use crate::plant::{VehicleParams, VehicleState, TILT_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltCommand {
    /// Commanded rate of the body-frame thrust direction, tangent to the sphere.
    pub tilt_rate: Vec3,
    /// Angular velocity of `u` relative to the body, body coordinates.
    pub tilt_omega: Vec3,
    /// Body angular-velocity command, rad/s.
    pub omega: Vec3,
    /// Inertial angular velocity of `u` demanded by the primary law, body
    /// coordinates, projected orthogonal to `u`.
    pub tilt_rate_inertial_body: Vec3,
    /// Tilt rate that would realize the secondary command exactly.
    pub unconstrained_tilt_rate: Vec3,
    /// The tilt limit was active.
    pub saturated: bool,
}

/// Splits the primary demand between tilting the thrust and rotating the
/// body. The tilt rate keeps `|u12| <= delta`; the body command absorbs
/// whatever the tilt cannot deliver so that the thrust direction always
/// moves as the primary law requires.
pub fn tilt_and_omega(
    state: &VehicleState,
    primary: &PrimaryCommand,
    secondary: &SecondaryCommand,
    gains: &Gains,
    params: &VehicleParams,
) -> Result<TiltCommand, ControllerError> {
    let u = state.thrust_dir.into_inner();
    let u12 = state.thrust_dir.xy();
    let delta = params.tilt_limit;
    if u12.norm() > delta + TILT_TOL {
        return Err(ControllerError::TiltOutsideLimit(u12.norm()));
    }

    let w_ui = state.attitude.to_body(&primary.tilt_rate_inertial);
    let w_ui = w_ui - u * u.dot(&w_ui);
    let w_star = secondary.omega;
    let w_star_axial = u * u.dot(&w_star);

    let desired = w_ui - (w_star - w_star_axial);
    let u_dot_star = desired.cross(&u);
    let star12 = u_dot_star.xy();
    let k_u = gains.k_u;
    let target = u12 + star12 / k_u;
    let saturated = target.norm() > delta;

    let u_dot = if saturated {
        let d12: Vec2 = (sat(&target, delta) - u12) * k_u;
        Vec3::new(d12.x, d12.y, -u12.dot(&d12) / u.z)
    } else {
        u_dot_star
    };
    let tilt_omega = u.cross(&u_dot);
    let omega = w_ui - tilt_omega + w_star_axial;

    Ok(TiltCommand {
        tilt_rate: u_dot,
        tilt_omega,
        omega,
        tilt_rate_inertial_body: w_ui,
        unconstrained_tilt_rate: u_dot_star,
        saturated,
    })
}

/// `|w_ui - (w_ub + omega - u (u . omega))|`, zero when the thrust direction
/// moves exactly as demanded.
pub fn priority_residual(state: &VehicleState, cmd: &TiltCommand) -> f64 {
    let u = state.thrust_dir.into_inner();
    let w = cmd.omega;
    (cmd.tilt_rate_inertial_body - (cmd.tilt_omega + w - u * u.dot(&w))).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Rotation, UnitVec3};
    use crate::plant::thrust_dir_from_xy;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn primary_with(w_inertial: Vec3) -> PrimaryCommand {
        PrimaryCommand {
            thrust_bar: 14.7,
            thrust: 14.7,
            tilt_rate_inertial: w_inertial,
            thrust_ref: 14.7,
            dir_ref: UnitVec3::E3,
            thrust_ref_rate: 0.0,
            dir_ref_rate: Vec3::zeros(),
            velocity_error: Vec3::zeros(),
            lyapunov: 0.0,
            lyapunov_rate: 0.0,
            integrator_accel: Vec3::zeros(),
        }
    }

    fn secondary_with(w: Vec3) -> SecondaryCommand {
        SecondaryCommand { omega: w, clamped: false }
    }

    fn state_with(rv: [f64; 3], u12: Vec2) -> VehicleState {
        VehicleState {
            attitude: Rotation::exp(&Vec3::from(rv)),
            thrust_dir: thrust_dir_from_xy(u12).unwrap(),
            ..VehicleState::at_rest(Vec3::zeros())
        }
    }

    #[test]
    fn yaw_only_secondary_passes_through() {
        let p = VehicleParams::reference_quadrotor();
        let s = VehicleState::at_rest(Vec3::zeros());
        let cmd = tilt_and_omega(
            &s,
            &primary_with(Vec3::zeros()),
            &secondary_with(Vec3::new(0.0, 0.0, 1.3)),
            &Gains::default(),
            &p,
        )
        .unwrap();
        assert_eq!(cmd.tilt_rate, Vec3::zeros());
        assert_eq!(cmd.omega, Vec3::new(0.0, 0.0, 1.3));
        assert!(!cmd.saturated);
    }

    #[test]
    fn boundary_never_pushes_outward() {
        let p = VehicleParams::reference_quadrotor();
        let d = p.tilt_limit;
        let s = state_with([0.0; 3], Vec2::new(d, 0.0));
        // secondary wants to tilt u further along +x in body
        let cmd = tilt_and_omega(
            &s,
            &primary_with(Vec3::zeros()),
            &secondary_with(Vec3::new(0.0, -5.0, 0.0)),
            &Gains::default(),
            &p,
        )
        .unwrap();
        assert!(cmd.unconstrained_tilt_rate.x > 0.0);
        assert!(cmd.saturated);
        assert!(cmd.tilt_rate.x <= 1e-12);
    }

    #[test]
    fn outside_cone_rejected() {
        let p = VehicleParams::reference_quadrotor();
        let s = state_with([0.0; 3], Vec2::new(0.6, 0.0));
        assert!(matches!(
            tilt_and_omega(&s, &primary_with(Vec3::zeros()), &secondary_with(Vec3::zeros()), &Gains::default(), &p),
            Err(ControllerError::TiltOutsideLimit(_))
        ));
    }

    proptest! {
        #[test]
        fn priority_identity_holds(
            rv in prop::array::uniform3(-2.0f64..2.0),
            r in 0.0f64..0.5, a in 0.0f64..std::f64::consts::TAU,
            wi in prop::array::uniform3(-20.0f64..20.0),
            ws in prop::array::uniform3(-20.0f64..20.0),
        ) {
            let p = VehicleParams::reference_quadrotor();
            let s = state_with(rv, Vec2::new(r * a.cos(), r * a.sin()));
            let u_i = s.thrust_dir_inertial();
            let wi = Vec3::from(wi);
            let wi = wi - u_i * u_i.dot(&wi);
            let cmd = tilt_and_omega(&s, &primary_with(wi), &secondary_with(Vec3::from(ws)), &Gains::default(), &p).unwrap();
            prop_assert!(priority_residual(&s, &cmd) <= 1e-12);
            prop_assert!(cmd.tilt_rate.dot(&s.thrust_dir) .abs() <= 1e-12 * (1.0 + cmd.tilt_rate.norm()));
            // one explicit Euler step at dt = 1/k_u stays inside the cone
            let next = s.thrust_dir.xy() + cmd.tilt_rate.xy() / Gains::default().k_u;
            prop_assert!(next.norm() <= p.tilt_limit + 1e-12);
        }

        #[test]
        fn unsaturated_is_transparent(
            rv in prop::array::uniform3(-2.0f64..2.0),
            r in 0.0f64..0.3, a in 0.0f64..std::f64::consts::TAU,
            ws in prop::array::uniform3(-0.5f64..0.5),
        ) {
            let p = VehicleParams::reference_quadrotor();
            let s = state_with(rv, Vec2::new(r * a.cos(), r * a.sin()));
            let ws = Vec3::from(ws);
            let cmd = tilt_and_omega(&s, &primary_with(Vec3::zeros()), &secondary_with(ws), &Gains::default(), &p).unwrap();
            prop_assume!(!cmd.saturated);
            assert_relative_eq!(cmd.omega, ws, epsilon = 1e-12);
            prop_assert_eq!(cmd.tilt_rate, cmd.unconstrained_tilt_rate);
        }
    }
}
