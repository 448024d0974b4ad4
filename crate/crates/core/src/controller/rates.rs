use crate::geom::{UnitVec3, Vec3};
use serde::{Deserialize, Serialize};

/// How the rates of the thrust target `(T_r, u_r)` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSource {
    /// First-order filtered finite differences of successive samples.
    #[default]
    Filtered,
    /// Chain rule through the model, the reference jerk and the current
    /// acceleration. Exact when the model is.
    Analytic,
}

/// Filtered finite differences of `T_r` and `u_r`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateFilter {
    last: Option<(f64, Vec3)>,
    thrust_rate: f64,
    dir_rate: Vec3,
}

impl RateFilter {
    /// Feeds a new sample and returns the updated filter with `(dT_r/dt,
    /// du_r/dt)`. The first sample yields zero rates; the direction rate is
    /// projected onto the tangent plane at `u_r`.
    pub fn estimate(&self, thrust_ref: f64, dir_ref: &UnitVec3, dt: f64, tau: f64) -> (RateFilter, f64, Vec3) {
        let Some((last_thrust, last_dir)) = self.last else {
            let next = RateFilter {
                last: Some((thrust_ref, dir_ref.into_inner())),
                thrust_rate: 0.0,
                dir_rate: Vec3::zeros(),
            };
            return (next, 0.0, Vec3::zeros());
        };
        let alpha = dt / (tau + dt);
        let raw_thrust = (thrust_ref - last_thrust) / dt;
        let raw_dir = (dir_ref.into_inner() - last_dir) / dt;
        let next = RateFilter {
            last: Some((thrust_ref, dir_ref.into_inner())),
            thrust_rate: self.thrust_rate + alpha * (raw_thrust - self.thrust_rate),
            dir_rate: self.dir_rate + (raw_dir - self.dir_rate) * alpha,
        };
        let tangent = next.dir_rate - dir_ref.into_inner() * dir_ref.dot(&next.dir_rate);
        (next, next.thrust_rate, tangent)
    }
}

/// Same filter for a free vector. State is `(last sample, estimate)`.
pub(crate) fn filtered_vector_rate(
    state: Option<(Vec3, Vec3)>,
    value: Vec3,
    dt: f64,
    tau: f64,
) -> ((Vec3, Vec3), Vec3) {
    match state {
        None => ((value, Vec3::zeros()), Vec3::zeros()),
        Some((last, est)) => {
            let alpha = dt / (tau + dt);
            let est = est + ((value - last) / dt - est) * alpha;
            ((value, est), est)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_call_is_zero_and_constants_decay() {
        let f = RateFilter::default();
        let u = UnitVec3::E3;
        let (mut f, tr, ur) = f.estimate(14.7, &u, 1e-3, 0.02);
        assert_eq!((tr, ur), (0.0, Vec3::zeros()));
        for _ in 0..100 {
            let (g, tr, ur) = f.estimate(14.7, &u, 1e-3, 0.02);
            assert_eq!((tr, ur), (0.0, Vec3::zeros()));
            f = g;
        }
    }

    #[test]
    fn ramp_is_tracked_within_two_percent_after_five_tau() {
        let (dt, tau) = (1e-3, 0.02);
        let mut f = RateFilter::default();
        let mut rate = 0.0;
        let n = (5.0 * tau / dt) as usize + 1;
        for k in 0..=n {
            let t = k as f64 * dt;
            let (g, r, _) = f.estimate(10.0 + t, &UnitVec3::E3, dt, tau);
            f = g;
            rate = r;
        }
        assert!((rate - 1.0).abs() < 0.02, "rate = {rate}");
    }

    #[test]
    fn direction_rate_is_tangent() {
        let (dt, tau) = (1e-3, 0.02);
        let mut f = RateFilter::default();
        for k in 0..200 {
            let a = 0.8 * k as f64 * dt;
            let u = UnitVec3::new(Vec3::new(a.sin(), 0.0, a.cos())).unwrap();
            let (g, _, ur) = f.estimate(10.0, &u, dt, tau);
            f = g;
            assert!(u.dot(&ur).abs() < 1e-6);
            if k == 199 {
                // rotating at 0.8 rad/s about y
                assert_relative_eq!(ur.norm(), 0.8, max_relative = 0.05);
            }
        }
    }

    #[test]
    fn vector_filter_tracks_ramp() {
        let mut s = None;
        let mut rate = Vec3::zeros();
        for k in 0..300 {
            let (ns, r) = filtered_vector_rate(s, Vec3::new(2.0, -1.0, 0.5) * (k as f64 * 1e-3), 1e-3, 0.02);
            s = Some(ns);
            rate = r;
        }
        assert_relative_eq!(rate, Vec3::new(2.0, -1.0, 0.5), max_relative = 1e-3);
    }
}
