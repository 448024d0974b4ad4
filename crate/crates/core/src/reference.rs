//! Reference trajectories with analytic derivatives up to jerk.

use crate::geom::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub jerk: Vec3,
}

/// Trajectory providers selectable from a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Trajectory {
    /// Horizontal figure eight `(A sin(w t), A sin(2 w t), 0)`.
    Lissajous {
        /// rad/s
        frequency: f64,
        /// m
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    Hover {
        position: [f64; 3],
    },
    ConstantVelocity {
        velocity: [f64; 3],
        #[serde(default)]
        start: [f64; 3],
    },
}

fn default_amplitude() -> f64 {
    LISSAJOUS_AMPLITUDE
}

pub const LISSAJOUS_AMPLITUDE: f64 = 5.0;

impl Trajectory {
    pub fn sample(&self, t: f64) -> ReferenceSample {
        match *self {
            Trajectory::Lissajous { frequency, amplitude } => lissajous(t, frequency, amplitude),
            Trajectory::Hover { position } => hover(Vec3::from(position)),
            Trajectory::ConstantVelocity { velocity, start } => {
                constant_velocity(t, Vec3::from(start), Vec3::from(velocity))
            }
        }
    }

    pub fn violations(&self) -> Vec<String> {
        match *self {
            Trajectory::Lissajous { frequency, amplitude } => {
                let mut v = Vec::new();
                if !(frequency > 0.0 && frequency.is_finite()) {
                    v.push("trajectory.frequency must be > 0".into());
                }
                if !amplitude.is_finite() {
                    v.push("trajectory.amplitude must be finite".into());
                }
                v
            }
            Trajectory::Hover { position } => finite_or("trajectory.position", &position),
            Trajectory::ConstantVelocity { velocity, start } => {
                let mut v = finite_or("trajectory.velocity", &velocity);
                v.extend(finite_or("trajectory.start", &start));
                v
            }
        }
    }
}

fn finite_or(name: &str, xs: &[f64; 3]) -> Vec<String> {
    if xs.iter().all(|x| x.is_finite()) {
        Vec::new()
    } else {
        vec![format!("{name} must be finite")]
    }
}

pub fn lissajous(t: f64, frequency: f64, amplitude: f64) -> ReferenceSample {
    let (w, a) = (frequency, amplitude);
    let (s1, c1) = (w * t).sin_cos();
    let (s2, c2) = (2.0 * w * t).sin_cos();
    ReferenceSample {
        position: Vec3::new(a * s1, a * s2, 0.0),
        velocity: Vec3::new(a * w * c1, 2.0 * a * w * c2, 0.0),
        acceleration: Vec3::new(-a * w * w * s1, -4.0 * a * w * w * s2, 0.0),
        jerk: Vec3::new(-a * w.powi(3) * c1, -8.0 * a * w.powi(3) * c2, 0.0),
    }
}

pub fn hover(position: Vec3) -> ReferenceSample {
    ReferenceSample {
        position,
        velocity: Vec3::zeros(),
        acceleration: Vec3::zeros(),
        jerk: Vec3::zeros(),
    }
}

pub fn constant_velocity(t: f64, start: Vec3, velocity: Vec3) -> ReferenceSample {
    ReferenceSample {
        position: start + velocity * t,
        velocity,
        acceleration: Vec3::zeros(),
        jerk: Vec3::zeros(),
    }
}
