use super::SimError;
use crate::allocation::RotorLimits;
use crate::controller::{ControllerConfig, PrimaryMode, SecondaryObjective};
use crate::geom::{Rotation, UnitVec3, Vec3};
use crate::plant::{Environment, VehicleParams, VehicleState, MAX_STEP};
use crate::reference::Trajectory;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Initial vehicle state as written in a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialState {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    /// Rotation vector of the body-to-inertial attitude, rad.
    pub attitude: [f64; 3],
    pub angular_velocity: [f64; 3],
    /// Thrust direction in body coordinates; normalized on load.
    pub thrust_dir: [f64; 3],
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState {
            position: [0.0; 3],
            velocity: [0.0; 3],
            attitude: [0.0; 3],
            angular_velocity: [0.0; 3],
            thrust_dir: [0.0, 0.0, 1.0],
        }
    }
}

impl InitialState {
    pub fn to_state(&self) -> Option<VehicleState> {
        Some(VehicleState {
            position: Vec3::from(self.position),
            velocity: Vec3::from(self.velocity),
            attitude: Rotation::exp(&Vec3::from(self.attitude)),
            angular_velocity: Vec3::from(self.angular_velocity),
            thrust_dir: UnitVec3::normalize(Vec3::from(self.thrust_dir))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Telemetry CSV; none disables file output.
    pub csv: Option<PathBuf>,
    /// Keep one telemetry row every `csv_decimate` steps.
    pub csv_decimate: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            csv: None,
            csv_decimate: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub controller: ControllerConfig,
    pub trajectory: Trajectory,
    #[serde(default)]
    pub initial: InitialState,
    /// s
    pub duration: f64,
    /// Integration step, s.
    pub dt: f64,
    /// The controller runs every `control_decimation` plant steps.
    #[serde(default = "one")]
    pub control_decimation: usize,
    #[serde(default)]
    pub environment: Environment,
    #[serde(default)]
    pub rotor_limits: RotorLimits,
    #[serde(default)]
    pub output: OutputConfig,
    /// Start of the steady-state window used by the metrics, s.
    #[serde(default = "default_transient")]
    pub transient: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

fn default_transient() -> f64 {
    5.0
}

impl ScenarioConfig {
    /// Figure-eight tracking at `frequency` rad/s with the reference vehicle,
    /// starting level at `0.5 j` with the velocity of the reference's
    /// horizontal part at `t = 0`.
    pub fn figure_eight(frequency: f64, duration: f64) -> Self {
        ScenarioConfig {
            vehicle: VehicleParams::reference_quadrotor(),
            controller: ControllerConfig {
                primary: PrimaryMode::Position,
                secondary: SecondaryObjective::Attitude { target: [0.0; 3] },
                ..ControllerConfig::default()
            },
            trajectory: Trajectory::Lissajous {
                frequency,
                amplitude: crate::reference::LISSAJOUS_AMPLITUDE,
            },
            initial: InitialState {
                position: [0.0, 0.5, 0.0],
                velocity: [5.0 * frequency, 10.0 * frequency, 0.0],
                ..InitialState::default()
            },
            duration,
            dt: 1e-3,
            control_decimation: 1,
            environment: Environment::calm(),
            rotor_limits: RotorLimits::default(),
            output: OutputConfig::default(),
            transient: default_transient(),
            seed: 0,
        }
    }

    /// Slow figure eight (15 s lap) that stays inside the tilt limit.
    pub fn paper_sim1() -> Self {
        Self::figure_eight(2.0 * PI / 15.0, 30.0)
    }

    /// Fast figure eight (10 s lap) that drives the tilt into saturation.
    pub fn paper_sim2() -> Self {
        Self::figure_eight(PI / 5.0, 30.0)
    }

    /// Every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self.vehicle.violations().into_iter().map(|m| format!("vehicle.{m}")).collect();
        out.extend(self.controller.violations());
        out.extend(self.trajectory.violations());
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            out.push("duration must be > 0".into());
        }
        if !(self.dt > 0.0 && self.dt <= MAX_STEP) {
            out.push(format!("dt must lie in (0, {MAX_STEP}]"));
        }
        if self.control_decimation == 0 {
            out.push("control_decimation must be >= 1".into());
        }
        let control_dt = self.dt * self.control_decimation as f64;
        if self.controller.gains.k_u * control_dt > 1.0 {
            out.push(format!(
                "gains.k_u * control period = {} must be <= 1 for the tilt limit to hold",
                self.controller.gains.k_u * control_dt
            ));
        }
        if self.output.csv_decimate == 0 {
            out.push("output.csv_decimate must be >= 1".into());
        }
        if !self.environment.is_finite() {
            out.push("environment.wind must be finite".into());
        }
        if !(self.transient >= 0.0) {
            out.push("transient must be >= 0".into());
        }
        if let Some(limit) = self.rotor_limits.max_speed_sq {
            if !(limit > 0.0) {
                out.push("rotor_limits.max_speed_sq must be > 0".into());
            }
        }
        match self.initial.to_state() {
            None => out.push("initial.thrust_dir must be a non-zero finite vector".into()),
            Some(s) => out.extend(
                s.violations(self.vehicle.tilt_limit)
                    .into_iter()
                    .map(|m| format!("initial state: {m}")),
            ),
        }
        out
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(v))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario configs always serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}

/// Reads and validates a TOML scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, SimError> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg = ScenarioConfig::from_toml(&text).map_err(|message| SimError::Parse {
        path: path.to_path_buf(),
        message,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn save_config(cfg: &ScenarioConfig, path: &Path) -> Result<(), SimError> {
    std::fs::write(path, cfg.to_toml()).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid() {
        assert!(ScenarioConfig::paper_sim1().violations().is_empty());
        assert!(ScenarioConfig::paper_sim2().violations().is_empty());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ScenarioConfig::paper_sim2();
        cfg.output.csv = Some("out/run.csv".into());
        cfg.controller.secondary = SecondaryObjective::Direction {
            target: [0.0, 0.1, 1.0],
            yaw_rate: 0.2,
        };
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = ScenarioConfig::paper_sim1().to_toml();
        text.push_str("\n[extra]\nfoo = 1\n");
        assert!(ScenarioConfig::from_toml(&text).is_err());
        let text = ScenarioConfig::paper_sim1().to_toml().replace("duration", "durration");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn all_violations_listed() {
        let mut cfg = ScenarioConfig::paper_sim1();
        cfg.duration = -1.0;
        cfg.dt = 0.07;
        cfg.vehicle.mass = 0.0;
        cfg.initial.thrust_dir = [1.0, 0.0, 0.2];
        let v = cfg.violations();
        assert_eq!(v.len(), 5, "{v:#?}");
        assert!(v.iter().any(|m| m.contains("k_u")));
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let text = r#"
            duration = 2.0
            dt = 0.001
            [vehicle]
            mass = 1.5
            inertia = [0.028, 0.028, 0.06]
            pivot_height = 0.0
            arm_length = 0.2
            rotor_thrust_coeff = 1e-5
            rotor_drag_coeff = 1e-6
            body_drag_coeff = 0.0
            induced_drag_coeff = 0.0
            tilt_limit = 0.5
            gravity = 9.81
            [trajectory]
            kind = "hover"
            position = [0.0, 0.0, -1.0]
        "#;
        let cfg = ScenarioConfig::from_toml(text).unwrap();
        assert!(cfg.violations().is_empty());
        assert_eq!(cfg.controller, ControllerConfig::default());
        assert_eq!(cfg.transient, 5.0);
    }
}
