//! Angular-velocity tracking loop.

use super::Gains;
use crate::geom::{Mat3, Vec3};
use crate::plant::VehicleState;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerLoopMode {
    /// `-Gamma_e + I w*' + w x I w* - k_w I (w - w*)`: the error obeys
    /// `I e' = -w x I e - k_w I e`, so `|e|_I` decays at rate `k_w` whenever
    /// the gyroscopic coupling vanishes (e.g. rotation about a principal axis).
    Full,
    /// `-k_w I (w - w*) + w x I w*`, without feedforward.
    #[default]
    PaperSim,
}

/// Body torque demand. `omega_cmd_rate` and `parasitic_estimate` are only
/// used in `Full` mode and default to zero when absent.
pub fn inner_torque(
    state: &VehicleState,
    omega_cmd: &Vec3,
    omega_cmd_rate: Option<&Vec3>,
    parasitic_estimate: Option<&Vec3>,
    inertia: &Mat3,
    gains: &Gains,
    mode: InnerLoopMode,
) -> Vec3 {
    let w = state.angular_velocity;
    let feedback = inertia * (w - omega_cmd) * (-gains.k_omega) + w.cross(&(inertia * omega_cmd));
    match mode {
        InnerLoopMode::PaperSim => feedback,
        InnerLoopMode::Full => {
            let zero = Vec3::zeros();
            feedback + inertia * omega_cmd_rate.unwrap_or(&zero) - parasitic_estimate.unwrap_or(&zero)
        }
    }
}
