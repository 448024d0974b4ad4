use super::{ScenarioConfig, SimError, TelemetryLog, TelemetryRow};
use crate::allocation::{allocate, RotorCommand};
use crate::controller::{priority_residual, ControlOutput, Controller};
use crate::geom::Vec3;
use crate::plant::{Plant, PlantInput};
use crate::reference::Trajectory;

/// Runs a scenario. On failure the error carries the log recorded so far.
pub fn run(cfg: &ScenarioConfig) -> Result<TelemetryLog, SimError> {
    cfg.validate()?;
    let plant = Plant::new(cfg.vehicle.clone()).map_err(|source| SimError::Plant {
        t: 0.0,
        source,
        partial: Box::default(),
    })?;
    let mut controller = Controller::new(cfg.controller, cfg.vehicle.clone());
    let mut state = cfg.initial.to_state().expect("validated");
    let env = cfg.environment;

    let mut log = TelemetryLog {
        rows: Vec::new(),
        diagnostics: Default::default(),
        transient: cfg.transient,
        lap_period: match cfg.trajectory {
            Trajectory::Lissajous { frequency, .. } => Some(std::f64::consts::TAU / frequency),
            _ => None,
        },
    };
    let steps = (cfg.duration / cfg.dt).round() as usize;
    let decimation = cfg.control_decimation;
    let control_dt = cfg.dt * decimation as f64;
    let mut held: Option<(ControlOutput, RotorCommand)> = None;

    for n in 0..=steps {
        let t = n as f64 * cfg.dt;
        let reference = cfg.trajectory.sample(t);
        if n % decimation == 0 {
            let out = match controller.update(t, control_dt, &state, &reference, &env) {
                Ok(out) => out,
                Err(source) => {
                    return Err(SimError::Controller {
                        t,
                        source,
                        partial: Box::new(log),
                    })
                }
            };
            let rotors = match allocate(
                out.primary.thrust,
                &out.torque,
                &state.thrust_dir,
                &cfg.vehicle,
                &cfg.rotor_limits,
            ) {
                Ok(r) => r,
                Err(source) => {
                    return Err(SimError::Allocation {
                        t,
                        source,
                        partial: Box::new(log),
                    })
                }
            };
            let d = &mut log.diagnostics;
            d.max_priority_residual = d.max_priority_residual.max(priority_residual(&state, &out.tilt));
            d.max_integrator = d.max_integrator.max(controller.state().z.norm());
            held = Some((out, rotors));
        }
        let (out, rotors) = held.expect("controller runs on the first step");

        let d = &mut log.diagnostics;
        d.steps += 1;
        d.max_unit_drift = d.max_unit_drift.max((state.thrust_dir.norm() - 1.0).abs());
        d.max_tilt_sin = d.max_tilt_sin.max(state.thrust_dir.xy().norm());
        if n % cfg.output.csv_decimate == 0 || n == steps {
            let e = state.position - reference.position;
            let ev = state.velocity - reference.velocity;
            log.rows.push(TelemetryRow {
                t,
                position: state.position.into(),
                position_ref: reference.position.into(),
                position_error: e.into(),
                velocity: state.velocity.into(),
                velocity_error: ev.into(),
                tilt_deg: state.tilt_angle().to_degrees(),
                inclination_deg: state.inclination().to_degrees(),
                thrust: rotors.thrust,
                torque: rotors.torque.into(),
                speeds_sq: rotors.speeds_sq,
                lyapunov: out.primary.lyapunov,
                lyapunov_rate: out.primary.lyapunov_rate,
                saturated: out.tilt.saturated,
                feasible: rotors.feasible,
            });
        }
        if n == steps {
            break;
        }

        // a held tilt rate keeps its u12 part; u3 follows the current u
        let u = state.thrust_dir;
        let r12 = out.tilt.tilt_rate.xy();
        let input = PlantInput {
            thrust: rotors.thrust,
            torque: rotors.torque,
            tilt_rate: Vec3::new(r12.x, r12.y, -u.xy().dot(&r12) / u.z),
        };
        state = match plant.step(&state, &input, &env, t, cfg.dt) {
            Ok(s) => s,
            Err(source) => {
                return Err(SimError::Plant {
                    t,
                    source,
                    partial: Box::new(log),
                })
            }
        };
    }
    Ok(log)
}

/// Runs a scenario and writes its CSV (if configured), also after a
/// failure so the partial trajectory can be inspected.
pub fn run_to_files(cfg: &ScenarioConfig) -> Result<TelemetryLog, SimError> {
    let result = run(cfg);
    if let Some(path) = &cfg.output.csv {
        match &result {
            Ok(log) => super::write_csv(log, path)?,
            Err(e) => {
                if let Some(partial) = e.partial_log() {
                    super::write_csv(partial, path)?;
                }
            }
        }
    }
    result
}
