use super::{SimError, TelemetryLog, TelemetryRow};
use crate::geom::Vec3;

/// Summary of a run. "Steady" quantities only use rows with
/// `t >= transient`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub duration: f64,
    pub max_tilt_deg: f64,
    pub max_inclination_deg: f64,
    pub rms_position_error: f64,
    pub final_position_error: f64,
    /// Fraction of logged rows with the tilt limit active.
    pub saturation_duty: f64,
    pub steady_max_inclination_deg: f64,
    pub steady_max_position_error: f64,
    /// Mean horizontal speed over the last complete lap (or the steady
    /// window when the reference is not periodic), m/s.
    pub mean_ground_speed: f64,
    pub max_priority_residual: f64,
    pub max_unit_drift: f64,
    pub max_integrator: f64,
}

fn norm3(v: &[f64; 3]) -> f64 {
    Vec3::from(*v).norm()
}

fn ground_speed(r: &TelemetryRow) -> f64 {
    r.velocity[0].hypot(r.velocity[1])
}

fn mean_by<F: Fn(&TelemetryRow) -> f64>(rows: &[TelemetryRow], f: F) -> f64 {
    if rows.is_empty() {
        return f64::NAN;
    }
    rows.iter().map(f).sum::<f64>() / rows.len() as f64
}

fn max_by<F: Fn(&TelemetryRow) -> f64>(rows: &[TelemetryRow], f: F) -> f64 {
    rows.iter().map(f).fold(0.0, f64::max)
}

pub fn metrics(log: &TelemetryLog) -> Result<Metrics, SimError> {
    let rows = &log.rows;
    let last = rows.last().ok_or(SimError::EmptyLog)?;
    let steady: Vec<TelemetryRow> = rows.iter().filter(|r| r.t >= log.transient).copied().collect();
    let lap: Vec<TelemetryRow> = match log.lap_period {
        Some(p) if last.t - p >= rows[0].t => rows.iter().filter(|r| r.t >= last.t - p).copied().collect(),
        _ => steady.clone(),
    };
    let d = &log.diagnostics;
    Ok(Metrics {
        duration: last.t - rows[0].t,
        max_tilt_deg: max_by(rows, |r| r.tilt_deg),
        max_inclination_deg: max_by(rows, |r| r.inclination_deg),
        rms_position_error: mean_by(rows, |r| norm3(&r.position_error).powi(2)).sqrt(),
        final_position_error: norm3(&last.position_error),
        saturation_duty: mean_by(rows, |r| f64::from(u8::from(r.saturated))),
        steady_max_inclination_deg: max_by(&steady, |r| r.inclination_deg),
        steady_max_position_error: max_by(&steady, |r| norm3(&r.position_error)),
        mean_ground_speed: mean_by(&lap, ground_speed),
        max_priority_residual: d.max_priority_residual,
        max_unit_drift: d.max_unit_drift,
        max_integrator: d.max_integrator,
    })
}

impl std::fmt::Display for Metrics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "duration                 {:.3} s", self.duration)?;
        writeln!(f, "max tilt                 {:.3} deg", self.max_tilt_deg)?;
        writeln!(f, "max inclination          {:.3} deg", self.max_inclination_deg)?;
        writeln!(f, "steady max inclination   {:.3} deg", self.steady_max_inclination_deg)?;
        writeln!(f, "rms position error       {:.4} m", self.rms_position_error)?;
        writeln!(f, "steady max position err  {:.4} m", self.steady_max_position_error)?;
        writeln!(f, "final position error     {:.4} m", self.final_position_error)?;
        writeln!(f, "saturation duty          {:.3}", self.saturation_duty)?;
        writeln!(f, "mean ground speed        {:.3} m/s", self.mean_ground_speed)?;
        writeln!(f, "max |z|                  {:.4} m", self.max_integrator)?;
        write!(f, "max priority residual    {:.2e}", self.max_priority_residual)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_log_is_an_error() {
        let err = metrics(&TelemetryLog::default()).unwrap_err();
        assert_eq!(err.to_string(), "empty log");
    }

    #[test]
    fn two_rows_by_hand() {
        let row = |t: f64, e: [f64; 3], sat: bool| TelemetryRow {
            t,
            position_error: e,
            velocity: [3.0, 4.0, 1.0],
            tilt_deg: 10.0 * t,
            saturated: sat,
            ..TelemetryRow::default()
        };
        let log = TelemetryLog {
            rows: vec![row(0.0, [3.0, 0.0, 0.0], false), row(1.0, [0.0, 0.0, 4.0], true)],
            transient: 0.5,
            ..TelemetryLog::default()
        };
        let m = metrics(&log).unwrap();
        // sqrt((9 + 16) / 2)
        assert!((m.rms_position_error - 3.5355339059327378).abs() < 1e-15);
        assert_eq!(m.final_position_error, 4.0);
        assert_eq!(m.saturation_duty, 0.5);
        assert_eq!(m.steady_max_position_error, 4.0);
        assert_eq!(m.max_tilt_deg, 10.0);
        assert_eq!(m.mean_ground_speed, 5.0);
    }
}
