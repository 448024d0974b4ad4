use super::SimError;
use std::io::Write;
use std::path::Path;

/// One logged sample. Field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TelemetryRow {
    pub t: f64,
    pub position: [f64; 3],
    pub position_ref: [f64; 3],
    pub position_error: [f64; 3],
    pub velocity: [f64; 3],
    pub velocity_error: [f64; 3],
    /// Angle between the thrust axis and body `k`, deg.
    pub tilt_deg: f64,
    /// Angle between body `k` and the vertical, deg.
    pub inclination_deg: f64,
    /// Achieved thrust, N.
    pub thrust: f64,
    /// Achieved body torque, N m.
    pub torque: [f64; 3],
    pub speeds_sq: [f64; 4],
    pub lyapunov: f64,
    pub lyapunov_rate: f64,
    pub saturated: bool,
    pub feasible: bool,
}

pub const CSV_HEADER: [&str; 30] = [
    "t", "x1", "x2", "x3", "xr1", "xr2", "xr3", "ex1", "ex2", "ex3", "v1", "v2", "v3", "ev1", "ev2", "ev3",
    "tilt_deg", "inclination_deg", "thrust", "gamma1", "gamma2", "gamma3", "w2_1", "w2_2", "w2_3", "w2_4",
    "lyap", "lyap_dot", "saturated", "feasible",
];

impl TelemetryRow {
    fn fields(&self) -> Vec<String> {
        let mut out = vec![self.t.to_string()];
        for group in [
            &self.position[..],
            &self.position_ref[..],
            &self.position_error[..],
            &self.velocity[..],
            &self.velocity_error[..],
        ] {
            out.extend(group.iter().map(f64::to_string));
        }
        out.push(self.tilt_deg.to_string());
        out.push(self.inclination_deg.to_string());
        out.push(self.thrust.to_string());
        out.extend(self.torque.iter().map(f64::to_string));
        out.extend(self.speeds_sq.iter().map(f64::to_string));
        out.push(self.lyapunov.to_string());
        out.push(self.lyapunov_rate.to_string());
        out.push(u8::from(self.saturated).to_string());
        out.push(u8::from(self.feasible).to_string());
        out
    }
}

/// Per-step checks that are tracked even when rows are decimated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub steps: usize,
    /// Worst priority-identity residual, rad/s.
    pub max_priority_residual: f64,
    /// Worst `||u| - 1|`.
    pub max_unit_drift: f64,
    /// Worst `|u12|`.
    pub max_tilt_sin: f64,
    /// Worst `|z|`, m.
    pub max_integrator: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TelemetryLog {
    pub rows: Vec<TelemetryRow>,
    pub diagnostics: Diagnostics,
    /// Start of the steady-state window, s.
    pub transient: f64,
    /// Reference lap period when the trajectory is periodic, s.
    pub lap_period: Option<f64>,
}

pub fn write_csv_to<W: Write>(log: &TelemetryLog, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &log.rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(log: &TelemetryLog, path: &Path) -> Result<(), SimError> {
    let io = |source: std::io::Error| SimError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let file = std::fs::File::create(path).map_err(io)?;
    write_csv_to(log, std::io::BufWriter::new(file)).map_err(|e| io(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_row_width() {
        assert_eq!(TelemetryRow::default().fields().len(), CSV_HEADER.len());
    }

    #[test]
    fn csv_layout() {
        let row = TelemetryRow {
            t: 0.5,
            position: [1.0, -2.0, 0.25],
            tilt_deg: 12.5,
            saturated: true,
            ..TelemetryRow::default()
        };
        let log = TelemetryLog {
            rows: vec![row],
            ..TelemetryLog::default()
        };
        let mut buf = Vec::new();
        write_csv_to(&log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("t,x1,x2,x3,xr1"));
        assert!(lines[0].ends_with("lyap,lyap_dot,saturated,feasible"));
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cells[0], "0.5");
        assert_eq!(&cells[1..4], ["1", "-2", "0.25"]);
        assert_eq!(cells[16], "12.5");
        assert_eq!(cells[28], "1");
        assert_eq!(cells[29], "0");
    }
}
