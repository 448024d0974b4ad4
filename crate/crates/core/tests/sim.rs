use tiltvtol::controller::{PrimaryMode, SecondaryObjective};
use tiltvtol::geom::Vec3;
use tiltvtol::plant::{ParasiticModel, Wind};
use tiltvtol::reference::Trajectory;
use tiltvtol::sim::{
    load_config, metrics, run, run_to_files, save_config, write_csv_to, ScenarioConfig, TelemetryLog, CSV_HEADER,
};

fn short(mut cfg: ScenarioConfig, duration: f64) -> ScenarioConfig {
    cfg.duration = duration;
    cfg.transient = duration.min(cfg.transient);
    cfg
}

fn csv_bytes(log: &TelemetryLog) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv_to(log, &mut out).unwrap();
    out
}

fn final_position(cfg: &ScenarioConfig) -> Vec3 {
    let log = run(cfg).unwrap();
    Vec3::from(log.rows.last().unwrap().position)
}

#[test]
fn runs_are_bit_identical() {
    let cfg = short(ScenarioConfig::paper_sim2(), 8.0);
    assert_eq!(csv_bytes(&run(&cfg).unwrap()), csv_bytes(&run(&cfg).unwrap()));
}

#[test]
fn step_refinement_converges_at_first_order() {
    // control is held between steps, so refinement gains one order of dt
    let base = short(ScenarioConfig::paper_sim1(), 10.0);
    let at = |dt: f64| {
        let mut c = base.clone();
        c.dt = dt;
        final_position(&c)
    };
    let (a, b, c) = (at(2e-3), at(1e-3), at(5e-4));
    let (coarse, fine) = ((a - b).norm(), (b - c).norm());
    assert!(fine < 1e-3, "dt 1e-3 vs 5e-4 differ by {fine}");
    let ratio = coarse / fine;
    assert!((1.6..3.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn zero_gravity_hover_idles() {
    let mut cfg = short(ScenarioConfig::paper_sim1(), 2.0);
    cfg.vehicle.gravity = 0.0;
    cfg.trajectory = Trajectory::Hover { position: [0.0; 3] };
    cfg.initial = Default::default();
    let log = run(&cfg).unwrap();
    for r in &log.rows {
        assert!(Vec3::from(r.position_error).norm() < 1e-12);
        assert!(Vec3::from(r.velocity_error).norm() < 1e-12);
        assert!(r.thrust.abs() < 1e-9);
        assert!(r.feasible);
    }
}

#[test]
fn config_file_round_trip_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short(ScenarioConfig::paper_sim2(), 1.0);
    cfg.output.csv = Some(dir.path().join("out").join("sim2.csv"));
    cfg.output.csv_decimate = 10;
    let path = dir.path().join("sim2.toml");
    save_config(&cfg, &path).unwrap();
    let loaded = load_config(&path).unwrap();
    assert_eq!(loaded, cfg);

    let log = run_to_files(&loaded).unwrap();
    let text = std::fs::read_to_string(cfg.output.csv.unwrap()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), log.rows.len());
    assert_eq!(log.rows.len(), 101);
}

#[test]
fn invalid_config_file_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let mut text = ScenarioConfig::paper_sim1().to_toml();
    text = text.replace("dt = 0.001", "dt = -1.0");
    std::fs::write(&path, text).unwrap();
    let err = load_config(&path).unwrap_err().to_string();
    assert!(err.contains("dt"), "{err}");
    assert!(load_config(&dir.path().join("missing.toml")).is_err());
}

fn scenarios() -> Vec<ScenarioConfig> {
    let mut out = vec![short(ScenarioConfig::paper_sim1(), 15.0), short(ScenarioConfig::paper_sim2(), 15.0)];
    let mut c = short(ScenarioConfig::paper_sim2(), 10.0);
    c.vehicle.parasitic_torque = ParasiticModel::ThrustMoment;
    out.push(c);
    let mut c = short(ScenarioConfig::paper_sim1(), 10.0);
    c.controller.primary = PrimaryMode::Velocity;
    c.controller.secondary = SecondaryObjective::Direction {
        target: [0.3, 0.0, 1.0],
        yaw_rate: 0.5,
    };
    c.environment.wind = Wind::Constant {
        velocity: [3.0, -2.0, 0.0],
    };
    out.push(c);
    out
}

#[test]
fn tilt_stays_inside_limit() {
    for cfg in scenarios() {
        let log = run(&cfg).unwrap();
        let bound = cfg.vehicle.tilt_limit.asin().to_degrees();
        let max = log.rows.iter().map(|r| r.tilt_deg).fold(0.0, f64::max);
        assert!(max <= bound + 1e-7_f64.to_degrees(), "{max} > {bound}");
        assert!(log.diagnostics.max_tilt_sin <= cfg.vehicle.tilt_limit + 1e-9);
        assert!(log.diagnostics.max_unit_drift <= 1e-9);
    }
}

#[test]
fn position_integral_stays_bounded() {
    for cfg in [ScenarioConfig::paper_sim1(), ScenarioConfig::paper_sim2()] {
        let log = run(&cfg).unwrap();
        let m = metrics(&log).unwrap();
        assert!(m.max_integrator <= cfg.controller.gains.delta_z + 1.0, "{}", m.max_integrator);
    }
}

#[test]
fn lap_period_matches_reference() {
    let log = run(&short(ScenarioConfig::paper_sim1(), 16.0)).unwrap();
    assert!((log.lap_period.unwrap() - 15.0).abs() < 1e-12);
}
