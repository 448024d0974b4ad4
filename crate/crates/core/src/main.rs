use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tiltvtol::sim::{self, ScenarioConfig, SimError};

#[derive(Parser)]
#[command(name = "tiltvtol", version, about = "Simulate thrust-tilting VTOL vehicles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a TOML file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Built-in slow figure eight (15 s lap, tilt stays unsaturated).
    PaperSim1 {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Built-in fast figure eight (10 s lap, tilt saturates).
    PaperSim2 {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a scenario once per value of one parameter, in parallel.
    Sweep {
        config: PathBuf,
        /// Dotted key, e.g. `controller.gains.k3`.
        #[arg(long)]
        param: String,
        #[arg(long, num_args = 1.., required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Print a built-in scenario as TOML.
    DumpConfig {
        #[arg(value_parser = ["sim1", "sim2"])]
        which: String,
    },
}

#[derive(Args, Clone)]
struct RunOpts {
    /// Directory for telemetry CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    /// Keep one CSV row every N steps.
    #[arg(long)]
    csv_decimate: Option<usize>,
}

impl RunOpts {
    fn apply(&self, cfg: &mut ScenarioConfig, stem: &str) {
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(d) = self.duration {
            cfg.duration = d;
        }
        if let Some(n) = self.csv_decimate {
            cfg.output.csv_decimate = n;
        }
        if let Some(dir) = &self.out {
            cfg.output.csv = Some(dir.join(format!("{stem}.csv")));
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned())
}

fn run_one(mut cfg: ScenarioConfig, opts: &RunOpts, name: &str) -> Result<(), SimError> {
    opts.apply(&mut cfg, name);
    let started = std::time::Instant::now();
    let log = sim::run_to_files(&cfg)?;
    let m = sim::metrics(&log)?;
    println!("{m}");
    println!("wall time                {:.2} s", started.elapsed().as_secs_f64());
    if let Some(path) = &cfg.output.csv {
        println!("telemetry                {}", path.display());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::Run { config, opts } => run_one(sim::load_config(&config)?, &opts, &stem(&config)),
        Command::PaperSim1 { opts } => run_one(ScenarioConfig::paper_sim1(), &opts, "sim1"),
        Command::PaperSim2 { opts } => run_one(ScenarioConfig::paper_sim2(), &opts, "sim2"),
        Command::Sweep {
            config,
            param,
            values,
            opts,
        } => {
            let mut base = sim::load_config(&config)?;
            // per-value files would collide; sweeps only report metrics
            opts.apply(&mut base, "unused");
            base.output.csv = None;
            let mut failed = false;
            for (value, result) in sim::sweep(&base, &param, &values) {
                match result {
                    Ok(m) => println!(
                        "{param} = {value}: max tilt {:.2} deg, steady inclination {:.3} deg, steady |e| {:.4} m, rms |e| {:.4} m",
                        m.max_tilt_deg, m.steady_max_inclination_deg, m.steady_max_position_error, m.rms_position_error
                    ),
                    Err(e) => {
                        failed = true;
                        eprintln!("{param} = {value}: {e}");
                    }
                }
            }
            if failed {
                std::process::exit(1);
            }
            Ok(())
        }
        Command::DumpConfig { which } => {
            let cfg = if which == "sim1" {
                ScenarioConfig::paper_sim1()
            } else {
                ScenarioConfig::paper_sim2()
            };
            print!("{}", cfg.to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
