use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gch_core::diagnostics::i1_drift;
use gch_core::lemmas::{
    default_sobolev_index, default_suite, run_cases, LemmaError, RatioReport, SamplerConfig,
};
use gch_core::model::{ModelParams, Preset};
use gch_core::scenario::{
    parse_config, read_snapshot, resume, run_convergence, run_lemma_suite, run_simulation,
    ConfigError, InitialData, Outputs, RunOutcome, ScenarioConfig, ScenarioError, SnapshotError,
};
use gch_core::spectral::GridSpec;
use gch_core::timestepper::{RunStatus, StepControl, TimeStep};

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BREAKING: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "gch",
    version,
    about = "Generalized Camassa-Holm simulation and verification lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario to its end time.
    Run { config: PathBuf },
    /// Temporal and spatial refinement study.
    Converge {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Inequality ratio checks for the scenario's (k, p).
    Lemmas {
        config: PathBuf,
        #[arg(long, default_value_t = gch_core::scenario::driver::SUITE_SAMPLES)]
        samples: usize,
        /// Run the full default suite over k, p in {1, 2, 3} instead.
        #[arg(long)]
        all: bool,
    },
    /// List the named model tuples.
    Presets,
    /// Continue a run from a snapshot.
    Resume {
        snapshot: PathBuf,
        #[arg(long = "t-end")]
        t_end: f64,
        /// Scenario supplying g, step control and outputs; the model must match.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match &e {
            ScenarioError::Initial(_) | ScenarioError::ModelMismatch { .. } => EXIT_CONFIG,
            ScenarioError::Io { .. } => EXIT_IO,
            ScenarioError::BreakingInStudy { .. } => EXIT_BREAKING,
            ScenarioError::StepLimitInStudy { .. } | ScenarioError::Spectral(_) => EXIT_OTHER,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SnapshotError> for Failure {
    fn from(e: SnapshotError) -> Self {
        let code = match e {
            SnapshotError::Io(_) => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        Failure::new(code, e.to_string())
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
        .map_err(|e: ConfigError| Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display())))
}

fn report_run(outcome: &RunOutcome) -> Result<(), Failure> {
    let max_ux = outcome.history.iter().map(|r| r.ux_inf).fold(0.0, f64::max);
    let drift = i1_drift(&outcome.history).unwrap_or(0.0);
    println!(
        "status={:?} t={} steps={} i1_drift={drift:.3e} max_ux={max_ux:.3e} snapshots={}",
        outcome.status,
        outcome.state.t,
        outcome.steps_taken,
        outcome.snapshots.len()
    );
    match outcome.status {
        RunStatus::Completed => Ok(()),
        RunStatus::Breaking => Err(Failure::new(
            EXIT_BREAKING,
            format!("breaking detected at t = {}", outcome.state.t),
        )),
        RunStatus::StepLimit => Err(Failure::new(
            EXIT_OTHER,
            format!("step limit reached at t = {}", outcome.state.t),
        )),
    }
}

fn print_reports(reports: Vec<Result<RatioReport, LemmaError>>) -> Result<(), Failure> {
    let mut failed = 0;
    for r in reports {
        match r {
            Ok(report) => {
                if !report.passed() {
                    failed += 1;
                }
                println!("{report}");
            }
            Err(e) => {
                failed += 1;
                println!("rejected: {e}");
            }
        }
    }
    if failed > 0 {
        return Err(Failure::new(
            EXIT_OTHER,
            format!("{failed} lemma checks failed"),
        ));
    }
    Ok(())
}

/// Scenario used to resume a snapshot when no config is given: `g = 0`,
/// adaptive steps, no outputs.
fn bare_resume_config(
    k: u32,
    p: u32,
    b: f64,
    grid: GridSpec,
    t_end: f64,
) -> Result<ScenarioConfig, Failure> {
    let model = ModelParams::new(k as i64, p as i64, b, Vec::new())
        .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    Ok(ScenarioConfig {
        model,
        preset: None,
        grid,
        control: StepControl::new(TimeStep::Auto, t_end),
        initial: InitialData::CosinePacket { modes: Vec::new() },
        outputs: Outputs {
            cadence: 100,
            ..Outputs::default()
        },
        monitor_s: default_sobolev_index(k),
        seed: 0,
    })
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            report_run(&run_simulation(&cfg)?)
        }
        Command::Converge { config, levels } => {
            let cfg = load_config(&config)?;
            let report = run_convergence(&cfg, levels)?;
            let t = &report.temporal;
            println!("temporal");
            for (dt, e) in t.dts.iter().zip(&t.errors) {
                println!("  dt={dt:.6e} error={e:.3e}");
            }
            match t.observed_order {
                Some(order) => println!("  observed_order={order:.3}"),
                None => println!("  degenerate: all errors at rounding level"),
            }
            let s = &report.spatial;
            println!("spatial (dt={:.6e}, floor={:.1e})", s.dt, s.floor);
            for (n, e) in s.n_points.iter().zip(&s.errors) {
                println!("  n={n} error={e:.3e}");
            }
            println!("  spectral={}", s.is_spectral());
            Ok(())
        }
        Command::Lemmas {
            config,
            samples,
            all,
        } => {
            let cfg = load_config(&config)?;
            if all {
                let sampler = SamplerConfig {
                    seed: cfg.seed,
                    n_samples: samples,
                    ..SamplerConfig::default()
                };
                let grid = GridSpec::periodic_2pi(cfg.grid.n_points())
                    .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
                print_reports(run_cases(&default_suite(), &sampler, grid))
            } else {
                print_reports(run_lemma_suite(&cfg, samples))
            }
        }
        Command::Presets => {
            for preset in Preset::ALL {
                let (k, p, b) = preset.tuple();
                println!("{:<20} k={k} p={p} b={b}", preset.name());
            }
            Ok(())
        }
        Command::Resume {
            snapshot,
            t_end,
            config,
        } => {
            let snap = read_snapshot(&snapshot)?;
            let mut cfg = match config {
                Some(path) => load_config(&path)?,
                None => bare_resume_config(snap.k, snap.p, snap.b, snap.state.u.grid(), t_end)?,
            };
            cfg.grid = snap.state.u.grid();
            cfg.control.t_end = t_end;
            if t_end < snap.state.t {
                return Err(Failure::new(
                    EXIT_CONFIG,
                    format!(
                        "--t-end {t_end} is before the snapshot time {}",
                        snap.state.t
                    ),
                ));
            }
            report_run(&resume(&cfg, snap)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gch: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
