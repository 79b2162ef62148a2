//! Simulation, convergence and lemma-suite drivers.

use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::diagnostics::{record, write_csv, DiagnosticsRecord};
use crate::lemmas::{run_cases, suite_for, LemmaError, RatioReport, SamplerConfig};
use crate::spectral::{Field, GridSpec, SpectralError};
use crate::timestepper::{advance, cfl_dt, RunStatus, SolverState, StepControl, TimeStep};

use super::config::ScenarioConfig;
use super::initial::{make_initial, InitialError};
use super::snapshot::{write_snapshot, Snapshot, SnapshotError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Initial(#[from] InitialError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("breaking at t = {t} during a convergence study ({study}); shorten the horizon or smooth the data")]
    BreakingInStudy { study: &'static str, t: f64 },
    #[error("step limit reached at t = {t} during a convergence study ({study})")]
    StepLimitInStudy { study: &'static str, t: f64 },
    #[error("snapshot was taken for (k, p, b) = ({k}, {p}, {b}), which differs from the configured model")]
    ModelMismatch { k: u32, p: u32, b: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl ScenarioError {
    fn io(path: &Path, source: io::Error) -> Self {
        ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SolverState,
    pub status: RunStatus,
    pub steps_taken: u64,
    pub history: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<PathBuf>,
}

/// File name of the snapshot taken at time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("t{t:.9}.gchs")
}

/// Builds `u₀` from the config and runs it.
pub fn run_simulation(cfg: &ScenarioConfig) -> Result<RunOutcome, ScenarioError> {
    let u0 = make_initial(&cfg.initial, cfg.grid, cfg.seed)?;
    run_from_state(cfg, SolverState::new(u0))
}

/// Runs from `state` to `cfg.control.t_end`, recording diagnostics and
/// writing snapshots every `cfg.outputs.cadence` steps and at the end.
pub fn run_from_state(
    cfg: &ScenarioConfig,
    state: SolverState,
) -> Result<RunOutcome, ScenarioError> {
    if let Some(dir) = &cfg.outputs.snapshots {
        fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    }
    let mut history = Vec::new();
    let mut snapshots = Vec::new();
    let mut io_error = None;
    let result = advance(
        state,
        &cfg.model,
        &cfg.control,
        cfg.outputs.cadence,
        |s, dt| {
            history.push(record(s, &cfg.model, cfg.monitor_s, dt));
            if let (Some(dir), None) = (&cfg.outputs.snapshots, &io_error) {
                let path = dir.join(snapshot_name(s.t));
                match write_snapshot(&Snapshot::new(s.clone(), &cfg.model), &path) {
                    Ok(()) => snapshots.push(path),
                    Err(SnapshotError::Io(e)) => io_error = Some(ScenarioError::io(&path, e)),
                    Err(e) => unreachable!("writing cannot fail to decode: {e}"),
                }
            }
        },
    );
    if let Some(e) = io_error {
        return Err(e);
    }
    if let Some(path) = &cfg.outputs.csv {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| ScenarioError::io(parent, e))?;
        }
        let file = File::create(path).map_err(|e| ScenarioError::io(path, e))?;
        write_csv(BufWriter::new(file), &history).map_err(|e| ScenarioError::io(path, e))?;
    }
    Ok(RunOutcome {
        state: result.state,
        status: result.status,
        steps_taken: result.steps_taken,
        history,
        snapshots,
    })
}

/// Resumes from a snapshot; the snapshot's `(k, p, b)` must match `cfg`.
pub fn resume(cfg: &ScenarioConfig, snapshot: Snapshot) -> Result<RunOutcome, ScenarioError> {
    if !snapshot.matches(&cfg.model) {
        return Err(ScenarioError::ModelMismatch {
            k: snapshot.k,
            p: snapshot.p,
            b: snapshot.b,
        });
    }
    run_from_state(cfg, snapshot.state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalStudy {
    pub dts: Vec<f64>,
    /// `‖u_dt - u_ref‖_∞` at `t_end`.
    pub errors: Vec<f64>,
    /// `log₂(e_i / e_{i+1})` per halving.
    pub orders: Vec<f64>,
    /// Least-squares slope of `log e` against `log dt`; `None` when degenerate.
    pub observed_order: Option<f64>,
    /// All errors are at rounding level, so no order can be measured.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialStudy {
    pub n_points: Vec<usize>,
    /// `‖u_N - u_2N‖_∞` on the coarse points at `t_end`.
    pub errors: Vec<f64>,
    /// `e_N / e_2N` per doubling.
    pub ratios: Vec<f64>,
    /// Errors at or below this level count as floored.
    pub floor: f64,
    pub dt: f64,
}

/// Smallest error ratio accepted per grid doubling.
pub const SPECTRAL_RATIO: f64 = 100.0;
/// Relative level (to `max(1, ‖u‖_∞)`) at which spatial errors floor.
pub const SPATIAL_FLOOR: f64 = 1e-10;
/// Relative level at which temporal errors are rounding noise.
pub const TEMPORAL_FLOOR: f64 = 1e-13;

impl SpatialStudy {
    /// Every doubling gains at least [`SPECTRAL_RATIO`] unless it has floored.
    pub fn is_spectral(&self) -> bool {
        self.ratios
            .iter()
            .zip(&self.errors[1..])
            .all(|(&r, &e_fine)| r >= SPECTRAL_RATIO || e_fine <= self.floor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub temporal: TemporalStudy,
    pub spatial: SpatialStudy,
}

fn solve_to_end(
    cfg: &ScenarioConfig,
    u0: Field,
    dt: f64,
    study: &'static str,
) -> Result<Field, ScenarioError> {
    let control = StepControl {
        dt: TimeStep::Fixed(dt),
        ..cfg.control.clone()
    };
    let out = advance(SolverState::new(u0), &cfg.model, &control, 0, |_, _| {});
    match out.status {
        RunStatus::Completed => Ok(out.state.u),
        RunStatus::Breaking => Err(ScenarioError::BreakingInStudy {
            study,
            t: out.state.t,
        }),
        RunStatus::StepLimit => Err(ScenarioError::StepLimitInStudy {
            study,
            t: out.state.t,
        }),
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Coarse-grid samples of a field on a grid refined by an integer factor.
fn restrict(fine: &Field, coarse: GridSpec) -> Field {
    let stride = fine.grid().n_points() / coarse.n_points();
    Field::from_raw(
        coarse,
        fine.values().iter().step_by(stride).copied().collect(),
    )
}

/// Richardson study in time on the configured grid and a refinement study in
/// space at the reference step.
///
/// `dt₀` is the configured step (the CFL step of `u₀` when adaptive); the
/// temporal levels are `dt₀/2^i`, `i = 0..=levels`, against a reference at
/// `dt₀/2^{levels+1}`. The spatial levels are `N·2^i`, `i = 0..levels`, each
/// compared against a run on twice as many points.
pub fn run_convergence(
    cfg: &ScenarioConfig,
    levels: u32,
) -> Result<ConvergenceReport, ScenarioError> {
    let levels = levels.max(1);
    let u0 = make_initial(&cfg.initial, cfg.grid, cfg.seed)?;
    let dt0 = match cfg.control.dt {
        TimeStep::Fixed(dt) => dt,
        _ => {
            let probe = StepControl {
                t_end: f64::INFINITY,
                ..cfg.control.clone()
            };
            cfl_dt(&SolverState::new(u0.clone()), &cfg.model, &probe)
        }
    };
    let scale = u0.max_abs().max(1.0);

    let dt_ref = dt0 / 2f64.powi(levels as i32 + 1);
    let reference = solve_to_end(cfg, u0.clone(), dt_ref, "temporal")?;
    let dts: Vec<f64> = (0..=levels).map(|i| dt0 / 2f64.powi(i as i32)).collect();
    let errors = dts
        .iter()
        .map(|&dt| {
            solve_to_end(cfg, u0.clone(), dt, "temporal").map(|u| u.max_abs_diff(&reference))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let degenerate = errors.iter().all(|&e| e <= TEMPORAL_FLOOR * scale);
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let observed_order = (!degenerate).then(|| {
        let xs: Vec<f64> = dts.iter().map(|d| d.log2()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
        slope(&xs, &ys)
    });
    let temporal = TemporalStudy {
        dts,
        errors,
        orders,
        observed_order,
        degenerate,
    };

    let mut n_points = Vec::new();
    let mut spatial_errors = Vec::new();
    let mut coarse = cfg.grid;
    let mut coarse_u = solve_to_end(cfg, u0, dt_ref, "spatial")?;
    for _ in 0..levels {
        let fine = coarse.refined(2)?;
        let fine_u0 = make_initial(&cfg.initial, fine, cfg.seed)?;
        let fine_u = solve_to_end(cfg, fine_u0, dt_ref, "spatial")?;
        n_points.push(coarse.n_points());
        spatial_errors.push(coarse_u.max_abs_diff(&restrict(&fine_u, coarse)));
        coarse = fine;
        coarse_u = fine_u;
    }
    let ratios = spatial_errors.windows(2).map(|w| w[0] / w[1]).collect();
    let spatial = SpatialStudy {
        n_points,
        errors: spatial_errors,
        ratios,
        floor: SPATIAL_FLOOR * scale,
        dt: dt_ref,
    };
    Ok(ConvergenceReport { temporal, spatial })
}

/// Samples per lemma check when driven from a scenario.
pub const SUITE_SAMPLES: usize = 500;

/// The inequality instantiations for the configured `(k, p)` at `monitor_s`.
pub fn run_lemma_suite(
    cfg: &ScenarioConfig,
    n_samples: usize,
) -> Vec<Result<RatioReport, LemmaError>> {
    let sampler = SamplerConfig {
        seed: cfg.seed,
        n_samples,
        ..SamplerConfig::default()
    };
    let cases = suite_for(cfg.model.k(), cfg.model.p(), cfg.monitor_s);
    run_cases(&cases, &sampler, lemma_grid(cfg.grid))
}

/// Lemma checks run on `2π`-periodic grids of the configured size.
fn lemma_grid(grid: GridSpec) -> GridSpec {
    GridSpec::periodic_2pi(grid.n_points()).expect("size already validated")
}
