//! TOML scenario documents.
//!
//! ```toml
//! seed = 1
//! monitor_s = 1.6            # optional; defaults to 2(k-1) + 3/2 + 0.1
//!
//! [model]
//! preset = "camassa_holm"    # or k, p, b; g_coeffs may accompany either
//!
//! [grid]
//! n = 256
//! length = 6.283185307179586 # optional; 40 for localized data, 2π otherwise
//!
//! [control]
//! dt = 1e-4                  # dt only: fixed; cfl only: adaptive; both: capped
//! t_end = 1.0
//!
//! [initial]
//! kind = "cosine_packet"
//! modes = [1, [2, 0.5]]
//!
//! [outputs]
//! csv = "run.csv"
//! snapshots = "snaps"
//! cadence = 100
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::lemmas::default_sobolev_index;
use crate::model::{ModelParams, Preset};
use crate::spectral::GridSpec;
use crate::timestepper::{StepControl, TimeStep};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("malformed scenario document: {0}")]
    Syntax(String),
    #[error("invalid `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

/// Default side length for Gaussian and peakon data.
pub const LOCALIZED_LENGTH: f64 = 40.0;
pub const DEFAULT_CADENCE: u64 = 100;
pub const DEFAULT_MOLLIFY_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `a·exp(-(x - x₀)²/w²)`, summed over periodic images.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `Σ aᵢ cos(mᵢ·2πx/L)` over `(mᵢ, aᵢ)`.
    CosinePacket { modes: Vec<(u32, f64)> },
    /// `a·exp(-|x - x₀|)` convolved with a unit-mass Gaussian of width `w`.
    MollifiedPeakon {
        amplitude: f64,
        center: f64,
        mollify_width: f64,
    },
    /// Seeded band-limited field scaled to `‖u‖_∞ = a`.
    RandomBandlimited { amplitude: f64 },
}

impl InitialData {
    pub fn kind(&self) -> InitialKind {
        match self {
            InitialData::Gaussian { .. } => InitialKind::Gaussian,
            InitialData::CosinePacket { .. } => InitialKind::CosinePacket,
            InitialData::MollifiedPeakon { .. } => InitialKind::MollifiedPeakon,
            InitialData::RandomBandlimited { .. } => InitialKind::RandomBandlimited,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Gaussian,
    CosinePacket,
    MollifiedPeakon,
    RandomBandlimited,
}

impl InitialKind {
    pub fn name(self) -> &'static str {
        match self {
            InitialKind::Gaussian => "gaussian",
            InitialKind::CosinePacket => "cosine_packet",
            InitialKind::MollifiedPeakon => "mollified_peakon",
            InitialKind::RandomBandlimited => "random_bandlimited",
        }
    }

    pub fn is_localized(self) -> bool {
        matches!(self, InitialKind::Gaussian | InitialKind::MollifiedPeakon)
    }
}

impl FromStr for InitialKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            InitialKind::Gaussian,
            InitialKind::CosinePacket,
            InitialKind::MollifiedPeakon,
            InitialKind::RandomBandlimited,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown kind {s:?}"))
    }
}

impl fmt::Display for InitialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub snapshots: Option<PathBuf>,
    /// Diagnostics and snapshots are taken every `cadence` steps.
    pub cadence: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: ModelParams,
    /// Set when the model was named by preset; kept for rendering.
    pub preset: Option<Preset>,
    pub grid: GridSpec,
    /// `cfl_safety` is ignored under [`TimeStep::Fixed`].
    pub control: StepControl,
    pub initial: InitialData,
    pub outputs: Outputs,
    pub monitor_s: f64,
    pub seed: u64,
}

/// A real that may be written as a TOML integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
struct Real(f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Num {
            I(i64),
            F(f64),
        }
        Ok(Real(match Num::deserialize(d)? {
            Num::I(i) => i as f64,
            Num::F(f) => f,
        }))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawMode {
    Index(u32),
    Weighted(u32, Real),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    monitor_s: Option<Real>,
    model: RawModel,
    grid: RawGrid,
    control: RawControl,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial: Option<RawInitial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outputs: Option<RawOutputs>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g_coeffs: Option<Vec<Real>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<Real>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cfl: Option<Real>,
    t_end: Real,
    #[serde(skip_serializing_if = "Option::is_none")]
    breaking_threshold: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_steps: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitude: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modes: Option<Vec<RawMode>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mollify_width: Option<Real>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snapshots: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cadence: Option<u64>,
}

fn positive(key: &'static str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(
            key,
            format!("must be positive and finite, got {x}"),
        ))
    }
}

fn finite(key: &'static str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(key, format!("must be finite, got {x}")))
    }
}

fn parse_model(raw: &RawModel) -> Result<(ModelParams, Option<Preset>), ConfigError> {
    let g: Vec<f64> = raw
        .g_coeffs
        .as_deref()
        .unwrap_or_default()
        .iter()
        .map(|r| r.0)
        .collect();
    let (params, preset) = match &raw.preset {
        Some(name) => {
            for (key, set) in [
                ("model.k", raw.k.is_some()),
                ("model.p", raw.p.is_some()),
                ("model.b", raw.b.is_some()),
            ] {
                if set {
                    return Err(invalid(key, "cannot be combined with model.preset"));
                }
            }
            let preset =
                Preset::from_str(name).map_err(|e| invalid("model.preset", e.to_string()))?;
            (preset.params(), Some(preset))
        }
        None => {
            let k = raw
                .k
                .ok_or_else(|| invalid("model.k", "required without model.preset"))?;
            let p = raw
                .p
                .ok_or_else(|| invalid("model.p", "required without model.preset"))?;
            let b = raw
                .b
                .ok_or_else(|| invalid("model.b", "required without model.preset"))?;
            if k < 1 {
                return Err(invalid("model.k", format!("k ≥ 1 required, got {k}")));
            }
            if p < 1 {
                return Err(invalid("model.p", format!("p ≥ 1 required, got {p}")));
            }
            let params = ModelParams::new(k, p, finite("model.b", b.0)?, Vec::new())
                .map_err(|e| invalid("model", e.to_string()))?;
            (params, None)
        }
    };
    let params = if raw.g_coeffs.is_some() {
        params
            .with_g(g)
            .map_err(|e| invalid("model.g_coeffs", e.to_string()))?
    } else {
        params
    };
    Ok((params, preset))
}

fn parse_control(raw: &RawControl) -> Result<StepControl, ConfigError> {
    let t_end = positive("control.t_end", raw.t_end.0)?;
    let dt = raw.dt.map(|d| positive("control.dt", d.0)).transpose()?;
    let cfl = raw.cfl.map(|c| c.0);
    let step = match (dt, cfl) {
        (Some(dt), None) => TimeStep::Fixed(dt),
        (Some(dt), Some(_)) => TimeStep::AutoCapped(dt),
        (None, _) => TimeStep::Auto,
    };
    let mut control = StepControl::new(step, t_end);
    if let Some(c) = cfl {
        if !(c > 0.0 && c <= 1.0) {
            return Err(invalid(
                "control.cfl",
                format!("must lie in (0, 1], got {c}"),
            ));
        }
        control.cfl_safety = c;
    }
    if let Some(th) = raw.breaking_threshold {
        control.breaking_threshold = positive("control.breaking_threshold", th.0)?;
    }
    if let Some(ms) = raw.max_steps {
        if ms == 0 {
            return Err(invalid("control.max_steps", "must be positive"));
        }
        control.max_steps = ms;
    }
    control.validate().map_err(|m| invalid("control", m))?;
    Ok(control)
}

fn parse_initial(raw: Option<&RawInitial>, length: f64) -> Result<InitialData, ConfigError> {
    let Some(raw) = raw else {
        return Ok(InitialData::CosinePacket {
            modes: vec![(1, 1.0)],
        });
    };
    let kind = InitialKind::from_str(&raw.kind).map_err(|m| invalid("initial.kind", m))?;
    let allowed: &[&str] = match kind {
        InitialKind::Gaussian => &["amplitude", "center", "width"],
        InitialKind::CosinePacket => &["amplitude", "modes"],
        InitialKind::MollifiedPeakon => &["amplitude", "center", "mollify_width"],
        InitialKind::RandomBandlimited => &["amplitude"],
    };
    for (key, name, set) in [
        ("initial.center", "center", raw.center.is_some()),
        ("initial.width", "width", raw.width.is_some()),
        ("initial.modes", "modes", raw.modes.is_some()),
        (
            "initial.mollify_width",
            "mollify_width",
            raw.mollify_width.is_some(),
        ),
    ] {
        if set && !allowed.contains(&name) {
            return Err(invalid(key, format!("not used by kind {kind}")));
        }
    }
    let amplitude = finite("initial.amplitude", raw.amplitude.map_or(1.0, |a| a.0))?;
    let center = finite("initial.center", raw.center.map_or(length / 2.0, |c| c.0))?;
    Ok(match kind {
        InitialKind::Gaussian => InitialData::Gaussian {
            amplitude,
            center,
            width: positive("initial.width", raw.width.map_or(1.0, |w| w.0))?,
        },
        InitialKind::CosinePacket => {
            let modes = match &raw.modes {
                None => vec![(1, amplitude)],
                Some(list) => list
                    .iter()
                    .map(|m| match *m {
                        RawMode::Index(i) => Ok((i, amplitude)),
                        RawMode::Weighted(i, a) => finite("initial.modes", a.0).map(|a| (i, a)),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            };
            if modes.is_empty() {
                return Err(invalid("initial.modes", "at least one mode is required"));
            }
            InitialData::CosinePacket { modes }
        }
        InitialKind::MollifiedPeakon => InitialData::MollifiedPeakon {
            amplitude,
            center,
            mollify_width: positive(
                "initial.mollify_width",
                raw.mollify_width.map_or(DEFAULT_MOLLIFY_WIDTH, |w| w.0),
            )?,
        },
        InitialKind::RandomBandlimited => InitialData::RandomBandlimited { amplitude },
    })
}

/// Parses and validates a scenario document, filling defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let (model, preset) = parse_model(&raw.model)?;

    let kind = match &raw.initial {
        Some(init) => InitialKind::from_str(&init.kind).map_err(|m| invalid("initial.kind", m))?,
        None => InitialKind::CosinePacket,
    };
    let default_length = if kind.is_localized() {
        LOCALIZED_LENGTH
    } else {
        2.0 * PI
    };
    let length = positive(
        "grid.length",
        raw.grid.length.map_or(default_length, |l| l.0),
    )?;
    let n = usize::try_from(raw.grid.n).map_err(|_| invalid("grid.n", "must be non-negative"))?;
    let grid = GridSpec::new(n, length).map_err(|e| invalid("grid.n", e.to_string()))?;

    let control = parse_control(&raw.control)?;
    let initial = parse_initial(raw.initial.as_ref(), length)?;
    if let InitialData::CosinePacket { modes } = &initial {
        if let Some(&(m, _)) = modes.iter().find(|(m, _)| *m as usize >= n / 2) {
            return Err(invalid(
                "initial.modes",
                format!("mode {m} is not below the Nyquist index {}", n / 2),
            ));
        }
    }

    let outputs = match raw.outputs {
        None => Outputs {
            cadence: DEFAULT_CADENCE,
            ..Outputs::default()
        },
        Some(o) => Outputs {
            csv: o.csv,
            snapshots: o.snapshots,
            cadence: match o.cadence {
                Some(0) => return Err(invalid("outputs.cadence", "must be positive")),
                Some(c) => c,
                None => DEFAULT_CADENCE,
            },
        },
    };

    let monitor_s = match raw.monitor_s {
        Some(s) => finite("monitor_s", s.0)?,
        None => default_sobolev_index(model.k()),
    };

    Ok(ScenarioConfig {
        model,
        preset,
        grid,
        control,
        initial,
        outputs,
        monitor_s,
        seed: raw.seed.unwrap_or(0),
    })
}

/// Renders a config with every value explicit; `parse_config` inverts it.
pub fn render_config(cfg: &ScenarioConfig) -> String {
    let g = (!cfg.model.g_coeffs().is_empty())
        .then(|| cfg.model.g_coeffs().iter().copied().map(Real).collect());
    let model = match cfg.preset {
        Some(p) => RawModel {
            preset: Some(p.name().to_string()),
            k: None,
            p: None,
            b: None,
            g_coeffs: g,
        },
        None => RawModel {
            preset: None,
            k: Some(cfg.model.k() as i64),
            p: Some(cfg.model.p() as i64),
            b: Some(Real(cfg.model.b())),
            g_coeffs: g,
        },
    };
    let (dt, cfl) = match cfg.control.dt {
        TimeStep::Fixed(dt) => (Some(Real(dt)), None),
        TimeStep::AutoCapped(dt) => (Some(Real(dt)), Some(Real(cfg.control.cfl_safety))),
        TimeStep::Auto => (None, Some(Real(cfg.control.cfl_safety))),
    };
    let mut initial = RawInitial {
        kind: cfg.initial.kind().name().to_string(),
        amplitude: None,
        center: None,
        width: None,
        modes: None,
        mollify_width: None,
    };
    match &cfg.initial {
        InitialData::Gaussian {
            amplitude,
            center,
            width,
        } => {
            initial.amplitude = Some(Real(*amplitude));
            initial.center = Some(Real(*center));
            initial.width = Some(Real(*width));
        }
        InitialData::CosinePacket { modes } => {
            initial.modes = Some(
                modes
                    .iter()
                    .map(|&(m, a)| RawMode::Weighted(m, Real(a)))
                    .collect(),
            );
        }
        InitialData::MollifiedPeakon {
            amplitude,
            center,
            mollify_width,
        } => {
            initial.amplitude = Some(Real(*amplitude));
            initial.center = Some(Real(*center));
            initial.mollify_width = Some(Real(*mollify_width));
        }
        InitialData::RandomBandlimited { amplitude } => {
            initial.amplitude = Some(Real(*amplitude));
        }
    }
    let raw = RawConfig {
        seed: Some(cfg.seed),
        monitor_s: Some(Real(cfg.monitor_s)),
        model,
        grid: RawGrid {
            n: cfg.grid.n_points() as i64,
            length: Some(Real(cfg.grid.length())),
        },
        control: RawControl {
            dt,
            cfl,
            t_end: Real(cfg.control.t_end),
            breaking_threshold: Some(Real(cfg.control.breaking_threshold)),
            max_steps: Some(cfg.control.max_steps),
        },
        initial: Some(initial),
        outputs: Some(RawOutputs {
            csv: cfg.outputs.csv.clone(),
            snapshots: cfg.outputs.snapshots.clone(),
            cadence: Some(cfg.outputs.cadence),
        }),
    };
    toml::to_string(&raw).expect("scenario configs serialize")
}
