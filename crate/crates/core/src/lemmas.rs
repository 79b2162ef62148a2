//! Randomized corroboration of the Sobolev inequalities behind the
//! well-posedness theory.
//!
//! Each check draws seeded band-limited pairs, evaluates the ratio of the
//! left-hand side to the right-hand side of an inequality, and reports the
//! worst ratio at the grid resolution and at twice that resolution. The same
//! random draws are reused at both resolutions (modes are drawn in order of
//! increasing `|j|`), so a resolution-independent constant shows up as a
//! stable maximum. This corroborates an inequality; it cannot prove one.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use thiserror::Error;

use num_complex::Complex64;

use crate::model::{nonlinearity_f, ModelParams};
use crate::spectral::{
    apply_lambda, dealiased_product, derivative, lp_norm, sobolev_norm, Field, GridSpec, Lp,
    SpectralError, Spectrum,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LemmaError {
    #[error("hypothesis violated for {lemma}: {detail}")]
    Hypothesis { lemma: LemmaId, detail: String },
    #[error("invalid sampler configuration: {0}")]
    Sampler(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LemmaId {
    FractionalLeibniz,
    CommutatorLambda,
    KatoPonce,
    Composition,
    Algebra,
    NonlinearityLipschitz,
}

impl LemmaId {
    pub fn name(self) -> &'static str {
        match self {
            LemmaId::FractionalLeibniz => "fractional_leibniz",
            LemmaId::CommutatorLambda => "commutator_lambda",
            LemmaId::KatoPonce => "kato_ponce",
            LemmaId::Composition => "composition",
            LemmaId::Algebra => "algebra",
            LemmaId::NonlinearityLipschitz => "nonlinearity_lipschitz",
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Fraction of the resolvable band `|j| ≤ N/2` that is populated.
    pub band_fraction: f64,
    /// Amplitudes are damped by `(1 + ξ²)^{-decay/2}`.
    pub spectral_decay: f64,
    pub n_samples: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            band_fraction: 0.25,
            spectral_decay: 0.0,
            n_samples: 500,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), LemmaError> {
        if !(self.band_fraction > 0.0 && self.band_fraction <= 1.0 / 3.0) {
            return Err(LemmaError::Sampler(format!(
                "band_fraction must lie in (0, 1/3], got {}",
                self.band_fraction
            )));
        }
        if !(self.spectral_decay >= 0.0 && self.spectral_decay.is_finite()) {
            return Err(LemmaError::Sampler(format!(
                "spectral_decay must be >= 0, got {}",
                self.spectral_decay
            )));
        }
        if self.n_samples < 100 {
            return Err(LemmaError::Sampler(format!(
                "n_samples must be >= 100, got {}",
                self.n_samples
            )));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn with_decay(&self, spectral_decay: f64) -> Self {
        Self {
            spectral_decay,
            ..self.clone()
        }
    }

    /// Seed of the `stream`-th independent draw derived from `self.seed`.
    pub fn derived_seed(&self, stream: u64) -> u64 {
        // splitmix64 finalizer
        let mut z = self
            .seed
            .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Highest populated mode index for `cfg` on `grid`.
pub fn band_limit(cfg: &SamplerConfig, grid: GridSpec) -> usize {
    (cfg.band_fraction * (grid.n_points() / 2) as f64).floor() as usize
}

/// Seeded random real field with modes `|j| ≤ band_fraction·N/2`, complex
/// Gaussian amplitudes damped by `(1 + ξ²)^{-decay/2}`, unit `L²` norm.
pub fn random_bandlimited(cfg: &SamplerConfig, grid: GridSpec) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let jmax = band_limit(cfg, grid) as i64;
    let mut spec = Spectrum::zeros(grid);
    for j in 0..=jmax {
        let xi = 2.0 * std::f64::consts::PI * j as f64 / grid.length();
        let damp = (1.0 + xi * xi).powf(-cfg.spectral_decay / 2.0);
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        if j == 0 {
            spec.coeffs_mut()[0] = Complex64::new(re * damp, 0.0);
        } else {
            let c = Complex64::new(re, im) * damp;
            spec.coeffs_mut()[grid.position_of(j)] = c;
            spec.coeffs_mut()[grid.position_of(-j)] = c.conj();
        }
    }
    let norm = spec.weighted_energy(|_| 1.0).sqrt();
    if norm > 0.0 {
        for c in spec.coeffs_mut() {
            *c /= norm;
        }
    }
    spec.to_field_unchecked()
}

/// Worst-case ratio of one inequality at two resolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub lemma: LemmaId,
    pub parameters: Vec<(&'static str, f64)>,
    pub n_samples: usize,
    pub max_ratio: f64,
    pub ratio_at_double_resolution: f64,
    pub stable: bool,
    /// Per-bin `(upper edge of ‖u‖_∞, max ratio, envelope)`; composition only.
    pub envelope: Option<Vec<(f64, f64, f64)>>,
}

/// Maximum relative change of the worst ratio between `N` and `2N`.
pub const STABILITY_TOLERANCE: f64 = 0.05;

fn is_stable(a: f64, b: f64) -> bool {
    if !(a.is_finite() && b.is_finite()) {
        return false;
    }
    if a == 0.0 {
        return b == 0.0;
    }
    (b - a).abs() <= STABILITY_TOLERANCE * a
}

impl RatioReport {
    pub fn relative_change(&self) -> f64 {
        if self.max_ratio == 0.0 {
            if self.ratio_at_double_resolution == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.ratio_at_double_resolution - self.max_ratio).abs() / self.max_ratio
        }
    }

    pub fn passed(&self) -> bool {
        self.stable && self.max_ratio.is_finite() && self.max_ratio >= 0.0
    }
}

impl fmt::Display for RatioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self
            .parameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        write!(
            f,
            "lemma={} params=[{}] n_samples={} max_ratio={:.6e} max_ratio_2n={:.6e} change={:.3e} stable={}",
            self.lemma,
            params.join(","),
            self.n_samples,
            self.max_ratio,
            self.ratio_at_double_resolution,
            self.relative_change(),
            self.stable
        )
    }
}

/// Ratio with a zero-denominator filter.
fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 1e-300).then(|| num / den)
}

fn product(f: &Field, g: &Field) -> Field {
    dealiased_product(&[f, g], 2).expect("factors share a grid")
}

fn commutator_lambda(n: f64, f: &Field, g: &Field) -> Field {
    apply_lambda(&product(f, g), n).axpy(-1.0, &product(f, &apply_lambda(g, n)))
}

fn max_of(values: impl ParallelIterator<Item = Option<f64>>) -> f64 {
    values.flatten().reduce(|| 0.0, f64::max)
}

/// Max ratio over sample pairs `(f_i, g_i)` drawn on `grid`.
fn pair_study<R>(cfg: &SamplerConfig, grid: GridSpec, ratio_of: R) -> f64
where
    R: Fn(&Field, &Field) -> Option<f64> + Sync,
{
    max_of((0..cfg.n_samples).into_par_iter().map(|i| {
        let f = random_bandlimited(&cfg.with_seed(cfg.derived_seed(2 * i as u64)), grid);
        let g = random_bandlimited(&cfg.with_seed(cfg.derived_seed(2 * i as u64 + 1)), grid);
        ratio_of(&f, &g)
    }))
}

fn two_resolution_report<R>(
    lemma: LemmaId,
    parameters: Vec<(&'static str, f64)>,
    cfg: &SamplerConfig,
    grid: GridSpec,
    ratio_of: R,
) -> Result<RatioReport, LemmaError>
where
    R: Fn(&Field, &Field) -> Option<f64> + Sync,
{
    cfg.validate()?;
    let max_ratio = pair_study(cfg, grid, &ratio_of);
    let ratio_at_double_resolution = pair_study(cfg, grid.refined(2)?, &ratio_of);
    Ok(RatioReport {
        lemma,
        parameters,
        n_samples: cfg.n_samples,
        max_ratio,
        ratio_at_double_resolution,
        stable: is_stable(max_ratio, ratio_at_double_resolution),
        envelope: None,
    })
}

fn hypothesis(lemma: LemmaId, ok: bool, detail: impl FnOnce() -> String) -> Result<(), LemmaError> {
    if ok {
        Ok(())
    } else {
        Err(LemmaError::Hypothesis {
            lemma,
            detail: detail(),
        })
    }
}

/// Sobolev index of the left-hand side of the fractional Leibniz rule.
fn leibniz_target(alpha: f64, beta: f64) -> f64 {
    if beta > 0.5 {
        alpha
    } else {
        alpha + beta - 0.5
    }
}

/// Fractional Leibniz ratio for one pair.
pub fn leibniz_ratio(alpha: f64, beta: f64, f: &Field, g: &Field) -> Option<f64> {
    let lhs = sobolev_norm(&product(f, g), leibniz_target(alpha, beta));
    ratio(lhs, sobolev_norm(f, beta) * sobolev_norm(g, alpha))
}

/// `‖fg‖_{H^γ} ≤ c ‖f‖_{H^β} ‖g‖_{H^α}` for `-β < α ≤ β`, with `γ = α` when
/// `β > 1/2` and `γ = α + β - 1/2` when `β < 1/2`.
pub fn check_fractional_leibniz(
    alpha: f64,
    beta: f64,
    cfg: &SamplerConfig,
    grid: GridSpec,
) -> Result<RatioReport, LemmaError> {
    let id = LemmaId::FractionalLeibniz;
    hypothesis(id, -beta < alpha && alpha <= beta, || {
        format!("need -β < α ≤ β, got α = {alpha}, β = {beta}")
    })?;
    hypothesis(id, beta != 0.5, || "β = 1/2 is excluded".into())?;
    two_resolution_report(
        id,
        vec![("alpha", alpha), ("beta", beta)],
        cfg,
        grid,
        |f, g| leibniz_ratio(alpha, beta, f, g),
    )
}

pub fn commutator_lambda_ratio(
    n: f64,
    s_tilde: f64,
    sigma: f64,
    f: &Field,
    g: &Field,
) -> Option<f64> {
    let lhs = sobolev_norm(&commutator_lambda(n, f, g), s_tilde);
    ratio(
        lhs,
        sobolev_norm(f, sigma) * sobolev_norm(g, s_tilde + n - 1.0),
    )
}

/// `‖[Λⁿ, f]g‖_{H^{s̃}} ≤ c ‖f‖_{H^σ} ‖g‖_{H^{s̃+n-1}}` for `n > 0`, `s̃ ≥ 0`,
/// `3/2 < s̃ + n ≤ σ`.
pub fn check_commutator_lambda(
    n: f64,
    s_tilde: f64,
    sigma: f64,
    cfg: &SamplerConfig,
    grid: GridSpec,
) -> Result<RatioReport, LemmaError> {
    let id = LemmaId::CommutatorLambda;
    hypothesis(id, n > 0.0 && s_tilde >= 0.0, || {
        format!("need n > 0 and s̃ ≥ 0, got n = {n}, s̃ = {s_tilde}")
    })?;
    hypothesis(id, 1.5 < s_tilde + n && s_tilde + n <= sigma, || {
        format!(
            "need 3/2 < s̃ + n ≤ σ, got s̃ + n = {}, σ = {sigma}",
            s_tilde + n
        )
    })?;
    two_resolution_report(
        id,
        vec![("n", n), ("s_tilde", s_tilde), ("sigma", sigma)],
        cfg,
        grid,
        |f, g| commutator_lambda_ratio(n, s_tilde, sigma, f, g),
    )
}

pub fn kato_ponce_ratio(r: f64, f: &Field, g: &Field) -> Option<f64> {
    let lhs = lp_norm(&commutator_lambda(r, f, g), Lp::Two);
    let rhs = lp_norm(&derivative(f, 1), Lp::Inf) * sobolev_norm(g, r - 1.0)
        + sobolev_norm(f, r) * lp_norm(g, Lp::Inf);
    ratio(lhs, rhs)
}

/// `‖[Λʳ, f]g‖_{L²} ≤ c (‖f_x‖_∞ ‖Λ^{r-1}g‖_{L²} + ‖Λʳf‖_{L²} ‖g‖_∞)`, `r > 0`.
pub fn check_kato_ponce(
    r: f64,
    cfg: &SamplerConfig,
    grid: GridSpec,
) -> Result<RatioReport, LemmaError> {
    let id = LemmaId::KatoPonce;
    hypothesis(id, r > 0.0, || format!("need r > 0, got {r}"))?;
    two_resolution_report(id, vec![("r", r)], cfg, grid, |f, g| {
        kato_ponce_ratio(r, f, g)
    })
}

pub fn algebra_ratio(r: f64, f: &Field, g: &Field) -> Option<f64> {
    let lhs = sobolev_norm(&product(f, g), r);
    let rhs = lp_norm(f, Lp::Inf) * sobolev_norm(g, r) + sobolev_norm(f, r) * lp_norm(g, Lp::Inf);
    ratio(lhs, rhs)
}

/// `‖fg‖_{H^r} ≤ c (‖f‖_∞ ‖g‖_{H^r} + ‖f‖_{H^r} ‖g‖_∞)`, `r > 0`.
pub fn check_algebra(
    r: f64,
    cfg: &SamplerConfig,
    grid: GridSpec,
) -> Result<RatioReport, LemmaError> {
    let id = LemmaId::Algebra;
    hypothesis(id, r > 0.0, || format!("need r > 0, got {r}"))?;
    two_resolution_report(id, vec![("r", r)], cfg, grid, |f, g| algebra_ratio(r, f, g))
}

/// `F(u)` for a polynomial with zero constant term, alias-free on the grid.
pub fn compose(coeffs: &[f64], u: &Field) -> Field {
    let mut out = Field::zeros(u.grid());
    let mut power = u.clone();
    for (i, &c) in coeffs.iter().enumerate().skip(1) {
        if i > 1 {
            let factors: Vec<&Field> = std::iter::repeat_n(u, i).collect();
            power = dealiased_product(&factors, i).expect("factors share a grid");
        }
        if c != 0.0 {
            out = out.axpy(c, &power);
        }
    }
    out
}

pub fn composition_ratio(coeffs: &[f64], r: f64, u: &Field) -> Option<f64> {
    ratio(sobolev_norm(&compose(coeffs, u), r), sobolev_norm(u, r))
}

/// Number of `‖u‖_∞` bins of the composition envelope.
pub const COMPOSITION_BINS: usize = 8;

/// Largest sample amplitude used by the composition check.
pub const COMPOSITION_MAX_AMPLITUDE: f64 = 2.0;

fn composition_samples(
    coeffs: &[f64],
    r: f64,
    cfg: &SamplerConfig,
    grid: GridSpec,
) -> Vec<(f64, f64)> {
    (0..cfg.n_samples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.derived_seed(2 * i as u64 + 1));
            let amp = Uniform::new_inclusive(0.0, COMPOSITION_MAX_AMPLITUDE)
                .expect("valid range")
                .sample(&mut rng);
            let u = random_bandlimited(&cfg.with_seed(cfg.derived_seed(2 * i as u64)), grid)
                .scaled(amp);
            composition_ratio(coeffs, r, &u).map(|q| (u.max_abs(), q))
        })
        .collect()
}

/// Per-bin maxima of the ratio over `[0, edge_max]` and their running max.
fn envelope(samples: &[(f64, f64)], edge_max: f64) -> Vec<(f64, f64, f64)> {
    let width = edge_max / COMPOSITION_BINS as f64;
    let mut bins = [0.0_f64; COMPOSITION_BINS];
    for &(sup, q) in samples {
        let b = ((sup / width) as usize).min(COMPOSITION_BINS - 1);
        bins[b] = bins[b].max(q);
    }
    let mut running = 0.0_f64;
    bins.iter()
        .enumerate()
        .map(|(b, &q)| {
            running = running.max(q);
            ((b + 1) as f64 * width, q, running)
        })
        .collect()
}

/// `‖F(u)‖_{H^r} ≤ F̃(‖u‖_∞) ‖u‖_{H^r}` with `F̃` increasing, for `r > 1/2`
/// and `F(0) = 0`.
///
/// Samples are scaled by amplitudes uniform in `[0, 2]` and binned by
/// `‖u‖_∞`; the envelope is the running maximum of the per-bin maxima.
pub fn check_composition(
    g_coeffs: &[f64],
    r: f64,
    cfg: &SamplerConfig,
    grid: GridSpec,
) -> Result<RatioReport, LemmaError> {
    let id = LemmaId::Composition;
    hypothesis(id, r > 0.5, || format!("need r > 1/2, got {r}"))?;
    hypothesis(id, g_coeffs.first().is_none_or(|&c| c == 0.0), || {
        "F must vanish at 0".into()
    })?;
    cfg.validate()?;
    let coarse = composition_samples(g_coeffs, r, cfg, grid);
    let fine = composition_samples(g_coeffs, r, cfg, grid.refined(2)?);
    let max_ratio = coarse.iter().map(|s| s.1).fold(0.0, f64::max);
    let ratio_at_double_resolution = fine.iter().map(|s| s.1).fold(0.0, f64::max);
    let edge_max = coarse
        .iter()
        .map(|s| s.0)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let env = envelope(&coarse, edge_max);
    let envelope_ok = env.iter().all(|&(_, q, e)| q.is_finite() && q <= e);
    let mut parameters = vec![("r", r)];
    parameters.extend(
        g_coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| (POWER_NAMES[i.min(POWER_NAMES.len() - 1)], c)),
    );
    Ok(RatioReport {
        lemma: id,
        parameters,
        n_samples: cfg.n_samples,
        max_ratio,
        ratio_at_double_resolution,
        stable: envelope_ok && is_stable(max_ratio, ratio_at_double_resolution),
        envelope: Some(env),
    })
}

const POWER_NAMES: [&str; 8] = ["c0", "c1", "c2", "c3", "c4", "c5", "c6", "c_hi"];

/// Local Lipschitz ratio `‖f(u) - f(v)‖_{H^{s-1}} / ‖u - v‖_{H^{s-1}}`.
pub fn lipschitz_ratio(params: &ModelParams, s: f64, u: &Field, v: &Field) -> Option<f64> {
    let fu = nonlinearity_f(u, params).ok()?;
    let fv = nonlinearity_f(v, params).ok()?;
    ratio(
        sobolev_norm(&fu.axpy(-1.0, &fv), s - 1.0),
        sobolev_norm(&u.axpy(-1.0, v), s - 1.0),
    )
}

/// Spot check of the local `H^{s-1}` Lipschitz property of `f` on pairs
/// inside the `H^s` ball of radius 1.
pub fn check_nonlinearity_lipschitz(
    params: &ModelParams,
    s: f64,
    cfg: &SamplerConfig,
    grid: GridSpec,
) -> Result<RatioReport, LemmaError> {
    let in_ball = |w: &Field, seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radius: f64 = Uniform::new(0.0, 1.0)
            .expect("valid range")
            .sample(&mut rng);
        let norm = sobolev_norm(w, s);
        w.scaled(radius / norm.max(f64::MIN_POSITIVE))
    };
    let study = |grid: GridSpec| {
        max_of((0..cfg.n_samples).into_par_iter().map(|i| {
            let i = i as u64;
            let u = random_bandlimited(&cfg.with_seed(cfg.derived_seed(4 * i)), grid);
            let v = random_bandlimited(&cfg.with_seed(cfg.derived_seed(4 * i + 1)), grid);
            let u = in_ball(&u, cfg.derived_seed(4 * i + 2));
            let v = in_ball(&v, cfg.derived_seed(4 * i + 3));
            lipschitz_ratio(params, s, &u, &v)
        }))
    };
    cfg.validate()?;
    let max_ratio = study(grid);
    let ratio_at_double_resolution = study(grid.refined(2)?);
    Ok(RatioReport {
        lemma: LemmaId::NonlinearityLipschitz,
        parameters: vec![
            ("k", params.k() as f64),
            ("p", params.p() as f64),
            ("b", params.b()),
            ("s", s),
        ],
        n_samples: cfg.n_samples,
        max_ratio,
        ratio_at_double_resolution,
        stable: is_stable(max_ratio, ratio_at_double_resolution),
        envelope: None,
    })
}

/// One inequality instantiation.
#[derive(Debug, Clone, PartialEq)]
pub enum LemmaCase {
    Leibniz { alpha: f64, beta: f64 },
    Commutator { n: f64, s_tilde: f64, sigma: f64 },
    KatoPonce { r: f64 },
    Algebra { r: f64 },
    Composition { g_coeffs: Vec<f64>, r: f64 },
}

/// Margin added to the largest Sobolev index of a case to obtain the sampler
/// decay, so that the modes added at `2N` carry a negligible share of every
/// norm in the ratio.
pub const DECAY_MARGIN: f64 = 2.0;

impl LemmaCase {
    /// Largest Sobolev index appearing in the inequality.
    pub fn max_index(&self) -> f64 {
        match self {
            LemmaCase::Leibniz { alpha, beta } => beta.max(alpha.abs()),
            LemmaCase::Commutator { sigma, .. } => *sigma,
            LemmaCase::KatoPonce { r } | LemmaCase::Algebra { r } => *r,
            LemmaCase::Composition { r, .. } => *r,
        }
    }

    pub fn run(&self, base: &SamplerConfig, grid: GridSpec) -> Result<RatioReport, LemmaError> {
        let cfg = base.with_decay(self.max_index().max(0.0) + DECAY_MARGIN);
        match self {
            LemmaCase::Leibniz { alpha, beta } => {
                check_fractional_leibniz(*alpha, *beta, &cfg, grid)
            }
            LemmaCase::Commutator { n, s_tilde, sigma } => {
                check_commutator_lambda(*n, *s_tilde, *sigma, &cfg, grid)
            }
            LemmaCase::KatoPonce { r } => check_kato_ponce(*r, &cfg, grid),
            LemmaCase::Algebra { r } => check_algebra(*r, &cfg, grid),
            LemmaCase::Composition { g_coeffs, r } => check_composition(g_coeffs, *r, &cfg, grid),
        }
    }

    /// Whether the case satisfies its inequality's hypotheses.
    pub fn is_admissible(&self) -> bool {
        match self {
            LemmaCase::Leibniz { alpha, beta } => -beta < *alpha && alpha <= beta && *beta != 0.5,
            LemmaCase::Commutator { n, s_tilde, sigma } => {
                *n > 0.0 && *s_tilde >= 0.0 && 1.5 < s_tilde + n && s_tilde + n <= *sigma
            }
            LemmaCase::KatoPonce { r } | LemmaCase::Algebra { r } => *r > 0.0,
            LemmaCase::Composition { g_coeffs, r } => {
                *r > 0.5 && g_coeffs.first().is_none_or(|&c| c == 0.0)
            }
        }
    }
}

/// Smallest phase-space index used for momentum order `k`.
pub fn default_sobolev_index(k: u32) -> f64 {
    2.0 * (k as f64 - 1.0) + 1.5 + 0.1
}

/// Instantiations used by the local theory for one `(k, p)` at index `s`.
///
/// Fractional Leibniz: `(s-2, s-1)` for every `k`; for `k ≥ 2` also
/// `(s-2k-1, s-1)`, `(s-2k, s-2)`, `(s-2k, s-j-1)` for `2 ≤ j ≤ 2k-1`, and
/// `(s-2k, s-1)`. Commutator: `(n, s̃, σ) = (s-1, 0, s)` and `(1, s-1, s)`.
/// Kato–Ponce at `r = s`, the algebra property at `r = s-1`, and the
/// composition estimate for `F(u) = u^p` at `r = s`. Instantiations whose
/// parameters fall outside an inequality's hypotheses are left out.
pub fn suite_for(k: u32, p: u32, s: f64) -> Vec<LemmaCase> {
    let kf = k as f64;
    let mut cases = vec![LemmaCase::Leibniz {
        alpha: s - 2.0,
        beta: s - 1.0,
    }];
    if k >= 2 {
        cases.push(LemmaCase::Leibniz {
            alpha: s - 2.0 * kf - 1.0,
            beta: s - 1.0,
        });
        cases.push(LemmaCase::Leibniz {
            alpha: s - 2.0 * kf,
            beta: s - 2.0,
        });
        for j in 2..2 * k {
            cases.push(LemmaCase::Leibniz {
                alpha: s - 2.0 * kf,
                beta: s - j as f64 - 1.0,
            });
        }
        cases.push(LemmaCase::Leibniz {
            alpha: s - 2.0 * kf,
            beta: s - 1.0,
        });
    }
    cases.push(LemmaCase::Commutator {
        n: s - 1.0,
        s_tilde: 0.0,
        sigma: s,
    });
    cases.push(LemmaCase::Commutator {
        n: 1.0,
        s_tilde: s - 1.0,
        sigma: s,
    });
    cases.push(LemmaCase::KatoPonce { r: s });
    cases.push(LemmaCase::Algebra { r: s - 1.0 });
    let mut power = vec![0.0; p as usize + 1];
    power[p as usize] = 1.0;
    cases.push(LemmaCase::Composition {
        g_coeffs: power,
        r: s,
    });
    dedup(cases.into_iter().filter(LemmaCase::is_admissible))
}

/// Rounds away the representation noise of `s - integer` so equal
/// instantiations compare equal.
fn tidy(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn tidied(case: LemmaCase) -> LemmaCase {
    match case {
        LemmaCase::Leibniz { alpha, beta } => LemmaCase::Leibniz {
            alpha: tidy(alpha),
            beta: tidy(beta),
        },
        LemmaCase::Commutator { n, s_tilde, sigma } => LemmaCase::Commutator {
            n: tidy(n),
            s_tilde: tidy(s_tilde),
            sigma: tidy(sigma),
        },
        LemmaCase::KatoPonce { r } => LemmaCase::KatoPonce { r: tidy(r) },
        LemmaCase::Algebra { r } => LemmaCase::Algebra { r: tidy(r) },
        LemmaCase::Composition { g_coeffs, r } => LemmaCase::Composition {
            g_coeffs,
            r: tidy(r),
        },
    }
}

fn dedup(cases: impl Iterator<Item = LemmaCase>) -> Vec<LemmaCase> {
    let mut out: Vec<LemmaCase> = Vec::new();
    for c in cases.map(tidied) {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// The full default suite: every `(k, p) ∈ {1,2,3}²` at the smallest
/// admissible index `s = 2(k-1) + 3/2 + 0.1`.
pub fn default_suite() -> Vec<LemmaCase> {
    dedup(
        (1..=3).flat_map(|k| (1..=3).flat_map(move |p| suite_for(k, p, default_sobolev_index(k)))),
    )
}

/// Runs each case independently; a rejected case does not affect the others.
pub fn run_cases(
    cases: &[LemmaCase],
    sampler: &SamplerConfig,
    grid: GridSpec,
) -> Vec<Result<RatioReport, LemmaError>> {
    cases.iter().map(|c| c.run(sampler, grid)).collect()
}
