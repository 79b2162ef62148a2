//! Fourier-multiplier calculus on a uniform periodic grid.
//!
//! Coefficients follow the convention `f(x_i) = Σ_j c_j exp(i ξ_j x_i)` with
//! `ξ_j = 2π j / L`, so `c_0` is the mean of the samples. Coefficients are
//! stored in FFT order: `j = 0, 1, …, N/2 − 1, −N/2, …, −1`.
//!
//! Sobolev norms use the Parseval form `‖f‖_{H^s}² = L Σ_j (1 + ξ_j²)^s |c_j|²`,
//! which makes `‖f‖_{H^s} = ‖Λ^s f‖_{L²}` hold exactly.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid must have a power-of-two point count >= 8, got {0}")]
    BadPointCount(usize),
    #[error("domain length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("spectrum is not Hermitian: imaginary residue {residue:e} exceeds {tolerance:e}")]
    NotHermitian { residue: f64, tolerance: f64 },
    #[error("Γ order must be >= 1, got {0}")]
    BadGammaOrder(i64),
    #[error("unsupported Lebesgue exponent {0}; expected 1, 2 or infinity")]
    UnsupportedExponent(f64),
    #[error("factors live on different grids")]
    GridMismatch,
    #[error("product needs at least two factors and total_degree >= factor count (got {factors} factors, degree {degree})")]
    BadProductDegree { factors: usize, degree: usize },
}

/// Uniform periodic grid on `[0, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n_points: usize,
    length: f64,
}

impl GridSpec {
    pub fn new(n_points: usize, length: f64) -> Result<Self, SpectralError> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(SpectralError::BadPointCount(n_points));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(SpectralError::BadLength(length));
        }
        Ok(Self { n_points, length })
    }

    /// The standard `2π`-periodic grid.
    pub fn periodic_2pi(n_points: usize) -> Result<Self, SpectralError> {
        Self::new(n_points, 2.0 * PI)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Signed integer mode index stored at FFT position `idx`.
    pub fn mode_index(&self, idx: usize) -> i64 {
        let n = self.n_points as i64;
        let i = idx as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT position of signed mode `j` (`-N/2 <= j < N/2`).
    pub fn position_of(&self, j: i64) -> usize {
        j.rem_euclid(self.n_points as i64) as usize
    }

    pub fn wavenumber(&self, idx: usize) -> f64 {
        2.0 * PI * self.mode_index(idx) as f64 / self.length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.wavenumber(i)).collect()
    }

    pub fn nyquist_position(&self) -> usize {
        self.n_points / 2
    }

    /// Sample abscissae `x_i = i L / N`.
    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_points).map(|i| i as f64 * dx).collect()
    }

    /// Same domain, refined by `factor` (a power of two).
    pub fn refined(&self, factor: usize) -> Result<Self, SpectralError> {
        Self::new(self.n_points * factor, self.length)
    }
}

/// Real samples of a periodic function.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    /// Validated constructor: rejects wrong lengths and non-finite samples.
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.n_points {
            return Err(SpectralError::LengthMismatch {
                expected: grid.n_points,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    /// Unvalidated constructor; the time stepper uses it to carry blown-up
    /// states so that breaking can be reported instead of panicking.
    pub fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n_points, "sample count must match grid");
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_raw(grid, vec![0.0; grid.n_points])
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.n_points])
    }

    /// Samples `f(x_i)` on the grid.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self::from_raw(grid, values)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self + a * other` sample-wise.
    pub fn axpy(&self, a: f64, other: &Field) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x + a * y)
            .collect();
        Field::from_raw(self.grid, values)
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|v| a * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Uniform-grid quadrature of `∫ self · other dx`.
    pub fn inner(&self, other: &Field) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        s * self.grid.dx()
    }

    /// Uniform-grid quadrature of `∫ self dx`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }
}

/// Fourier coefficients of a field, in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.n_points {
            return Err(SpectralError::LengthMismatch {
                expected: grid.n_points,
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_points],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of signed mode `j`.
    pub fn mode(&self, j: i64) -> Complex64 {
        self.coeffs[self.grid.position_of(j)]
    }

    /// Mode-wise multiplication by a real symbol `m(ξ)`.
    pub fn apply_symbol(&mut self, symbol: impl Fn(f64) -> f64) {
        let grid = self.grid;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c *= symbol(grid.wavenumber(i));
        }
    }

    /// Multiplication by `(iξ)^order`; the Nyquist coefficient is cleared for
    /// odd orders.
    pub fn differentiate(&mut self, order: u32) {
        if order == 0 {
            return;
        }
        let grid = self.grid;
        let unit = Complex64::new(0.0, 1.0).powu(order);
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let xi = grid.wavenumber(i);
            *c *= unit * xi.powi(order as i32);
        }
        if order % 2 == 1 {
            self.coeffs[grid.nyquist_position()] = Complex64::new(0.0, 0.0);
        }
    }

    pub fn sub_assign(&mut self, other: &Spectrum) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
    }

    pub fn add_scaled(&mut self, a: f64, other: &Spectrum) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    /// `L Σ_j w(ξ_j) |c_j|²`.
    pub fn weighted_energy(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let grid = self.grid;
        let s: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| weight(grid.wavenumber(i)) * c.norm_sqr())
            .sum();
        s * grid.length
    }

    /// Largest Hermitian-symmetry defect `|c_{-j} - conj(c_j)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n_points;
        let mut worst = self.coeffs[0].im.abs().max(self.coeffs[n / 2].im.abs());
        for i in 1..n / 2 {
            let d = (self.coeffs[n - i] - self.coeffs[i].conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Synthesizes samples taking the real part of the inverse transform.
    pub(crate) fn to_field_unchecked(&self) -> Field {
        let mut buf = self.coeffs.clone();
        plan(self.grid.n_points, Direction::Inverse).process(&mut buf);
        Field::from_raw(self.grid, buf.into_iter().map(|c| c.re).collect())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

thread_local! {
    // Plans are cached per thread; the planner picks the same algorithm for
    // a given size everywhere, so results do not depend on the calling thread.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    })
}

pub(crate) fn spectrum_of(values: &[f64], grid: GridSpec) -> Spectrum {
    let n = grid.n_points;
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(n, Direction::Forward).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    Spectrum { grid, coeffs: buf }
}

pub fn forward_transform(f: &Field) -> Result<Spectrum, SpectralError> {
    if let Some(i) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite(i));
    }
    Ok(spectrum_of(&f.values, f.grid))
}

pub fn inverse_transform(s: &Spectrum) -> Result<Field, SpectralError> {
    let scale: f64 = s.coeffs.iter().map(|c| c.norm()).sum();
    let tolerance = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let residue = s.hermitian_defect();
    if !(residue <= tolerance) {
        return Err(SpectralError::NotHermitian { residue, tolerance });
    }
    let f = s.to_field_unchecked();
    if let Some(i) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite(i));
    }
    Ok(f)
}

pub(crate) fn lambda_symbol(s: f64) -> impl Fn(f64) -> f64 {
    move |xi| (1.0 + xi * xi).powf(s / 2.0)
}

/// `Λ^s f` with `Λ = (1 - ∂²)^{1/2}`.
pub fn apply_lambda(f: &Field, s: f64) -> Field {
    if s == 0.0 {
        return f.clone();
    }
    let mut spec = spectrum_of(&f.values, f.grid);
    spec.apply_symbol(lambda_symbol(s));
    spec.to_field_unchecked()
}

pub(crate) fn gamma_symbol(k: u32, inverse: bool) -> impl Fn(f64) -> f64 {
    move |xi| {
        let base = (1.0 + xi * xi).powi(k as i32);
        if inverse {
            1.0 / base
        } else {
            base
        }
    }
}

/// `Γ f = (1 - ∂²)^k f`, or `Γ^{-1} f` when `inverse` is set.
pub fn apply_gamma(f: &Field, k: i64, inverse: bool) -> Result<Field, SpectralError> {
    if k < 1 {
        return Err(SpectralError::BadGammaOrder(k));
    }
    let mut spec = spectrum_of(&f.values, f.grid);
    spec.apply_symbol(gamma_symbol(k as u32, inverse));
    Ok(spec.to_field_unchecked())
}

/// Spectral derivative `∂^order f`; order 0 returns `f`.
pub fn derivative(f: &Field, order: u32) -> Field {
    if order == 0 {
        return f.clone();
    }
    let mut spec = spectrum_of(&f.values, f.grid);
    spec.differentiate(order);
    spec.to_field_unchecked()
}

pub fn sobolev_norm_of_spectrum(spec: &Spectrum, s: f64) -> f64 {
    spec.weighted_energy(|xi| (1.0 + xi * xi).powf(s)).sqrt()
}

pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    sobolev_norm_of_spectrum(&spectrum_of(&f.values, f.grid), s)
}

/// Supported Lebesgue exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lp {
    One,
    Two,
    Inf,
}

impl TryFrom<f64> for Lp {
    type Error = SpectralError;

    fn try_from(p: f64) -> Result<Self, Self::Error> {
        if p == 1.0 {
            Ok(Lp::One)
        } else if p == 2.0 {
            Ok(Lp::Two)
        } else if p == f64::INFINITY {
            Ok(Lp::Inf)
        } else {
            Err(SpectralError::UnsupportedExponent(p))
        }
    }
}

pub fn lp_norm(f: &Field, p: Lp) -> f64 {
    let dx = f.grid.dx();
    match p {
        Lp::One => f.values.iter().map(|v| v.abs()).sum::<f64>() * dx,
        Lp::Two => (f.values.iter().map(|v| v * v).sum::<f64>() * dx).sqrt(),
        Lp::Inf => f.max_abs(),
    }
}

/// Size of the zero-padded grid that evaluates degree-`degree` products of
/// fields on `n` points without aliasing into the retained band.
pub fn padded_size(n: usize, degree: usize) -> usize {
    let factor = (degree + 2) / 2; // ceil((degree + 1) / 2)
    (factor * n).next_power_of_two()
}

/// Zero-padding transfer between a coarse grid and its product grid.
#[derive(Debug, Clone, Copy)]
pub struct ProductGrid {
    coarse: GridSpec,
    fine_n: usize,
}

impl ProductGrid {
    pub fn new(coarse: GridSpec, degree: usize) -> Self {
        Self {
            coarse,
            fine_n: padded_size(coarse.n_points, degree.max(2)),
        }
    }

    pub fn fine_len(&self) -> usize {
        self.fine_n
    }

    /// Samples of the band-limited interpolant on the fine grid. The coarse
    /// Nyquist coefficient is split evenly between modes `±N/2`.
    pub fn pad(&self, spec: &Spectrum) -> Vec<f64> {
        let n = self.coarse.n_points;
        let m = self.fine_n;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[..n / 2].copy_from_slice(&spec.coeffs[..n / 2]);
        for i in 1..n / 2 {
            buf[m - i] = spec.coeffs[n - i];
        }
        let nyq = spec.coeffs[n / 2] * 0.5;
        buf[n / 2] = nyq;
        buf[m - n / 2] = nyq;
        plan(m, Direction::Inverse).process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Projection of fine-grid samples onto the symmetric band `|j| < N/2`.
    /// The Nyquist coefficient is discarded, so `∫ v·P(w) = ∫ v·w` holds for
    /// every `v` without a Nyquist component.
    pub fn project(&self, values: &[f64]) -> Spectrum {
        let n = self.coarse.n_points;
        let m = self.fine_n;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        plan(m, Direction::Forward).process(&mut buf);
        let scale = 1.0 / m as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n / 2 {
            out[i] = buf[i] * scale;
        }
        for i in 1..n / 2 {
            out[n - i] = buf[m - i] * scale;
        }
        Spectrum {
            grid: self.coarse,
            coeffs: out,
        }
    }
}

/// Alias-free pointwise product of `factors`, padded for a product of
/// `total_degree`.
pub fn dealiased_product(factors: &[&Field], total_degree: usize) -> Result<Field, SpectralError> {
    if factors.len() < 2 || total_degree < factors.len() {
        return Err(SpectralError::BadProductDegree {
            factors: factors.len(),
            degree: total_degree,
        });
    }
    let grid = factors[0].grid;
    if factors.iter().any(|f| f.grid != grid) {
        return Err(SpectralError::GridMismatch);
    }
    let pg = ProductGrid::new(grid, total_degree);
    let mut acc = pg.pad(&spectrum_of(&factors[0].values, grid));
    for f in &factors[1..] {
        let padded = pg.pad(&spectrum_of(&f.values, grid));
        for (a, b) in acc.iter_mut().zip(padded) {
            *a *= b;
        }
    }
    Ok(pg.project(&acc).to_field_unchecked())
}
