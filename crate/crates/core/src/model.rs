//! The generalized Camassa–Holm family
//!
//! ```text
//! m_t + u^p m_x + b u^{p-1} u_x m = -(g(u))_x + (b+1) u^p u_x,   m = (1 - ∂²)^k u
//! ```
//!
//! and its nonlocal velocity form `u_t + u^p u_x = f(u)`.
//!
//! Two right-hand sides are provided. [`rhs_u_form`] evaluates the nonlocal
//! form through the commutator `[Γ, u^p] u_x` on a shared padded grid;
//! [`rhs_m_form`] evaluates `Γ^{-1} m_t` from the momentum equation using
//! only the public spectral building blocks. Their agreement is the standing
//! check on the reformulation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::spectral::{
    self, apply_gamma, dealiased_product, derivative, gamma_symbol, Field, ProductGrid,
    SpectralError, Spectrum,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite intermediate in {0}")]
    Overflow(&'static str),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `(k, p, b, g)` for one member of the family. `g(u) = Σ_{i>=1} g_i u^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    k: u32,
    p: u32,
    b: f64,
    g_coeffs: Vec<f64>,
}

impl ModelParams {
    /// `g_coeffs[i]` multiplies `u^i`; `g_coeffs[0]` must be zero.
    pub fn new(k: i64, p: i64, b: f64, g_coeffs: Vec<f64>) -> Result<Self, ModelError> {
        if k < 1 {
            return Err(ModelError::InvalidParams(format!(
                "k ≥ 1 required, got {k}"
            )));
        }
        if p < 1 {
            return Err(ModelError::InvalidParams(format!(
                "p ≥ 1 required, got {p}"
            )));
        }
        if !b.is_finite() {
            return Err(ModelError::InvalidParams(format!(
                "b must be finite, got {b}"
            )));
        }
        if let Some(&c0) = g_coeffs.first() {
            if c0 != 0.0 {
                return Err(ModelError::InvalidParams(format!(
                    "g must vanish at 0 (g_coeffs[0] = {c0})"
                )));
            }
        }
        if g_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::InvalidParams("g_coeffs must be finite".into()));
        }
        Ok(Self {
            k: k as u32,
            p: p as u32,
            b,
            g_coeffs,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn g_coeffs(&self) -> &[f64] {
        &self.g_coeffs
    }

    /// Same model with a different `g`.
    pub fn with_g(&self, g_coeffs: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(self.k as i64, self.p as i64, self.b, g_coeffs)
    }

    /// Degree of `g`, zero when `g ≡ 0`.
    pub fn g_degree(&self) -> usize {
        self.g_coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    /// Highest polynomial degree appearing in the right-hand side.
    pub fn nonlinear_degree(&self) -> usize {
        (self.p as usize + 1).max(self.g_degree())
    }

    /// `b = p + 1`: the balance under which `∫ u m` is conserved.
    pub fn is_conservative(&self) -> bool {
        self.b == self.p as f64 + 1.0
    }

    pub fn g_at(&self, z: f64) -> f64 {
        self.g_coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    pub fn g_prime_at(&self, z: f64) -> f64 {
        self.g_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * z + i as f64 * c)
    }
}

/// Named members of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    CamassaHolm,
    DegasperisProcesi,
    Novikov,
    HigherOrderK2,
    HigherOrderK3,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::CamassaHolm,
        Preset::DegasperisProcesi,
        Preset::Novikov,
        Preset::HigherOrderK2,
        Preset::HigherOrderK3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::CamassaHolm => "camassa_holm",
            Preset::DegasperisProcesi => "degasperis_procesi",
            Preset::Novikov => "novikov",
            Preset::HigherOrderK2 => "higher_order_k2",
            Preset::HigherOrderK3 => "higher_order_k3",
        }
    }

    /// `(k, p, b)`; every preset has `g = 0`.
    pub fn tuple(self) -> (u32, u32, f64) {
        match self {
            Preset::CamassaHolm => (1, 1, 2.0),
            Preset::DegasperisProcesi => (1, 1, 3.0),
            Preset::Novikov => (1, 2, 3.0),
            Preset::HigherOrderK2 => (2, 2, 3.0),
            Preset::HigherOrderK3 => (3, 2, 3.0),
        }
    }

    pub fn params(self) -> ModelParams {
        let (k, p, b) = self.tuple();
        ModelParams::new(k as i64, p as i64, b, Vec::new()).expect("preset tuples are valid")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ModelError::InvalidParams(format!("unknown preset {s:?}")))
    }
}

/// `m = Γ u`.
pub fn momentum(u: &Field, params: &ModelParams) -> Field {
    apply_gamma(u, params.k as i64, false).expect("k >= 1 by construction")
}

/// `u = Γ^{-1} m`.
pub fn velocity_from_momentum(m: &Field, params: &ModelParams) -> Field {
    apply_gamma(m, params.k as i64, true).expect("k >= 1 by construction")
}

pub fn g_eval(u: &Field, params: &ModelParams) -> Field {
    u.map(|z| params.g_at(z))
}

pub fn g_prime_eval(u: &Field, params: &ModelParams) -> Field {
    u.map(|z| params.g_prime_at(z))
}

/// Spectra of the alias-free products shared by the nonlocal form.
struct ProductTerms {
    /// `P(u^p u_x)`
    advect: Spectrum,
    /// `P(u^p Γu_x)`
    advect_m: Spectrum,
    /// `P(u^{p-1} u_x Γu)`
    stretch: Spectrum,
    /// `P(g(u))`
    g: Option<Spectrum>,
}

fn product_terms(u: &Field, params: &ModelParams) -> Result<ProductTerms, ModelError> {
    let grid = u.grid();
    let u_hat = spectral::forward_transform(u)?;
    let mut ux_hat = u_hat.clone();
    ux_hat.differentiate(1);
    let mut m_hat = u_hat.clone();
    m_hat.apply_symbol(gamma_symbol(params.k, false));
    let mut mx_hat = ux_hat.clone();
    mx_hat.apply_symbol(gamma_symbol(params.k, false));

    let pg = ProductGrid::new(grid, params.nonlinear_degree());
    let uf = pg.pad(&u_hat);
    let uxf = pg.pad(&ux_hat);
    let mf = pg.pad(&m_hat);
    let mxf = pg.pad(&mx_hat);

    let p = params.p as i32;
    let len = pg.fine_len();
    let mut advect = Vec::with_capacity(len);
    let mut advect_m = Vec::with_capacity(len);
    let mut stretch = Vec::with_capacity(len);
    for i in 0..len {
        let lower = uf[i].powi(p - 1);
        let upper = lower * uf[i];
        advect.push(upper * uxf[i]);
        advect_m.push(upper * mxf[i]);
        stretch.push(lower * uxf[i] * mf[i]);
    }
    let all_finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    if !(all_finite(&advect) && all_finite(&advect_m) && all_finite(&stretch)) {
        return Err(ModelError::Overflow("nonlinear products"));
    }
    let g = if params.g_degree() > 0 {
        let gv: Vec<f64> = uf.iter().map(|&z| params.g_at(z)).collect();
        if !all_finite(&gv) {
            return Err(ModelError::Overflow("g(u)"));
        }
        Some(pg.project(&gv))
    } else {
        None
    };
    Ok(ProductTerms {
        advect: pg.project(&advect),
        advect_m: pg.project(&advect_m),
        stretch: pg.project(&stretch),
        g,
    })
}

fn commutator_spectrum(terms: &ProductTerms, params: &ModelParams) -> Spectrum {
    let mut comm = terms.advect.clone();
    comm.apply_symbol(gamma_symbol(params.k, false));
    comm.sub_assign(&terms.advect_m);
    comm
}

fn f_spectrum(terms: &ProductTerms, params: &ModelParams) -> Spectrum {
    let mut acc = commutator_spectrum(terms, params);
    acc.add_scaled(-params.b, &terms.stretch);
    if let Some(g) = &terms.g {
        let mut gx = g.clone();
        gx.differentiate(1);
        acc.sub_assign(&gx);
    }
    acc.add_scaled(params.b + 1.0, &terms.advect);
    acc.apply_symbol(gamma_symbol(params.k, true));
    acc
}

fn finite_or(f: Field, what: &'static str) -> Result<Field, ModelError> {
    if f.is_finite() {
        Ok(f)
    } else {
        Err(ModelError::Overflow(what))
    }
}

/// `[Γ, u^p] u_x = Γ(u^p u_x) - u^p Γ(u_x)`.
pub fn commutator_gamma(u: &Field, params: &ModelParams) -> Result<Field, ModelError> {
    let terms = product_terms(u, params)?;
    finite_or(
        commutator_spectrum(&terms, params).to_field_unchecked(),
        "commutator",
    )
}

/// `f(u) = Γ^{-1}([Γ,u^p]u_x - b u^{p-1}u_x Γu - (g(u))_x + (b+1) u^p u_x)`.
pub fn nonlinearity_f(u: &Field, params: &ModelParams) -> Result<Field, ModelError> {
    let terms = product_terms(u, params)?;
    finite_or(f_spectrum(&terms, params).to_field_unchecked(), "f(u)")
}

/// `u_t = -u^p u_x + f(u)`.
pub fn rhs_u_form(u: &Field, params: &ModelParams) -> Result<Field, ModelError> {
    let terms = product_terms(u, params)?;
    let mut rhs = f_spectrum(&terms, params);
    rhs.sub_assign(&terms.advect);
    finite_or(rhs.to_field_unchecked(), "u-form right-hand side")
}

fn power_product(u: &Field, extra: &[&Field], power: usize) -> Result<Field, ModelError> {
    let mut factors: Vec<&Field> = std::iter::repeat_n(u, power).collect();
    factors.extend_from_slice(extra);
    Ok(match factors.len() {
        0 => Field::constant(u.grid(), 1.0),
        1 => factors[0].clone(),
        d => dealiased_product(&factors, d)?,
    })
}

/// `Γ^{-1} m_t` with `m_t` taken from the momentum equation.
pub fn rhs_m_form(u: &Field, params: &ModelParams) -> Result<Field, ModelError> {
    let p = params.p as usize;
    let m = momentum(u, params);
    let mx = derivative(&m, 1);
    let ux = derivative(u, 1);

    let advect_m = power_product(u, &[&mx], p)?;
    let stretch = power_product(u, &[&ux, &m], p - 1)?;
    let advect = power_product(u, &[&ux], p)?;

    let mut mt = advect_m.scaled(-1.0);
    mt = mt.axpy(-params.b, &stretch);
    mt = mt.axpy(params.b + 1.0, &advect);
    if params.g_degree() > 0 {
        let mut g = Field::zeros(u.grid());
        for (i, &c) in params.g_coeffs.iter().enumerate().skip(1) {
            if c != 0.0 {
                g = g.axpy(c, &power_product(u, &[], i)?);
            }
        }
        mt = mt.axpy(-1.0, &derivative(&g, 1));
    }
    finite_or(
        velocity_from_momentum(&mt, params),
        "m-form right-hand side",
    )
}

/// Alias-free `u^p u_x`.
pub(crate) fn advection_product(u: &Field, params: &ModelParams) -> Result<Field, ModelError> {
    let terms = product_terms(u, params)?;
    Ok(terms.advect.to_field_unchecked())
}
