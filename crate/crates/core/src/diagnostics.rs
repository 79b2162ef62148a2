//! Conservation-law and growth-bound instrumentation.
//!
//! For `b = p + 1` the functional `I₁ = ∫ u m dx` is conserved. Integrating
//! by parts gives `I₁ = Σ_j C(k,j) ‖∂^j u‖²_{L²}`, and for general `b`
//!
//! ```text
//! dI₁/dt = 2 (p + 1 - b) ∫ u^p u_x m dx.
//! ```
//!
//! The momentum obeys the Gronwall envelope
//! `‖m(t)‖² ≤ (‖m₀‖² + L/K) e^{Kt} - L/K` with `K = (p+2) C_M^p + 1`,
//! `L = K₂²/4`, `K₂ = 2(p+2) C_M^{p+1} + 2 G_M M`.

use std::io::{self, Write};

use thiserror::Error;

use crate::model::{advection_product, momentum, ModelParams};
use crate::spectral::{self, derivative, lp_norm, sobolev_norm_of_spectrum, Field, Lp};
use crate::timestepper::SolverState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("history is empty")]
    EmptyHistory,
    #[error("growth bounds require b = p + 1 (got p = {p}, b = {b})")]
    NotConservative { p: u32, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub i1: f64,
    pub i1_sobolev_sum: f64,
    pub hs_norm: f64,
    pub hk_norm: f64,
    pub h2k_norm: f64,
    pub m_l2: f64,
    pub u_inf: f64,
    pub ux_inf: f64,
    pub di1_residual: f64,
    pub dt_used: f64,
}

impl DiagnosticsRecord {
    /// `|i1 - i1_sobolev_sum| / max(1, i1)`.
    pub fn identity_defect(&self) -> f64 {
        (self.i1 - self.i1_sobolev_sum).abs() / self.i1.max(1.0)
    }
}

pub const CSV_HEADER: &str =
    "t,i1,i1_sobolev_sum,hk_norm,h2k_norm,hs_norm,m_l2,u_inf,ux_inf,di1_residual,dt_used";

/// `I₁ = L Σ_j (1 + ξ_j²)^k |c_j|²`.
pub fn conserved_i1(u: &Field, params: &ModelParams) -> f64 {
    let spec = spectral::spectrum_of(u.values(), u.grid());
    let k = params.k() as i32;
    spec.weighted_energy(|xi| (1.0 + xi * xi).powi(k))
}

fn binomial(n: u32, r: u32) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Σ_{j=0}^k C(k,j) ‖∂^j u‖²_{L²}` by grid quadrature.
pub fn i1_sobolev_sum(u: &Field, params: &ModelParams) -> f64 {
    let k = params.k();
    (0..=k)
        .map(|j| binomial(k, j) * lp_norm(&derivative(u, j), Lp::Two).powi(2))
        .sum()
}

/// `2 (p + 1 - b) ∫ u^p u_x m dx`; identically zero when `b = p + 1`.
pub fn di1_residual(u: &Field, params: &ModelParams) -> f64 {
    let coeff = 2.0 * (params.p() as f64 + 1.0 - params.b());
    if coeff == 0.0 {
        return 0.0;
    }
    match advection_product(u, params) {
        Ok(advect) => coeff * advect.inner(&momentum(u, params)),
        Err(_) => f64::NAN,
    }
}

pub fn record(
    state: &SolverState,
    params: &ModelParams,
    s_monitor: f64,
    dt_used: f64,
) -> DiagnosticsRecord {
    let u = &state.u;
    let spec = spectral::spectrum_of(u.values(), u.grid());
    let k = params.k() as f64;
    DiagnosticsRecord {
        t: state.t,
        i1: conserved_i1(u, params),
        i1_sobolev_sum: i1_sobolev_sum(u, params),
        hs_norm: sobolev_norm_of_spectrum(&spec, s_monitor),
        hk_norm: sobolev_norm_of_spectrum(&spec, k),
        h2k_norm: sobolev_norm_of_spectrum(&spec, 2.0 * k),
        m_l2: lp_norm(&momentum(u, params), Lp::Two),
        u_inf: u.max_abs(),
        ux_inf: derivative(u, 1).max_abs(),
        di1_residual: di1_residual(u, params),
        dt_used,
    }
}

pub fn write_csv<W: Write>(mut out: W, history: &[DiagnosticsRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in history {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t,
            r.i1,
            r.i1_sobolev_sum,
            r.hk_norm,
            r.h2k_norm,
            r.hs_norm,
            r.m_l2,
            r.u_inf,
            r.ux_inf,
            r.di1_residual,
            r.dt_used
        )?;
    }
    Ok(())
}

/// Largest relative drift `|I₁(t) - I₁(0)| / max(1, I₁(0))` over a history.
pub fn i1_drift(history: &[DiagnosticsRecord]) -> Option<f64> {
    let first = history.first()?.i1;
    Some(
        history
            .iter()
            .map(|r| (r.i1 - first).abs() / first.max(1.0))
            .fold(0.0, f64::max),
    )
}

/// Constants of the momentum growth estimate, instantiated from run suprema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants {
    /// `sup max(‖u‖_∞, ‖u_x‖_∞)`
    pub c_m: f64,
    /// `sup_{|z| ≤ C_M} |g'(z)|`
    pub g_m: f64,
    /// `sup ‖u‖_{H^k}`
    pub m_bound: f64,
    pub k1: f64,
    pub k2: f64,
    pub k: f64,
    pub l: f64,
    pub c0: f64,
}

impl GrowthConstants {
    pub fn from_history(history: &[DiagnosticsRecord], params: &ModelParams) -> Self {
        let c_m = history
            .iter()
            .map(|r| r.u_inf.max(r.ux_inf))
            .fold(0.0, f64::max);
        let m_bound = history.iter().map(|r| r.hk_norm).fold(0.0, f64::max);
        let g_m = sup_abs_g_prime(params, c_m);
        let p = params.p() as f64;
        let k1 = (p + 2.0) * c_m.powf(p);
        let k2 = 2.0 * (p + 2.0) * c_m.powf(p + 1.0) + 2.0 * g_m * m_bound;
        let k = k1 + 1.0;
        Self {
            c_m,
            g_m,
            m_bound,
            k1,
            k2,
            k,
            l: k2 * k2 / 4.0,
            c0: k / 2.0,
        }
    }

    /// `(‖m₀‖² + L/K) e^{Kt} - L/K`.
    pub fn envelope(&self, t: f64, m0_l2: f64) -> f64 {
        m0_l2 * m0_l2 * (self.k * t).exp() + self.l / self.k * (self.k * t).exp_m1()
    }
}

/// `sup_{|z| ≤ r} |g'(z)|`, by dense sampling of the polynomial.
fn sup_abs_g_prime(params: &ModelParams, r: f64) -> f64 {
    if params.g_degree() <= 1 {
        return params.g_prime_at(0.0).abs();
    }
    const SAMPLES: usize = 4096;
    (0..=SAMPLES)
        .map(|i| {
            let z = -r + 2.0 * r * i as f64 / SAMPLES as f64;
            params.g_prime_at(z).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `(t, bound - observed)` per record.
    pub margins: Vec<(f64, f64)>,
    pub first_violation: Option<usize>,
    pub constants: GrowthConstants,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn min_margin(&self) -> f64 {
        self.margins
            .iter()
            .map(|m| m.1)
            .fold(f64::INFINITY, f64::min)
    }

    fn from_margins(margins: Vec<(f64, f64)>, constants: GrowthConstants) -> Self {
        let first_violation = margins.iter().position(|m| !(m.1 >= 0.0));
        Self {
            margins,
            first_violation,
            constants,
        }
    }
}

fn check_preconditions(
    history: &[DiagnosticsRecord],
    params: &ModelParams,
) -> Result<(), DiagnosticsError> {
    if history.is_empty() {
        return Err(DiagnosticsError::EmptyHistory);
    }
    if !params.is_conservative() {
        return Err(DiagnosticsError::NotConservative {
            p: params.p(),
            b: params.b(),
        });
    }
    Ok(())
}

/// Checks `‖m(t)‖² ≤ envelope(t)` on every record.
pub fn m_growth_check(
    history: &[DiagnosticsRecord],
    params: &ModelParams,
    m0_l2: f64,
) -> Result<BoundReport, DiagnosticsError> {
    check_preconditions(history, params)?;
    let constants = GrowthConstants::from_history(history, params);
    let margins = history
        .iter()
        .map(|r| (r.t, constants.envelope(r.t, m0_l2) - r.m_l2 * r.m_l2))
        .collect();
    Ok(BoundReport::from_margins(margins, constants))
}

pub const DEFAULT_H2K_SLACK: f64 = 2.0;

/// Checks `‖u(t)‖_{H^{2k}} ≤ C (M + e^{C₀t}‖m₀‖ + C₁ + C₂ Σ_{J₂} C(ε_j))`.
///
/// `J₁ = {j < k : 2j ≤ k}` contributes `C₁ = Σ C(k,j) M`; the indices in `J₂`
/// are handled by interpolation with exponents `α_j = (2j - k)/k` and
/// Young's inequality `N^α ≤ εN + C(ε)`, `ε_j` chosen so that
/// `C₂ Σ ε_j = 1/4`. Interpolation constants are taken as 1.
pub fn h2k_bound_check(
    history: &[DiagnosticsRecord],
    params: &ModelParams,
    m0_l2: f64,
    slack: f64,
) -> Result<BoundReport, DiagnosticsError> {
    check_preconditions(history, params)?;
    let constants = GrowthConstants::from_history(history, params);
    let k = params.k();
    let m = constants.m_bound;
    let (mut c1, mut c2) = (0.0, 0.0);
    let mut alphas = Vec::new();
    for j in 0..k {
        if 2 * j <= k {
            c1 += binomial(k, j) * m;
        } else {
            let alpha = (2 * j - k) as f64 / k as f64;
            c2 += binomial(k, j) * m.powf(1.0 - alpha);
            alphas.push(alpha);
        }
    }
    let young: f64 = if alphas.is_empty() || c2 == 0.0 {
        0.0
    } else {
        let eps = 1.0 / (4.0 * c2 * alphas.len() as f64);
        alphas
            .iter()
            .map(|&a| (1.0 - a) * (a / eps).powf(a / (1.0 - a)))
            .sum()
    };
    let margins = history
        .iter()
        .map(|r| {
            let bound = slack * (m + (constants.c0 * r.t).exp() * m0_l2 + c1 + c2 * young);
            (r.t, bound - r.h2k_norm)
        })
        .collect();
    Ok(BoundReport::from_margins(margins, constants))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;
    use crate::spectral::GridSpec;
    use std::f64::consts::PI;

    fn cos_state(n: usize) -> SolverState {
        SolverState::new(Field::from_fn(GridSpec::periodic_2pi(n).unwrap(), f64::cos))
    }

    #[test]
    fn i1_examples() {
        let g = GridSpec::periodic_2pi(32).unwrap();
        let ch = Preset::CamassaHolm.params();
        assert_eq!(conserved_i1(&Field::zeros(g), &ch), 0.0);
        let c = Field::from_fn(g, f64::cos);
        assert!((conserved_i1(&c, &ch) - 2.0 * PI).abs() < 1e-12);
        let k2 = Preset::HigherOrderK2.params();
        assert!((conserved_i1(&c, &k2) - 4.0 * PI).abs() < 1e-12);
        assert!((i1_sobolev_sum(&c, &ch) - 2.0 * PI).abs() < 1e-12);
        assert_eq!(i1_sobolev_sum(&Field::zeros(g), &ch), 0.0);
    }

    #[test]
    fn i1_matches_quadrature_of_u_m() {
        let g = GridSpec::new(64, 9.0).unwrap();
        let u = Field::from_fn(g, |x| {
            (2.0 * PI * x / 9.0).sin() + 0.3 * (4.0 * PI * x / 9.0).cos()
        });
        let params = ModelParams::new(3, 1, 2.0, vec![]).unwrap();
        let i1 = conserved_i1(&u, &params);
        let quad = u.inner(&momentum(&u, &params));
        assert!((i1 - quad).abs() <= 1e-10 * i1);
        assert!((i1 - i1_sobolev_sum(&u, &params)).abs() <= 1e-10 * i1);
    }

    #[test]
    fn residual_vanishes_for_balanced_or_symmetric_data() {
        let g = GridSpec::periodic_2pi(64).unwrap();
        let u = Field::from_fn(g, |x| x.cos() + 0.5 * (2.0 * x).sin());
        assert_eq!(di1_residual(&u, &Preset::CamassaHolm.params()), 0.0);
        assert_eq!(di1_residual(&u, &Preset::Novikov.params()), 0.0);
        let dp = Preset::DegasperisProcesi.params();
        let c = Field::from_fn(g, f64::cos);
        assert!(di1_residual(&c, &dp).abs() < 1e-13);
    }

    #[test]
    fn record_examples() {
        let ch = Preset::CamassaHolm.params();
        let zero = SolverState::new(Field::zeros(GridSpec::periodic_2pi(32).unwrap()));
        let r = record(&zero, &ch, 1.6, 0.0);
        assert_eq!(
            (r.i1, r.hk_norm, r.h2k_norm, r.m_l2, r.u_inf, r.ux_inf),
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        );

        let r = record(&cos_state(32), &ch, 1.6, 0.1);
        assert!((r.i1 - 2.0 * PI).abs() < 1e-12);
        assert!((r.m_l2 - 2.0 * PI.sqrt()).abs() < 1e-12);
        assert!(r.identity_defect() <= 1e-10);
        assert!(r.hk_norm <= r.hs_norm && r.hs_norm <= r.h2k_norm);
        assert_eq!(r.dt_used, 0.1);
    }

    #[test]
    fn csv_layout() {
        let r = record(&cos_state(16), &Preset::CamassaHolm.params(), 1.6, 0.0);
        let mut buf = Vec::new();
        write_csv(&mut buf, &[r, r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        let cols: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 11);
        assert_eq!(cols[1], r.i1);
        assert_eq!(cols[3], r.hk_norm);
        assert!(lines[1].contains('e'));
    }

    fn flat_history(m_l2: &[f64]) -> Vec<DiagnosticsRecord> {
        m_l2.iter()
            .enumerate()
            .map(|(i, &m)| DiagnosticsRecord {
                t: i as f64 * 0.1,
                i1: 1.0,
                i1_sobolev_sum: 1.0,
                hs_norm: 1.0,
                hk_norm: 0.5,
                h2k_norm: m,
                m_l2: m,
                u_inf: 0.1,
                ux_inf: 0.1,
                di1_residual: 0.0,
                dt_used: 0.1,
            })
            .collect()
    }

    #[test]
    fn growth_check_contract() {
        let ch = Preset::CamassaHolm.params();
        assert_eq!(
            m_growth_check(&[], &ch, 1.0),
            Err(DiagnosticsError::EmptyHistory)
        );
        let dp = Preset::DegasperisProcesi.params();
        assert!(matches!(
            m_growth_check(&flat_history(&[1.0]), &dp, 1.0),
            Err(DiagnosticsError::NotConservative { .. })
        ));

        let zero = vec![DiagnosticsRecord {
            t: 0.0,
            i1: 0.0,
            i1_sobolev_sum: 0.0,
            hs_norm: 0.0,
            hk_norm: 0.0,
            h2k_norm: 0.0,
            m_l2: 0.0,
            u_inf: 0.0,
            ux_inf: 0.0,
            di1_residual: 0.0,
            dt_used: 0.0,
        }];
        assert!(m_growth_check(&zero, &ch, 0.0).unwrap().passed());
        assert!(h2k_bound_check(&zero, &ch, 0.0, 2.0).unwrap().passed());

        let ok = m_growth_check(&flat_history(&[1.0, 1.0, 1.0]), &ch, 1.0).unwrap();
        assert!(ok.passed());
        let bad = m_growth_check(&flat_history(&[1.0, 1.0, 50.0, 60.0]), &ch, 1.0).unwrap();
        assert_eq!(bad.first_violation, Some(2));
    }

    #[test]
    fn h2k_slack_zero_fails_on_nonzero_data() {
        let ch = Preset::CamassaHolm.params();
        let h = flat_history(&[1.0, 1.0]);
        assert!(h2k_bound_check(&h, &ch, 1.0, 2.0).unwrap().passed());
        assert!(!h2k_bound_check(&h, &ch, 1.0, 0.0).unwrap().passed());
    }

    #[test]
    fn growth_constants_follow_the_estimate() {
        let params = ModelParams::new(2, 2, 3.0, vec![0.0, 0.0, 1.0]).unwrap();
        let mut h = flat_history(&[1.0]);
        h[0].u_inf = 0.5;
        h[0].ux_inf = 2.0;
        h[0].hk_norm = 3.0;
        let c = GrowthConstants::from_history(&h, &params);
        assert_eq!(c.c_m, 2.0);
        assert!((c.g_m - 4.0).abs() < 1e-12);
        assert_eq!(c.k1, 4.0 * 4.0);
        assert!((c.k2 - (2.0 * 4.0 * 8.0 + 2.0 * 4.0 * 3.0)).abs() < 1e-12);
        assert_eq!(c.k, 17.0);
        assert_eq!(c.c0, 8.5);
        assert!((c.envelope(0.0, 1.5) - 2.25).abs() < 1e-9);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(3, 2), 3.0);
        assert_eq!(binomial(6, 3), 20.0);
    }
}
