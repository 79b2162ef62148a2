//! Initial fields.
//!
//! Localized kinds are built from their exact periodic Fourier coefficients,
//! so the image sums are implicit and the resolution check can look at the
//! untruncated tail.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::lemmas::{random_bandlimited, SamplerConfig};
use crate::spectral::{Field, GridSpec, Spectrum};

use super::config::InitialData;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InitialError {
    #[error("initial data unresolved on {n_points} points: spectral tail {tail:.3e} of peak exceeds {TAIL_TOLERANCE:e}")]
    Unresolved { n_points: usize, tail: f64 },
    #[error("cosine mode {0} is at or above the Nyquist index")]
    ModeTooHigh(u32),
}

/// Largest admissible ratio of the top-band coefficients to the peak.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Decay exponent of the random initial spectrum.
pub const RANDOM_INITIAL_DECAY: f64 = 4.0;

/// Builds `u₀` on `grid`. `seed` only affects random data.
pub fn make_initial(data: &InitialData, grid: GridSpec, seed: u64) -> Result<Field, InitialError> {
    match data {
        InitialData::CosinePacket { modes } => {
            let n_half = (grid.n_points() / 2) as u32;
            if let Some(&(m, _)) = modes.iter().find(|(m, _)| *m >= n_half) {
                return Err(InitialError::ModeTooHigh(m));
            }
            let kappa = 2.0 * PI / grid.length();
            Ok(Field::from_fn(grid, |x| {
                modes
                    .iter()
                    .map(|&(m, a)| a * (m as f64 * kappa * x).cos())
                    .sum()
            }))
        }
        InitialData::Gaussian {
            amplitude,
            center,
            width,
        } => {
            let (a, w, l) = (*amplitude, *width, grid.length());
            from_coefficients(grid, *center, |xi| {
                a * w * PI.sqrt() / l * (-xi * xi * w * w / 4.0).exp()
            })
        }
        InitialData::MollifiedPeakon {
            amplitude,
            center,
            mollify_width,
        } => {
            let (a, w, l) = (*amplitude, *mollify_width, grid.length());
            let tail = (-l / 2.0).exp();
            from_coefficients(grid, *center, |xi| {
                // ξL/2 = πj, so the boundary term carries (-1)^j.
                let j = (xi * l / (2.0 * PI)).round() as i64;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                a * (2.0 / l) * (1.0 - sign * tail) / (1.0 + xi * xi)
                    * (-xi * xi * w * w / 4.0).exp()
            })
        }
        InitialData::RandomBandlimited { amplitude } => {
            let cfg = SamplerConfig {
                seed,
                spectral_decay: RANDOM_INITIAL_DECAY,
                ..SamplerConfig::default()
            };
            let u = random_bandlimited(&cfg, grid);
            let peak = u.max_abs();
            Ok(u.scaled(amplitude / peak))
        }
    }
}

/// Field with coefficients `c(ξ)·e^{-iξx₀}` for an even real profile `c`.
fn from_coefficients(
    grid: GridSpec,
    center: f64,
    profile: impl Fn(f64) -> f64,
) -> Result<Field, InitialError> {
    let n = grid.n_points();
    let half = (n / 2) as i64;
    let band = (n / 16) as i64;
    let kappa = 2.0 * PI / grid.length();
    let amps: Vec<f64> = (0..=half).map(|j| profile(j as f64 * kappa)).collect();
    let peak = amps.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let tail = amps[(half - band) as usize..]
        .iter()
        .fold(0.0_f64, |m, a| m.max(a.abs()));
    if peak > 0.0 && tail > TAIL_TOLERANCE * peak {
        return Err(InitialError::Unresolved {
            n_points: n,
            tail: tail / peak,
        });
    }
    let mut spec = Spectrum::zeros(grid);
    for j in 0..half {
        let xi = j as f64 * kappa;
        let c = Complex64::from_polar(amps[j as usize], -xi * center);
        spec.coeffs_mut()[grid.position_of(j)] = c;
        if j > 0 {
            spec.coeffs_mut()[grid.position_of(-j)] = c.conj();
        }
    }
    Ok(spec.to_field_unchecked())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::forward_transform;

    #[test]
    fn cosine_packet_is_cosine() {
        let g = GridSpec::periodic_2pi(64).unwrap();
        let u = make_initial(
            &InitialData::CosinePacket {
                modes: vec![(1, 1.0)],
            },
            g,
            0,
        )
        .unwrap();
        assert!(u.max_abs_diff(&Field::from_fn(g, f64::cos)) < 1e-15);
        let high = InitialData::CosinePacket {
            modes: vec![(32, 1.0)],
        };
        assert_eq!(
            make_initial(&high, g, 0),
            Err(InitialError::ModeTooHigh(32))
        );
    }

    #[test]
    fn gaussian_matches_image_sum() {
        let g = GridSpec::new(256, 10.0).unwrap();
        let (a, x0, w) = (1.3, 4.0, 0.7);
        let u = make_initial(
            &InitialData::Gaussian {
                amplitude: a,
                center: x0,
                width: w,
            },
            g,
            0,
        )
        .unwrap();
        let direct = Field::from_fn(g, |x| {
            (-3..=3)
                .map(|n| a * (-((x - x0 + n as f64 * 10.0) / w).powi(2)).exp())
                .sum()
        });
        assert!(u.max_abs_diff(&direct) < 1e-13);
    }

    #[test]
    fn wide_gaussian_concentrates_on_mean() {
        let g = GridSpec::new(64, 40.0).unwrap();
        let data = InitialData::Gaussian {
            amplitude: 1.0,
            center: 20.0,
            width: 40.0,
        };
        let spec = forward_transform(&make_initial(&data, g, 0).unwrap()).unwrap();
        let rest: f64 = (1..32).map(|j| spec.mode(j).norm()).sum();
        assert!(rest < 0.02 * spec.mode(0).norm(), "{rest}");
    }

    #[test]
    fn peakon_resolution() {
        let data = InitialData::MollifiedPeakon {
            amplitude: 1.0,
            center: PI,
            mollify_width: 0.05,
        };
        let fine = make_initial(&data, GridSpec::periodic_2pi(512).unwrap(), 0).unwrap();
        assert!(matches!(
            make_initial(&data, GridSpec::periodic_2pi(32).unwrap(), 0),
            Err(InitialError::Unresolved { n_points: 32, .. })
        ));
        // Mollification lowers the crest slightly below the amplitude.
        let peak = fine.max_abs();
        assert!(peak < 1.0 && peak > 0.9, "{peak}");
    }

    #[test]
    fn peakon_profile_away_from_crest() {
        // Far from the crest the mollifier only rescales e^{-|x|} by e^{w²/4}.
        let l = 40.0;
        let g = GridSpec::new(2048, l).unwrap();
        let w = 0.1;
        let data = InitialData::MollifiedPeakon {
            amplitude: 1.0,
            center: 20.0,
            mollify_width: w,
        };
        let u = make_initial(&data, g, 0).unwrap();
        let idx = (2048.0 * 25.0 / l) as usize;
        let x = g.points()[idx];
        let expect = (w * w / 4.0).exp() * (-(x - 20.0)).exp();
        assert!(
            (u.values()[idx] - expect).abs() < 1e-9,
            "{} vs {expect}",
            u.values()[idx]
        );
    }

    #[test]
    fn random_data_is_seeded() {
        let g = GridSpec::periodic_2pi(64).unwrap();
        let data = InitialData::RandomBandlimited { amplitude: 0.5 };
        let a = make_initial(&data, g, 3).unwrap();
        assert_eq!(a, make_initial(&data, g, 3).unwrap());
        assert_ne!(a, make_initial(&data, g, 4).unwrap());
        assert!((a.max_abs() - 0.5).abs() < 1e-15);
    }
}
