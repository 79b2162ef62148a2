use proptest::prelude::*;

use gch_core::model::{rhs_u_form, ModelParams};
use gch_core::scenario::snapshot::{decode, encode};
use gch_core::scenario::{parse_config, render_config, Snapshot};
use gch_core::spectral::{apply_gamma, apply_lambda, derivative, sobolev_norm, Field, GridSpec};
use gch_core::timestepper::SolverState;

fn grid_sizes() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![8usize, 16, 32, 64])
}

/// Random samples on a random grid; arbitrary values, not band-limited.
fn field() -> impl Strategy<Value = Field> {
    (grid_sizes(), 0.5f64..20.0).prop_flat_map(|(n, l)| {
        prop::collection::vec(-3.0f64..3.0, n)
            .prop_map(move |v| Field::new(GridSpec::new(n, l).unwrap(), v).unwrap())
    })
}

/// Low-mode field whose products stay resolved on the grid.
fn smooth_field() -> impl Strategy<Value = Field> {
    prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 3).prop_map(|c| {
        let g = GridSpec::periodic_2pi(64).unwrap();
        Field::from_fn(g, |x| {
            c.iter()
                .enumerate()
                .map(|(j, (a, b))| {
                    let m = (j + 1) as f64;
                    a * (m * x).cos() + b * (m * x).sin()
                })
                .sum()
        })
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn parseval(u in field()) {
        let energy = u.inner(&u);
        prop_assert!(close(sobolev_norm(&u, 0.0).powi(2), energy, 1e-12));
    }

    #[test]
    fn lambda_powers_compose(u in field(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let two_step = apply_lambda(&apply_lambda(&u, a), b);
        let one_step = apply_lambda(&u, a + b);
        let scale = one_step.max_abs().max(1.0);
        prop_assert!(two_step.max_abs_diff(&one_step) <= 1e-11 * scale);
    }

    #[test]
    fn gamma_inverse_undoes_gamma(u in field(), k in 1i64..4) {
        let back = apply_gamma(&apply_gamma(&u, k, false).unwrap(), k, true).unwrap();
        // Rounding is amplified by the symbol's range, (1 + ξ_max²)^k.
        let xi_max = std::f64::consts::PI * u.grid().n_points() as f64 / u.grid().length();
        let condition = (1.0 + xi_max * xi_max).powi(k as i32);
        prop_assert!(back.max_abs_diff(&u) <= 1e-14 * condition * u.max_abs().max(1.0));
    }

    #[test]
    fn derivative_is_skew(u in field(), seed in 0u64..1000) {
        let g = u.grid();
        let shift = seed as f64 * 0.01;
        let v = Field::from_fn(g, |x| (2.0 * std::f64::consts::PI * x / g.length() + shift).sin() + 0.3);
        let lhs = derivative(&u, 1).inner(&v);
        let rhs = -u.inner(&derivative(&v, 1));
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn sobolev_norm_is_monotone_in_index(u in field(), s in -1.0f64..3.0, ds in 0.0f64..1.0) {
        prop_assert!(sobolev_norm(&u, s) <= sobolev_norm(&u, s + ds) * (1.0 + 1e-12));
    }

    #[test]
    fn rhs_is_homogeneous(u in smooth_field(), p in 1i64..4, lambda in 0.2f64..3.0) {
        let params = ModelParams::new(2, p, 1.5, Vec::new()).unwrap();
        let base = rhs_u_form(&u, &params).unwrap();
        let scaled = rhs_u_form(&u.scaled(lambda), &params).unwrap();
        let expect = base.scaled(lambda.powi(p as i32 + 1));
        prop_assert!(scaled.max_abs_diff(&expect) <= 1e-11 * expect.max_abs().max(1e-300) + 1e-14);
    }

    #[test]
    fn snapshot_round_trip(
        u in field(),
        t in -1e3f64..1e3,
        k in 1u32..5,
        p in 1u32..5,
        b in -5.0f64..5.0,
    ) {
        let snap = Snapshot { state: SolverState::at(t, u), k, p, b };
        let back = decode(&encode(&snap)).unwrap();
        prop_assert_eq!(back.state.t.to_bits(), t.to_bits());
        let bits = |s: &Snapshot| s.state.u.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&snap));
        prop_assert_eq!(back, snap);
    }

    #[test]
    fn config_round_trip(
        model in prop_oneof![
            Just("preset = \"novikov\"".to_string()),
            (1u32..4, 1u32..4, -3.0f64..5.0).prop_map(|(k, p, b)| format!("k = {k}\np = {p}\nb = {b:?}")),
            (1u32..3, 1u32..3).prop_map(|(k, p)| format!("k = {k}\np = {p}\nb = 1\ng_coeffs = [0.0, 0.5, -1.25]")),
        ],
        n_exp in 4u32..10,
        step in prop_oneof![
            (1e-5f64..1e-2).prop_map(|dt| format!("dt = {dt:?}")),
            (0.05f64..0.9).prop_map(|c| format!("cfl = {c:?}")),
            (1e-5f64..1e-2, 0.05f64..0.9).prop_map(|(dt, c)| format!("dt = {dt:?}\ncfl = {c:?}")),
        ],
        t_end in 0.01f64..5.0,
        initial in prop_oneof![
            (0.1f64..2.0, 0.5f64..3.0).prop_map(|(a, w)| format!("kind = \"gaussian\"\namplitude = {a:?}\nwidth = {w:?}")),
            (0.1f64..2.0).prop_map(|a| format!("kind = \"random_bandlimited\"\namplitude = {a:?}")),
            Just("kind = \"cosine_packet\"\nmodes = [1, [3, 0.25]]".to_string()),
        ],
        seed in any::<u32>(),
        cadence in 1u64..1000,
    ) {
        let doc = format!(
            "seed = {seed}\n[model]\n{model}\n[grid]\nn = {}\n[control]\n{step}\nt_end = {t_end:?}\n[initial]\n{initial}\n[outputs]\ncadence = {cadence}\n",
            1u32 << n_exp
        );
        let cfg = parse_config(&doc).unwrap();
        let rendered = render_config(&cfg);
        let again = parse_config(&rendered).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(render_config(&again), rendered);
    }
}
