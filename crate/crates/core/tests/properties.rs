use proptest::prelude::*;

use stochheat::covariance::{cov_entry_2d, RieszAlpha};
use stochheat::expr::Expr;
use stochheat::harness::{fit_slope, ErrorRow, ErrorTable};
use stochheat::noise::Increments;
use stochheat::{Field, GridSpec, SchemeKind, SpectralPlan};

fn grid_strategy() -> impl Strategy<Value = GridSpec> {
    prop_oneof![(2usize..40).prop_map(|n| (1, n)), (2usize..14).prop_map(|n| (2, n))]
        .prop_map(|(d, n)| GridSpec::new(d, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn spectral_round_trip(grid in grid_strategy(), seed in any::<u64>()) {
        let plan = SpectralPlan::new(grid);
        let mut state = seed;
        let values: Vec<f64> = (0..grid.dof())
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let f = Field::from_values(grid, values).unwrap();
        let back = plan.inverse(&plan.forward(&f).unwrap()).unwrap();
        let err = back.values().iter().zip(f.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(err <= 1e-12 * f.sup_norm().max(1e-300));
    }
}

proptest! {
    #[test]
    fn flatten_is_a_bijection(grid in grid_strategy()) {
        let mut seen = vec![false; grid.dof()];
        for idx in 0..grid.dof() {
            let k = grid.unflatten(idx);
            prop_assert!(k.iter().all(|&kj| kj >= 1 && kj < grid.n()));
            prop_assert_eq!(grid.flatten(&k), idx);
            prop_assert!(!seen[idx]);
            seen[idx] = true;
        }
        prop_assert!((grid.dx() * grid.n() as f64 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cov_entry_2d_symmetries(a in 0i64..6, b in 0i64..6, alpha in 0.05f64..1.95) {
        let al = RieszAlpha::new(alpha, 2).unwrap();
        let v = cov_entry_2d(a, b, 8, al).unwrap();
        prop_assert!(v > 0.0);
        prop_assert_eq!(v, cov_entry_2d(-a, b, 8, al).unwrap());
        prop_assert_eq!(v, cov_entry_2d(a, -b, 8, al).unwrap());
        prop_assert_eq!(v, cov_entry_2d(b, a, 8, al).unwrap());
    }

    #[test]
    fn dyadic_coarsening_telescopes(levels in 1u32..8, dof in 1usize..5, seed in any::<u64>()) {
        let steps = 1usize << levels;
        let mut state = seed;
        let data: Vec<f64> = (0..steps * dof)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state % 1_000_003) as f64 * 1e-3 - 500.0
            })
            .collect();
        let inc = Increments::new(steps, dof, data).unwrap();
        let total = inc.coarsen(1).unwrap();
        for k in 0..=levels {
            let mid = inc.coarsen(1 << k).unwrap();
            prop_assert_eq!(mid.coarsen(1).unwrap(), total.clone());
        }
    }

    #[test]
    fn power_laws_are_fitted_exactly(rate in 0.05f64..1.5, c in 0.01f64..100.0) {
        let rows = (4..10)
            .map(|k| {
                let tau = 2f64.powi(-k);
                let e = c * tau.powf(rate);
                ErrorRow {
                    scheme: SchemeKind::Sem,
                    steps: 1 << k,
                    tau,
                    error_rms: e,
                    error_sup_meansq: e * e,
                    seconds: 0.0,
                    samples: 1,
                    diverged: false,
                }
            })
            .collect();
        let fit = fit_slope(&ErrorTable { rows }, SchemeKind::Sem, None).unwrap();
        prop_assert!((fit.slope - rate).abs() < 1e-12);
        prop_assert!(fit.residual < 1e-12);
    }

    #[test]
    fn affine_expressions_evaluate(a in -10.0f64..10.0, b in -10.0f64..10.0, u in -5.0f64..5.0) {
        let e = Expr::parse(&format!("{a} + {b}*u")).unwrap();
        prop_assert!((e.eval(0.0, &[0.5], u) - (a + b * u)).abs() < 1e-12);
        prop_assert!(e.depends_on_state());
    }
}
