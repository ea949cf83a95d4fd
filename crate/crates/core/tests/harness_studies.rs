use std::f64::consts::PI;

use stochheat::covariance::{assemble_covariance, factorize, NoiseMode, RieszAlpha};
use stochheat::harness::{
    cost_benchmark, fit_slope, run_study, strong_error_study, ErrorNorm, ReferencePolicy, StudyConfig,
};
use stochheat::noise::{sample_path, NoisePlan};
use stochheat::{Coefficients, GridSpec, SchemeKind};

fn base(alpha: f64) -> StudyConfig {
    StudyConfig {
        grid: GridSpec::new(1, 32).unwrap(),
        noise: NoiseMode::Riesz(RieszAlpha::new(alpha, 1).unwrap()),
        t_final: 0.5,
        m_ref: 1024,
        coarse_steps: vec![16, 32, 64, 128, 256],
        samples: 12,
        schemes: SchemeKind::ALL.to_vec(),
        reference: ReferencePolicy::SharedSexp,
        seed: 99,
        norm: ErrorNorm::SupOverTimes,
        coefficients: Coefficients::autonomous(
            |u| 1.0 + 0.5 * u.cos(),
            |u| 1.0 + 0.5 * u.cos(),
            |x| (PI * x[0]).sin(),
        ),
    }
}

#[test]
fn self_comparison_is_exactly_zero() {
    let cfg = StudyConfig {
        samples: 1,
        schemes: vec![SchemeKind::Sexp],
        coarse_steps: vec![1024],
        ..base(0.5)
    };
    let t = strong_error_study(&cfg).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0].error_rms, 0.0);
    assert_eq!(t.rows[0].error_sup_meansq, 0.0);
}

#[test]
fn linear_flow_errors() {
    let cfg = StudyConfig {
        coefficients: Coefficients::heat(|x| (PI * x[0]).sin() + 0.2 * (3.0 * PI * x[0]).sin()),
        samples: 2,
        coarse_steps: vec![128, 256, 512],
        ..base(0.5)
    };
    let t = strong_error_study(&cfg).unwrap();
    for r in t.rows_for(SchemeKind::Sexp) {
        assert!(r.error_rms < 1e-13, "tau={} err={}", r.tau, r.error_rms);
    }
    for r in t.rows_for(SchemeKind::Sem) {
        assert!(r.error_rms > 1e-6);
    }
}

#[test]
fn studies_are_reproducible_across_thread_counts() {
    let cfg = base(0.5);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let (a, ca) = one.install(|| run_study(&cfg, |_, _| {})).unwrap();
    let (b, cb) = three.install(|| run_study(&cfg, |_, _| {})).unwrap();
    assert!(a.identical_results(&b));
    assert_eq!(ca, cb);
    let mut c = b.clone();
    c.rows[0].error_rms = f64::from_bits(c.rows[0].error_rms.to_bits() ^ 1);
    assert!(!a.identical_results(&c));
}

#[test]
fn every_sample_consumes_the_path_it_claims() {
    let cfg = StudyConfig {
        samples: 5,
        ..base(0.3)
    };
    let mut seen = Vec::new();
    let (_, checksums) = run_study(&cfg, |done, total| seen.push((done, total))).unwrap();
    assert_eq!(seen.last(), Some(&(5, 5)));
    let factor = factorize(&assemble_covariance(cfg.grid, cfg.noise).unwrap()).unwrap();
    for (s, sum) in checksums.iter().enumerate() {
        let plan = NoisePlan::new(cfg.grid, cfg.t_final, cfg.m_ref, cfg.seed, s as u64).unwrap();
        assert_eq!(sample_path(&plan, &factor).unwrap().checksum(), *sum);
    }
    let mut unique = checksums.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), checksums.len());
}

#[test]
fn reference_policies_agree_for_sexp() {
    let shared = strong_error_study(&base(0.5)).unwrap();
    let own = strong_error_study(&StudyConfig {
        reference: ReferencePolicy::PerScheme,
        ..base(0.5)
    })
    .unwrap();
    for (a, b) in shared.rows_for(SchemeKind::Sexp).zip(own.rows_for(SchemeKind::Sexp)) {
        let r = a.error_rms / b.error_rms;
        assert!(r > 0.5 && r < 2.0, "tau={}: {r}", a.tau);
    }
}

#[test]
fn sexp_errors_decrease_with_tau_and_em_diverges_at_large_tau() {
    let t = strong_error_study(&StudyConfig {
        samples: 16,
        ..base(0.5)
    })
    .unwrap();
    let sexp: Vec<f64> = t.rows_for(SchemeKind::Sexp).map(|r| r.error_rms).collect();
    let drops = sexp.windows(2).filter(|w| w[0] >= w[1]).count();
    assert!(drops + 1 >= sexp.len() - 1, "{sexp:?}");
    // tau 4 n^2 = 2^{12}/16 = 256 at m = 16
    let em: Vec<_> = t.rows_for(SchemeKind::Em).collect();
    assert!(em[0].diverged && em[0].error_rms.is_nan() && em[0].seconds.is_finite());
    let fit = fit_slope(&t, SchemeKind::Sexp, Some(0.5)).unwrap();
    assert!(fit.slope > 0.1 && fit.slope < 1.0);
    assert!(fit_slope(&t, SchemeKind::Em, None).is_err());
}

#[test]
fn final_time_norm_is_bounded_by_the_sup_norm() {
    let sup = strong_error_study(&base(0.5)).unwrap();
    let fin = strong_error_study(&StudyConfig {
        norm: ErrorNorm::FinalTime,
        ..base(0.5)
    })
    .unwrap();
    for (a, b) in sup.rows.iter().zip(&fin.rows) {
        if !a.diverged {
            assert!(b.error_rms <= a.error_rms);
        }
    }
    let bench = cost_benchmark(&base(0.5)).unwrap();
    assert_eq!(bench.rows.len(), sup.rows.len());
}

#[test]
fn invalid_studies_are_rejected() {
    let bad = [
        StudyConfig {
            coarse_steps: vec![48],
            ..base(0.5)
        },
        StudyConfig {
            coarse_steps: vec![2048],
            ..base(0.5)
        },
        StudyConfig {
            samples: 0,
            ..base(0.5)
        },
        StudyConfig {
            schemes: vec![],
            ..base(0.5)
        },
        StudyConfig {
            t_final: -1.0,
            ..base(0.5)
        },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err());
        assert!(strong_error_study(&cfg).is_err());
    }
}
