//! Strong convergence of SEXP in one dimension with coupled noise paths.
//!
//! ```text
//! cargo run --release --example strong_convergence_1d -- [alpha] [samples]
//! ```

use stochheat::covariance::{NoiseMode, RieszAlpha};
use stochheat::harness::{fit_slope, strong_error_study, ErrorNorm, ReferencePolicy, StudyConfig};
use stochheat::{Coefficients, GridSpec, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.7);
    let samples: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(50);

    let grid = GridSpec::new(1, 128)?;
    let t_final = 0.5;
    let config = StudyConfig {
        grid,
        noise: NoiseMode::Riesz(RieszAlpha::new(alpha, 1)?),
        t_final,
        // tau_ref = 2^-14
        m_ref: (t_final * 16384.0) as usize,
        // tau = 2^-6 .. 2^-11
        coarse_steps: (6..=11).map(|k| (t_final * (1u64 << k) as f64) as usize).collect(),
        samples,
        schemes: vec![SchemeKind::Sexp, SchemeKind::Sem],
        reference: ReferencePolicy::SharedSexp,
        seed: 2024,
        norm: ErrorNorm::SupOverTimes,
        coefficients: Coefficients::autonomous(
            |u| 1.0 + 0.5 * u.cos(),
            |u| 1.0 + 0.5 * u.cos(),
            |x| (std::f64::consts::PI * x[0]).sin(),
        ),
    };

    let table = strong_error_study(&config)?;
    table.write_csv(std::io::stdout())?;
    for scheme in &config.schemes {
        let fit = fit_slope(&table, *scheme, Some(alpha))?;
        println!(
            "{scheme}: slope {:.3} (1 - alpha/2 = {:.3}, 1/2 - alpha/4 = {:.3})",
            fit.slope,
            fit.observed_1d_rate.unwrap(),
            fit.theory_rate.unwrap()
        );
    }
    Ok(())
}
