//! Strong convergence of SEXP on the unit square, at two spatial resolutions.
//!
//! ```text
//! cargo run --release --example strong_convergence_2d -- [alpha] [samples] [n,n,...]
//! ```

use stochheat::covariance::{NoiseMode, RieszAlpha};
use stochheat::harness::{fit_slope, strong_error_study, ErrorNorm, ReferencePolicy, StudyConfig};
use stochheat::{Coefficients, GridSpec, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.8);
    let samples: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(30);
    let sizes: Vec<usize> = match args.next() {
        Some(list) => list.split(',').map(|v| v.parse()).collect::<Result<_, _>>()?,
        None => vec![8, 16],
    };

    for n in sizes {
        let config = StudyConfig {
            grid: GridSpec::new(2, n)?,
            noise: NoiseMode::Riesz(RieszAlpha::new(alpha, 2)?),
            t_final: 1.0,
            m_ref: 1 << 12,
            coarse_steps: (4..=9).map(|k| 1usize << k).collect(),
            samples,
            schemes: vec![SchemeKind::Sexp],
            reference: ReferencePolicy::SharedSexp,
            seed: 7,
            norm: ErrorNorm::SupOverTimes,
            coefficients: Coefficients::autonomous(
                |u| 1.0 + u.cos(),
                |u| 1.0 + u.cos(),
                |x| {
                    let tau = 2.0 * std::f64::consts::PI;
                    (tau * x[0]).sin() * (tau * x[1]).sin()
                },
            ),
        };
        let table = strong_error_study(&config)?;
        println!("n = {n}");
        table.write_csv(std::io::stdout())?;
        let fit = fit_slope(&table, SchemeKind::Sexp, Some(alpha))?;
        println!(
            "SEXP slope {:.3} (1/2 - alpha/4 = {:.3})\n",
            fit.slope,
            fit.theory_rate.unwrap()
        );
    }
    Ok(())
}
