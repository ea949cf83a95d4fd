//! One noise sample driving SEXP, EM and sEM; prints the final profiles.
//!
//! ```text
//! cargo run --release --example simulate_profile -- [alpha] [seed]
//! ```

use std::f64::consts::PI;

use stochheat::covariance::{assemble_covariance, factorize, NoiseMode, RieszAlpha};
use stochheat::integrators::run;
use stochheat::noise::{sample_path, NoisePlan};
use stochheat::{Coefficients, GridSpec, SchemeKind, SpectralPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.7);
    let seed: u64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(1);

    let n = 64;
    let t_final = 0.5;
    let steps = 1 << 13;
    let grid = GridSpec::new(1, n)?;
    let factor = factorize(&assemble_covariance(grid, NoiseMode::Riesz(RieszAlpha::new(alpha, 1)?))?)?;
    let path = sample_path(&NoisePlan::new(grid, t_final, steps, seed, 0)?, &factor)?;
    let plan = SpectralPlan::new(grid);
    let coeffs = Coefficients::autonomous(
        |u| 1.0 + 0.5 * u.cos(),
        |u| 1.0 + 0.5 * u.cos(),
        |x| (PI * x[0]).sin(),
    );

    // tau 4 n^2 = 2^{-14} 2^{14} = 1, inside the EM stability limit
    println!("x,SEXP,EM,sEM");
    let finals: Vec<Vec<f64>> = SchemeKind::ALL
        .iter()
        .map(|&s| {
            let traj = run(s, &plan, &coeffs, &path, t_final, &[t_final])?;
            Ok(traj.last().map(|(_, f)| f.with_boundary()).unwrap_or_default())
        })
        .collect::<stochheat::Result<_>>()?;
    for i in (0..=n).step_by(4) {
        println!("{},{:.6},{:.6},{:.6}", i as f64 / n as f64, finals[0][i], finals[1][i], finals[2][i]);
    }
    Ok(())
}
