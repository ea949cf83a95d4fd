//! The explicit scheme's step-size restriction on the pure heat equation.
//!
//! ```text
//! cargo run --release --example cfl_demo -- [n]
//! ```

use stochheat::integrators::run_with;
use stochheat::noise::Increments;
use stochheat::{Coefficients, GridSpec, SchemeKind, SpectralPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(128);
    let grid = GridSpec::new(1, n)?;
    let plan = SpectralPlan::new(grid);
    let coeffs = Coefficients::heat(|x| x[0] * (1.0 - x[0]) * (1.0 + x[0]));
    let steps = 4000;
    let zero = Increments::zeros(steps, grid.dof());

    println!("tau*4n^2,SEXP,EM,sEM");
    for cfl in [0.5, 1.0, 1.8, 1.99, 2.01, 2.2, 4.0, 100.0] {
        let tau = cfl / (4.0 * (n * n) as f64);
        let cells: Vec<String> = SchemeKind::ALL
            .iter()
            .map(|&s| {
                let mut last = 0.0;
                let status = run_with(s, &plan, &coeffs, &zero, tau * steps as f64, |_, u| {
                    last = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                })?;
                Ok(match status.diverged_at {
                    Some(l) => format!("diverged at step {l}"),
                    None => format!("{last:.3e}"),
                })
            })
            .collect::<stochheat::Result<_>>()?;
        println!("{cfl},{}", cells.join(","));
    }
    Ok(())
}
