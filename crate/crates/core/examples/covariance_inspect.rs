//! Riesz covariance entries, box-integral constants and the Cholesky factor.
//!
//! ```text
//! cargo run --release --example covariance_inspect -- [d] [n] [alpha]
//! ```

use stochheat::covariance::{assemble_covariance, b2, delta2, factorize, NoiseMode, RieszAlpha};
use stochheat::GridSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let d: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(2);
    let n: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(8);
    let alpha: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.8);

    let grid = GridSpec::new(d, n)?;
    let matrix = assemble_covariance(grid, NoiseMode::Riesz(RieszAlpha::new(alpha, d)?))?;
    println!("{} x {} covariance, {} distinct offsets", grid.dof(), grid.dof(), matrix.distinct_offsets().len());
    for ((a, b), v) in matrix.distinct_offsets().iter().take(10) {
        println!("  offset ({a},{b}): {v:.12e}");
    }

    let factor = factorize(&matrix)?;
    let rebuilt = factor.lower() * factor.lower().transpose();
    println!("Cholesky jitter {:e}, max |L L^T - C| = {:.2e}", factor.jitter(), (rebuilt - matrix.entries()).amax());

    if d == 2 {
        println!("B2(-alpha) = {:.15}", b2(-alpha)?);
        println!("unit-box self-interaction Delta2(-alpha) = {:.15}", delta2(-alpha)?);
    }
    Ok(())
}
