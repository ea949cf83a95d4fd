//! Fine noise paths, coupled coarsening and the empirical covariance check.
//!
//! ```text
//! cargo run --release --example noise_paths -- [rows]
//! ```

use stochheat::covariance::{assemble_covariance, factorize, NoiseMode, RieszAlpha};
use stochheat::noise::{sample_path, IncrementSource, Increments, NoisePlan};
use stochheat::GridSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(1 << 14);
    let n = 8;
    let grid = GridSpec::new(1, n)?;
    let factor = factorize(&assemble_covariance(grid, NoiseMode::Riesz(RieszAlpha::new(0.5, 1)?))?)?;
    let plan = NoisePlan::new(grid, 1.0, rows, 2024, 0)?;
    let path = sample_path(&plan, &factor)?;
    let fine = Increments::collect(&path);
    println!("path checksum {:016x}, materialized: {}", path.checksum(), path.is_materialized());

    // second moment of the first two components against tau_ref n^2 C
    let scale = plan.tau_ref() * (n * n) as f64;
    let c = factor.matrix().entries();
    for (i, j) in [(0, 0), (0, 1), (3, 3)] {
        let emp = (0..fine.steps()).map(|l| fine.row(l)[i] * fine.row(l)[j]).sum::<f64>() / fine.steps() as f64;
        println!("E[dF_{i} dF_{j}] = {emp:.5e}, expected {:.5e}", scale * c[(i, j)]);
    }

    if rows.is_power_of_two() {
        let total = path.coarsen(1)?;
        let mut m = rows;
        while m >= 1 {
            let same = path.coarsen(m)?.coarsen(1)? == total;
            println!("m = {m:>6}: sums to the same total bit for bit: {same}");
            m /= 4;
        }
    }
    Ok(())
}
