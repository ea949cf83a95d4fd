//! Final-time error against wall-clock cost for every scheme, each compared
//! with its own fine reference. EM only settles once tau 4 n^2 <= 2.
//!
//! ```text
//! cargo run --release --example cost_comparison -- [samples]
//! ```

use std::f64::consts::PI;

use stochheat::covariance::{NoiseMode, RieszAlpha};
use stochheat::harness::{cost_benchmark, ErrorNorm, ReferencePolicy, StudyConfig};
use stochheat::{Coefficients, GridSpec, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let samples: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(20);
    let config = StudyConfig {
        grid: GridSpec::new(1, 32)?,
        noise: NoiseMode::Riesz(RieszAlpha::new(0.5, 1)?),
        t_final: 0.5,
        m_ref: 1 << 13,
        coarse_steps: (5..=11).map(|k| 1usize << k).collect(),
        samples,
        schemes: SchemeKind::ALL.to_vec(),
        reference: ReferencePolicy::PerScheme,
        seed: 3,
        norm: ErrorNorm::FinalTime,
        coefficients: Coefficients::autonomous(|u| 2.0 + u.sin(), |u| u + 2.0, |x| (PI * x[0]).sin()),
    };
    let table = cost_benchmark(&config)?;
    println!("scheme,tau,error_rms,seconds_per_sample");
    for r in &table.rows {
        let err = if r.diverged { "diverged".to_string() } else { format!("{:.4e}", r.error_rms) };
        println!("{},{},{},{:.3e}", r.scheme, r.tau, err, r.seconds / r.samples as f64);
    }
    Ok(())
}
