//! Coupled Monte Carlo strong-error studies and cost benchmarks.
//!
//! For every sample one fine noise path is drawn; the reference solution and
//! every coarse run consume that same path (coarse runs through exact dyadic
//! sums of its increments), so the measured differences are pure time
//! discretization errors of one realization.
//!
//! The reported error at step size `tau` is
//! `sqrt( max_{t_l, x_k} mean_s |u_s(t_l, x_k) - u_ref,s(t_l, x_k)|^2 )`:
//! samples are averaged first, then the supremum is taken over the coarse
//! grid times and interior nodes, then the root.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{assemble_covariance, factorize, CovarianceFactor, NoiseMode};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::integrators::{run_with, Coefficients, SchemeKind};
use crate::noise::{refinement_ratio, sample_path, Increments, IncrementSource, NoisePlan};
use crate::spectral::SpectralPlan;

/// Samples are processed in fixed-size batches; each batch is reduced in
/// ascending sample order, independent of the number of worker threads.
const BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePolicy {
    /// One SEXP reference at `tau_ref` shared by all schemes.
    SharedSexp,
    /// Each scheme is compared against itself at `tau_ref`.
    PerScheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorNorm {
    /// Supremum over all coarse grid times and interior nodes.
    SupOverTimes,
    /// Interior nodes at the final time only.
    FinalTime,
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub grid: GridSpec,
    pub noise: NoiseMode,
    pub t_final: f64,
    pub m_ref: usize,
    pub coarse_steps: Vec<usize>,
    pub samples: usize,
    pub schemes: Vec<SchemeKind>,
    pub reference: ReferencePolicy,
    pub seed: u64,
    pub norm: ErrorNorm,
    pub coefficients: Coefficients,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("final time must be positive, got {}", self.t_final)));
        }
        if self.samples == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        if self.coarse_steps.is_empty() || self.schemes.is_empty() {
            return Err(Error::Config("need at least one coarse step count and one scheme".into()));
        }
        for &m in &self.coarse_steps {
            refinement_ratio(self.m_ref, m)?;
        }
        Ok(())
    }

    pub fn tau_ref(&self) -> f64 {
        self.t_final / self.m_ref as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub scheme: SchemeKind,
    pub steps: usize,
    pub tau: f64,
    /// Root of the supremum of the sample-mean squared error.
    pub error_rms: f64,
    /// The same quantity before the root.
    pub error_sup_meansq: f64,
    /// Wall-clock seconds summed over samples.
    pub seconds: f64,
    pub samples: usize,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn rows_for(&self, scheme: SchemeKind) -> impl Iterator<Item = &ErrorRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    /// Copy with all timing columns zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> ErrorTable {
        ErrorTable {
            rows: self
                .rows
                .iter()
                .map(|r| ErrorRow {
                    seconds: 0.0,
                    ..r.clone()
                })
                .collect(),
        }
    }

    /// Bitwise equality of every non-timing column, treating equal NaN
    /// payloads as equal.
    pub fn identical_results(&self, other: &ErrorTable) -> bool {
        self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.scheme == b.scheme
                    && a.steps == b.steps
                    && a.tau.to_bits() == b.tau.to_bits()
                    && a.error_rms.to_bits() == b.error_rms.to_bits()
                    && a.error_sup_meansq.to_bits() == b.error_sup_meansq.to_bits()
                    && a.samples == b.samples
                    && a.diverged == b.diverged
            })
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "scheme,tau,error_rms,error_sup_meansq,seconds,diverged")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.scheme, r.tau, r.error_rms, r.error_sup_meansq, r.seconds, r.diverged
            )?;
        }
        Ok(())
    }
}

/// Which error column a slope is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorColumn {
    #[default]
    Rms,
    /// The mean-square error before the root. Its slope is exactly twice
    /// the `Rms` slope.
    SupMeanSq,
}

impl ErrorColumn {
    fn value(self, r: &ErrorRow) -> f64 {
        match self {
            ErrorColumn::Rms => r.error_rms,
            ErrorColumn::SupMeanSq => r.error_sup_meansq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub scheme: SchemeKind,
    pub column: ErrorColumn,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub points: usize,
    /// `1/2 - alpha/4`, the proven root-mean-square rate.
    pub theory_rate: Option<f64>,
    /// `1 - alpha/2`, the mean-square rate observed in one dimension.
    pub observed_1d_rate: Option<f64>,
}

/// Least-squares fit of `ln(error)` against `ln(tau)` over finite,
/// positive, non-diverged rows of one scheme, using `error_rms`.
pub fn fit_slope(table: &ErrorTable, scheme: SchemeKind, alpha: Option<f64>) -> Result<SlopeFit> {
    fit_slope_column(table, scheme, ErrorColumn::Rms, alpha)
}

pub fn fit_slope_column(
    table: &ErrorTable,
    scheme: SchemeKind,
    column: ErrorColumn,
    alpha: Option<f64>,
) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = table
        .rows_for(scheme)
        .map(|r| (r, column.value(r)))
        .filter(|(r, e)| !r.diverged && e.is_finite() && *e > 0.0)
        .map(|(r, e)| (r.tau.ln(), e.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Insufficient(format!(
            "slope fit for {scheme} needs at least 3 usable rows, found {}",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(SlopeFit {
        scheme,
        column,
        slope,
        intercept,
        residual,
        points: pts.len(),
        theory_rate: alpha.map(|a| 0.5 - 0.25 * a),
        observed_1d_rate: alpha.map(|a| 1.0 - 0.5 * a),
    })
}

/// Per-sample squared differences for one (scheme, steps) pair.
struct Accumulator {
    sq: Option<Vec<f64>>,
    seconds: f64,
}

struct SampleResult {
    cells: Vec<Accumulator>,
    checksum: u64,
}

/// Shared, immutable inputs of a study.
struct Prepared<'a> {
    config: &'a StudyConfig,
    plan: SpectralPlan,
    factor: CovarianceFactor,
    /// Coarsest resolution at which references are stored.
    m_store: usize,
}

impl Prepared<'_> {
    fn record_len(&self, m: usize) -> usize {
        let dof = self.config.grid.dof();
        match self.config.norm {
            ErrorNorm::SupOverTimes => (m + 1) * dof,
            ErrorNorm::FinalTime => dof,
        }
    }

    /// Reference states at every multiple of `T / m_store`, or `None` if
    /// the reference run diverged.
    fn reference(&self, scheme: SchemeKind, fine: &impl IncrementSource) -> Result<Option<Vec<f64>>> {
        let cfg = self.config;
        let dof = cfg.grid.dof();
        let stride = cfg.m_ref / self.m_store;
        let mut states = vec![0.0; (self.m_store + 1) * dof];
        let status = run_with(scheme, &self.plan, &cfg.coefficients, fine, cfg.t_final, |l, u| {
            if l % stride == 0 {
                let k = l / stride;
                states[k * dof..(k + 1) * dof].copy_from_slice(u);
            }
        })?;
        Ok(status.diverged_at.is_none().then_some(states))
    }

    fn sample(&self, index: usize) -> Result<SampleResult> {
        let cfg = self.config;
        let dof = cfg.grid.dof();
        let noise = NoisePlan::new(cfg.grid, cfg.t_final, cfg.m_ref, cfg.seed, index as u64)?;
        let path = sample_path(&noise, &self.factor)?;
        let checksum = path.checksum();

        let refs: Vec<Option<Vec<f64>>> = match cfg.reference {
            ReferencePolicy::SharedSexp => {
                let shared = self.reference(SchemeKind::Sexp, &path)?;
                vec![shared; cfg.schemes.len()]
            }
            ReferencePolicy::PerScheme => cfg
                .schemes
                .iter()
                .map(|&s| self.reference(s, &path))
                .collect::<Result<_>>()?,
        };
        let coarse: Vec<Increments> = cfg
            .coarse_steps
            .iter()
            .map(|&m| path.coarsen(m))
            .collect::<Result<_>>()?;

        let mut cells = Vec::with_capacity(cfg.schemes.len() * coarse.len());
        for (scheme, reference) in cfg.schemes.iter().zip(&refs) {
            for (inc, &m) in coarse.iter().zip(&cfg.coarse_steps) {
                let stride = self.m_store / m;
                let mut sq = vec![0.0; self.record_len(m)];
                let start = Instant::now();
                let status = run_with(*scheme, &self.plan, &cfg.coefficients, inc, cfg.t_final, |l, u| {
                    let Some(r) = reference else { return };
                    let k = l * stride;
                    let rr = &r[k * dof..(k + 1) * dof];
                    let slot = match cfg.norm {
                        ErrorNorm::SupOverTimes => &mut sq[l * dof..(l + 1) * dof],
                        ErrorNorm::FinalTime if l == m => &mut sq[..],
                        ErrorNorm::FinalTime => return,
                    };
                    for ((s, a), b) in slot.iter_mut().zip(u).zip(rr) {
                        *s = (a - b) * (a - b);
                    }
                })?;
                let seconds = start.elapsed().as_secs_f64();
                let ok = reference.is_some() && status.diverged_at.is_none();
                cells.push(Accumulator {
                    sq: ok.then_some(sq),
                    seconds,
                });
            }
        }
        Ok(SampleResult { cells, checksum })
    }
}

/// Strong errors of every configured scheme at every coarse step count.
pub fn strong_error_study(config: &StudyConfig) -> Result<ErrorTable> {
    Ok(run_study(config, |_, _| {})?.0)
}

/// Like [`strong_error_study`], additionally returning the fine-path
/// checksum of every sample and reporting `(samples_done, samples_total)`
/// after each batch.
pub fn run_study(
    config: &StudyConfig,
    mut progress: impl FnMut(usize, usize),
) -> Result<(ErrorTable, Vec<u64>)> {
    config.validate()?;
    let cov = assemble_covariance(config.grid, config.noise)?;
    let factor = factorize(&cov)?;
    let prepared = Prepared {
        config,
        plan: SpectralPlan::new(config.grid),
        factor,
        m_store: *config.coarse_steps.iter().max().expect("validated non-empty"),
    };

    let ncells = config.schemes.len() * config.coarse_steps.len();
    let mut sums: Vec<Option<Vec<f64>>> = config
        .schemes
        .iter()
        .flat_map(|_| config.coarse_steps.iter().map(|&m| Some(vec![0.0; prepared.record_len(m)])))
        .collect();
    let mut seconds = vec![0.0; ncells];
    let mut checksums = Vec::with_capacity(config.samples);

    for start in (0..config.samples).step_by(BATCH) {
        let end = (start + BATCH).min(config.samples);
        let batch: Vec<SampleResult> = (start..end)
            .into_par_iter()
            .map(|s| prepared.sample(s))
            .collect::<Result<_>>()?;
        for result in batch {
            checksums.push(result.checksum);
            for (c, cell) in result.cells.into_iter().enumerate() {
                seconds[c] += cell.seconds;
                match (&mut sums[c], cell.sq) {
                    (Some(acc), Some(sq)) => acc.iter_mut().zip(sq).for_each(|(a, v)| *a += v),
                    (slot, None) => *slot = None,
                    (None, Some(_)) => {}
                }
            }
        }
        progress(end, config.samples);
    }

    let mut rows = Vec::with_capacity(ncells);
    let mut c = 0;
    for &scheme in &config.schemes {
        for &m in &config.coarse_steps {
            let (error_sup_meansq, diverged) = match &sums[c] {
                Some(acc) => (
                    acc.iter().fold(0.0f64, |mx, v| mx.max(v / config.samples as f64)),
                    false,
                ),
                None => (f64::NAN, true),
            };
            rows.push(ErrorRow {
                scheme,
                steps: m,
                tau: config.t_final / m as f64,
                error_rms: error_sup_meansq.sqrt(),
                error_sup_meansq,
                seconds: seconds[c],
                samples: config.samples,
                diverged,
            });
            c += 1;
        }
    }
    Ok((ErrorTable { rows }, checksums))
}

/// Cost versus accuracy: every scheme against its own `tau_ref` reference,
/// error measured at the final time, timing summed over samples.
pub fn cost_benchmark(config: &StudyConfig) -> Result<ErrorTable> {
    Ok(run_study(&bench_config(config), |_, _| {})?.0)
}

/// The study actually executed by [`cost_benchmark`].
pub fn bench_config(config: &StudyConfig) -> StudyConfig {
    StudyConfig {
        reference: ReferencePolicy::PerScheme,
        norm: ErrorNorm::FinalTime,
        ..config.clone()
    }
}
