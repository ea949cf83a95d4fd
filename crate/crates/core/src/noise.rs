//! Refinement-consistent Gaussian increments of the discretized noise.
//!
//! A [`NoisePath`] holds (or regenerates on demand) the increments of the
//! noise vector over the finest time grid `tau_ref = T / m_ref`. Coarser
//! increments are never resampled: they are sums of consecutive fine
//! increments, so all step sizes see one and the same noise realization.
//!
//! Coarse sums use a fixed dyadic pairwise tree, `((r0 + r1) + (r2 + r3))`
//! and so on. This makes coarsening exactly associative in floating point:
//! coarsening in two stages is bit-identical to coarsening directly.
//!
//! Row `r` of sample `s` under seed `seed` is drawn from a ChaCha8 stream
//! keyed by `(seed, s)` with stream id `r`, so any row can be regenerated
//! independently of the others.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::covariance::CovarianceFactor;
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Paths above this many bytes are regenerated on demand rather than stored.
pub const MATERIALIZE_LIMIT_BYTES: usize = 1 << 30;

const KEY_TAG: &[u8; 16] = b"stochheat-noise\0";

/// Anything that yields one increment vector per time step.
pub trait IncrementSource {
    fn steps(&self) -> usize;
    fn dof(&self) -> usize;
    fn fill_row(&self, step: usize, out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePlan {
    pub t_final: f64,
    pub m_ref: usize,
    pub grid: GridSpec,
    pub seed: u64,
    pub sample_index: u64,
}

impl NoisePlan {
    pub fn new(grid: GridSpec, t_final: f64, m_ref: usize, seed: u64, sample_index: u64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Config(format!("final time must be positive, got {t_final}")));
        }
        if m_ref == 0 {
            return Err(Error::Config("m_ref must be at least 1".into()));
        }
        Ok(Self {
            t_final,
            m_ref,
            grid,
            seed,
            sample_index,
        })
    }

    pub fn tau_ref(&self) -> f64 {
        self.t_final / self.m_ref as f64
    }

    pub fn with_sample(&self, sample_index: u64) -> Self {
        Self {
            sample_index,
            ..*self
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.sample_index.to_le_bytes());
        key[16..].copy_from_slice(KEY_TAG);
        key
    }
}

/// Checks that `m_ref / m` is a power of two and returns it.
pub fn refinement_ratio(m_ref: usize, m: usize) -> Result<usize> {
    if m == 0 || m_ref % m != 0 || !(m_ref / m).is_power_of_two() {
        return Err(Error::Config(format!(
            "coarse step count {m} must divide m_ref = {m_ref} with a power-of-two ratio"
        )));
    }
    Ok(m_ref / m)
}

/// A materialized `steps x dof` increment array, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    steps: usize,
    dof: usize,
    data: Vec<f64>,
}

impl Increments {
    pub fn new(steps: usize, dof: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != steps * dof {
            return Err(Error::GridMismatch {
                expected: steps * dof,
                found: data.len(),
            });
        }
        Ok(Self { steps, dof, data })
    }

    pub fn zeros(steps: usize, dof: usize) -> Self {
        Self {
            steps,
            dof,
            data: vec![0.0; steps * dof],
        }
    }

    pub fn row(&self, step: usize) -> &[f64] {
        &self.data[step * self.dof..(step + 1) * self.dof]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn collect(source: &impl IncrementSource) -> Self {
        let (steps, dof) = (source.steps(), source.dof());
        let mut data = vec![0.0; steps * dof];
        for (s, row) in data.chunks_exact_mut(dof.max(1)).enumerate().take(steps) {
            source.fill_row(s, row);
        }
        Self { steps, dof, data }
    }

    /// Sums groups of consecutive rows down to `m` rows.
    pub fn coarsen(&self, m: usize) -> Result<Increments> {
        refinement_ratio(self.steps, m)?;
        Ok(Increments::collect(&Coarsened { fine: self, m }))
    }
}

impl IncrementSource for Increments {
    fn steps(&self) -> usize {
        self.steps
    }
    fn dof(&self) -> usize {
        self.dof
    }
    fn fill_row(&self, step: usize, out: &mut [f64]) {
        out.copy_from_slice(self.row(step));
    }
}

/// Lazy view of a fine source summed down to `m` steps.
#[derive(Debug, Clone, Copy)]
pub struct Coarsened<'a, S: ?Sized> {
    fine: &'a S,
    m: usize,
}

impl<'a, S: IncrementSource + ?Sized> Coarsened<'a, S> {
    pub fn new(fine: &'a S, m: usize) -> Result<Self> {
        refinement_ratio(fine.steps(), m)?;
        Ok(Self { fine, m })
    }
}

fn tree_sum<S: IncrementSource + ?Sized>(src: &S, start: usize, len: usize, out: &mut [f64], scratch: &mut [Vec<f64>]) {
    if len == 1 {
        src.fill_row(start, out);
        return;
    }
    let (head, rest) = scratch.split_first_mut().expect("scratch depth covers log2(len)");
    let half = len / 2;
    tree_sum(src, start, half, out, rest);
    tree_sum(src, start + half, half, head, rest);
    out.iter_mut().zip(head.iter()).for_each(|(o, h)| *o += h);
}

impl<S: IncrementSource + ?Sized> IncrementSource for Coarsened<'_, S> {
    fn steps(&self) -> usize {
        self.m
    }
    fn dof(&self) -> usize {
        self.fine.dof()
    }
    fn fill_row(&self, step: usize, out: &mut [f64]) {
        let ratio = self.fine.steps() / self.m;
        let depth = ratio.trailing_zeros() as usize;
        let mut scratch = vec![vec![0.0; self.dof()]; depth];
        tree_sum(self.fine, step * ratio, ratio, out, &mut scratch);
    }
}

#[derive(Debug, Clone)]
enum Storage<'f> {
    Stored(Increments),
    Streamed(&'f CovarianceFactor),
}

/// Fine-resolution increments of one noise sample.
#[derive(Debug, Clone)]
pub struct NoisePath<'f> {
    plan: NoisePlan,
    scale: f64,
    storage: Storage<'f>,
}

/// How a path is held in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStorage {
    /// Materialize below [`MATERIALIZE_LIMIT_BYTES`], stream above.
    Auto,
    Materialized,
    Streamed,
}

fn generate_row(plan: &NoisePlan, factor: &CovarianceFactor, scale: f64, row: usize, xi: &mut [f64], out: &mut [f64]) {
    let mut rng = ChaCha8Rng::from_seed(plan.key());
    rng.set_stream(row as u64);
    for x in xi.iter_mut() {
        *x = StandardNormal.sample(&mut rng);
    }
    factor.mul_lower(xi, out);
    out.iter_mut().for_each(|v| *v *= scale);
}

/// Draws one noise path: every row is `n^d sqrt(tau_ref) L xi`.
pub fn sample_path<'f>(plan: &NoisePlan, factor: &'f CovarianceFactor) -> Result<NoisePath<'f>> {
    sample_path_with(plan, factor, PathStorage::Auto)
}

pub fn sample_path_with<'f>(plan: &NoisePlan, factor: &'f CovarianceFactor, storage: PathStorage) -> Result<NoisePath<'f>> {
    if factor.matrix().grid() != plan.grid {
        return Err(Error::GridMismatch {
            expected: plan.grid.dof(),
            found: factor.dim(),
        });
    }
    let grid = plan.grid;
    let scale = (grid.n() as f64).powi(grid.dim() as i32) * plan.tau_ref().sqrt();
    let dof = grid.dof();
    let bytes = plan.m_ref.saturating_mul(dof).saturating_mul(8);
    let materialize = match storage {
        PathStorage::Auto => bytes <= MATERIALIZE_LIMIT_BYTES,
        PathStorage::Materialized => true,
        PathStorage::Streamed => false,
    };
    let storage = if materialize {
        let mut data = vec![0.0; plan.m_ref * dof];
        let mut xi = vec![0.0; dof];
        for (r, row) in data.chunks_exact_mut(dof).enumerate() {
            generate_row(plan, factor, scale, r, &mut xi, row);
        }
        Storage::Stored(Increments::new(plan.m_ref, dof, data)?)
    } else {
        Storage::Streamed(factor)
    };
    Ok(NoisePath {
        plan: *plan,
        scale,
        storage,
    })
}

impl<'f> NoisePath<'f> {
    pub fn plan(&self) -> &NoisePlan {
        &self.plan
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.storage, Storage::Stored(_))
    }

    /// Coarse increments over `m` equal steps.
    pub fn coarsen(&self, m: usize) -> Result<Increments> {
        Ok(Increments::collect(&Coarsened::new(self, m)?))
    }

    /// Lazy coarse view, summing fine rows as they are requested.
    pub fn coarse_view(&self, m: usize) -> Result<Coarsened<'_, Self>> {
        Coarsened::new(self, m)
    }

    /// FNV-1a hash over the bit patterns of all fine increments.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut row = vec![0.0; self.dof()];
        for r in 0..self.steps() {
            self.fill_row(r, &mut row);
            for v in &row {
                for b in v.to_bits().to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        h
    }

    /// Binary dump: four little-endian `u64` header words `d, n, m_ref, seed`
    /// followed by the fine increments as little-endian `f64`, row-major.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let g = self.plan.grid;
        for word in [g.dim() as u64, g.n() as u64, self.plan.m_ref as u64, self.plan.seed] {
            w.write_all(&word.to_le_bytes())?;
        }
        let mut row = vec![0.0; self.dof()];
        for r in 0..self.steps() {
            self.fill_row(r, &mut row);
            for v in &row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

impl IncrementSource for NoisePath<'_> {
    fn steps(&self) -> usize {
        self.plan.m_ref
    }
    fn dof(&self) -> usize {
        self.plan.grid.dof()
    }
    fn fill_row(&self, step: usize, out: &mut [f64]) {
        match &self.storage {
            Storage::Stored(inc) => out.copy_from_slice(inc.row(step)),
            Storage::Streamed(factor) => {
                let mut xi = vec![0.0; out.len()];
                generate_row(&self.plan, factor, self.scale, step, &mut xi, out);
            }
        }
    }
}

/// Header of a binary noise dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DumpHeader {
    pub dim: usize,
    pub n: usize,
    pub m_ref: usize,
    pub seed: u64,
}

pub fn read_binary(mut r: impl Read) -> Result<(DumpHeader, Increments)> {
    let mut word = [0u8; 8];
    let mut header = [0u64; 4];
    for h in header.iter_mut() {
        r.read_exact(&mut word)?;
        *h = u64::from_le_bytes(word);
    }
    let grid = GridSpec::new(header[0] as usize, header[1] as usize)?;
    let m_ref = header[2] as usize;
    let mut data = vec![0.0; m_ref * grid.dof()];
    for v in data.iter_mut() {
        r.read_exact(&mut word)?;
        *v = f64::from_le_bytes(word);
    }
    let head = DumpHeader {
        dim: grid.dim(),
        n: grid.n(),
        m_ref,
        seed: header[3],
    };
    Ok((head, Increments::new(m_ref, grid.dof(), data)?))
}
