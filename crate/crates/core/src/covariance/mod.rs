//! Covariance of the box-averaged Riesz noise on a finite-difference grid.
//!
//! Entry `(i, j)` is the integral of `|x - y|^{-alpha}` over the grid boxes
//! anchored at interior nodes `i` and `j`. Entries only depend on the index
//! offset between the two boxes, so assembly computes one value per distinct
//! offset and broadcasts it.

mod entries;
mod factor;
mod special;

use nalgebra::DMatrix;
use rayon::prelude::*;

pub use entries::{cov_entry_1d, cov_entry_2d, cov_offset_1d, reduced_box_integral};
pub use factor::{factorize, CovarianceFactor, JITTER_LADDER};
pub use special::{b2, delta2, unit_box_self_integral};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Largest `n` for which a dense 2D covariance matrix is assembled.
pub const MAX_N_2D: usize = 64;

/// Exponent of the Riesz kernel `|x - y|^{-alpha}`, validated against the
/// spatial dimension: `0 < alpha < min(2, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszAlpha {
    value: f64,
    dim: usize,
}

impl RieszAlpha {
    pub fn new(value: f64, dim: usize) -> Result<Self> {
        let upper = match dim {
            1 => 1.0,
            2 => 2.0,
            _ => return Err(Error::Config(format!("unsupported dimension {dim}"))),
        };
        if !(value > 0.0 && value < upper) {
            return Err(Error::Domain(format!(
                "alpha must lie in (0,{upper}) for d={dim}, got {value}"
            )));
        }
        Ok(Self { value, dim })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Spatial correlation of the driving noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMode {
    Riesz(RieszAlpha),
    /// Uncorrelated box noise, covariance `dx^d I`.
    White,
}

impl NoiseMode {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            NoiseMode::Riesz(a) => Some(a.value()),
            NoiseMode::White => None,
        }
    }
}

/// Offset key: `|i - j|` in 1D, `(min(|A|,|B|), max(|A|,|B|))` in 2D.
pub type Offset = (usize, usize);

#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    grid: GridSpec,
    mode: NoiseMode,
    entries: DMatrix<f64>,
    offsets: Vec<(Offset, f64)>,
}

impl CovarianceMatrix {
    /// Wraps an arbitrary symmetric matrix, e.g. for testing factorization.
    pub fn from_dense(grid: GridSpec, mode: NoiseMode, entries: DMatrix<f64>) -> Result<Self> {
        let dof = grid.dof();
        if entries.nrows() != dof || entries.ncols() != dof {
            return Err(Error::GridMismatch {
                expected: dof,
                found: entries.nrows(),
            });
        }
        if entries != entries.transpose() {
            return Err(Error::Domain("covariance matrix must be symmetric".into()));
        }
        Ok(Self {
            grid,
            mode,
            entries,
            offsets: Vec::new(),
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn mode(&self) -> NoiseMode {
        self.mode
    }

    pub fn alpha(&self) -> Option<f64> {
        self.mode.alpha()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// One value per distinct offset, in ascending offset order. Empty for
    /// matrices built with [`CovarianceMatrix::from_dense`].
    pub fn distinct_offsets(&self) -> &[(Offset, f64)] {
        &self.offsets
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Builds the dense covariance matrix for `grid` and `mode`.
pub fn assemble_covariance(grid: GridSpec, mode: NoiseMode) -> Result<CovarianceMatrix> {
    let dof = grid.dof();
    let dx = grid.dx();
    let m = grid.interior();
    if let NoiseMode::Riesz(alpha) = mode {
        if alpha.dim() != grid.dim() {
            return Err(Error::Domain(format!(
                "alpha validated for d={} used on a d={} grid",
                alpha.dim(),
                grid.dim()
            )));
        }
    }
    if grid.dim() == 2 && grid.n() > MAX_N_2D {
        return Err(Error::Config(format!(
            "dense 2D covariance is limited to n <= {MAX_N_2D}, got n = {}",
            grid.n()
        )));
    }
    match mode {
        NoiseMode::White => {
            let v = dx.powi(grid.dim() as i32);
            let offsets = vec![((0, 0), v)];
            Ok(CovarianceMatrix {
                grid,
                mode,
                entries: DMatrix::from_diagonal_element(dof, dof, v),
                offsets,
            })
        }
        NoiseMode::Riesz(alpha) if grid.dim() == 1 => {
            let table: Vec<f64> = (0..m).map(|r| cov_offset_1d(r, dx, alpha.value())).collect();
            let entries = DMatrix::from_fn(dof, dof, |i, j| table[i.abs_diff(j)]);
            let offsets = table.iter().enumerate().map(|(r, &v)| ((r, 0), v)).collect();
            Ok(CovarianceMatrix {
                grid,
                mode,
                entries,
                offsets,
            })
        }
        NoiseMode::Riesz(alpha) => {
            let keys: Vec<Offset> = (0..m).flat_map(|b| (0..=b).map(move |a| (a, b))).collect();
            let values: Vec<f64> = keys
                .par_iter()
                .map(|&(a, b)| entries::cov_offset_2d(a as i64, b as i64, dx, alpha.value()))
                .collect();
            let mut table = vec![0.0; m * m];
            for (&(a, b), &v) in keys.iter().zip(&values) {
                table[a * m + b] = v;
                table[b * m + a] = v;
            }
            let entries = DMatrix::from_fn(dof, dof, |i, j| {
                let (i1, i2) = (i % m, i / m);
                let (j1, j2) = (j % m, j / m);
                table[i1.abs_diff(j1) * m + i2.abs_diff(j2)]
            });
            Ok(CovarianceMatrix {
                grid,
                mode,
                entries,
                offsets: keys.into_iter().zip(values).collect(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_ranges() {
        assert!(RieszAlpha::new(0.5, 1).is_ok());
        assert!(RieszAlpha::new(1.5, 2).is_ok());
        let err = RieszAlpha::new(1.5, 1).unwrap_err().to_string();
        assert!(err.contains("alpha must lie in (0,1) for d=1"), "{err}");
        assert!(RieszAlpha::new(0.0, 2).is_err());
        assert!(RieszAlpha::new(2.0, 2).is_err());
        assert!(RieszAlpha::new(0.5, 3).is_err());
    }

    #[test]
    fn one_d_small_matrix() {
        let g = GridSpec::new(1, 4).unwrap();
        let c = assemble_covariance(g, NoiseMode::Riesz(RieszAlpha::new(0.5, 1).unwrap())).unwrap();
        let e = c.entries();
        assert_eq!(e.nrows(), 3);
        for i in 0..3 {
            assert!((e[(i, i)] - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((e[(0, 1)] - 0.138_071_187_5).abs() < 1e-10);
        assert_eq!(e[(0, 1)], e[(1, 2)]);
        assert_eq!(c.distinct_offsets().len(), 3);
    }

    #[test]
    fn white_mode_is_scaled_identity() {
        let g = GridSpec::new(1, 4).unwrap();
        let c = assemble_covariance(g, NoiseMode::White).unwrap();
        assert_eq!(c.entries(), &DMatrix::from_diagonal_element(3, 3, 0.25));
    }

    #[test]
    fn two_d_has_six_distinct_values_for_n4() {
        let g = GridSpec::new(2, 4).unwrap();
        let c = assemble_covariance(g, NoiseMode::Riesz(RieszAlpha::new(0.8, 2).unwrap())).unwrap();
        let mut vals: Vec<f64> = c.entries().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        assert_eq!(vals.len(), 6);
        assert_eq!(c.distinct_offsets().len(), 6);
        assert!(c.entries() == &c.entries().transpose());
    }

    #[test]
    fn large_2d_rejected() {
        let g = GridSpec::new(2, 65).unwrap();
        let r = assemble_covariance(g, NoiseMode::Riesz(RieszAlpha::new(0.8, 2).unwrap()));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn factorize_identity_and_degenerate() {
        let g = GridSpec::new(1, 5).unwrap();
        let id = CovarianceMatrix::from_dense(g, NoiseMode::White, DMatrix::identity(4, 4)).unwrap();
        let f = factorize(&id).unwrap();
        assert_eq!(f.jitter(), 0.0);
        assert_eq!(f.lower(), &DMatrix::<f64>::identity(4, 4));

        // duplicate rows: rank one
        let ones = DMatrix::from_element(4, 4, 1.0);
        let deg = CovarianceMatrix::from_dense(g, NoiseMode::White, ones).unwrap();
        match factorize(&deg) {
            Ok(f) => {
                assert!(f.jitter() > 0.0);
                assert!(f.jitter() <= 1e-8);
            }
            Err(Error::Factorization { size, .. }) => assert_eq!(size, 4),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn factor_reconstructs() {
        let g = GridSpec::new(1, 4).unwrap();
        let c = assemble_covariance(g, NoiseMode::Riesz(RieszAlpha::new(0.5, 1).unwrap())).unwrap();
        let f = factorize(&c).unwrap();
        assert_eq!(f.jitter(), 0.0);
        let rec = f.lower() * f.lower().transpose();
        assert!((rec - c.entries()).amax() < 1e-12);
        let mut out = vec![0.0; 3];
        f.mul_lower(&[1.0, 2.0, 3.0], &mut out);
        let dense = f.lower() * nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]);
        for i in 0..3 {
            assert!((out[i] - dense[i]).abs() < 1e-15);
        }
    }
}
