use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use super::CovarianceMatrix;
use crate::error::{Error, Result};

/// Relative diagonal shifts tried in order when the plain factorization fails.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-14, 1e-12, 1e-10];

/// Lower-triangular factor `L` with `L L^T = C + jitter I`.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    matrix: CovarianceMatrix,
    lower: DMatrix<f64>,
    jitter: f64,
}

impl CovarianceFactor {
    pub fn matrix(&self) -> &CovarianceMatrix {
        &self.matrix
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// Absolute diagonal shift that was applied (0 when none was needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// `out = L xi`.
    pub fn mul_lower(&self, xi: &[f64], out: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(xi.len(), n);
        debug_assert_eq!(out.len(), n);
        out.fill(0.0);
        // column-major storage: walk each column below the diagonal
        let data = self.lower.as_slice();
        for (j, &x) in xi.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let col = &data[j * n + j..(j + 1) * n];
            for (o, &l) in out[j..].iter_mut().zip(col) {
                *o += l * x;
            }
        }
    }
}

/// Cholesky factorization with a small escalating diagonal jitter.
pub fn factorize(matrix: &CovarianceMatrix) -> Result<CovarianceFactor> {
    let c = matrix.entries();
    let max_diag = c.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for rel in JITTER_LADDER {
        let jitter = rel * max_diag;
        let mut shifted = c.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(shifted) {
            return Ok(CovarianceFactor {
                matrix: matrix.clone(),
                lower: chol.l(),
                jitter,
            });
        }
    }
    let min_eigenvalue = SymmetricEigen::new(c.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v));
    Err(Error::Factorization {
        size: c.nrows(),
        alpha: matrix.alpha().unwrap_or(f64::NAN),
        max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1] * max_diag,
        min_eigenvalue,
    })
}
