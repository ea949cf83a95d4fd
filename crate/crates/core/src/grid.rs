//! Uniform Dirichlet grids on `(0,1)^d` and fields living on their interior nodes.

use crate::error::{Error, Result};

/// Uniform grid with `n` subdivisions per axis on the unit interval or square.
///
/// Only interior nodes carry unknowns; boundary values are implicitly zero.
/// Interior nodes are flattened lexicographically with the first axis running
/// fastest: the zero-based flat index of the multi-index `(k_1, .., k_d)`
/// (each `k_j` in `1..n`) is `(k_1 - 1) + (k_2 - 1)(n - 1) + ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    dim: usize,
    n: usize,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Config(format!(
                "unsupported dimension {dim}; only d = 1 and d = 2 are supported"
            )));
        }
        if n < 2 {
            return Err(Error::Config(format!("grid needs n >= 2 subdivisions, got {n}")));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Subdivisions per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Interior points per axis, `n - 1`.
    pub fn interior(&self) -> usize {
        self.n - 1
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Number of interior unknowns, `(n - 1)^d`.
    pub fn dof(&self) -> usize {
        self.interior().pow(self.dim as u32)
    }

    /// Flat zero-based index of a one-based interior multi-index.
    pub fn flatten(&self, k: &[usize]) -> usize {
        debug_assert_eq!(k.len(), self.dim);
        let m = self.interior();
        k.iter().rev().fold(0, |acc, &kj| {
            debug_assert!((1..=m).contains(&kj));
            acc * m + (kj - 1)
        })
    }

    /// Inverse of [`GridSpec::flatten`].
    pub fn unflatten(&self, idx: usize) -> Vec<usize> {
        let m = self.interior();
        let mut rest = idx;
        (0..self.dim)
            .map(|_| {
                let k = rest % m + 1;
                rest /= m;
                k
            })
            .collect()
    }

    /// Coordinates of the interior node with flat index `idx`.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        self.unflatten(idx)
            .into_iter()
            .map(|k| k as f64 / self.n as f64)
            .collect()
    }

    /// Coordinates of all interior nodes, row-major `dof x dim`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.dof()).flat_map(|i| self.node(i)).collect()
    }
}

/// Real values on the interior nodes of a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.dof()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.dof() {
            return Err(Error::GridMismatch {
                expected: grid.dof(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every interior node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.dof()).map(|i| f(&grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Values on the full closed grid including the zero Dirichlet boundary,
    /// flattened with the first axis fastest over `(n + 1)^d` nodes.
    pub fn with_boundary(&self) -> Vec<f64> {
        let n = self.grid.n();
        let full = n + 1;
        let mut out = vec![0.0; full.pow(self.grid.dim() as u32)];
        for (idx, &v) in self.values.iter().enumerate() {
            let k = self.grid.unflatten(idx);
            let pos = k.iter().rev().fold(0, |acc, &kj| acc * full + kj);
            out[pos] = v;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridSpec::new(3, 8).is_err());
        assert!(GridSpec::new(0, 8).is_err());
        assert!(GridSpec::new(1, 1).is_err());
    }

    #[test]
    fn index_map_is_a_bijection() {
        for (d, n) in [(1, 2), (1, 9), (2, 2), (2, 7)] {
            let g = GridSpec::new(d, n).unwrap();
            assert_eq!(g.dof(), (n - 1).pow(d as u32));
            assert!((g.dx() * n as f64 - 1.0).abs() < 1e-15);
            let mut seen = vec![false; g.dof()];
            for idx in 0..g.dof() {
                let k = g.unflatten(idx);
                assert_eq!(g.flatten(&k), idx);
                assert!(!seen[idx]);
                seen[idx] = true;
            }
        }
    }

    #[test]
    fn first_axis_runs_fastest() {
        let g = GridSpec::new(2, 4).unwrap();
        assert_eq!(g.flatten(&[1, 1]), 0);
        assert_eq!(g.flatten(&[2, 1]), 1);
        assert_eq!(g.flatten(&[1, 2]), 3);
        assert_eq!(g.node(1), vec![0.5, 0.25]);
    }

    #[test]
    fn boundary_is_reconstructed_as_zero() {
        let g = GridSpec::new(2, 3).unwrap();
        let f = Field::from_fn(g, |_| 1.0);
        let full = f.with_boundary();
        assert_eq!(full.len(), 16);
        assert_eq!(full.iter().sum::<f64>(), 4.0);
        for j in 0..4 {
            for i in 0..4 {
                let edge = i == 0 || j == 0 || i == 3 || j == 3;
                assert_eq!(full[j * 4 + i] == 0.0, edge);
            }
        }
    }

    #[test]
    fn from_values_checks_length() {
        let g = GridSpec::new(1, 4).unwrap();
        assert!(Field::from_values(g, vec![0.0; 2]).is_err());
    }
}
