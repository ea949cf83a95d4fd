//! Exact spectral calculus for the finite-difference Dirichlet Laplacian.
//!
//! The matrix `n^2 D_n^(d)` is diagonalized by the discrete sine basis
//! `phi_k(x) = prod_j sqrt(2) sin(k_j pi x_j)`, with eigenvalues
//! `lambda_k = -4 n^2 sum_j sin^2(k_j pi / (2n))`. The basis is orthonormal
//! for the inner product `<u, v> = dx^d sum_i u_i v_i`, so that
//!
//! * forward: `c_k = dx^d sum_i v_i phi_k(x_i)`
//! * inverse: `v_i = sum_k c_k phi_k(x_i)`
//!
//! are mutual inverses without any per-call normalization choice.

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

/// Immutable diagonalization of the discrete Laplacian on one grid.
#[derive(Debug, Clone)]
pub struct SpectralPlan {
    grid: GridSpec,
    eigenvalues: Vec<f64>,
    /// `sin(j k pi / n)` for `j, k` in `1..n`, row-major `(n-1) x (n-1)`.
    sines: Vec<f64>,
}

impl SpectralPlan {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n();
        let m = grid.interior();
        let nf = n as f64;
        let mut sines = vec![0.0; m * m];
        for j in 1..=m {
            for k in 1..=m {
                // reduce j*k mod 2n before scaling to keep the argument small
                let r = (j * k) % (2 * n);
                sines[(j - 1) * m + (k - 1)] = (r as f64 * std::f64::consts::PI / nf).sin();
            }
        }
        let axis: Vec<f64> = (1..=m)
            .map(|k| {
                let s = (k as f64 * std::f64::consts::PI / (2.0 * nf)).sin();
                -4.0 * nf * nf * s * s
            })
            .collect();
        let eigenvalues = (0..grid.dof())
            .map(|idx| grid.unflatten(idx).iter().map(|&k| axis[k - 1]).sum())
            .collect();
        Self {
            grid,
            eigenvalues,
            sines,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Eigenvalues in flattened multi-index order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The sampled basis vector `phi_k` for a one-based multi-index.
    pub fn eigenvector(&self, k: &[usize]) -> Field {
        Field::from_fn(self.grid, |x| {
            x.iter()
                .zip(k)
                .map(|(&xj, &kj)| {
                    std::f64::consts::SQRT_2 * (kj as f64 * std::f64::consts::PI * xj).sin()
                })
                .product::<f64>()
        })
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch {
                expected: self.grid.dof(),
                found: f.grid().dof(),
            });
        }
        Ok(())
    }

    /// Unscaled sine transform applied along every axis; `scratch` has length dof.
    fn sine_transform(&self, values: &mut [f64], scratch: &mut [f64]) {
        let m = self.grid.interior();
        let s = &self.sines;
        match self.grid.dim() {
            1 => {
                // the sine matrix is symmetric, so accumulate rows (vectorizes)
                scratch.fill(0.0);
                for (j, &v) in values.iter().enumerate() {
                    let row = &s[j * m..(j + 1) * m];
                    for (o, &sv) in scratch.iter_mut().zip(row) {
                        *o += v * sv;
                    }
                }
                values.copy_from_slice(scratch);
            }
            2 => {
                // first axis: each contiguous line of length m
                scratch.fill(0.0);
                for r in 0..m {
                    let line = &values[r * m..(r + 1) * m];
                    let out = &mut scratch[r * m..(r + 1) * m];
                    for (j, &v) in line.iter().enumerate() {
                        let srow = &s[j * m..(j + 1) * m];
                        for (o, &sv) in out.iter_mut().zip(srow) {
                            *o += v * sv;
                        }
                    }
                }
                // second axis
                values.fill(0.0);
                for k in 0..m {
                    let out = &mut values[k * m..(k + 1) * m];
                    for j in 0..m {
                        let w = s[k * m + j];
                        let line = &scratch[j * m..(j + 1) * m];
                        for (o, &v) in out.iter_mut().zip(line) {
                            *o += w * v;
                        }
                    }
                }
            }
            _ => unreachable!("GridSpec only admits d = 1, 2"),
        }
    }

    /// Nodal values to sine coefficients, in place.
    pub fn forward_in_place(&self, values: &mut [f64], scratch: &mut [f64]) {
        self.sine_transform(values, scratch);
        let scale = (std::f64::consts::SQRT_2 * self.grid.dx()).powi(self.grid.dim() as i32);
        values.iter_mut().for_each(|v| *v *= scale);
    }

    /// Sine coefficients to nodal values, in place.
    pub fn inverse_in_place(&self, values: &mut [f64], scratch: &mut [f64]) {
        self.sine_transform(values, scratch);
        let scale = std::f64::consts::SQRT_2.powi(self.grid.dim() as i32);
        values.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn forward(&self, f: &Field) -> Result<Vec<f64>> {
        self.check(f)?;
        let mut v = f.values().to_vec();
        let mut scratch = vec![0.0; v.len()];
        self.forward_in_place(&mut v, &mut scratch);
        Ok(v)
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Result<Field> {
        if coeffs.len() != self.grid.dof() {
            return Err(Error::GridMismatch {
                expected: self.grid.dof(),
                found: coeffs.len(),
            });
        }
        let mut v = coeffs.to_vec();
        let mut scratch = vec![0.0; v.len()];
        self.inverse_in_place(&mut v, &mut scratch);
        Field::from_values(self.grid, v)
    }

    /// Spectral multipliers `exp(t lambda_k)`.
    pub fn semigroup_multipliers(&self, t: f64) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| (t * l).exp()).collect()
    }

    /// Spectral multipliers `1 / (1 - tau lambda_k)`.
    pub fn resolvent_multipliers(&self, tau: f64) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| 1.0 / (1.0 - tau * l)).collect()
    }

    /// Applies a diagonal spectral multiplier to nodal values in place.
    pub fn apply_multipliers_in_place(&self, values: &mut [f64], mult: &[f64], scratch: &mut [f64]) {
        self.forward_in_place(values, scratch);
        values.iter_mut().zip(mult).for_each(|(v, m)| *v *= m);
        self.inverse_in_place(values, scratch);
    }

    fn apply_multipliers(&self, f: &Field, mult: &[f64]) -> Result<Field> {
        self.check(f)?;
        let mut v = f.values().to_vec();
        let mut scratch = vec![0.0; v.len()];
        self.apply_multipliers_in_place(&mut v, mult, &mut scratch);
        Field::from_values(self.grid, v)
    }

    /// `exp(t n^2 D_n^(d)) f`.
    pub fn apply_semigroup(&self, f: &Field, t: f64) -> Result<Field> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("semigroup time must be nonnegative, got {t}")));
        }
        if t == 0.0 {
            self.check(f)?;
            return Ok(f.clone());
        }
        self.apply_multipliers(f, &self.semigroup_multipliers(t))
    }

    /// `(I - tau n^2 D_n^(d))^{-1} f`.
    pub fn apply_resolvent(&self, f: &Field, tau: f64) -> Result<Field> {
        if !(tau > 0.0) {
            return Err(Error::Domain(format!("resolvent step must be positive, got {tau}")));
        }
        self.apply_multipliers(f, &self.resolvent_multipliers(tau))
    }

    /// `n^2 D_n^(d) f` by the five-point (three-point in 1D) stencil.
    pub fn apply_laplacian(&self, f: &Field) -> Result<Field> {
        self.check(f)?;
        let mut out = vec![0.0; f.values().len()];
        laplacian_stencil(self.grid, f.values(), &mut out);
        Field::from_values(self.grid, out)
    }

    /// `n^2 D_n^(d) f` through the eigen-decomposition.
    pub fn apply_laplacian_spectral(&self, f: &Field) -> Result<Field> {
        let eig = self.eigenvalues.clone();
        self.apply_multipliers(f, &eig)
    }
}

/// Matrix-free `out = n^2 D_n^(d) v` with zero Dirichlet data.
pub fn laplacian_stencil(grid: GridSpec, v: &[f64], out: &mut [f64]) {
    let m = grid.interior();
    let n2 = (grid.n() * grid.n()) as f64;
    let d = grid.dim();
    let stride = |axis: usize| m.pow(axis as u32);
    for (idx, o) in out.iter_mut().enumerate() {
        let mut acc = -2.0 * d as f64 * v[idx];
        for axis in 0..d {
            let s = stride(axis);
            let k = (idx / s) % m;
            if k > 0 {
                acc += v[idx - s];
            }
            if k + 1 < m {
                acc += v[idx + s];
            }
        }
        *o = n2 * acc;
    }
}
