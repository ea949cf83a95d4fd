//! Individual covariance entries: integrals of the Riesz kernel over pairs of
//! grid boxes.

use std::sync::OnceLock;

use super::special::delta2;
use super::RieszAlpha;
use crate::error::{Error, Result};
use crate::quadrature::{
    gauss_legendre, integrate_2d, integrate_corner_singular, Tolerance,
};

const REDUCED_TOL: f64 = 1e-11;
const TENSOR_ORDER: usize = 32;

fn tensor_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(TENSOR_ORDER))
}

/// Box integral in 1D for a nonnegative index offset `r = |i - j|`, in units
/// where the boxes have width `dx`.
pub fn cov_offset_1d(r: usize, dx: f64, alpha: f64) -> f64 {
    let p = 2.0 - alpha;
    let scale = dx.powf(p) / ((1.0 - alpha) * p);
    if r == 0 {
        return 2.0 * scale;
    }
    let rf = r as f64;
    scale * ((rf + 1.0).powf(p) - 2.0 * rf.powf(p) + (rf - 1.0).powf(p))
}

/// `C_ij = int_{x_i}^{x_i+dx} int_{x_j}^{x_j+dx} |x - y|^{-alpha} dx dy` for
/// one-based interior indices on a grid with `n` subdivisions.
pub fn cov_entry_1d(i: usize, j: usize, n: usize, alpha: RieszAlpha) -> Result<f64> {
    if alpha.dim() != 1 {
        return Err(Error::Domain("cov_entry_1d needs a one-dimensional alpha".into()));
    }
    if n < 2 || !(1..n).contains(&i) || !(1..n).contains(&j) {
        return Err(Error::Domain(format!(
            "indices ({i}, {j}) outside 1..={} for n = {n}",
            n.saturating_sub(1)
        )));
    }
    Ok(cov_offset_1d(i.abs_diff(j), 1.0 / n as f64, alpha.value()))
}

/// The reduced integral
/// `int_{[-1,1]^2} ((A+q1)^2 + (B+q2)^2)^{-alpha/2} (1-|q1|)(1-|q2|) dq`,
/// i.e. the box integral between unit boxes offset by `(A, B)`.
///
/// Offsets are canonicalized to `0 <= A <= B`, which leaves the integral
/// unchanged. For `B >= 2` the integrand is smooth on the domain and a
/// panelled 32x32 Gauss–Legendre rule is used; otherwise the singular point
/// `(-A, -B)` lies on the closed domain and every panel touching it is
/// integrated with a graded Duffy transform.
pub fn reduced_box_integral(a: i64, b: i64, alpha: f64) -> f64 {
    let (a, b) = {
        let (x, y) = (a.unsigned_abs() as f64, b.unsigned_abs() as f64);
        (x.min(y), x.max(y))
    };
    let weight = |q1: f64, q2: f64| (1.0 - q1.abs()) * (1.0 - q2.abs());
    let kernel = |q1: f64, q2: f64| {
        let r2 = (a + q1) * (a + q1) + (b + q2) * (b + q2);
        r2.powf(-0.5 * alpha) * weight(q1, q2)
    };
    if b >= 2.0 {
        let (nodes, weights) = tensor_rule();
        let mut sum = 0.0;
        for (lo1, hi1) in [(-1.0, 0.0), (0.0, 1.0)] {
            for (lo2, hi2) in [(-1.0, 0.0), (0.0, 1.0)] {
                let (c1, h1) = (0.5 * (lo1 + hi1), 0.5 * (hi1 - lo1));
                let (c2, h2) = (0.5 * (lo2 + hi2), 0.5 * (hi2 - lo2));
                for (x1, w1) in nodes.iter().zip(weights) {
                    for (x2, w2) in nodes.iter().zip(weights) {
                        sum += w1 * w2 * h1 * h2 * kernel(c1 + h1 * x1, c2 + h2 * x2);
                    }
                }
            }
        }
        return sum;
    }
    let tol = Tolerance::relative(REDUCED_TOL);
    let grading = if alpha > 1.0 { 1.0 / (2.0 - alpha) } else { 1.0 };
    let (px, py) = (-a, -b);
    let mut xs = vec![-1.0, 0.0, 1.0, px];
    let mut ys = vec![-1.0, 0.0, 1.0, py];
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let mut total = 0.0;
    for wx in xs.windows(2) {
        for wy in ys.windows(2) {
            let corner_x = if wx[0] == px { Some(1.0) } else if wx[1] == px { Some(-1.0) } else { None };
            let corner_y = if wy[0] == py { Some(1.0) } else if wy[1] == py { Some(-1.0) } else { None };
            total += match (corner_x, corner_y) {
                (Some(sx), Some(sy)) => {
                    integrate_corner_singular(
                        |u, v| kernel(px + sx * u, py + sy * v),
                        wx[1] - wx[0],
                        wy[1] - wy[0],
                        grading,
                        tol,
                    )
                    .value
                }
                _ => integrate_2d(kernel, wx, wy, tol).value,
            };
        }
    }
    total
}

/// Covariance entry in 2D between boxes whose lower-left corners differ by
/// `(A, B)` grid steps.
pub fn cov_entry_2d(a: i64, b: i64, n: usize, alpha: RieszAlpha) -> Result<f64> {
    if alpha.dim() != 2 {
        return Err(Error::Domain("cov_entry_2d needs a two-dimensional alpha".into()));
    }
    let max_offset = n as i64 - 2;
    if n < 2 || a.abs() > max_offset || b.abs() > max_offset {
        return Err(Error::Domain(format!(
            "offset ({a}, {b}) exceeds n - 2 = {max_offset}"
        )));
    }
    Ok(cov_offset_2d(a, b, 1.0 / n as f64, alpha.value()))
}

pub(crate) fn cov_offset_2d(a: i64, b: i64, dx: f64, alpha: f64) -> f64 {
    let scale = dx.powf(4.0 - alpha);
    if a == 0 && b == 0 {
        // alpha in (0, 2) is guaranteed by RieszAlpha
        scale * delta2(-alpha).expect("alpha validated")
    } else {
        scale * reduced_box_integral(a, b, alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values_n4() {
        let al = RieszAlpha::new(0.5, 1).unwrap();
        assert!((cov_entry_1d(2, 2, 4, al).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let off = cov_entry_1d(1, 2, 4, al).unwrap();
        let expected = 0.25f64.powf(1.5) / 0.75 * (2f64.powf(1.5) - 2.0);
        assert!((off - expected).abs() < 1e-15);
        assert!((off - 0.138_071_187_5).abs() < 1e-10);
        assert_eq!(cov_entry_1d(2, 5, 8, al).unwrap(), cov_entry_1d(5, 2, 8, al).unwrap());
    }

    #[test]
    fn index_range_checked() {
        let al = RieszAlpha::new(0.5, 1).unwrap();
        assert!(cov_entry_1d(0, 1, 4, al).is_err());
        assert!(cov_entry_1d(1, 4, 4, al).is_err());
        let al2 = RieszAlpha::new(0.8, 2).unwrap();
        assert!(cov_entry_2d(3, 0, 4, al2).is_err());
        assert!(cov_entry_1d(1, 1, 4, al2).is_err());
    }

    #[test]
    fn reduced_diagonal_matches_closed_form() {
        for alpha in [0.5, 1.0, 1.5] {
            let q = reduced_box_integral(0, 0, alpha);
            let c = delta2(-alpha).unwrap();
            assert!((q - c).abs() < 1e-8 * c, "alpha {alpha}: {q} vs {c}");
        }
    }

    #[test]
    fn two_d_symmetry_is_exact() {
        let al = RieszAlpha::new(0.8, 2).unwrap();
        let base = cov_entry_2d(1, 2, 8, al).unwrap();
        for (a, b) in [(-1, 2), (1, -2), (-1, -2), (2, 1), (-2, -1)] {
            assert_eq!(cov_entry_2d(a, b, 8, al).unwrap(), base);
        }
    }

    #[test]
    fn far_field_is_close_to_point_interaction() {
        // both unit boxes have unit mass; at distance 20 the kernel is nearly constant
        let v = reduced_box_integral(12, 16, 1.2);
        assert!((v / 20f64.powf(-1.2) - 1.0).abs() < 1e-2);
    }
}
