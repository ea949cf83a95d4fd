//! Box-integral constants for the Riesz kernel on the unit square.

use crate::error::{Error, Result};

const TAIL_TOL: f64 = 1e-17;

/// `B_2(s) = 2/(2+s) * 2F1(1/2, -s/2; 3/2; -1)`.
///
/// The Gauss series at `z = -1` converges like `k^{-(1 + s/2)}`, far too slowly
/// near `s = -2`. Pfaff's transformation on the second parameter gives
/// `2F1(1/2, b; 3/2; -1) = 2^{-b} 2F1(1, b; 3/2; 1/2)`, whose terms shrink at
/// least geometrically with ratio 1/2 for every `b` used here.
pub fn b2(s: f64) -> Result<f64> {
    if !(s > -2.0) || !s.is_finite() {
        return Err(Error::Domain(format!("B2(s) needs s > -2, got {s}")));
    }
    let b = -0.5 * s;
    let c = 1.5;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..10_000 {
        let kf = k as f64;
        // (1)_k / k! = 1, so only (b)_k / (c)_k survives
        term *= (b + kf) / (c + kf) * 0.5;
        sum += term;
        let ratio = ((b + kf + 1.0) / (c + kf + 1.0) * 0.5).abs();
        if ratio < 1.0 && term.abs() * ratio / (1.0 - ratio) < TAIL_TOL * sum.abs().max(1.0) {
            break;
        }
    }
    Ok(2.0 / (2.0 + s) * 2f64.powf(-b) * sum)
}

/// `Delta_2(s)`: the mean of `|z1 - z2|^s` for independent uniform points of
/// the unit square, for `s` in `(-2, 0)`.
///
/// `Delta_2(s) = 8((3+s) 2^{s/2+1} + 1)/((s+2)(s+3)(s+4)) + 4 B_2(s)
///               - 4(s+4)/(s+2) B_2(s+2)`.
pub fn delta2(s: f64) -> Result<f64> {
    if !(s > -2.0 && s < 0.0) {
        return Err(Error::Domain(format!("Delta2(s) needs s in (-2, 0), got {s}")));
    }
    let head = 8.0 * ((3.0 + s) * 2f64.powf(0.5 * s + 1.0) + 1.0)
        / ((s + 2.0) * (s + 3.0) * (s + 4.0));
    Ok(head + 4.0 * b2(s)? - 4.0 * (s + 4.0) / (s + 2.0) * b2(s + 2.0)?)
}

/// Self-interaction integral of `|z1 - z2|^{-alpha}` over the unit square.
pub fn unit_box_self_integral(alpha: f64) -> Result<f64> {
    delta2(-alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b2_terminating_and_asinh_cases() {
        assert_eq!(b2(0.0).unwrap(), 1.0);
        let expected = 2.0 * (1.0 + 2f64.sqrt()).ln();
        assert!((b2(-1.0).unwrap() - expected).abs() < 1e-14);
        // s = 2: 2F1(1/2,-1;3/2;-1) = 1 + 1/3
        assert!((b2(2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn b2_domain() {
        assert!(b2(-2.0).is_err());
        assert!(b2(f64::NAN).is_err());
        assert!(b2(-1.999).is_ok());
    }

    #[test]
    fn delta2_known_values() {
        // mean inverse distance in the unit square
        let sqrt2 = 2f64.sqrt();
        let exact = 4.0 / 3.0 * (1.0 - sqrt2) + 4.0 * (1.0 + sqrt2).ln();
        assert!((delta2(-1.0).unwrap() - exact).abs() < 1e-13);
        let small = delta2(-1e-6).unwrap();
        assert!((small - 1.0).abs() < 1e-3);
        assert!(delta2(0.0).is_err());
        assert!(delta2(-2.0).is_err());
    }
}
