//! Oracles shared by the integration tests. Nothing here calls into the
//! library's own quadrature or transforms.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;

const T_MAX: f64 = 5.0;
const MAX_LEVEL: usize = 12;

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`. The integrand
/// receives `(x, x - a, b - x)`, the distances computed without
/// cancellation so endpoint singularities can be evaluated accurately.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let len = b - a;
    let half = 0.5 * len;
    let node = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cs = s.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (cs * cs);
        let da = len / (1.0 + (-2.0 * s).exp());
        let db = len / (1.0 + (2.0 * s).exp());
        if da <= 0.0 || db <= 0.0 || w == 0.0 {
            return 0.0;
        }
        let x = if t < 0.0 { a + da } else { b - db };
        w * f(x, da, db)
    };
    let mut h = 1.0;
    let mut sum = node(0.0);
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        sum += node(k as f64 * h) + node(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            sum += node(k as f64 * h) + node(-(k as f64) * h);
            k += 2;
        }
        let est = sum * h;
        if level >= 3 && (est - prev).abs() <= tol * est.abs().max(1e-300) {
            return est;
        }
        prev = est;
    }
    prev
}

/// `int_{box i} int_{box j} |x - y|^{-alpha} dy dx` for unit-indexed boxes
/// `[(k-1)/n, k/n]`, integrating the inner variable in the difference
/// coordinate so the singularity always sits at an endpoint.
pub fn box_pair_1d(i: usize, j: usize, n: usize, alpha: f64) -> f64 {
    let dx = 1.0 / n as f64;
    let (i, j) = (i.min(j), i.max(j));
    let r = (j - i) as f64;
    let tol = 1e-13;
    let kernel = |d: f64| d.powf(-alpha);
    if i == j {
        tanh_sinh(
            |_, da, db| tanh_sinh(|_, e, _| kernel(e), 0.0, da, tol) + tanh_sinh(|_, e, _| kernel(e), 0.0, db, tol),
            0.0,
            dx,
            tol,
        )
    } else {
        // x in [0, dx], y - x in [(r - 1) dx + (dx - x), r dx + (dx - x)]
        tanh_sinh(
            |_, _, db| {
                let lo = (r - 1.0) * dx + db;
                tanh_sinh(|_, e, _| kernel(lo + e), 0.0, dx, tol)
            },
            0.0,
            dx,
            tol,
        )
    }
}

/// `int_0^a int_0^b |w|^{-alpha} dw` over the rectangle with one corner at
/// the origin, in polar form.
pub fn corner_potential(a: f64, b: f64, alpha: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    let p = 2.0 - alpha;
    let theta0 = b.atan2(a);
    let tol = 1e-12;
    let first = tanh_sinh(|th, _, _| (a / th.cos()).powf(p), 0.0, theta0, tol);
    let second = tanh_sinh(|th, _, _| (b / th.sin()).powf(p), theta0, FRAC_PI_2, tol);
    (first + second) / p
}

fn oriented(u: f64, v: f64, alpha: f64) -> f64 {
    u.signum() * v.signum() * corner_potential(u.abs(), v.abs(), alpha)
}

/// `int_{[x0,x1] x [y0,y1]} |z - w|^{-alpha} dw` by signed corner
/// decomposition.
pub fn rectangle_potential(z: (f64, f64), x0: f64, x1: f64, y0: f64, y1: f64, alpha: f64) -> f64 {
    let (zx, zy) = z;
    oriented(x1 - zx, y1 - zy, alpha) - oriented(x0 - zx, y1 - zy, alpha) - oriented(x1 - zx, y0 - zy, alpha)
        + oriented(x0 - zx, y0 - zy, alpha)
}

/// Brute-force unit-box interaction
/// `int_{[0,1]^2} int_{[A,A+1] x [B,B+1]} |z - w|^{-alpha} dw dz`.
pub fn unit_box_pair_2d(a: i64, b: i64, alpha: f64, tol: f64) -> f64 {
    let (x0, y0) = (a as f64, b as f64);
    tanh_sinh(
        |zx, _, _| {
            tanh_sinh(
                |zy, _, _| rectangle_potential((zx, zy), x0, x0 + 1.0, y0, y0 + 1.0, alpha),
                0.0,
                1.0,
                tol,
            )
        },
        0.0,
        1.0,
        tol,
    )
}

/// Dense `n^2 D_n^(d)` assembled entrywise from the three-point stencil,
/// first axis fastest.
pub fn dense_laplacian(d: usize, n: usize) -> DMatrix<f64> {
    let m = n - 1;
    let dof = m.pow(d as u32);
    let n2 = (n * n) as f64;
    let mut a = DMatrix::zeros(dof, dof);
    for row in 0..dof {
        a[(row, row)] = -2.0 * d as f64 * n2;
        let mut stride = 1;
        for _ in 0..d {
            let k = (row / stride) % m;
            if k > 0 {
                a[(row, row - stride)] = n2;
            }
            if k + 1 < m {
                a[(row, row + stride)] = n2;
            }
            stride *= m;
        }
    }
    a
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let b = a / 2f64.powi(s);
    let dim = a.nrows();
    let mut term = DMatrix::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &b / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Deterministic pseudo-random values in `[-1, 1)` (SplitMix64).
pub fn noise_vec(len: usize, seed: u64) -> Vec<f64> {
    let mut state = seed;
    (0..len)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Sampled sine eigenvector `prod_j sin(k_j pi x_j)` (unnormalized).
pub fn sine_mode(d: usize, n: usize, k: &[usize]) -> Vec<f64> {
    let m = n - 1;
    let dof = m.pow(d as u32);
    (0..dof)
        .map(|flat| {
            let mut v = 1.0;
            let mut rest = flat;
            for &kj in k.iter().take(d) {
                let i = rest % m + 1;
                rest /= m;
                v *= (kj as f64 * std::f64::consts::PI * i as f64 / n as f64).sin();
            }
            v
        })
        .collect()
}

pub fn eigenvalue(n: usize, k: &[usize]) -> f64 {
    let n = n as f64;
    -4.0 * n * n
        * k.iter()
            .map(|&kj| (kj as f64 * std::f64::consts::PI / (2.0 * n)).sin().powi(2))
            .sum::<f64>()
}
