//! Shared helpers for the integration suites: independent eigenvalue oracles
//! (characteristic polynomial, never the Jacobi solver). State batteries
//! come from the library's `battery` module.

#![allow(dead_code)]
#![allow(unused_imports)]

pub use cofil::battery::{
    battery, battery_state, random_diag_state, random_diag_unitary, rotate_by_diag_unitary,
};

use cofil::exec::stream_rng;
use cofil::linalg::ComplexMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Eigenvalues of a Hermitian matrix with d ≤ 3 from the characteristic
/// polynomial in closed form: quadratic formula at d = 2, trigonometric
/// cubic at d = 3. Independent of the Jacobi path under test.
pub fn charpoly_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    match a.dim() {
        1 => vec![a[(0, 0)].re],
        2 => {
            let p = a[(0, 0)].re;
            let q = a[(1, 1)].re;
            let mid = 0.5 * (p + q);
            let rad = (0.25 * (p - q) * (p - q) + a[(0, 1)].norm_sqr()).sqrt();
            vec![mid - rad, mid + rad]
        }
        3 => {
            // λ³ - c2·λ² + c1·λ - c0 with c2 = tr, c1 = Σ principal 2x2
            // minors, c0 = det.
            let c2 = a.trace().re;
            let minor = |i: usize, j: usize| -> f64 {
                (a[(i, i)] * a[(j, j)] - a[(i, j)] * a[(j, i)]).re
            };
            let c1 = minor(0, 1) + minor(0, 2) + minor(1, 2);
            let c0 = (a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
                - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
                + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]))
                .re;
            solve_depressed_cubic(-c2, c1, -c0)
        }
        d => panic!("closed-form oracle only covers d ≤ 3, got {d}"),
    }
}

/// Real roots of x³ + b·x² + c·x + e = 0 when all three are real (always the
/// case for Hermitian inputs).
fn solve_depressed_cubic(b: f64, c: f64, e: f64) -> Vec<f64> {
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + e;
    let shift = -b / 3.0;
    if p >= -1e-30 {
        // Triple (or numerically indistinguishable) root.
        return vec![shift; 3];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (((3.0 * q) / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut roots: Vec<f64> = (0..3)
        .map(|k| shift + m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
        .collect();
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots
}

/// Largest root of det(λI - A) by sign-change scanning plus bisection over a
/// Gershgorin bracket. Brute force by design; only reliable when the top
/// root is simple (true for the generic matrices it is used on).
pub fn bruteforce_max_root(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    assert!(d <= 3, "brute-force oracle only covers d ≤ 3");
    let bound = (0..d)
        .map(|i| (0..d).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max)
        + 1.0;
    let poly = |lambda: f64| -> f64 {
        let shifted = ComplexMatrix::from_fn(d, |i, j| {
            let delta = if i == j { Complex64::new(lambda, 0.0) } else { Complex64::ZERO };
            delta - a[(i, j)]
        });
        det_re(&shifted)
    };
    // det(λI - A) → +∞ as λ → ∞; walk down until the first sign change.
    let steps = 20_000usize;
    let h = 2.0 * bound / steps as f64;
    let mut hi = bound;
    let mut lo = bound;
    for k in 1..=steps {
        lo = bound - k as f64 * h;
        if poly(lo) <= 0.0 {
            break;
        }
        hi = lo;
    }
    assert!(poly(lo) <= 0.0, "no sign change found; top root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if poly(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn det_re(a: &ComplexMatrix) -> f64 {
    match a.dim() {
        1 => a[(0, 0)].re,
        2 => (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).re,
        3 => (a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
            - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
            + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]))
            .re,
        d => panic!("determinant helper only covers d ≤ 3, got {d}"),
    }
}

/// Random Hermitian matrix (not necessarily PSD) for solver cross-checks.
pub fn random_hermitian(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = stream_rng(seed, 90);
    let g = ComplexMatrix::from_fn(d, |_, _| {
        Complex64::new(
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
        )
    });
    g.add(&g.adjoint()).unwrap().scale(0.5)
}

