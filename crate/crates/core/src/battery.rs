//! Deterministic state ensembles for randomized verification.
//!
//! The standard battery cycles through five classes — full-rank, rank
//! deficient, zero-diagonal padded, diagonal, and pure — so any slice of it
//! exercises the support-handling branches. Everything is a pure function of
//! `(dim, index, master seed)`.

use num_complex::Complex64;
use rand::Rng;

use crate::exec::stream_rng;
use crate::linalg::ComplexMatrix;
use crate::states::{embed, random_density, random_pure, DensityMatrix, DiagonalState};

/// One state of the standard battery.
pub fn battery_state(d: usize, index: usize, master: u64) -> DensityMatrix {
    let seed = master ^ ((d as u64) << 40) ^ (index as u64);
    match index % 5 {
        0 => random_density(d, d, seed).expect("battery dimensions are valid"),
        1 => {
            let rank = if d == 1 { 1 } else { 1 + (index / 5) % (d - 1) };
            random_density(d, rank, seed).expect("battery dimensions are valid")
        }
        2 => {
            if d == 1 {
                return random_density(1, 1, seed).expect("battery dimensions are valid");
            }
            let inner_dim = 1 + index % (d - 1);
            let inner =
                random_density(inner_dim, inner_dim, seed).expect("battery dimensions are valid");
            let mut rng = stream_rng(seed, 93);
            let mut positions: Vec<usize> = (0..d).collect();
            for i in (1..d).rev() {
                let j = rng.random_range(0..=i);
                positions.swap(i, j);
            }
            positions.truncate(inner_dim);
            positions.sort_unstable();
            embed(&inner, d, &positions).expect("positions are valid by construction")
        }
        3 => random_diag_state(d, seed),
        4 => random_pure(d, seed)
            .expect("battery dimensions are valid")
            .projector(),
        _ => unreachable!(),
    }
}

/// The first `n` battery states for one dimension.
pub fn battery(d: usize, n: usize, master: u64) -> Vec<DensityMatrix> {
    (0..n).map(|i| battery_state(d, i, master)).collect()
}

/// Random diagonal state with weights bounded away from zero.
pub fn random_diag_state(d: usize, seed: u64) -> DensityMatrix {
    let mut rng = stream_rng(seed, 91);
    let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiagonalState::new(raw.into_iter().map(|x| x / total).collect())
        .expect("normalized by construction")
        .to_density()
}

/// Random diagonal unitary (pure phases).
pub fn random_diag_unitary(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = stream_rng(seed, 92);
    let diag: Vec<Complex64> = (0..d)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    ComplexMatrix::from_diag(&diag)
}

/// Conjugate a state by a diagonal unitary; the result is again valid.
pub fn rotate_by_diag_unitary(rho: &DensityMatrix, u: &ComplexMatrix) -> DensityMatrix {
    let m = u
        .matmul(rho.mat())
        .and_then(|m| m.matmul(&u.adjoint()))
        .expect("dimensions agree");
    DensityMatrix::new(m).expect("unitary conjugation preserves validity")
}
