//! Optimal coherence filtration.
//!
//! For a state ρ let `B_ρ = Δρ^{-1/2} ρ Δρ^{-1/2}` (pseudo-inverse square
//! root on the support of the diagonal). The best fidelity with the
//! maximally coherent state reachable by any stochastic strictly incoherent
//! operation is `λ_max(B_ρ)/d`, no multi-Kraus instrument does better, and a
//! single diagonal Kraus built from the top eigenvector achieves it. This
//! module computes the value, constructs that Kraus operator, and reports
//! the post-selected output together with its success probability.

use num_complex::Complex64;

use crate::linalg::{hermitian_eig_max, ComplexMatrix, DEFAULT_EIG_TOL};
use crate::sio::{apply_instrument, validate_sio, SioInstrument, SioKraus, DEFAULT_SIO_TOL};
use crate::states::{dephase, fidelity_with_pure, mcs, pinv_sqrt, DensityMatrix, DEFAULT_ZERO_TOL};
use crate::{Error, Result};

/// The whitened state `B_ρ = Δρ^{-1/2} ρ Δρ^{-1/2}` together with the
/// support of the diagonal. Hermitian and PSD; diagonal entries are 1 on the
/// support and 0 off it, so the trace equals the support size and
/// `λ_max ≤ d`.
#[derive(Debug, Clone)]
pub struct FiltrationMatrix {
    mat: ComplexMatrix,
    support: Vec<usize>,
}

impl FiltrationMatrix {
    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// Basis indices where the dephased state has weight.
    pub fn support(&self) -> &[usize] {
        &self.support
    }
}

/// Everything the filtration protocol produces for one input state.
#[derive(Debug, Clone)]
pub struct FiltrationResult {
    /// Best achievable fidelity with the maximally coherent state, in
    /// [1/d, 1].
    pub max_fidelity: f64,
    /// Diagonal Kraus operator achieving it, rescaled so its largest entry
    /// has unit magnitude.
    pub optimal_kraus: SioKraus,
    /// Probability that the post-selection fires, in (0, 1].
    pub success_probability: f64,
    /// The normalized post-selected state.
    pub output_state: DensityMatrix,
    /// Largest eigenvalue of the filtration matrix (= d · max_fidelity).
    pub lambda_max: f64,
}

/// Build `B_ρ` from a validated state.
pub fn filtration_matrix(rho: &DensityMatrix) -> FiltrationMatrix {
    let delta = dephase(rho);
    let d_inv = pinv_sqrt(&delta, DEFAULT_ZERO_TOL);
    let mat = d_inv
        .matmul(rho.mat())
        .and_then(|m| m.matmul(&d_inv))
        .expect("dimensions agree by construction");
    FiltrationMatrix {
        mat,
        support: rho.support(DEFAULT_ZERO_TOL),
    }
}

fn lambda_max(rho: &DensityMatrix) -> Result<(f64, Vec<Complex64>, FiltrationMatrix)> {
    let b = filtration_matrix(rho);
    let pair = hermitian_eig_max(b.mat(), DEFAULT_EIG_TOL)?;
    let d = rho.dim() as f64;
    // λ_max lives in [1, d] for any valid state; clamp round-off excursions
    // so downstream bound checks stay meaningful.
    let lam = pair.value.clamp(1.0, d);
    Ok((lam, pair.vector, b))
}

/// `λ_max(B_ρ)/d`, the optimal filtration fidelity, clamped into [1/d, 1].
pub fn max_fidelity(rho: &DensityMatrix) -> Result<f64> {
    let (lam, _, _) = lambda_max(rho)?;
    Ok(lam / rho.dim() as f64)
}

/// The diagonal Kraus operator achieving the optimum: entries
/// `a_j = c_j* / √ρ_jj` from the top eigenvector `c` of `B_ρ`, zero where
/// the diagonal vanishes, rescaled by `1/max_j |a_j|` so that `K†K ≤ I`
/// holds with the largest possible success probability among scalar
/// multiples.
pub fn optimal_kraus(rho: &DensityMatrix) -> Result<SioKraus> {
    let (_, top, _) = lambda_max(rho)?;
    build_kraus(rho, &top)
}

fn build_kraus(rho: &DensityMatrix, top: &[Complex64]) -> Result<SioKraus> {
    let diag = rho.diagonal();
    let mut a: Vec<Complex64> = top
        .iter()
        .zip(diag.iter())
        .map(|(c, &p)| {
            if p > DEFAULT_ZERO_TOL {
                c.conj() / p.sqrt()
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    let max = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    debug_assert!(max > 0.0, "top eigenvector must meet the support");
    for z in &mut a {
        *z /= max;
    }
    validate_sio(&ComplexMatrix::from_diag(&a), DEFAULT_SIO_TOL)
}

/// Run the whole protocol: compute the optimum, build the Kraus operator,
/// apply it, and check that the output actually attains the optimum.
pub fn filtrate(rho: &DensityMatrix) -> Result<FiltrationResult> {
    let (lam, top, _) = lambda_max(rho)?;
    let d = rho.dim();
    let max_fid = lam / d as f64;
    let kraus = build_kraus(rho, &top)?;
    // Cannot fire with probability zero: the rescaled Kraus has a unit entry
    // on a support index.
    let (output_state, success_probability) =
        apply_instrument(rho, &SioInstrument::single(kraus.clone()))?;
    let achieved = fidelity_with_pure(&output_state, &mcs(d)?)?;
    debug_assert!(
        (achieved - max_fid).abs() <= 1e-9,
        "constructed Kraus must attain the optimum: {achieved} vs {max_fid}"
    );
    Ok(FiltrationResult {
        max_fidelity: max_fid,
        optimal_kraus: kraus,
        success_probability,
        output_state,
        lambda_max: lam,
    })
}

/// Qubit-only analytic value `(1 + |ρ_01|/√(ρ_00 ρ_11))/2`, an independent
/// cross-check path for d = 2 with nonvanishing diagonals.
pub fn qubit_closed_form(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 2,
        });
    }
    let p0 = rho.entry(0, 0).re;
    let p1 = rho.entry(1, 1).re;
    for (i, p) in [p0, p1].into_iter().enumerate() {
        if p <= DEFAULT_ZERO_TOL {
            return Err(Error::DegenerateDiagonal { index: i, value: p });
        }
    }
    Ok((1.0 + rho.entry(0, 1).norm() / (p0 * p1).sqrt()) / 2.0)
}
