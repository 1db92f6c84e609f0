//! Quantum states in the fixed incoherent basis.
//!
//! A [`DensityMatrix`] is a complex matrix that passed validation: Hermitian,
//! positive semidefinite, unit trace. All coherence quantities in this crate
//! are relative to the canonical basis the matrix is written in; changing
//! basis is the caller's job. The module also provides the fully dephasing
//! channel `Δ`, the pseudo-inverse square root of a diagonal state, the
//! maximally coherent state, fidelity with a pure target, and seeded random
//! ensembles for the property batteries.

use num_complex::Complex64;
use rand::Rng;

use crate::exec::stream_rng;
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::{Error, Result, Tolerances};

/// Diagonal entries at or below this (relative to unit trace) count as zero
/// support. Separates genuine structural zeros from round-off at double
/// precision.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Validated quantum state: Hermitian, PSD, trace one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validate with default tolerances.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        validate_density(&mat, &Tolerances::default())
    }

    /// Skip validation. For internal construction of states that are valid
    /// by construction, and for tests that need invalid inputs.
    pub(crate) fn new_unchecked(mat: ComplexMatrix) -> Self {
        DensityMatrix { mat }
    }

    pub fn from_pure(phi: &PureState) -> Self {
        DensityMatrix {
            mat: ComplexMatrix::outer(phi.amplitudes(), phi.amplitudes()),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    /// Diagonal probabilities as plain reals.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// Basis indices with diagonal weight above `zero_tol`.
    pub fn support(&self, zero_tol: f64) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.mat[(i, i)].re > zero_tol)
            .collect()
    }
}

/// Pure state as a unit amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<Complex64>,
}

impl PureState {
    /// Accepts amplitudes already normalized to within 1e-12.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let dev = (norm - 1.0).abs();
        if dev > 1e-12 {
            return Err(Error::NotNormalized { deviation: dev });
        }
        Ok(PureState { amps })
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn from_unnormalized(amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-14 {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        Ok(PureState {
            amps: amps.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::IndexOutOfRange { index: k, dim: d });
        }
        let mut amps = vec![Complex64::ZERO; d];
        amps[k] = Complex64::ONE;
        Ok(PureState { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Probability vector: a diagonal density matrix by its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalState {
    probs: Vec<f64>,
}

impl DiagonalState {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for (i, &p) in probs.iter().enumerate() {
            if !(p >= -1e-12) {
                return Err(Error::NonPositiveEntry { index: i, value: p });
            }
        }
        let sum: f64 = probs.iter().sum();
        let dev = (sum - 1.0).abs();
        if dev > 1e-10 {
            return Err(Error::TraceNotOne {
                trace: sum,
                deviation: dev,
                bound: 1e-10,
            });
        }
        Ok(DiagonalState { probs })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&self.probs)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::new_unchecked(self.to_matrix())
    }
}

/// Validate a matrix as a density matrix, naming the violated bound and its
/// magnitude on rejection. Checks run in order: shape/finiteness, Hermitian,
/// trace, PSD.
pub fn validate_density(m: &ComplexMatrix, tols: &Tolerances) -> Result<DensityMatrix> {
    m.check_finite()?;
    if m.dim() == 0 {
        return Err(Error::InvalidDimension { dim: 0 });
    }
    let dev = m.hermiticity_deviation();
    if dev > tols.herm {
        return Err(Error::NotHermitian {
            deviation: dev,
            bound: tols.herm,
        });
    }
    let trace = m.trace().re;
    let tdev = (trace - 1.0).abs();
    if tdev > tols.trace {
        return Err(Error::TraceNotOne {
            trace,
            deviation: tdev,
            bound: tols.trace,
        });
    }
    let min = hermitian_eigen(m, tols.eig)?.min_value();
    if min < -tols.psd {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            bound: tols.psd,
        });
    }
    Ok(DensityMatrix { mat: m.clone() })
}

/// Fully dephasing channel: keep the diagonal, drop everything else.
pub fn dephase(rho: &DensityMatrix) -> DiagonalState {
    let probs = rho.diagonal();
    DiagonalState { probs }
}

/// Diagonal matrix with entries `p_i^{-1/2}` on the support of the diagonal
/// state and `0` off it.
pub fn pinv_sqrt(delta: &DiagonalState, zero_tol: f64) -> ComplexMatrix {
    let diag: Vec<f64> = delta
        .probs
        .iter()
        .map(|&p| if p > zero_tol { 1.0 / p.sqrt() } else { 0.0 })
        .collect();
    ComplexMatrix::from_real_diag(&diag)
}

/// The d-dimensional maximally coherent state: uniform amplitudes `1/√d`.
pub fn mcs(d: usize) -> Result<PureState> {
    if d == 0 {
        return Err(Error::InvalidDimension { dim: 0 });
    }
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    Ok(PureState {
        amps: vec![amp; d],
    })
}

/// `⟨φ|ρ|φ⟩`, clamped into [0, 1] (round-off can stray by ~1e-16).
pub fn fidelity_with_pure(rho: &DensityMatrix, phi: &PureState) -> Result<f64> {
    if rho.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: phi.dim(),
        });
    }
    let q = rho.mat.quadratic_form(&phi.amps)?.re;
    Ok(q.clamp(0.0, 1.0))
}

/// Number of amplitudes with `|amp|² > zero_tol`.
pub fn coherence_rank(phi: &PureState, zero_tol: f64) -> usize {
    phi.amps.iter().filter(|z| z.norm_sqr() > zero_tol).count()
}

/// True iff every off-diagonal magnitude is at most `tol`.
pub fn is_incoherent(rho: &DensityMatrix, tol: f64) -> bool {
    let d = rho.dim();
    for i in 0..d {
        for j in 0..d {
            if i != j && rho.mat[(i, j)].norm() > tol {
                return false;
            }
        }
    }
    true
}

pub(crate) fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(
        rng.sample(rand_distr::StandardNormal),
        rng.sample(rand_distr::StandardNormal),
    )
}

/// Random density matrix `GG†/Tr(GG†)` with `G` a d×rank matrix of i.i.d.
/// standard complex Gaussians. Full support almost surely for rank = d;
/// deterministic given the seed.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension { dim: 0 });
    }
    if rank == 0 || rank > d {
        return Err(Error::InvalidRank { rank, dim: d });
    }
    let mut rng = stream_rng(seed, 0);
    loop {
        let g: Vec<Vec<Complex64>> = (0..d)
            .map(|_| (0..rank).map(|_| complex_gaussian(&mut rng)).collect())
            .collect();
        let trace: f64 = g.iter().flatten().map(|z| z.norm_sqr()).sum();
        if trace <= 1e-12 {
            continue; // astronomically unlikely; resample deterministically
        }
        let mat = ComplexMatrix::from_fn(d, |i, j| {
            (0..rank).map(|k| g[i][k] * g[j][k].conj()).sum::<Complex64>() / trace
        });
        return Ok(DensityMatrix { mat });
    }
}

/// Random pure state with Gaussian amplitudes, Haar-uniform in direction.
pub fn random_pure(d: usize, seed: u64) -> Result<PureState> {
    if d == 0 {
        return Err(Error::InvalidDimension { dim: 0 });
    }
    let mut rng = stream_rng(seed, 1);
    loop {
        let amps: Vec<Complex64> = (0..d).map(|_| complex_gaussian(&mut rng)).collect();
        if let Ok(phi) = PureState::from_unnormalized(amps) {
            return Ok(phi);
        }
    }
}

/// Embed a smaller state into `dim` dimensions at the given strictly
/// increasing basis positions; all other rows and columns are exactly zero.
/// This is how test batteries produce states with exact zero diagonals.
pub fn embed(small: &DensityMatrix, dim: usize, positions: &[usize]) -> Result<DensityMatrix> {
    if positions.len() != small.dim() {
        return Err(Error::DimensionMismatch {
            left: positions.len(),
            right: small.dim(),
        });
    }
    if dim < small.dim() {
        return Err(Error::InvalidDimension { dim });
    }
    for w in positions.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::NotPermutation {
                reason: format!("positions not strictly increasing at {} ≤ {}", w[1], w[0]),
            });
        }
    }
    if let Some(&last) = positions.last() {
        if last >= dim {
            return Err(Error::IndexOutOfRange {
                index: last,
                dim,
            });
        }
    }
    let mut mat = ComplexMatrix::zeros(dim);
    for (i, &pi) in positions.iter().enumerate() {
        for (j, &pj) in positions.iter().enumerate() {
            mat[(pi, pj)] = small.entry(i, j);
        }
    }
    Ok(DensityMatrix { mat })
}
