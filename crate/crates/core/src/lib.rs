//! Coherence filtration under strictly incoherent operations.
//!
//! Quantum coherence is quantified relative to a fixed reference basis: a state
//! is *incoherent* when its density matrix is diagonal in that basis, and the
//! *maximally coherent state* is the uniform superposition of all basis
//! vectors. This crate implements the filtration task: post-select a state
//! through a stochastic strictly incoherent operation so that the output is as
//! close as possible to the maximally coherent state.
//!
//! The core result implemented here is that the optimal fidelity equals
//! `λ_max(Δρ^{-1/2} ρ Δρ^{-1/2}) / d`, where `Δρ` is the dephased (diagonal
//! part of the) state and the inverse square root is taken on the support.
//! That largest eigenvalue is also the Δ-robustness of coherence
//! `R(ρ‖Δρ) = min{λ : ρ ≤ λΔρ}`, and subtracting the incoherent floor `1/d`
//! from the fidelity yields a proper coherence measure `C_m`.
//!
//! Layout:
//!
//! - [`linalg`] — dense complex matrices, Hermitian Jacobi eigensolver, PSD
//!   tests, permutations.
//! - [`states`] — validated density matrices, dephasing, the maximally
//!   coherent state, fidelity with pure targets, seeded random ensembles.
//! - [`sio`] — strictly incoherent Kraus operators and stochastic instruments.
//! - [`filtration`] — the optimal filtration value, the Kraus operator that
//!   achieves it, and the post-selected output state.
//! - [`measures`] — Δ-robustness by two independent routes and the measure
//!   `C_m` with its axioms.
//! - [`transform`] — convertibility decisions (coherence rank, incoherent
//!   projector search) and the built-in counterexample showing measure
//!   ordering does not decide mixed-state convertibility.
//! - [`oracle`] — brute-force verification paths that re-derive the optimum
//!   without the eigenvalue formula.
//! - [`io`] — JSON file formats for matrices and instruments.
//! - [`exec`] — sequential/parallel execution of batch work with
//!   thread-count-independent results.
//!
//! Batch operations (oracle sampling, randomized batteries) run on rayon when
//! the `parallel` feature is enabled (default) and fall back to sequential
//! execution otherwise; results are bit-identical either way.

pub mod battery;
pub mod exec;
pub mod filtration;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod oracle;
pub mod sio;
pub mod states;
pub mod transform;

pub use exec::Execution;
pub use linalg::{ComplexMatrix, EigenPair, Permutation};
pub use states::{DensityMatrix, DiagonalState, PureState};

use thiserror::Error;

/// Crate-wide error type. Variants name the violated bound and its magnitude
/// where a numeric check failed.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix entry ({row},{col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid dimension {dim}")]
    InvalidDimension { dim: usize },

    #[error("not Hermitian: max |A - A†| entry {deviation:.3e} exceeds {bound:.3e}")]
    NotHermitian { deviation: f64, bound: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("trace is {trace:.12}, deviates from 1 by {deviation:.3e} (bound {bound:.3e})")]
    TraceNotOne { trace: f64, deviation: f64, bound: f64 },

    #[error("not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} below -{bound:.3e}")]
    NotPsd { min_eigenvalue: f64, bound: f64 },

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("not a permutation: {reason}")]
    NotPermutation { reason: String },

    #[error("not strictly incoherent: {axis} {index} has more than one entry above {bound:.3e}")]
    NotStrictlyIncoherent {
        axis: Axis,
        index: usize,
        bound: f64,
    },

    #[error("Kraus sum exceeds identity: min eigenvalue of I - ΣK†K is {min_eigenvalue:.3e}")]
    NotSubnormalized { min_eigenvalue: f64 },

    #[error("instrument has no Kraus operators")]
    EmptyInstrument,

    #[error("instrument never fires: total probability {probability:.3e} ≤ {bound:.3e}")]
    ZeroProbability { probability: f64, bound: f64 },

    #[error("projector compression has weight {weight:.3e} ≤ {bound:.3e}")]
    ZeroWeight { weight: f64, bound: f64 },

    #[error("empty projector index set")]
    EmptyProjector,

    #[error("projector index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("diagonal entry {index} vanishes ({value:.3e}); closed form undefined")]
    DegenerateDiagonal { index: usize, value: f64 },

    #[error("robustness infeasible at upper bound λ = {lambda}; state bypassed validation")]
    InfeasibleAtUpperBound { lambda: f64 },

    #[error("dimension {dim} exceeds subset-enumeration cap {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("entry {index} is {value:.3e}, must be positive")]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("Kraus weight Σ|a_j|²ρ_jj = {weight:.3e} is degenerate")]
    DegenerateKraus { weight: f64 },

    #[error("ragged {field} array: row {row} has {len} entries, expected {dim}")]
    RaggedMatrix {
        field: &'static str,
        row: usize,
        len: usize,
        dim: usize,
    },

    #[error("unknown tolerance name {name:?}")]
    UnknownTolerance { name: String },

    #[error("not a state vector: norm deviates from 1 by {deviation:.3e}")]
    NotNormalized { deviation: f64 },
}

/// Row/column discriminator for structure violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Row => write!(f, "row"),
            Axis::Column => write!(f, "column"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Named tolerance profile. Every default is overridable per call site or,
/// for file validation, through this struct.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Max absolute entry of `A - A†` for a matrix to count as Hermitian.
    pub herm: f64,
    /// Absolute trace deviation allowed for a density matrix.
    pub trace: f64,
    /// Eigenvalues above `-psd` count as nonnegative.
    pub psd: f64,
    /// Eigensolver residual target, relative to the Frobenius norm.
    pub eig: f64,
    /// Support detection: diagonal entries above `zero` count as nonzero.
    pub zero: f64,
    /// Entries above `sio` count as structural nonzeros of a Kraus operator.
    pub sio: f64,
    /// Second eigenvalue bound for a normalized compression to be rank one.
    pub rank: f64,
    /// Bisection bracket width at which the robustness search stops.
    pub bisect: f64,
    /// Classification margin on the measure `C_m` (faithfulness checks).
    pub measure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-10,
            trace: 1e-10,
            psd: 1e-10,
            eig: 1e-11,
            zero: 1e-12,
            sio: 1e-12,
            rank: 1e-10,
            bisect: 1e-8,
            measure: 1e-9,
        }
    }
}

impl Tolerances {
    /// Set a tolerance by name, as accepted on the command line
    /// (`herm`, `trace`, `psd`, `eig`, `zero`, `sio`, `rank`, `bisect`,
    /// `measure`).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "herm" => self.herm = value,
            "trace" => self.trace = value,
            "psd" => self.psd = value,
            "eig" => self.eig = value,
            "zero" => self.zero = value,
            "sio" => self.sio = value,
            "rank" => self.rank = value,
            "bisect" => self.bisect = value,
            "measure" => self.measure = value,
            _ => {
                return Err(Error::UnknownTolerance {
                    name: name.to_string(),
                })
            }
        }
        Ok(())
    }
}
