//! State convertibility under stochastic strictly incoherent operations.
//!
//! Pure-to-pure convertibility is decided exactly by coherence rank: the
//! target's rank must not exceed the source's. Reaching a pure state of
//! coherence rank `r` from a mixed state is possible iff some incoherent
//! projector compresses the state to a rank-one block whose diagonal
//! occupies at least `r` indices; this module searches all `2^d - 1` subsets
//! (capped at d ≤ 20) in lexicographic order and returns the first witness.
//!
//! The built-in pair [`counterexample_states`] shows why measure ordering is
//! only necessary for mixed states: the first state has the larger measure
//! yet cannot reach the second, because none of its compressions is a
//! rank-one block of coherence rank 2.

use crate::linalg::hermitian_eigen;
use crate::measures::c_m;
use crate::sio::{projector_compress, IncoherentProjector};
use crate::states::{coherence_rank, DensityMatrix, PureState, DEFAULT_ZERO_TOL};
use crate::{ComplexMatrix, Error, Result, Tolerances};

/// Subset enumeration refuses dimensions above this.
pub const MAX_ENUM_DIM: usize = 20;

/// Second eigenvalue of a trace-normalized compression must fall below this
/// for the block to count as rank one. Exact-arithmetic examples compress to
/// exactly rank one; the bound covers round-off only.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Why a conversion is possible or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictReason {
    /// Source coherence rank covers the target.
    RankSufficient,
    /// Target coherence rank exceeds the source.
    RankDeficient,
    /// No incoherent projector compresses the state to a rank-one block of
    /// sufficient coherence rank.
    NoPureCompression,
}

/// Outcome of a convertibility query. A witness projector is present exactly
/// when the query was mixed-to-pure and the answer is yes.
#[derive(Debug, Clone)]
pub struct ConvertibilityVerdict {
    pub possible: bool,
    pub witness: Option<IncoherentProjector>,
    pub reason: VerdictReason,
}

/// Decide pure-to-pure convertibility by comparing coherence ranks.
pub fn pure_to_pure(phi1: &PureState, phi2: &PureState) -> Result<ConvertibilityVerdict> {
    if phi1.dim() != phi2.dim() {
        return Err(Error::DimensionMismatch {
            left: phi1.dim(),
            right: phi2.dim(),
        });
    }
    let r1 = coherence_rank(phi1, DEFAULT_ZERO_TOL);
    let r2 = coherence_rank(phi2, DEFAULT_ZERO_TOL);
    Ok(if r1 >= r2 {
        ConvertibilityVerdict {
            possible: true,
            witness: None,
            reason: VerdictReason::RankSufficient,
        }
    } else {
        ConvertibilityVerdict {
            possible: false,
            witness: None,
            reason: VerdictReason::RankDeficient,
        }
    })
}

/// Can a pure state of coherence rank `r_target` be reached from `rho`?
/// Exhaustive search over nonempty index subsets in lexicographic order;
/// the first subset whose compression is rank one with at least `r_target`
/// occupied diagonal indices is returned as the witness.
pub fn pure_reachable(rho: &DensityMatrix, r_target: usize) -> Result<ConvertibilityVerdict> {
    let d = rho.dim();
    if d > MAX_ENUM_DIM {
        return Err(Error::DimensionTooLarge {
            dim: d,
            max: MAX_ENUM_DIM,
        });
    }
    if r_target == 0 || r_target > d {
        return Err(Error::InvalidRank {
            rank: r_target,
            dim: d,
        });
    }
    let mut stack: Vec<usize> = Vec::with_capacity(d);
    if let Some(witness) = search(rho, r_target, 0, &mut stack)? {
        return Ok(ConvertibilityVerdict {
            possible: true,
            witness: Some(witness),
            reason: VerdictReason::RankSufficient,
        });
    }
    Ok(ConvertibilityVerdict {
        possible: false,
        witness: None,
        reason: VerdictReason::NoPureCompression,
    })
}

/// Depth-first subset generation visits `{0} < {0,1} < {0,1,2} < {0,2} < {1}
/// < …`, i.e. lexicographic order on sorted index lists, so the first hit is
/// the lexicographically first witness.
fn search(
    rho: &DensityMatrix,
    r_target: usize,
    start: usize,
    stack: &mut Vec<usize>,
) -> Result<Option<IncoherentProjector>> {
    for i in start..rho.dim() {
        stack.push(i);
        if subset_reaches(rho, r_target, stack)? {
            return Ok(Some(IncoherentProjector::new(rho.dim(), stack.clone())?));
        }
        if let Some(found) = search(rho, r_target, i + 1, stack)? {
            return Ok(Some(found));
        }
        stack.pop();
    }
    Ok(None)
}

fn subset_reaches(rho: &DensityMatrix, r_target: usize, subset: &[usize]) -> Result<bool> {
    let occupied = subset
        .iter()
        .filter(|&&i| rho.entry(i, i).re > DEFAULT_ZERO_TOL)
        .count();
    if occupied < r_target {
        return Ok(false);
    }
    let proj = IncoherentProjector::new(rho.dim(), subset.to_vec())?;
    let (block, weight) = match projector_compress(rho, &proj) {
        Ok(ok) => ok,
        Err(Error::ZeroWeight { .. }) => return Ok(false),
        Err(e) => return Err(e),
    };
    Ok(is_rank_one(&block.scale(1.0 / weight))?)
}

fn is_rank_one(normalized: &ComplexMatrix) -> Result<bool> {
    if normalized.dim() == 1 {
        return Ok(true);
    }
    let eig = hermitian_eigen(normalized, Tolerances::default().eig)?;
    let sorted = eig.sorted_values_desc();
    Ok(sorted[1] <= DEFAULT_RANK_TOL)
}

/// The two built-in three-dimensional example states: the first has the
/// larger measure but cannot reach any coherence-rank-2 pure state, while
/// the second is (up to a zero row) exactly such a state.
pub fn counterexample_states() -> (DensityMatrix, DensityMatrix) {
    let e = 1.0 / 15.0;
    let rho1 = ComplexMatrix::from_real_rows(&[
        vec![5.0 * e, 4.0 * e, 4.0 * e],
        vec![4.0 * e, 5.0 * e, 4.0 * e],
        vec![4.0 * e, 4.0 * e, 5.0 * e],
    ])
    .expect("well-formed constant");
    let rho2 = ComplexMatrix::from_real_rows(&[
        vec![0.5, 0.5, 0.0],
        vec![0.5, 0.5, 0.0],
        vec![0.0, 0.0, 0.0],
    ])
    .expect("well-formed constant");
    (
        DensityMatrix::new(rho1).expect("valid by construction"),
        DensityMatrix::new(rho2).expect("valid by construction"),
    )
}

/// Reproduce the demonstration that measure ordering does not decide
/// mixed-state convertibility: the first built-in state has the strictly
/// larger measure, yet no incoherent projector compresses it to a rank-one
/// block of coherence rank ≥ 2, so it cannot reach the second.
pub fn counterexample_check() -> Result<bool> {
    let (rho1, rho2) = counterexample_states();
    let ordered = c_m(&rho1)? > c_m(&rho2)?;
    let unreachable = !pure_reachable(&rho1, 2)?.possible;
    Ok(ordered && unreachable)
}
