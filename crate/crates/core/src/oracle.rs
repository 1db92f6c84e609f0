//! Brute-force verification paths.
//!
//! These re-derive the filtration optimum without the eigenvalue identity.
//! Restricting the search to diagonal Kraus vectors is exhaustive:
//! multi-Kraus instruments never beat a single Kraus (the weighted-ratio
//! bound), and the permutation factor of any single Kraus fixes the
//! maximally coherent target, so only the diagonal matters. A random diagonal
//! vector `a` achieves
//!
//! ```text
//! F(a) = Σ_ij a_i ρ_ij a_j*  /  (d · Σ_j |a_j|² ρ_jj)
//! ```
//!
//! which also equals the Rayleigh quotient of the filtration matrix at the
//! unit vector `Δρ^{1/2} a* / ‖·‖`, divided by d. Both evaluation paths are
//! exposed so their agreement can be fuzzed.
//!
//! Sampling is split into fixed-size chunks with one ChaCha stream per chunk
//! index; the merged best is identical for sequential and parallel runs.

use num_complex::Complex64;

use crate::exec::{map_indexed, stream_rng, Execution};
use crate::filtration::filtration_matrix;
use crate::states::{complex_gaussian, DensityMatrix};
use crate::{Error, Result};

/// Samples per RNG stream; fixed so results do not depend on thread count.
const CHUNK: usize = 4096;

/// Weights at or below this make the post-selected state undefined.
const WEIGHT_FLOOR: f64 = 1e-14;

/// Best diagonal Kraus found by random search.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub best_fidelity: f64,
    pub best_kraus_diag: Vec<Complex64>,
    pub samples: usize,
    pub seed: u64,
}

/// Fidelity with the maximally coherent state after post-selecting on the
/// single diagonal Kraus `diag(a)`: direct evaluation of the ratio formula.
pub fn diagonal_kraus_fidelity(rho: &DensityMatrix, a: &[Complex64]) -> Result<f64> {
    if a.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: a.len(),
        });
    }
    let d = rho.dim();
    let mut numerator = 0.0f64;
    let mut denominator = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let term = (a[i] * rho.entry(i, j) * a[j].conj()).re;
            numerator += term;
            if i == j {
                denominator += term;
            }
        }
    }
    if denominator <= WEIGHT_FLOOR {
        return Err(Error::DegenerateKraus {
            weight: denominator,
        });
    }
    // (num/den)/d rather than num/(d·den): for diagonal ρ the two sums are
    // bitwise equal, making the result exactly 1/d.
    Ok((numerator / denominator) / d as f64)
}

/// Same quantity through the whitened picture: map `a` to the normalized
/// vector `Δρ^{1/2} a* / √(Σ|a_j|²ρ_jj)` and take the Rayleigh quotient of
/// the filtration matrix, divided by d. Must agree with
/// [`diagonal_kraus_fidelity`] to ~1e-12.
pub fn rayleigh_fidelity(rho: &DensityMatrix, a: &[Complex64]) -> Result<f64> {
    if a.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: a.len(),
        });
    }
    let diag = rho.diagonal();
    let weight: f64 = a
        .iter()
        .zip(diag.iter())
        .map(|(aj, &p)| aj.norm_sqr() * p)
        .sum();
    if weight <= WEIGHT_FLOOR {
        return Err(Error::DegenerateKraus { weight });
    }
    let scale = weight.sqrt();
    let phi: Vec<Complex64> = a
        .iter()
        .zip(diag.iter())
        .map(|(aj, &p)| aj.conj() * p.sqrt() / scale)
        .collect();
    let b = filtration_matrix(rho);
    let q = b.mat().quadratic_form(&phi)?.re;
    Ok(q / rho.dim() as f64)
}

/// The weighted-ratio bound behind the single-Kraus reduction: for positive
/// tuples, `Σp / Σq ≤ max_μ (p_μ/q_μ)`. Returns the truth of the inequality;
/// fuzzing must never see `false`.
pub fn ratio_inequality_check(p: &[f64], q: &[f64]) -> Result<bool> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    if p.is_empty() {
        return Err(Error::LengthMismatch { left: 0, right: 0 });
    }
    for (index, &x) in p.iter().enumerate() {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::NonPositiveEntry { index, value: x });
        }
    }
    for (index, &x) in q.iter().enumerate() {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::NonPositiveEntry { index, value: x });
        }
    }
    let lhs = p.iter().sum::<f64>() / q.iter().sum::<f64>();
    let rhs = p
        .iter()
        .zip(q.iter())
        .map(|(pi, qi)| pi / qi)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(lhs <= rhs)
}

/// Random search over diagonal Kraus vectors with i.i.d. complex Gaussian
/// components (scale-invariant, so the induced direction is uniform).
/// Deterministic given the seed, independent of thread count.
pub fn random_search_fidelity(
    rho: &DensityMatrix,
    n_samples: usize,
    seed: u64,
) -> Result<OracleResult> {
    random_search_fidelity_with(rho, n_samples, seed, Execution::default())
}

/// [`random_search_fidelity`] with explicit scheduling, mainly for the
/// benchmark comparison between the sequential and parallel paths.
pub fn random_search_fidelity_with(
    rho: &DensityMatrix,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<OracleResult> {
    if n_samples == 0 {
        return Err(Error::InvalidDimension { dim: 0 });
    }
    let d = rho.dim();
    let n_chunks = n_samples.div_ceil(CHUNK);

    struct Best {
        fidelity: f64,
        diag: Vec<Complex64>,
        index: usize,
    }

    let chunk_bests: Vec<Option<Best>> = map_indexed(n_chunks, exec, |c| {
        let mut rng = stream_rng(seed, c as u64);
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(n_samples);
        let mut best: Option<Best> = None;
        for index in lo..hi {
            let a: Vec<Complex64> = (0..d).map(|_| complex_gaussian(&mut rng)).collect();
            let Ok(f) = diagonal_kraus_fidelity(rho, &a) else {
                continue; // degenerate draw; skip, keep the stream aligned
            };
            let better = match &best {
                None => true,
                Some(b) => f > b.fidelity,
            };
            if better {
                best = Some(Best {
                    fidelity: f,
                    diag: a,
                    index,
                });
            }
        }
        best
    });

    // Merge in chunk order; strict inequality keeps the earliest sample on
    // ties, so the outcome is schedule-independent.
    let mut merged: Option<Best> = None;
    for b in chunk_bests.into_iter().flatten() {
        let take = match &merged {
            None => true,
            Some(m) => b.fidelity > m.fidelity || (b.fidelity == m.fidelity && b.index < m.index),
        };
        if take {
            merged = Some(b);
        }
    }
    let merged = merged.ok_or(Error::DegenerateKraus { weight: 0.0 })?;
    Ok(OracleResult {
        best_fidelity: merged.fidelity,
        best_kraus_diag: merged.diag,
        samples: n_samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::max_fidelity;
    use crate::states::{mcs, random_density, random_pure, DiagonalState};
    use crate::transform::counterexample_states;

    #[test]
    fn uniform_kraus_on_incoherent_state_gives_floor() {
        let rho = DiagonalState::new(vec![0.2, 0.5, 0.3]).unwrap().to_density();
        let a = vec![Complex64::ONE; 3];
        assert_eq!(diagonal_kraus_fidelity(&rho, &a).unwrap(), 1.0 / 3.0);
        assert!((rayleigh_fidelity(&rho, &a).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn every_sample_on_incoherent_state_is_exactly_the_floor() {
        let rho = DiagonalState::new(vec![0.4, 0.6]).unwrap().to_density();
        let mut rng = stream_rng(3, 0);
        for _ in 0..1000 {
            let a: Vec<Complex64> = (0..2).map(|_| complex_gaussian(&mut rng)).collect();
            assert_eq!(diagonal_kraus_fidelity(&rho, &a).unwrap(), 0.5);
        }
    }

    #[test]
    fn optimal_coefficients_reach_the_closed_form() {
        let (_, rho2) = counterexample_states();
        // Top eigenvector (1,1,0)/√2 whitened back: a = (1,1,0).
        let a = vec![Complex64::ONE, Complex64::ONE, Complex64::ZERO];
        assert!((diagonal_kraus_fidelity(&rho2, &a).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((rayleigh_fidelity(&rho2, &a).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn two_evaluation_paths_agree() {
        let mut rng = stream_rng(11, 7);
        for seed in 0..200u64 {
            let d = 2 + (seed % 3) as usize;
            let rho = random_density(d, d, 8000 + seed).unwrap();
            let a: Vec<Complex64> = (0..d).map(|_| complex_gaussian(&mut rng)).collect();
            let direct = diagonal_kraus_fidelity(&rho, &a).unwrap();
            let whitened = rayleigh_fidelity(&rho, &a).unwrap();
            assert!(
                (direct - whitened).abs() <= 1e-12,
                "paths disagree: {direct} vs {whitened}"
            );
        }
    }

    #[test]
    fn degenerate_kraus_is_an_error() {
        let rho = DiagonalState::new(vec![1.0, 0.0]).unwrap().to_density();
        let a = vec![Complex64::ZERO, Complex64::ONE];
        assert!(matches!(
            diagonal_kraus_fidelity(&rho, &a),
            Err(Error::DegenerateKraus { .. })
        ));
        assert!(matches!(
            rayleigh_fidelity(&rho, &a),
            Err(Error::DegenerateKraus { .. })
        ));
    }

    #[test]
    fn ratio_inequality_examples() {
        assert!(ratio_inequality_check(&[1.0, 1.0], &[1.0, 1.0]).unwrap());
        assert!(ratio_inequality_check(&[3.0, 1.0], &[1.0, 1.0]).unwrap());
        assert!(matches!(
            ratio_inequality_check(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            ratio_inequality_check(&[1.0, -2.0], &[1.0, 1.0]),
            Err(Error::NonPositiveEntry { index: 1, .. })
        ));
        assert!(matches!(
            ratio_inequality_check(&[], &[]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ratio_inequality_fuzz() {
        let mut rng = stream_rng(13, 0);
        for _ in 0..10_000 {
            let len = rand::Rng::random_range(&mut rng, 1..=8usize);
            let p: Vec<f64> = (0..len)
                .map(|_| rand::Rng::random_range(&mut rng, 1e-6..1e6))
                .collect();
            let q: Vec<f64> = (0..len)
                .map(|_| rand::Rng::random_range(&mut rng, 1e-6..1e6))
                .collect();
            assert!(ratio_inequality_check(&p, &q).unwrap());
        }
    }

    #[test]
    fn search_on_plus_state_comes_close_to_one() {
        let plus = mcs(2).unwrap().projector();
        let res = random_search_fidelity(&plus, 100_000, 42).unwrap();
        assert!(res.best_fidelity >= 1.0 - 1e-3);
        assert!(res.best_fidelity <= 1.0 + 1e-9);
    }

    #[test]
    fn search_dominated_by_closed_form() {
        let (rho1, _) = counterexample_states();
        let closed = max_fidelity(&rho1).unwrap();
        let res = random_search_fidelity(&rho1, 100_000, 7).unwrap();
        assert!(res.best_fidelity <= closed + 1e-9);
        assert!(res.best_fidelity >= closed - 5e-3);
    }

    #[test]
    fn search_is_deterministic_across_schedules() {
        let rho = random_density(3, 3, 12345).unwrap();
        let seq = random_search_fidelity_with(&rho, 10_000, 9, Execution::Sequential).unwrap();
        let par = random_search_fidelity_with(&rho, 10_000, 9, Execution::Parallel).unwrap();
        assert_eq!(seq.best_fidelity, par.best_fidelity);
        assert_eq!(seq.best_kraus_diag, par.best_kraus_diag);

        let again = random_search_fidelity(&rho, 10_000, 9).unwrap();
        assert_eq!(seq.best_fidelity, again.best_fidelity);
    }

    #[test]
    fn search_result_reaches_its_reported_fidelity() {
        let rho = random_pure(3, 81).unwrap().projector();
        let res = random_search_fidelity(&rho, 5_000, 3).unwrap();
        let replay = diagonal_kraus_fidelity(&rho, &res.best_kraus_diag).unwrap();
        assert_eq!(replay, res.best_fidelity);
    }
}
