//! Strictly incoherent Kraus operators and stochastic instruments.
//!
//! A strictly incoherent operator has at most one nonzero entry in each row
//! and each column, so conjugating a diagonal matrix by it (either way
//! around) stays diagonal. Every such operator factors as a permutation
//! times a diagonal matrix. A stochastic instrument is a nonempty list of
//! these with `Σ K†K ≤ I`; applying it post-selects on the instrument
//! firing, which happens with probability `Tr(Σ KρK†)`.

use num_complex::Complex64;
use rand::Rng;

use crate::exec::stream_rng;
use crate::linalg::{is_psd, ComplexMatrix, Permutation};
use crate::states::{complex_gaussian, DensityMatrix};
use crate::{Axis, Error, Result, Tolerances};

/// Entries above this magnitude count as structural nonzeros of a Kraus
/// operator. Inputs are either exact patterns or products of validated
/// operators, so an absolute bound is enough.
pub const DEFAULT_SIO_TOL: f64 = 1e-12;

/// Probabilities and weights at or below this are treated as "never fires".
pub const PROBABILITY_FLOOR: f64 = 1e-14;

/// One validated strictly incoherent Kraus operator with `K†K ≤ I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SioKraus {
    mat: ComplexMatrix,
}

impl SioKraus {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
}

/// Nonempty list of strictly incoherent Kraus operators with `Σ K†K ≤ I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SioInstrument {
    kraus: Vec<SioKraus>,
}

impl SioInstrument {
    pub fn new(kraus: Vec<SioKraus>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::EmptyInstrument);
        };
        let d = first.dim();
        for k in &kraus {
            if k.dim() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: k.dim(),
                });
            }
        }
        let sum = kraus_gram_sum(&kraus)?;
        let slack = ComplexMatrix::identity(d).sub(&sum)?;
        if !is_psd(&slack, Tolerances::default().psd)? {
            let min = crate::linalg::hermitian_eigen(&slack, Tolerances::default().eig)?
                .min_value();
            return Err(Error::NotSubnormalized {
                min_eigenvalue: min,
            });
        }
        Ok(SioInstrument { kraus })
    }

    pub fn single(kraus: SioKraus) -> Self {
        SioInstrument { kraus: vec![kraus] }
    }

    pub fn kraus(&self) -> &[SioKraus] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].dim()
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// True iff `Σ K†K = I` within `tol` entrywise, i.e. the instrument is a
    /// trace-preserving channel.
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        match kraus_gram_sum(&self.kraus) {
            Ok(sum) => sum.approx_eq(&ComplexMatrix::identity(self.dim()), tol),
            Err(_) => false,
        }
    }
}

fn kraus_gram_sum(kraus: &[SioKraus]) -> Result<ComplexMatrix> {
    let d = kraus[0].dim();
    let mut sum = ComplexMatrix::zeros(d);
    for k in kraus {
        sum = sum.add(&k.mat.adjoint().matmul(&k.mat)?)?;
    }
    Ok(sum)
}

/// Permutation-diagonal factorization `K = P_π · diag(a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermDiagDecomposition {
    pub perm: Permutation,
    pub diag: Vec<Complex64>,
}

impl PermDiagDecomposition {
    /// Rebuild the Kraus matrix this decomposition came from.
    pub fn reassemble(&self) -> ComplexMatrix {
        let d = self.perm.dim();
        let mut m = ComplexMatrix::zeros(d);
        for j in 0..d {
            m[(self.perm.image(j), j)] = self.diag[j];
        }
        m
    }
}

/// Projector onto a subset of reference-basis vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncoherentProjector {
    dim: usize,
    indices: Vec<usize>,
}

impl IncoherentProjector {
    /// Indices are sorted and deduplicated; the set must be nonempty and in
    /// range.
    pub fn new(dim: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::EmptyProjector);
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::IndexOutOfRange { index: last, dim });
            }
        }
        Ok(IncoherentProjector { dim, indices })
    }

    pub fn full(dim: usize) -> Self {
        IncoherentProjector {
            dim,
            indices: (0..dim).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn as_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim);
        for &i in &self.indices {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }
}

/// Validate the strictly incoherent structure (at most one nonzero per row
/// and per column) and sub-normalization `K†K ≤ I`.
pub fn validate_sio(k: &ComplexMatrix, sio_tol: f64) -> Result<SioKraus> {
    k.check_finite()?;
    let d = k.dim();
    for i in 0..d {
        let nonzeros = (0..d).filter(|&j| k[(i, j)].norm() > sio_tol).count();
        if nonzeros > 1 {
            return Err(Error::NotStrictlyIncoherent {
                axis: Axis::Row,
                index: i,
                bound: sio_tol,
            });
        }
    }
    for j in 0..d {
        let nonzeros = (0..d).filter(|&i| k[(i, j)].norm() > sio_tol).count();
        if nonzeros > 1 {
            return Err(Error::NotStrictlyIncoherent {
                axis: Axis::Column,
                index: j,
                bound: sio_tol,
            });
        }
    }
    let gram = k.adjoint().matmul(k)?;
    let slack = ComplexMatrix::identity(d).sub(&gram)?;
    if !is_psd(&slack, Tolerances::default().psd)? {
        let min = crate::linalg::hermitian_eigen(&slack, Tolerances::default().eig)?.min_value();
        return Err(Error::NotSubnormalized {
            min_eigenvalue: min,
        });
    }
    Ok(SioKraus { mat: k.clone() })
}

/// Factor a strictly incoherent operator as `P_π · diag(a)`. Columns whose
/// single nonzero sits in row `r` force `π(j) = r`; zero columns are paired
/// with the remaining rows in ascending index order, which keeps the result
/// deterministic (any pairing is valid there since the diagonal entry is 0).
pub fn decompose(k: &SioKraus) -> PermDiagDecomposition {
    let d = k.dim();
    let m = k.matrix();
    let mut image: Vec<Option<usize>> = vec![None; d];
    let mut diag = vec![Complex64::ZERO; d];
    let mut row_taken = vec![false; d];

    for j in 0..d {
        for i in 0..d {
            if m[(i, j)].norm() > DEFAULT_SIO_TOL {
                image[j] = Some(i);
                row_taken[i] = true;
                diag[j] = m[(i, j)];
                break;
            }
        }
    }
    let mut free_rows = (0..d).filter(|&i| !row_taken[i]);
    let map: Vec<usize> = image
        .into_iter()
        .map(|slot| slot.unwrap_or_else(|| free_rows.next().expect("row counts must balance")))
        .collect();
    PermDiagDecomposition {
        perm: Permutation::new(map).expect("constructed map is a bijection"),
        diag,
    }
}

/// Apply the instrument with post-selection: returns the normalized output
/// state together with the firing probability `P = Tr(Σ KρK†)`.
pub fn apply_instrument(
    rho: &DensityMatrix,
    ins: &SioInstrument,
) -> Result<(DensityMatrix, f64)> {
    if rho.dim() != ins.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: ins.dim(),
        });
    }
    let d = rho.dim();
    let mut unnormalized = ComplexMatrix::zeros(d);
    for k in ins.kraus() {
        let term = k.matrix().matmul(rho.mat())?.matmul(&k.matrix().adjoint())?;
        unnormalized = unnormalized.add(&term)?;
    }
    let p = unnormalized.trace().re;
    if p <= PROBABILITY_FLOOR {
        return Err(Error::ZeroProbability {
            probability: p,
            bound: PROBABILITY_FLOOR,
        });
    }
    let out = crate::states::validate_density(&unnormalized.scale(1.0 / p), &Tolerances::default())?;
    Ok((out, p))
}

/// Restrict `ρ` to the rows and columns selected by the projector. Returns
/// the |S|×|S| compression and its trace weight (the probability of the
/// projective outcome).
pub fn projector_compress(
    rho: &DensityMatrix,
    proj: &IncoherentProjector,
) -> Result<(ComplexMatrix, f64)> {
    if rho.dim() != proj.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: proj.dim(),
        });
    }
    let idx = proj.indices();
    let block = ComplexMatrix::from_fn(idx.len(), |i, j| rho.entry(idx[i], idx[j]));
    let weight = block.trace().re;
    if weight <= PROBABILITY_FLOOR {
        return Err(Error::ZeroWeight {
            weight,
            bound: PROBABILITY_FLOOR,
        });
    }
    Ok((block, weight))
}

/// Random sub-normalized instrument: each Kraus is a random permutation
/// times a random complex diagonal, globally rescaled so the largest
/// eigenvalue of `Σ K†K` lands exactly at `1 - 1e-6`. Deterministic given
/// the seed.
pub fn random_instrument(d: usize, n_kraus: usize, seed: u64) -> Result<SioInstrument> {
    if d == 0 {
        return Err(Error::InvalidDimension { dim: 0 });
    }
    if n_kraus == 0 {
        return Err(Error::EmptyInstrument);
    }
    let mut rng = stream_rng(seed, 2);
    let mut diags: Vec<Vec<Complex64>> = Vec::with_capacity(n_kraus);
    let mut perms: Vec<Permutation> = Vec::with_capacity(n_kraus);
    for _ in 0..n_kraus {
        diags.push((0..d).map(|_| complex_gaussian(&mut rng)).collect());
        perms.push(Permutation::random(d, &mut rng));
    }
    // ΣK†K is diagonal with entries Σ_μ |a_j^μ|²; rescale its max to 1-1e-6.
    let mut col_weight = vec![0.0f64; d];
    for diag in &diags {
        for (j, a) in diag.iter().enumerate() {
            col_weight[j] += a.norm_sqr();
        }
    }
    let max = col_weight.iter().copied().fold(0.0, f64::max);
    let scale = ((1.0 - 1e-6) / max).sqrt();

    let kraus = diags
        .into_iter()
        .zip(perms)
        .map(|(diag, perm)| {
            let scaled: Vec<Complex64> = diag.into_iter().map(|a| a * scale).collect();
            let mat = PermDiagDecomposition { perm, diag: scaled }.reassemble();
            validate_sio(&mat, DEFAULT_SIO_TOL)
        })
        .collect::<Result<Vec<_>>>()?;
    SioInstrument::new(kraus)
}

/// Random trace-preserving instrument: per basis index the squared Kraus
/// amplitudes form a random probability vector, so `Σ K†K = I` up to
/// round-off. Used to exercise the selective-measurement monotonicity
/// checks. Deterministic given the seed.
pub fn random_tp_instrument(d: usize, n_kraus: usize, seed: u64) -> Result<SioInstrument> {
    if d == 0 {
        return Err(Error::InvalidDimension { dim: 0 });
    }
    if n_kraus == 0 {
        return Err(Error::EmptyInstrument);
    }
    let mut rng = stream_rng(seed, 3);
    // Exponential weights normalized per column give a Dirichlet(1,…,1) split.
    let mut weights = vec![vec![0.0f64; d]; n_kraus];
    for j in 0..d {
        let mut total = 0.0;
        for mu in 0..n_kraus {
            let u: f64 = rng.random_range(1e-12..1.0);
            let e = -u.ln();
            weights[mu][j] = e;
            total += e;
        }
        for w in weights.iter_mut() {
            w[j] /= total;
        }
    }
    let kraus = (0..n_kraus)
        .map(|mu| {
            let diag: Vec<Complex64> = (0..d)
                .map(|j| {
                    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    Complex64::from_polar(weights[mu][j].sqrt(), theta)
                })
                .collect();
            let perm = Permutation::random(d, &mut rng);
            let mat = PermDiagDecomposition { perm, diag }.reassemble();
            validate_sio(&mat, DEFAULT_SIO_TOL)
        })
        .collect::<Result<Vec<_>>>()?;
    SioInstrument::new(kraus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{dephase, is_incoherent, mcs, random_density, DiagonalState};

    #[test]
    fn diagonal_and_permutation_kraus_validate() {
        let k = ComplexMatrix::from_real_diag(&[0.5, 0.3]);
        assert!(validate_sio(&k, DEFAULT_SIO_TOL).is_ok());

        let swap = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(validate_sio(&swap, DEFAULT_SIO_TOL).is_ok());
    }

    #[test]
    fn row_with_two_nonzeros_rejected() {
        let s = 1.0 / 2f64.sqrt();
        let k = ComplexMatrix::from_real_rows(&[vec![s, s], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            validate_sio(&k, DEFAULT_SIO_TOL),
            Err(Error::NotStrictlyIncoherent {
                axis: Axis::Row,
                index: 0,
                ..
            })
        ));
    }

    #[test]
    fn column_with_two_nonzeros_rejected() {
        let k =
            ComplexMatrix::from_real_rows(&[vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        assert!(matches!(
            validate_sio(&k, DEFAULT_SIO_TOL),
            Err(Error::NotStrictlyIncoherent {
                axis: Axis::Column,
                index: 0,
                ..
            })
        ));
    }

    #[test]
    fn supernormalized_kraus_rejected() {
        let k = ComplexMatrix::from_real_diag(&[1.5, 0.1]);
        assert!(matches!(
            validate_sio(&k, DEFAULT_SIO_TOL),
            Err(Error::NotSubnormalized { .. })
        ));
    }

    #[test]
    fn decompose_diagonal_is_identity_permutation() {
        let k = validate_sio(&ComplexMatrix::from_real_diag(&[0.2, 0.9, 0.4]), DEFAULT_SIO_TOL)
            .unwrap();
        let dec = decompose(&k);
        assert!(dec.perm.is_identity());
        assert!(dec.reassemble().approx_eq(k.matrix(), 0.0));
    }

    #[test]
    fn decompose_antidiagonal_forces_swap() {
        let a = Complex64::new(0.3, 0.1);
        let b = Complex64::new(0.0, 0.7);
        let mut m = ComplexMatrix::zeros(2);
        m[(1, 0)] = a;
        m[(0, 1)] = b;
        let dec = decompose(&validate_sio(&m, DEFAULT_SIO_TOL).unwrap());
        assert_eq!(dec.perm.as_slice(), &[1, 0]);
        assert_eq!(dec.diag, vec![a, b]);
        assert!(dec.reassemble().approx_eq(&m, 0.0));
    }

    #[test]
    fn decompose_zero_matrix_completes_ascending() {
        let dec = decompose(&validate_sio(&ComplexMatrix::zeros(3), DEFAULT_SIO_TOL).unwrap());
        assert!(dec.perm.is_identity());
        assert!(dec.diag.iter().all(|z| *z == Complex64::ZERO));
    }

    #[test]
    fn decompose_partial_zero_columns_deterministic() {
        // Column 1 is zero; its row assignment must fill the free row 0.
        let mut m = ComplexMatrix::zeros(3);
        m[(1, 0)] = Complex64::new(0.5, 0.0);
        m[(2, 2)] = Complex64::new(0.25, 0.0);
        let dec = decompose(&validate_sio(&m, DEFAULT_SIO_TOL).unwrap());
        assert_eq!(dec.perm.as_slice(), &[1, 0, 2]);
        assert!(dec.reassemble().approx_eq(&m, 0.0));
    }

    #[test]
    fn identity_instrument_is_a_no_op() {
        let rho = random_density(3, 3, 11).unwrap();
        let ins = SioInstrument::single(
            validate_sio(&ComplexMatrix::identity(3), DEFAULT_SIO_TOL).unwrap(),
        );
        let (out, p) = apply_instrument(&rho, &ins).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(out.mat().approx_eq(rho.mat(), 1e-13));
    }

    #[test]
    fn projective_kraus_on_plus_state() {
        let plus = mcs(2).unwrap().projector();
        let ins = SioInstrument::single(
            validate_sio(&ComplexMatrix::from_real_diag(&[1.0, 0.0]), DEFAULT_SIO_TOL).unwrap(),
        );
        let (out, p) = apply_instrument(&plus, &ins).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!((out.entry(0, 0).re - 1.0).abs() < 1e-12);
        assert!(out.entry(1, 1).norm() < 1e-12);
    }

    #[test]
    fn permutation_kraus_moves_population() {
        // K = |0⟩⟨1| maps the second basis state onto the first.
        let mut k = ComplexMatrix::zeros(2);
        k[(0, 1)] = Complex64::ONE;
        let ins = SioInstrument::single(validate_sio(&k, DEFAULT_SIO_TOL).unwrap());
        let rho = DiagonalState::new(vec![0.0, 1.0]).unwrap().to_density();
        let (out, p) = apply_instrument(&rho, &ins).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!((out.entry(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_is_an_error() {
        let rho = DiagonalState::new(vec![1.0, 0.0]).unwrap().to_density();
        let ins = SioInstrument::single(
            validate_sio(&ComplexMatrix::from_real_diag(&[0.0, 1.0]), DEFAULT_SIO_TOL).unwrap(),
        );
        assert!(matches!(
            apply_instrument(&rho, &ins),
            Err(Error::ZeroProbability { .. })
        ));
    }

    #[test]
    fn compress_full_set_is_identity() {
        let rho = random_density(3, 3, 13).unwrap();
        let (block, w) = projector_compress(&rho, &IncoherentProjector::full(3)).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
        assert!(block.approx_eq(rho.mat(), 0.0));
    }

    #[test]
    fn compress_worked_examples() {
        let (rho1, rho2) = crate::transform::counterexample_states();
        let s01 = IncoherentProjector::new(3, vec![0, 1]).unwrap();

        let (block2, w2) = projector_compress(&rho2, &s01).unwrap();
        assert!((w2 - 1.0).abs() < 1e-12);
        let expect2 =
            ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(block2.approx_eq(&expect2, 1e-15));

        let (block1, w1) = projector_compress(&rho1, &s01).unwrap();
        assert!((w1 - 2.0 / 3.0).abs() < 1e-12);
        let e = 1.0 / 15.0;
        let expect1 = ComplexMatrix::from_real_rows(&[
            vec![5.0 * e, 4.0 * e],
            vec![4.0 * e, 5.0 * e],
        ])
        .unwrap();
        assert!(block1.approx_eq(&expect1, 1e-15));
    }

    #[test]
    fn compress_zero_weight_rejected() {
        let (_, rho2) = crate::transform::counterexample_states();
        let s2 = IncoherentProjector::new(3, vec![2]).unwrap();
        assert!(matches!(
            projector_compress(&rho2, &s2),
            Err(Error::ZeroWeight { .. })
        ));
    }

    #[test]
    fn random_instrument_is_valid_and_deterministic() {
        let a = random_instrument(3, 2, 17).unwrap();
        let b = random_instrument(3, 2, 17).unwrap();
        assert_eq!(a.len(), 2);
        for (ka, kb) in a.kraus().iter().zip(b.kraus()) {
            assert!(ka.matrix().approx_eq(kb.matrix(), 0.0));
        }
        // Completion: I - ΣK†K is PSD with top Kraus weight at 1 - 1e-6.
        let sum = kraus_gram_sum(a.kraus()).unwrap();
        let slack = ComplexMatrix::identity(3).sub(&sum).unwrap();
        assert!(is_psd(&slack, 1e-12).unwrap());
        let max_diag = (0..3).map(|j| sum[(j, j)].re).fold(0.0, f64::max);
        assert!((max_diag - (1.0 - 1e-6)).abs() < 1e-12);
    }

    #[test]
    fn tp_instrument_sums_to_identity_and_preserves_probability() {
        let ins = random_tp_instrument(4, 3, 23).unwrap();
        assert!(ins.is_trace_preserving(1e-12));
        let rho = random_density(4, 4, 29).unwrap();
        let (_, p) = apply_instrument(&rho, &ins).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn instruments_preserve_incoherence_of_diagonal_states() {
        for seed in 0..10u64 {
            let rho = {
                let mut rng = stream_rng(seed, 40);
                let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..1.0)).collect();
                let total: f64 = raw.iter().sum();
                DiagonalState::new(raw.into_iter().map(|x| x / total).collect())
                    .unwrap()
                    .to_density()
            };
            let ins = random_instrument(4, 3, 100 + seed).unwrap();
            let (out, _) = apply_instrument(&rho, &ins).unwrap();
            assert!(is_incoherent(&out, 1e-12));
        }
    }

    #[test]
    fn sequential_application_matches_composed_instrument() {
        let rho = random_density(3, 3, 31).unwrap();
        let first = random_instrument(3, 2, 32).unwrap();
        let second = random_instrument(3, 2, 33).unwrap();

        let (mid, p1) = apply_instrument(&rho, &first).unwrap();
        let (seq_out, p2) = apply_instrument(&mid, &second).unwrap();

        let composed: Vec<SioKraus> = second
            .kraus()
            .iter()
            .flat_map(|k2| {
                first.kraus().iter().map(move |k1| {
                    validate_sio(
                        &k2.matrix().matmul(k1.matrix()).unwrap(),
                        DEFAULT_SIO_TOL,
                    )
                    .unwrap()
                })
            })
            .collect();
        let composed = SioInstrument::new(composed).unwrap();
        let (comp_out, p12) = apply_instrument(&rho, &composed).unwrap();

        assert!(seq_out.mat().approx_eq(comp_out.mat(), 1e-10));
        assert!((p1 * p2 - p12).abs() < 1e-12);
    }

    #[test]
    fn probability_stays_in_unit_interval() {
        for seed in 0..20u64 {
            let rho = random_density(3, 2 + (seed as usize % 2), 200 + seed).unwrap();
            let ins = random_instrument(3, 1 + (seed as usize % 4), 300 + seed).unwrap();
            let (_, p) = apply_instrument(&rho, &ins).unwrap();
            assert!(p > 0.0 && p <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn dephase_commutes_with_diagonal_kraus() {
        // Sanity for the strictly incoherent structure: K Δ(ρ) K† = Δ(KρK†).
        let rho = random_density(3, 3, 55).unwrap();
        let ins = random_instrument(3, 1, 56).unwrap();
        let (out, _) = apply_instrument(&rho, &ins).unwrap();
        let (out_dephased_first, _) =
            apply_instrument(&dephase(&rho).to_density(), &ins).unwrap();
        assert!(out_dephased_first
            .mat()
            .approx_eq(&dephase(&out).to_density().mat(), 1e-12));
    }
}
