//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything downstream needs is here: a row-major complex matrix, a cyclic
//! Jacobi eigensolver for Hermitian matrices, a PSD test, and permutation
//! conjugation. Dimensions stay small (d ≤ 256 by intent), so dense storage
//! and O(d³)-per-sweep Jacobi are the right trade: deterministic, robust
//! against the degenerate top eigenvalues that occur throughout (projectors,
//! rank-one states), and accurate to near machine precision.

use num_complex::Complex64;

use crate::{Error, Result};

/// Default bound on `max |A - A†|` entries for Hermitian inputs.
pub const DEFAULT_HERM_TOL: f64 = 1e-10;
/// Default eigensolver residual target, relative to the Frobenius norm.
pub const DEFAULT_EIG_TOL: f64 = 1e-11;
/// Jacobi sweep cap; cyclic Jacobi on d ≤ 256 needs far fewer.
pub const MAX_SWEEPS: usize = 200;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from nested rows; rejects ragged or non-finite input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len().max(if i == 0 { 0 } else { dim }),
                });
            }
        }
        let m = Self::from_fn(dim, |i, j| rows[i][j]);
        m.check_finite()?;
        Ok(m)
    }

    /// Real-valued rows convenience (most worked examples are real).
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let wrapped: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&wrapped)
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    /// Rank-one projector-like outer product `v w†`.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        let dim = v.len();
        Self::from_fn(dim, |i, j| v[i] * w[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn check_finite(&self) -> Result<()> {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let z = self[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: rhs.dim,
            });
        }
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: rhs.dim,
            });
        }
        Ok(Self::from_fn(self.dim, |i, j| self[(i, j)] + rhs[(i, j)]))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: rhs.dim,
            });
        }
        Ok(Self::from_fn(self.dim, |i, j| self[(i, j)] - rhs[(i, j)]))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)] * s)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max entry of `A - A†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect())
    }

    /// `v† A v`; real up to round-off for Hermitian `A`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Result<Complex64> {
        let av = self.mul_vec(v)?;
        Ok(v.iter().zip(av.iter()).map(|(x, y)| x.conj() * y).sum())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Bijection on `{0, …, d-1}`; `image(i)` is where basis index `i` goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let d = map.len();
        let mut seen = vec![false; d];
        for &t in &map {
            if t >= d {
                return Err(Error::NotPermutation {
                    reason: format!("target {t} out of range for dimension {d}"),
                });
            }
            if seen[t] {
                return Err(Error::NotPermutation {
                    reason: format!("target {t} repeated"),
                });
            }
            seen[t] = true;
        }
        Ok(Permutation(map))
    }

    pub fn identity(d: usize) -> Self {
        Permutation((0..d).collect())
    }

    pub fn transposition(d: usize, a: usize, b: usize) -> Result<Self> {
        if a >= d || b >= d {
            return Err(Error::IndexOutOfRange {
                index: a.max(b),
                dim: d,
            });
        }
        let mut map: Vec<usize> = (0..d).collect();
        map.swap(a, b);
        Ok(Permutation(map))
    }

    pub fn random<R: rand::Rng>(d: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..d).collect();
        // Fisher-Yates
        for i in (1..d).rev() {
            let j = rng.random_range(0..=i);
            map.swap(i, j);
        }
        Permutation(map)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &t) in self.0.iter().enumerate() {
            inv[t] = i;
        }
        Permutation(inv)
    }

    /// Matrix with `P|i⟩ = |image(i)⟩`, i.e. a 1 at `(image(i), i)`.
    pub fn matrix(&self) -> ComplexMatrix {
        let d = self.0.len();
        let mut m = ComplexMatrix::zeros(d);
        for i in 0..d {
            m[(self.0[i], i)] = Complex64::ONE;
        }
        m
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &t)| i == t)
    }
}

/// Conjugate `A` by the permutation: returns `P A P†`, which relabels basis
/// index `i` to `image(i)`.
pub fn apply_permutation(perm: &Permutation, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if perm.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            left: perm.dim(),
            right: a.dim(),
        });
    }
    let d = a.dim();
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            out[(perm.image(i), perm.image(j))] = a[(i, j)];
        }
    }
    Ok(out)
}

/// One eigenvalue with a unit eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
}

/// Full spectrum of a Hermitian matrix. `values[k]` pairs with column `k`
/// of `vectors`; the order is whatever the Jacobi sweep converged to.
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigendecomposition {
    /// Largest eigenvalue with its eigenvector. Ties (exact float equality)
    /// resolve to the lowest column index, which keeps degenerate top
    /// eigenspaces deterministic.
    pub fn max_pair(&self) -> EigenPair {
        let mut best = 0;
        for k in 1..self.values.len() {
            if self.values[k] > self.values[best] {
                best = k;
            }
        }
        let mut v = self.vectors.column(best);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for z in &mut v {
                *z /= norm;
            }
        }
        EigenPair {
            value: self.values[best],
            vector: v,
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues sorted descending.
    pub fn sorted_values_desc(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }
}

fn off_diagonal_norm(b: &ComplexMatrix) -> f64 {
    let d = b.dim();
    let mut s = 0.0;
    for p in 0..d {
        for q in 0..d {
            if p != q {
                s += b[(p, q)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations,
/// with explicit tolerances.
///
/// `eig_tol` bounds the final residual `‖Av - λv‖₂ / ‖A‖_F`; `herm_tol`
/// bounds the accepted input asymmetry; `max_sweeps` caps the cyclic sweeps
/// before giving up with [`Error::NoConvergence`].
pub fn hermitian_eigen_with(
    a: &ComplexMatrix,
    eig_tol: f64,
    herm_tol: f64,
    max_sweeps: usize,
) -> Result<Eigendecomposition> {
    a.check_finite()?;
    let dev = a.hermiticity_deviation();
    if dev > herm_tol {
        return Err(Error::NotHermitian {
            deviation: dev,
            bound: herm_tol,
        });
    }
    let d = a.dim();
    if d == 0 {
        return Err(Error::InvalidDimension { dim: 0 });
    }

    // Work on the exactly-Hermitian part so the rotations see clean input.
    let mut b = ComplexMatrix::from_fn(d, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(d);

    let scale = b.frobenius_norm();
    if d == 1 || scale == 0.0 {
        return Ok(Eigendecomposition {
            values: (0..d).map(|i| b[(i, i)].re).collect(),
            vectors: v,
        });
    }

    // Residual of eigenpair k is bounded by the off-diagonal norm, so driving
    // that below eig_tol·‖A‖_F (with margin) meets the contract.
    let target = 0.1 * eig_tol * scale;
    let skip = target / ((d * d) as f64);

    for _sweep in 0..max_sweeps {
        if off_diagonal_norm(&b) <= target {
            return Ok(Eigendecomposition {
                values: (0..d).map(|i| b[(i, i)].re).collect(),
                vectors: v,
            });
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let beta = b[(p, q)];
                let m = beta.norm();
                if m <= skip {
                    continue;
                }
                let alpha = b[(p, p)].re;
                let gamma = b[(q, q)].re;
                let phase = beta / m;
                let tau = (gamma - alpha) / (2.0 * m);
                // Smaller-magnitude root of t² - 2τt - 1 = 0.
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;

                // B ← B·U with U = [[c, -s·phase], [s·conj(phase), c]] on (p,q).
                for k in 0..d {
                    let bkp = b[(k, p)];
                    let bkq = b[(k, q)];
                    b[(k, p)] = bkp * c + bkq * (s * phase.conj());
                    b[(k, q)] = bkp * (-s * phase) + bkq * c;
                }
                // B ← U†·B.
                for k in 0..d {
                    let bpk = b[(p, k)];
                    let bqk = b[(q, k)];
                    b[(p, k)] = bpk * c + bqk * (s * phase);
                    b[(q, k)] = bpk * (-s * phase.conj()) + bqk * c;
                }
                // V ← V·U accumulates eigenvectors in the columns.
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * (s * phase.conj());
                    v[(k, q)] = vkp * (-s * phase) + vkq * c;
                }

                b[(p, q)] = Complex64::ZERO;
                b[(q, p)] = Complex64::ZERO;
                b[(p, p)] = Complex64::new(b[(p, p)].re, 0.0);
                b[(q, q)] = Complex64::new(b[(q, q)].re, 0.0);
            }
        }
    }

    let off = off_diagonal_norm(&b);
    if off <= target {
        return Ok(Eigendecomposition {
            values: (0..d).map(|i| b[(i, i)].re).collect(),
            vectors: v,
        });
    }
    Err(Error::NoConvergence {
        sweeps: max_sweeps,
        off_norm: off,
    })
}

/// Full Hermitian eigendecomposition with default hermiticity bound and
/// sweep cap.
pub fn hermitian_eigen(a: &ComplexMatrix, eig_tol: f64) -> Result<Eigendecomposition> {
    hermitian_eigen_with(a, eig_tol, DEFAULT_HERM_TOL, MAX_SWEEPS)
}

/// Largest eigenvalue of a Hermitian matrix with one unit eigenvector.
pub fn hermitian_eig_max(a: &ComplexMatrix, eig_tol: f64) -> Result<EigenPair> {
    Ok(hermitian_eigen(a, eig_tol)?.max_pair())
}

/// True iff the Hermitian matrix has no eigenvalue below `-tol`.
pub fn is_psd(a: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(hermitian_eigen(a, DEFAULT_EIG_TOL)?.min_value() >= -tol)
}
