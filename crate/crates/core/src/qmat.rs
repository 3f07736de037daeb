//! Dense complex linear algebra on small qubit registers.
//!
//! Basis indices are big-endian over the layout order: the first label is the
//! most significant bit. For the canonical hyper-entangled layout
//! `(Ap, As, Bp, Bs)` the basis index of `|ap as bp bs⟩` is
//! `8·ap + 4·as + 2·bp + bs`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Entrywise Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
/// Largest imaginary residue accepted for an expectation value.
pub const IMAG_TOL: f64 = 1e-10;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Identifier of a single qubit in a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Qubit {
    /// Photon A, polarization.
    Ap,
    /// Photon A, spatial mode.
    As,
    /// Photon B, polarization.
    Bp,
    /// Photon B, spatial mode.
    Bs,
    /// Generic qubit for intermediate objects.
    Index(u8),
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Qubit::Ap => f.write_str("Ap"),
            Qubit::As => f.write_str("As"),
            Qubit::Bp => f.write_str("Bp"),
            Qubit::Bs => f.write_str("Bs"),
            Qubit::Index(i) => write!(f, "q{i}"),
        }
    }
}

/// Ordered list of distinct qubit labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QubitLayout(Vec<Qubit>);

impl QubitLayout {
    pub fn new(labels: impl Into<Vec<Qubit>>) -> Result<Self> {
        let labels = labels.into();
        for (i, q) in labels.iter().enumerate() {
            if labels[..i].contains(q) {
                return Err(Error::DuplicateLabel(*q));
            }
        }
        Ok(Self(labels))
    }

    /// `(Ap, As, Bp, Bs)`.
    pub fn canonical() -> Self {
        Self(vec![Qubit::Ap, Qubit::As, Qubit::Bp, Qubit::Bs])
    }

    /// `(Ap, Bp)`, the polarization copy.
    pub fn polarization() -> Self {
        Self(vec![Qubit::Ap, Qubit::Bp])
    }

    /// `(As, Bs)`, the spatial copy.
    pub fn spatial() -> Self {
        Self(vec![Qubit::As, Qubit::Bs])
    }

    /// `(Ap, As)`, everything photon A carries.
    pub fn photon_a() -> Self {
        Self(vec![Qubit::Ap, Qubit::As])
    }

    /// `(Bp, Bs)`, everything photon B carries.
    pub fn photon_b() -> Self {
        Self(vec![Qubit::Bp, Qubit::Bs])
    }

    /// Generic labels `q0..q{n-1}`.
    pub fn indexed(n: u8) -> Self {
        Self((0..n).map(Qubit::Index).collect())
    }

    pub fn labels(&self) -> &[Qubit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.0.len()
    }

    pub fn position(&self, q: Qubit) -> Option<usize> {
        self.0.iter().position(|x| *x == q)
    }

    pub fn contains(&self, q: Qubit) -> bool {
        self.0.contains(&q)
    }

    pub fn is_subset_of(&self, other: &QubitLayout) -> bool {
        self.0.iter().all(|q| other.contains(*q))
    }

    pub fn is_permutation_of(&self, other: &QubitLayout) -> bool {
        self.len() == other.len() && self.is_subset_of(other)
    }

    /// `self` followed by `other`; the two must be disjoint.
    pub fn concat(&self, other: &QubitLayout) -> Result<Self> {
        if let Some(q) = other.0.iter().find(|q| self.contains(**q)) {
            return Err(Error::OverlappingLayouts(*q));
        }
        Ok(Self(self.0.iter().chain(other.0.iter()).copied().collect()))
    }

    /// Positions of `sub`'s labels inside `self`, in `sub` order.
    fn positions_of(&self, sub: &QubitLayout) -> Option<Vec<usize>> {
        sub.0.iter().map(|q| self.position(*q)).collect()
    }
}

impl fmt::Display for QubitLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{q}")?;
        }
        f.write_str(")")
    }
}

/// Square complex matrix whose dimension is a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if !m.nrows().is_power_of_two() {
            return Err(Error::Invalid(format!(
                "matrix dimension {} is not a power of two",
                m.nrows()
            )));
        }
        Ok(Self(m))
    }

    /// Row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_dmatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_dmatrix(DMatrix::identity(dim, dim))
    }

    /// `|ket⟩⟨ket|`.
    pub fn outer(ket: &[C64]) -> Result<Self> {
        Self::from_fn(ket.len(), |r, c| ket[r] * ket[c].conj())
    }

    /// Computational basis projector `|index⟩⟨index|`.
    pub fn basis_projector(dim: usize, index: usize) -> Result<Self> {
        Self::from_fn(dim, |r, c| {
            if r == index && c == index {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0.kronecker(&other.0))
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(other.dim())?;
        Ok(ComplexMatrix(&self.0 * &other.0))
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> ComplexMatrix {
        ComplexMatrix(self.0.map(|z| z * s))
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(other.dim())?;
        Ok(ComplexMatrix(&self.0 + &other.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest entrywise `|m - m†|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.0[(r, c)] - self.0[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    /// Largest entrywise `|a - b|`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .0
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            })
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator on a labelled register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    layout: QubitLayout,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity before accepting `matrix`.
    pub fn new(matrix: ComplexMatrix, layout: QubitLayout) -> Result<Self> {
        if matrix.dim() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: matrix.dim(),
            });
        }
        let residual = matrix.hermitian_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian(residual));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne(tr.re));
        }
        let min_ev = matrix.hermitian_eigenvalues()[0];
        if min_ev < -PSD_TOL {
            return Err(Error::NotPositive(min_ev));
        }
        Ok(Self { matrix, layout })
    }

    /// Pure state `|ψ⟩⟨ψ|`; `ket` must be normalized.
    pub fn from_pure(ket: &[C64], layout: QubitLayout) -> Result<Self> {
        Self::new(ComplexMatrix::outer(ket)?, layout)
    }

    pub fn maximally_mixed(layout: QubitLayout) -> Self {
        let dim = layout.dim();
        let matrix = ComplexMatrix(DMatrix::identity(dim, dim).map(|z: C64| z / dim as f64));
        Self { matrix, layout }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix.get(row, col)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.matrix.as_dmatrix().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigenvalues()
    }

    /// Spectral decomposition `ρ = Σ λ_k |v_k⟩⟨v_k|`, keeping `λ_k > cutoff`.
    pub fn pure_decomposition(&self, cutoff: f64) -> Vec<(f64, Vec<C64>)> {
        let eig = self.matrix.as_dmatrix().clone().symmetric_eigen();
        eig.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > cutoff)
            .map(|(k, &l)| (l, eig.eigenvectors.column(k).iter().copied().collect()))
            .collect()
    }

    /// Convex combination `α·self + (1−α)·other`; layouts must agree.
    pub fn mix(&self, other: &DensityMatrix, alpha: f64) -> Result<Self> {
        crate::error::check_unit_interval("alpha", alpha)?;
        if self.layout != other.layout {
            return Err(Error::WrongLayout {
                expected: self.layout.to_string(),
                found: other.layout.to_string(),
            });
        }
        let m = self
            .matrix
            .scale(alpha)
            .add(&other.matrix.scale(1.0 - alpha))?;
        Self::new(m, self.layout.clone())
    }

    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, layout: QubitLayout) -> Self {
        debug_assert_eq!(matrix.dim(), layout.dim());
        Self { matrix, layout }
    }

    pub(crate) fn require_layout(&self, expected: &QubitLayout) -> Result<()> {
        if &self.layout == expected {
            Ok(())
        } else {
            Err(Error::WrongLayout {
                expected: expected.to_string(),
                found: self.layout.to_string(),
            })
        }
    }
}

/// `a ⊗ b` with layout `a` then `b`.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let layout = a.layout.concat(&b.layout)?;
    let matrix = a.matrix.kron(&b.matrix);
    DensityMatrix::new(matrix, layout)
}

/// Bit `pos` (0 = most significant) of an `n`-bit index.
fn bit(index: usize, pos: usize, n: usize) -> usize {
    (index >> (n - 1 - pos)) & 1
}

/// Builds the index whose bit at each `positions[k]` is bit `k` of `value`
/// (`value` read as a `positions.len()`-bit big-endian word).
fn scatter(value: usize, positions: &[usize], n: usize) -> usize {
    let m = positions.len();
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &p)| acc | (bit(value, k, m) << (n - 1 - p)))
}

/// Reorders the register into `target`. Matrix elements are copied, never
/// recomputed, so permuting back restores the input bit-exactly.
pub fn permute(rho: &DensityMatrix, target: &QubitLayout) -> Result<DensityMatrix> {
    if !target.is_permutation_of(&rho.layout) {
        return Err(Error::NotAPermutation);
    }
    let n = target.len();
    let src = rho
        .layout
        .positions_of(target)
        .ok_or(Error::NotAPermutation)?;
    let dim = rho.dim();
    // old index for each new index
    let old_of: Vec<usize> = (0..dim).map(|new| scatter(new, &src, n)).collect();
    let m = DMatrix::from_fn(dim, dim, |r, c| rho.matrix.get(old_of[r], old_of[c]));
    Ok(DensityMatrix::from_parts_unchecked(
        ComplexMatrix(m),
        target.clone(),
    ))
}

/// Traces out everything not in `keep`; the result uses `keep`'s order.
pub fn partial_trace(rho: &DensityMatrix, keep: &QubitLayout) -> Result<DensityMatrix> {
    if !keep.is_subset_of(&rho.layout) {
        return Err(Error::NotASubset);
    }
    let n = rho.layout.len();
    let kept = rho.layout.positions_of(keep).ok_or(Error::NotASubset)?;
    let traced: Vec<usize> = (0..n).filter(|p| !kept.contains(p)).collect();
    let dk = 1 << kept.len();
    let de = 1 << traced.len();
    let m = DMatrix::from_fn(dk, dk, |r, c| {
        let (r0, c0) = (scatter(r, &kept, n), scatter(c, &kept, n));
        (0..de)
            .map(|e| {
                let off = scatter(e, &traced, n);
                rho.matrix.get(r0 | off, c0 | off)
            })
            .sum()
    });
    DensityMatrix::new(ComplexMatrix(m), keep.clone())
}

/// `tr[op ρ]` for a Hermitian `op`.
pub fn expectation(op: &ComplexMatrix, rho: &DensityMatrix) -> Result<f64> {
    if op.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: op.dim(),
        });
    }
    let n = op.dim();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..n {
        for k in 0..n {
            acc += op.get(r, k) * rho.get(k, r);
        }
    }
    if acc.im.abs() > IMAG_TOL {
        return Err(Error::NonRealExpectation(acc.im));
    }
    Ok(acc.re)
}

/// Expectation of a projector, clamped into `[0, 1]`.
///
/// Values further than [`PSD_TOL`] outside the unit interval are rejected.
pub fn probability(projector: &ComplexMatrix, rho: &DensityMatrix) -> Result<f64> {
    let v = expectation(projector, rho)?;
    if !(-PSD_TOL..=1.0 + PSD_TOL).contains(&v) {
        return Err(Error::ProbabilityOutOfRange(v));
    }
    Ok(v.clamp(0.0, 1.0))
}
