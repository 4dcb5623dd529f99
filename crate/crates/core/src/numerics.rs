//! Dense complex linear algebra for the small (≤ 16 dimensional) spaces of
//! the interferometer model.
//!
//! Every state carries a [`LabeledBasis`]: an ordered list of named tensor
//! factors. Index order is row-major over the factors, the first factor being
//! the most significant digit. The shared convention across the crate is
//! `sub1 ⊗ sub2 ⊗ path ⊗ env`, with per-factor order `{|A⟩, |A⊥⟩}`,
//! `{|1⟩, |2⟩}` and `{|e₀⟩, |e₁⟩}`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Largest number of stored entries a tensor product may produce.
pub const MAX_ENTRIES: usize = 1 << 20;

/// Tolerance for Hermiticity checks on eigensolver input.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues above this (negative) threshold are clamped to zero by
/// [`psd_sqrt`].
pub const PSD_CLAMP: f64 = -1e-10;

const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub name: String,
    pub dim: usize,
}

/// Ordered list of named tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledBasis {
    factors: Vec<Factor>,
}

impl LabeledBasis {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<Factor> = Vec::new();
        let mut total: usize = 1;
        for (name, dim) in factors {
            let name = name.into();
            if out.iter().any(|f| f.name == name) {
                return Err(Error::DuplicateFactor(name));
            }
            if dim == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "factor `{name}` has dimension 0"
                )));
            }
            total = total
                .checked_mul(dim)
                .filter(|&t| t <= MAX_ENTRIES)
                .ok_or(Error::DimensionOverflow(total.saturating_mul(dim)))?;
            out.push(Factor { name, dim });
        }
        Ok(Self { factors: out })
    }

    /// The one-dimensional basis with no factors.
    pub fn scalar() -> Self {
        Self::default()
    }

    pub fn qubit(name: &str) -> Self {
        Self {
            factors: vec![Factor {
                name: name.to_owned(),
                dim: 2,
            }],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.name.as_str())
    }

    pub fn concat(&self, other: &LabeledBasis) -> Result<Self> {
        Self::new(
            self.factors
                .iter()
                .chain(other.factors.iter())
                .map(|f| (f.name.clone(), f.dim)),
        )
    }

    /// Same dimensions, new names.
    pub fn relabel(&self, names: &[&str]) -> Result<Self> {
        if names.len() != self.factors.len() {
            return Err(Error::DimensionMismatch(format!(
                "relabel with {} names on {} factors",
                names.len(),
                self.factors.len()
            )));
        }
        Self::new(names.iter().zip(&self.factors).map(|(n, f)| (*n, f.dim)))
    }

    /// Splits a flat index into per-factor digits.
    fn digits(&self, mut index: usize, out: &mut [usize]) {
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.dim;
            index /= f.dim;
        }
    }
}

impl fmt::Display for LabeledBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| format!("{}({})", x.name, x.dim))
            .collect();
        if parts.is_empty() {
            write!(f, "scalar")
        } else {
            write!(f, "{}", parts.join(" ⊗ "))
        }
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix from {} entries",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = c64(d, 0.0);
        }
        m
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut data = Vec::with_capacity(a.len() * b.len());
        for x in a {
            for y in b {
                data.push(x * y.conj());
            }
        }
        Self {
            rows: a.len(),
            cols: b.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M - M†|`, infinite for non-square matrices.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// `(M + M†) / 2`
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        let mut out = self.clone();
        for (z, a) in out.data.iter_mut().zip(&adj.data) {
            *z = (*z + a) * 0.5;
        }
        out
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect())
    }

    /// Kronecker product.
    pub fn kron(&self, rhs: &ComplexMatrix) -> Result<Self> {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let entries = rows.saturating_mul(cols);
        if entries > MAX_ENTRIES {
            return Err(Error::DimensionOverflow(entries));
        }
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    /// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch")
    }
}

/// Kronecker product of two labeled objects with concatenated bases.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// Complex amplitude vector over a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: LabeledBasis,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(basis: LabeledBasis, amps: Vec<C64>) -> Result<Self> {
        if basis.dim() != amps.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for basis {basis} of dimension {}",
                amps.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, amps })
    }

    pub fn from_real(basis: LabeledBasis, amps: &[f64]) -> Result<Self> {
        Self::new(basis, amps.iter().map(|&x| c64(x, 0.0)).collect())
    }

    /// The scalar `c` over the empty basis; `scalar(1)` is the tensor identity.
    pub fn scalar(c: C64) -> Self {
        Self {
            basis: LabeledBasis::scalar(),
            amps: vec![c],
        }
    }

    /// Computational basis vector `index` over `basis`.
    pub fn basis_state(basis: LabeledBasis, index: usize) -> Result<Self> {
        let dim = basis.dim();
        if index >= dim {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} >= {dim}"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { basis, amps })
    }

    pub fn basis(&self) -> &LabeledBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit-norm copy; errors on vectors with norm ≤ 1e-12.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= 1e-12 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale(c64(1.0 / n, 0.0)))
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            basis: self.basis.clone(),
            amps: self.amps.iter().map(|z| z * k).collect(),
        }
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "inner product of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest entrywise modulus of `self - other`; infinite on dimension mismatch.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn relabel(&self, names: &[&str]) -> Result<Self> {
        Ok(Self {
            basis: self.basis.relabel(names)?,
            amps: self.amps.clone(),
        })
    }

    /// `|ψ⟩⟨ψ|` without normalization.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            basis: self.basis.clone(),
            matrix: ComplexMatrix::outer(&self.amps, &self.amps),
        }
    }

    /// Contracts `factor` with the bra `⟨ket|`, removing it from the basis.
    pub fn contract(&self, factor: &str, ket: &[C64]) -> Result<Self> {
        let pos = self
            .basis
            .position(factor)
            .ok_or_else(|| Error::UnknownFactor(factor.to_owned()))?;
        let fdim = self.basis.factors()[pos].dim;
        if ket.len() != fdim {
            return Err(Error::DimensionMismatch(format!(
                "contracting factor `{factor}` of dimension {fdim} with a {}-vector",
                ket.len()
            )));
        }
        let basis = LabeledBasis::new(
            self.basis
                .factors()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != pos)
                .map(|(_, f)| (f.name.clone(), f.dim)),
        )?;
        let inner: usize = self.basis.factors()[pos + 1..]
            .iter()
            .map(|f| f.dim)
            .product();
        let mut amps = vec![ZERO; basis.dim()];
        for (idx, a) in self.amps.iter().enumerate() {
            let digit = (idx / inner) % fdim;
            let outer = idx / (inner * fdim);
            let rest = idx % inner;
            amps[outer * inner + rest] += ket[digit].conj() * a;
        }
        Ok(Self { basis, amps })
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let entries = self.dim().saturating_mul(other.dim());
        if entries > MAX_ENTRIES {
            return Err(Error::DimensionOverflow(entries));
        }
        let basis = self.basis.concat(&other.basis)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(Self { basis, amps })
    }
}

/// Hermitian matrix over a labeled basis. The trace is not forced to one:
/// conditional states carry their post-selection probability as trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    basis: LabeledBasis,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Checks shape and Hermiticity (≤ 1e-12 relative to the largest entry).
    pub fn new(basis: LabeledBasis, matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for basis {basis}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herr = matrix.hermiticity_error();
        if herr > 1e-12 * matrix.max_abs().max(1.0) {
            return Err(Error::NotHermitian(herr));
        }
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> &LabeledBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Unit-trace copy; errors when the trace is ≤ 1e-15.
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 1e-15 {
            return Err(Error::ZeroTrace);
        }
        Ok(Self {
            basis: self.basis.clone(),
            matrix: self.matrix.scale(c64(1.0 / t, 0.0)),
        })
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            basis: self.basis.clone(),
            matrix: self.matrix.scale(c64(k, 0.0)),
        }
    }

    /// Sum of two matrices over the same basis.
    pub fn add(&self, other: &DensityMatrix) -> Result<Self> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch(format!(
                "adding states over {} and {}",
                self.basis, other.basis
            )));
        }
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// `U ρ U†` for a unitary on the full space, re-symmetrized.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = u.matmul(&self.matrix)?.matmul(&u.adjoint())?;
        Ok(Self {
            basis: self.basis.clone(),
            matrix: m.hermitian_part(),
        })
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn eigen(&self) -> Result<Eigen> {
        hermitian_eigen(&self.matrix)
    }

    /// Traces out every factor not named in `keep`. Kept factors retain
    /// their original order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        for name in keep {
            if self.basis.position(name).is_none() {
                return Err(Error::UnknownFactor((*name).to_owned()));
            }
        }
        let factors = self.basis.factors();
        let kept: Vec<bool> = factors
            .iter()
            .map(|f| keep.contains(&f.name.as_str()))
            .collect();
        let out_basis = LabeledBasis::new(
            factors
                .iter()
                .zip(&kept)
                .filter(|(_, &k)| k)
                .map(|(f, _)| (f.name.clone(), f.dim)),
        )?;
        let n = self.dim();
        let m = out_basis.dim();
        let nf = factors.len();

        // (kept index, traced index) for every full index
        let mut split = Vec::with_capacity(n);
        let mut digits = vec![0usize; nf];
        for idx in 0..n {
            self.basis.digits(idx, &mut digits);
            let (mut k, mut t) = (0usize, 0usize);
            for ((d, f), &is_kept) in digits.iter().zip(factors).zip(&kept) {
                if is_kept {
                    k = k * f.dim + d;
                } else {
                    t = t * f.dim + d;
                }
            }
            split.push((k, t));
        }

        let mut out = ComplexMatrix::zeros(m, m);
        for (i, &(ki, ti)) in split.iter().enumerate() {
            for (j, &(kj, tj)) in split.iter().enumerate() {
                if ti == tj {
                    out[(ki, kj)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(Self {
            basis: out_basis,
            matrix: out,
        })
    }

    /// Partial transpose of the named factor.
    pub fn partial_transpose(&self, factor: &str) -> Result<Self> {
        let pos = self
            .basis
            .position(factor)
            .ok_or_else(|| Error::UnknownFactor(factor.to_owned()))?;
        let fdim = self.basis.factors()[pos].dim;
        let inner: usize = self.basis.factors()[pos + 1..]
            .iter()
            .map(|f| f.dim)
            .product();
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        let swap = |i: usize, j: usize| {
            let di = (i / inner) % fdim;
            let dj = (j / inner) % fdim;
            let i2 = i - di * inner + dj * inner;
            let j2 = j - dj * inner + di * inner;
            (i2, j2)
        };
        for i in 0..n {
            for j in 0..n {
                out[swap(i, j)] = self.matrix[(i, j)];
            }
        }
        Ok(Self {
            basis: self.basis.clone(),
            matrix: out,
        })
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let basis = self.basis.concat(&other.basis)?;
        let matrix = self.matrix.kron(&other.matrix)?;
        Ok(Self { basis, matrix })
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `Σ f(λᵢ) vᵢvᵢ†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Cyclic complex Jacobi eigensolver.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies
/// the real symmetric Jacobi rotation that annihilates it. Sweeps stop once
/// the off-diagonal Frobenius norm drops below `1e-13 · max(1, ‖M‖_F)`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let herr = m.hermiticity_error();
    if herr > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herr));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let tol = JACOBI_TOL * a.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, k)] = v[(i, src)];
        }
    }
    Ok(Eigen { values, vectors })
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let phase = apq / b;
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * b);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] restricted to (p, q)
    let j_pp = c64(c, 0.0);
    let j_pq = c64(s, 0.0);
    let j_qp = -phase.conj() * s;
    let j_qq = phase.conj() * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * j_pp + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * j_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = c64(a[(p, p)].re, 0.0);
    a[(q, q)] = c64(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero, as are positive ones
/// within rounding of zero (`≤ 64 ε · λ_max`), so that rank-deficient inputs
/// keep their exact support.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m)?;
    let (Some(&max), Some(&min)) = (eig.values.first(), eig.values.last()) else {
        return Ok(ComplexMatrix::zeros(0, 0));
    };
    if min < PSD_CLAMP {
        return Err(Error::NotPositive(min));
    }
    let floor = 64.0 * f64::EPSILON * max.abs();
    Ok(eig.reconstruct_with(|l| if l <= floor { 0.0 } else { l.sqrt() }))
}

/// Von Neumann entropy in bits of a unit-trace spectrum; `0·log 0 = 0`.
pub fn entropy_bits(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}
