//! Dense complex linear algebra: Kronecker products, Hermitian
//! eigendecomposition, propagators and partial traces.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default relative tolerance for hermiticity and unitarity checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Square or rectangular complex matrix in row-major logical order.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMatrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds from row-major entries. Panics if the count is not `rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Self {
        assert_eq!(rows * cols, entries.len(), "entry count must equal rows * cols");
        CMatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    pub fn add_at(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] += value;
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        CMatrix(self.0.transpose())
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.0.diagonal().iter().copied().collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()));
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        self * other - other * self
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> C64 {
        assert_eq!(self.cols(), other.rows());
        assert_eq!(self.rows(), other.cols());
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows() {
            for k in 0..self.cols() {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Hermitian within `tol` relative to the largest entry.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_deviation() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let prod = self * &self.adjoint();
        prod.max_abs_diff(&CMatrix::identity(self.rows())) <= tol
    }

    /// Positive semidefinite: Hermitian and smallest eigenvalue ≥ −tol.
    pub fn is_psd(&self, tol: f64) -> bool {
        match eigh_with_tol(self, tol.max(DEFAULT_TOL)) {
            Ok(e) => e.values.first().is_none_or(|&l| l >= -tol),
            Err(_) => false,
        }
    }

    pub(crate) fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $trait<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(self.0 $op rhs.0)
            }
        }
        impl $trait<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(self.0 $op &rhs.0)
            }
        }
        impl $trait<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-self.0)
    }
}

impl std::iter::Sum for CMatrix {
    /// Panics on an empty iterator since the dimension is unknown.
    fn sum<I: Iterator<Item = CMatrix>>(mut iter: I) -> CMatrix {
        let first = iter.next().expect("sum of an empty matrix iterator");
        iter.fold(first, |acc, m| acc + m)
    }
}

/// Tensor-product structure of a composite space.
///
/// Factors are ordered; the canonical two-ion layout is
/// spin 1, spin 2, mode 1, mode 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceDescriptor {
    factors: Vec<usize>,
}

impl SpaceDescriptor {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() || factors.contains(&0) {
            return Err(Error::UnsupportedArgument(format!(
                "subsystem dimensions must be positive, got {factors:?}"
            )));
        }
        Ok(SpaceDescriptor { factors })
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Row-major strides: index = Σ digit[k] * stride[k].
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for k in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factors[k + 1];
        }
        strides
    }
}

/// Kronecker product; entry (i·p+k, j·q+l) = a_ij · b_kl.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of a non-empty list, left to right.
pub fn kron_all(ops: &[CMatrix]) -> CMatrix {
    let (first, rest) = ops.split_first().expect("kron_all needs at least one factor");
    rest.iter().fold(first.clone(), |acc, m| kron(&acc, m))
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Unitary; column k is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// V · diag(f(λ)) · V†.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let v = &self.vectors.0;
        let mut scaled = v.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= s;
            }
        }
        CMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(|l| C64::new(l, 0.0))
    }

    /// e^{−iHt} for H given in angular-frequency units.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.apply_fn(|l| C64::from_polar(1.0, -l * t))
    }
}

/// Hermitian eigendecomposition with the default tolerance.
pub fn eigh(h: &CMatrix) -> Result<Eigh> {
    eigh_with_tol(h, DEFAULT_TOL)
}

pub fn eigh_with_tol(h: &CMatrix, tol: f64) -> Result<Eigh> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: h.rows(), found: h.cols() });
    }
    let scale = h.max_abs();
    let deviation = h.hermiticity_deviation();
    if deviation > tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { deviation, tolerance: tol * scale });
    }
    let n = h.rows();
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = (&h.0 + h.0.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigh { values, vectors: CMatrix(vectors) })
}

/// U = e^{−iHt}, H in rad/s.
pub fn propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(eigh(h)?.propagator(t))
}

/// Partial trace keeping the subsystems listed in `keep` (in ascending slot order).
pub fn partial_trace(rho: &CMatrix, space: &SpaceDescriptor, keep: &[usize]) -> Result<CMatrix> {
    let dim = space.dim();
    if !rho.is_square() || rho.rows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho.rows() });
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= space.len()) {
        return Err(Error::UnsupportedArgument(format!(
            "subsystem {bad} out of range for {} factors",
            space.len()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..space.len()).filter(|k| !kept.contains(k)).collect();

    let factors = space.factors();
    let strides = space.strides();
    let offsets = |slots: &[usize]| -> Vec<usize> {
        // Full-space index offsets for every multi-index over `slots`.
        let mut out = vec![0usize];
        for &s in slots {
            let mut next = Vec::with_capacity(out.len() * factors[s]);
            for &base in &out {
                for d in 0..factors[s] {
                    next.push(base + d * strides[s]);
                }
            }
            out = next;
        }
        out
    };
    let keep_off = offsets(&kept);
    let trace_off = offsets(&traced);

    let n = keep_off.len();
    let out = CMatrix::from_fn(n, n, |i, j| {
        trace_off
            .iter()
            .map(|&k| rho.0[(keep_off[i] + k, keep_off[j] + k)])
            .sum()
    });
    Ok(out)
}
