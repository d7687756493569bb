//! Small dense vectors and matrices whose dimension is a runtime property,
//! plus the generalized cross product and finite-difference helpers.
//!
//! Paths and transforms in two and three dimensions share all of this code,
//! so every operation checks operand shapes eagerly and reports a
//! [`LinalgError::DimensionMismatch`] instead of panicking. The arithmetic
//! operators (`+`, `-`) are the exception: they panic on mismatched lengths,
//! like indexing does. Use [`VecN::checked_add`] / [`VecN::checked_sub`] when
//! the shapes come from user input.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::{Real, Scalar};

/// Default central-difference step on unit-scaled quantities.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Largest square size whose determinant is computed by cofactor expansion.
pub const COFACTOR_MAX_DIM: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is singular (pivot {pivot:e} below threshold)")]
    Singular { pivot: f64 },
}

fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

/// Dense column vector.
#[derive(Clone, PartialEq, Default)]
pub struct VecN<T> {
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for VecN<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.iter()).finish()
    }
}

impl<T: Scalar> VecN<T> {
    /// Builds a vector, rejecting NaN and infinite entries.
    pub fn new(data: Vec<T>) -> Result<Self, LinalgError> {
        if let Some(index) = data.iter().position(|x| !x.is_finite_value()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self { data })
    }

    pub fn from_slice(data: &[T]) -> Result<Self, LinalgError> {
        Self::new(data.to_vec())
    }

    pub(crate) fn from_vec_unchecked(data: Vec<T>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![T::zero(); dim],
        }
    }

    /// Unit vector `e_index` of the given dimension.
    pub fn basis(dim: usize, index: usize) -> Result<Self, LinalgError> {
        if index >= dim {
            return Err(LinalgError::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = Self::zeros(dim);
        v.data[index] = T::one();
        Ok(v)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> T) -> Self {
        Self {
            data: (0..dim).map(f).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite_value())
    }

    pub fn dot(&self, other: &Self) -> Result<T, LinalgError> {
        check_dim("dot", self.dim(), other.dim())?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b))
    }

    pub fn norm_squared(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &a| acc + a * a)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Entry-wise product, used for diagonal gain matrices.
    pub fn hadamard(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dim("hadamard", self.dim(), other.dim())?;
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).collect(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dim("add", self.dim(), other.dim())?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dim("sub", self.dim(), other.dim())?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Appends one entry, e.g. `(x, θ)` from `x`.
    pub fn extended(&self, last: T) -> Self {
        let mut data = Vec::with_capacity(self.dim() + 1);
        data.extend_from_slice(&self.data);
        data.push(last);
        Self { data }
    }

    /// Splits off the last entry.
    pub fn split_last(&self) -> Option<(Self, T)> {
        let (&last, head) = self.data.split_last()?;
        Some((Self { data: head.to_vec() }, last))
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|x| x.abs())
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }
}

impl<T: Real> VecN<T> {
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }
}

impl<T> Index<usize> for VecN<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T: Scalar> Add for &VecN<T> {
    type Output = VecN<T>;
    fn add(self, rhs: Self) -> VecN<T> {
        assert_eq!(self.dim(), rhs.dim(), "VecN add: dimension mismatch");
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for &VecN<T> {
    type Output = VecN<T>;
    fn sub(self, rhs: Self) -> VecN<T> {
        assert_eq!(self.dim(), rhs.dim(), "VecN sub: dimension mismatch");
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Neg for &VecN<T> {
    type Output = VecN<T>;
    fn neg(self) -> VecN<T> {
        self.map(|x| -x)
    }
}

impl<T: Scalar> Mul<T> for &VecN<T> {
    type Output = VecN<T>;
    fn mul(self, rhs: T) -> VecN<T> {
        self.scale(rhs)
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct MatN<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for MatN<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.rows {
            list.entry(&&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        list.finish()
    }
}

impl<T: Scalar> MatN<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, LinalgError> {
        check_dim("matrix storage", rows * cols, data.len())?;
        if let Some(index) = data.iter().position(|x| !x.is_finite_value()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    /// Stacks equal-length vectors as rows.
    pub fn from_rows(rows: &[VecN<T>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, VecN::dim);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim("matrix row", cols, r.dim())?;
            data.extend_from_slice(r.as_slice());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * n + i] = e;
        }
        m
    }

    /// Diagonal gain matrix; every entry must be strictly positive.
    pub fn diagonal_gain(entries: &[T]) -> Result<Self, LinalgError> {
        if let Some(i) = entries.iter().position(|e| !(*e > T::zero())) {
            return Err(LinalgError::InvalidArgument(format!(
                "gain entry {i} must be positive, got {:?}",
                entries[i]
            )));
        }
        Ok(Self::diagonal(entries))
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

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: T) {
        self.data[r * self.cols + c] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> VecN<T> {
        VecN::from_vec_unchecked(self.data[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &VecN<T>) -> Result<VecN<T>, LinalgError> {
        check_dim("matrix-vector product", self.cols, v.dim())?;
        Ok(VecN::from_fn(self.rows, |r| {
            (0..self.cols).fold(T::zero(), |acc, c| acc + self.get(r, c) * v[c])
        }))
    }

    pub fn mul_mat(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dim("matrix-matrix product", self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self.get(r, k) * other.get(k, c);
                }
                out.data[r * other.cols + c] = acc;
            }
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dim("matrix sub rows", self.rows, other.rows)?;
        check_dim("matrix sub cols", self.cols, other.cols)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|x| x.abs())
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }

    /// Determinant. Cofactor expansion up to [`COFACTOR_MAX_DIM`], LU above.
    pub fn determinant(&self) -> Result<T, LinalgError> {
        check_dim("determinant (square)", self.rows, self.cols)?;
        let cols: Vec<usize> = (0..self.cols).collect();
        Ok(minor_determinant(&self.data, self.cols, 0, &cols))
    }

    /// Determinant by cofactor expansion along the first row, any size.
    pub fn determinant_cofactor(&self) -> Result<T, LinalgError> {
        check_dim("determinant (square)", self.rows, self.cols)?;
        let cols: Vec<usize> = (0..self.cols).collect();
        Ok(cofactor(&self.data, self.cols, 0, &cols))
    }

    /// Determinant by LU elimination with partial pivoting, any size.
    pub fn determinant_lu(&self) -> Result<T, LinalgError> {
        check_dim("determinant (square)", self.rows, self.cols)?;
        Ok(lu_determinant(self.data.clone(), self.rows))
    }
}

impl<T: Real> MatN<T> {
    /// Solves `self · x = b` by Gaussian elimination with partial pivoting.
    ///
    /// A pivot smaller than `1e3·ε·max|a_ij|` is reported as singular.
    pub fn solve(&self, b: &VecN<T>) -> Result<VecN<T>, LinalgError> {
        check_dim("solve (square)", self.rows, self.cols)?;
        check_dim("solve rhs", self.rows, b.dim())?;
        let n = self.rows;
        let scale = self.max_abs();
        let threshold = T::epsilon() * T::lit(1e3) * if scale > T::zero() { scale } else { T::one() };
        let mut a = self.data.clone();
        let mut x = b.as_slice().to_vec();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= threshold {
                return Err(LinalgError::Singular {
                    pivot: pivot.to_f64().unwrap_or(0.0),
                });
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                x.swap(k, p);
            }
            for r in (k + 1)..n {
                let factor = a[r * n + k] / a[k * n + k];
                for c in k..n {
                    a[r * n + c] = a[r * n + c] - factor * a[k * n + c];
                }
                x[r] = x[r] - factor * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for c in (k + 1)..n {
                acc = acc - a[k * n + c] * x[c];
            }
            x[k] = acc / a[k * n + k];
        }
        VecN::new(x)
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for c in 0..n {
            let col = self.solve(&VecN::basis(n, c)?)?;
            for r in 0..n {
                inv.set(r, c, col[r]);
            }
        }
        Ok(inv)
    }
}

/// Determinant of the square submatrix made of rows `row0..row0+cols.len()`
/// and the listed columns of a row-major array with row length `stride`.
fn minor_determinant<T: Scalar>(data: &[T], stride: usize, row0: usize, cols: &[usize]) -> T {
    let k = cols.len();
    if k <= COFACTOR_MAX_DIM {
        return cofactor(data, stride, row0, cols);
    }
    let mut sub = Vec::with_capacity(k * k);
    for r in 0..k {
        for &c in cols {
            sub.push(data[(row0 + r) * stride + c]);
        }
    }
    lu_determinant(sub, k)
}

fn cofactor<T: Scalar>(data: &[T], stride: usize, row0: usize, cols: &[usize]) -> T {
    let at = |r: usize, c: usize| data[(row0 + r) * stride + c];
    match cols.len() {
        0 => T::one(),
        1 => at(0, cols[0]),
        2 => at(0, cols[0]) * at(1, cols[1]) - at(0, cols[1]) * at(1, cols[0]),
        k => {
            let mut acc = T::zero();
            let mut rest = Vec::with_capacity(k - 1);
            for j in 0..k {
                let a = at(0, cols[j]);
                if a.is_zero() {
                    continue;
                }
                rest.clear();
                rest.extend(cols.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &c)| c));
                let term = a * cofactor(data, stride, row0 + 1, &rest);
                acc = if j % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

fn lu_determinant<T: Scalar>(mut a: Vec<T>, n: usize) -> T {
    let mut det = T::one();
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|r| (r, a[r * n + k].abs()))
            .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot.is_zero() {
            return T::zero();
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            det = -det;
        }
        let akk = a[k * n + k];
        det = det * akk;
        for r in (k + 1)..n {
            let factor = a[r * n + k] / akk;
            if factor.is_zero() {
                continue;
            }
            for c in k..n {
                a[r * n + c] = a[r * n + c] - factor * a[k * n + c];
            }
        }
    }
    det
}

/// Generalized cross product of `n` vectors in `R^(n+1)`.
///
/// Component `k` (zero-based) is `(-1)^k` times the determinant of the
/// `n × n` matrix obtained by stacking the inputs as rows and deleting
/// column `k`. The result is orthogonal to every input and vanishes iff the
/// inputs are linearly dependent. For two vectors in `R^3` this is the
/// ordinary cross product.
pub fn generalized_cross<T: Scalar>(vs: &[VecN<T>]) -> Result<VecN<T>, LinalgError> {
    let n = vs.len();
    if n == 0 {
        return Err(LinalgError::InvalidArgument(
            "generalized cross product needs at least one vector".into(),
        ));
    }
    let stacked = MatN::from_rows(vs)?;
    check_dim("generalized cross operand", n + 1, stacked.cols())?;
    let all: Vec<usize> = (0..=n).collect();
    let mut cols = Vec::with_capacity(n);
    Ok(VecN::from_fn(n + 1, |k| {
        cols.clear();
        cols.extend(all.iter().copied().filter(|&c| c != k));
        let minor = minor_determinant(stacked.as_slice(), n + 1, 0, &cols);
        if k % 2 == 0 {
            minor
        } else {
            -minor
        }
    }))
}

/// Planar rotation-rate matrix `[[0, ω], [-ω, 0]]`.
pub fn skew2<T: Scalar>(omega: T) -> MatN<T> {
    MatN {
        rows: 2,
        cols: 2,
        data: vec![T::zero(), omega, -omega, T::zero()],
    }
}

/// Central-difference gradient of a fallible scalar field. Evaluation
/// errors are passed through unchanged.
pub fn try_finite_diff_gradient<T, E, F>(f: F, x: &VecN<T>, h: T) -> Result<VecN<T>, E>
where
    T: Real,
    E: From<LinalgError>,
    F: Fn(&VecN<T>) -> Result<T, E>,
{
    if !(h > T::zero()) {
        return Err(LinalgError::InvalidArgument(format!("finite-difference step must be positive, got {h}")).into());
    }
    let two_h = h + h;
    let mut grad = Vec::with_capacity(x.dim());
    let mut probe = x.clone();
    for i in 0..x.dim() {
        let xi = x[i];
        probe.data[i] = xi + h;
        let plus = f(&probe)?;
        probe.data[i] = xi - h;
        let minus = f(&probe)?;
        probe.data[i] = xi;
        grad.push((plus - minus) / two_h);
    }
    Ok(VecN::from_vec_unchecked(grad))
}

/// Central-difference gradient `(f(x+h·e_i) − f(x−h·e_i)) / 2h`.
pub fn finite_diff_gradient<T, F>(f: F, x: &VecN<T>, h: T) -> Result<VecN<T>, LinalgError>
where
    T: Real,
    F: Fn(&VecN<T>) -> T,
{
    try_finite_diff_gradient(|p| Ok(f(p)), x, h)
}

/// Central difference of a vector-valued function of one scalar.
pub fn finite_diff_curve<T, F>(f: F, s: T, h: T) -> Result<VecN<T>, LinalgError>
where
    T: Real,
    F: Fn(T) -> VecN<T>,
{
    if !(h > T::zero()) {
        return Err(LinalgError::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let plus = f(s + h);
    let minus = f(s - h);
    let diff = plus.checked_sub(&minus)?;
    Ok(diff.scale(T::one() / (h + h)))
}
