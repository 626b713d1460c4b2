//! Dense square matrices with value semantics.
//!
//! Public indices are 1-based `(j, k)`; storage is row-major and private.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::binomial;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Square `n x n` matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: std::fmt::LowerExp> std::fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.n, self.n)?;
        for r in 0..self.n {
            write!(f, "  ")?;
            for c in 0..self.n {
                write!(f, "{:>14.6e} ", self.data[r * self.n + c])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, T::one())
    }

    /// `c I`.
    pub fn scalar(n: usize, c: T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    /// Builds a matrix from a closure of the 1-based index pair.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for j in 1..=n {
            for k in 1..=n {
                data.push(f(j, k));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from row slices.
    ///
    /// # Panics
    /// Panics if the rows do not form a square array.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square array");
        Self { n, data: rows.iter().flatten().copied().collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Entry `(j, k)`, 1-based.
    pub fn get(&self, j: usize, k: usize) -> T {
        self.data[(j - 1) * self.n + (k - 1)]
    }

    /// Sets entry `(j, k)`, 1-based.
    pub fn set(&mut self, j: usize, k: usize, v: T) {
        self.data[(j - 1) * self.n + (k - 1)] = v;
    }

    /// Rows as vectors, top to bottom.
    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n.max(1)).map(<[T]>::to_vec).collect()
    }

    /// Transpose, which is the adjoint for real matrices.
    pub fn t(&self) -> Self {
        Self::from_fn(self.n, |j, k| self.get(k, j))
    }

    pub fn scale(&self, c: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&v| v * c).collect() }
    }

    /// `self + c I`.
    pub fn shift(&self, c: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] = m.data[i * self.n + i] + c;
        }
        m
    }

    /// Entrywise conversion to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Mat<U> {
        let data = self.data.iter().map(|&v| U::of(v.to_f64())).collect();
        Mat { n: self.n, data }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |s, i| s + self.data[i * self.n + i])
    }

    /// Max-abs entry of `self - other`.
    pub fn dist(&self, other: &Self) -> T {
        (self - other).max_abs()
    }

    /// `self^k` for `k >= 0` by repeated squaring.
    pub fn powi(&self, k: u32) -> Self {
        let mut result = Self::identity(self.n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        result
    }

    /// `(I + nil)^k` for a nilpotent `nil` and any integer `k`, via the
    /// terminating binomial series.
    pub fn unipotent_pow(nil: &Self, k: i64) -> Self {
        let n = nil.n;
        let kk = T::int(k);
        let mut acc = Self::identity(n);
        let mut p = Self::identity(n);
        for s in 1..n as u32 {
            p = &p * nil;
            acc += &p.scale(binomial(kk, s));
        }
        acc
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Lu<T> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let mut singular = false;
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].abs();
            for r in col + 1..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == T::zero() {
                singular = true;
                continue;
            }
            if piv != col {
                for c in 0..n {
                    a.swap(col * n + c, piv * n + c);
                }
                perm.swap(col, piv);
                sign = -sign;
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                a[r * n + col] = f;
                for c in col + 1..n {
                    a[r * n + c] = a[r * n + c] - f * a[col * n + c];
                }
            }
        }
        Lu { n, a, perm, sign, singular }
    }

    pub fn det(&self) -> T {
        self.lu().det()
    }

    /// Inverse via LU.
    ///
    /// # Errors
    /// Returns [`Error::Singular`] for an exactly singular pivot.
    pub fn inv(&self) -> Result<Self> {
        let lu = self.lu();
        if lu.singular {
            return Err(Error::Singular("zero pivot in LU".into()));
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for c in 0..n {
            let mut e = vec![T::zero(); n];
            e[c] = T::one();
            let x = lu.solve_vec(&e);
            for (r, v) in x.into_iter().enumerate() {
                out.data[r * n + c] = v;
            }
        }
        Ok(out)
    }

    /// Inverse of a matrix known to be invertible on the valid grid.
    ///
    /// # Panics
    /// Panics if the matrix is exactly singular.
    pub fn inverse(&self) -> Self {
        self.inv().expect("matrix expected to be invertible")
    }

    /// `||A||_inf ||A^{-1}||_inf`, infinite for singular input.
    pub fn condition(&self) -> T {
        let row_norm = |m: &Self| {
            (0..m.n)
                .map(|r| (0..m.n).fold(T::zero(), |s, c| s + m.data[r * m.n + c].abs()))
                .fold(T::zero(), T::max)
        };
        match self.inv() {
            Ok(inv) => row_norm(self) * row_norm(&inv),
            Err(_) => T::infinity(),
        }
    }
}

/// LU factors `P A = L U` stored compactly.
pub struct Lu<T> {
    n: usize,
    a: Vec<T>,
    perm: Vec<usize>,
    sign: T,
    singular: bool,
}

impl<T: Scalar> Lu<T> {
    pub fn det(&self) -> T {
        if self.singular {
            return T::zero();
        }
        (0..self.n).fold(self.sign, |d, i| d * self.a[i * self.n + i])
    }

    fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                y[r] = y[r] - self.a[r * n + c] * y[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                y[r] = y[r] - self.a[r * n + c] * y[c];
            }
            y[r] = y[r] / self.a[r * n + r];
        }
        y
    }
}

/// Determinant of the block Vandermonde matrix with block rows
/// `(I, M_j, M_j^2, ..., M_j^x)` for `j = 0..=x`, where `x + 1` is the
/// number of blocks.
///
/// # Panics
/// Panics if the blocks differ in size.
pub fn block_vandermonde_det<T: Scalar>(blocks: &[Mat<T>]) -> T {
    if blocks.is_empty() {
        return T::one();
    }
    let n = blocks[0].size();
    assert!(blocks.iter().all(|b| b.size() == n), "blocks must share a size");
    let m = blocks.len();
    let mut big = Mat::zeros(m * n);
    for (row, b) in blocks.iter().enumerate() {
        let mut p = Mat::identity(n);
        for col in 0..m {
            for j in 1..=n {
                for k in 1..=n {
                    big.set(row * n + j, col * n + k, p.get(j, k));
                }
            }
            p = &p * b;
        }
    }
    big.det()
}

impl<T: Scalar> Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.n, rhs.n, "size mismatch");
        Mat { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(&x, &y)| x + y).collect() }
    }
}

impl<T: Scalar> Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.n, rhs.n, "size mismatch");
        Mat { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(&x, &y)| x - y).collect() }
    }
}

impl<T: Scalar> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.n, rhs.n, "size mismatch");
        let n = self.n;
        let mut out = vec![T::zero(); n * n];
        for r in 0..n {
            for k in 0..n {
                let v = self.data[r * n + k];
                if v == T::zero() {
                    continue;
                }
                for c in 0..n {
                    out[r * n + c] = out[r * n + c] + v * rhs.data[k * n + c];
                }
            }
        }
        Mat { n, data: out }
    }
}

impl<T: Scalar> Neg for &Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        self.scale(-T::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<T: Scalar> $tr<Mat<T>> for Mat<T> {
            type Output = Mat<T>;
            fn $f(self, rhs: Mat<T>) -> Mat<T> {
                (&self).$f(&rhs)
            }
        }
        impl<T: Scalar> $tr<&Mat<T>> for Mat<T> {
            type Output = Mat<T>;
            fn $f(self, rhs: &Mat<T>) -> Mat<T> {
                (&self).$f(rhs)
            }
        }
        impl<T: Scalar> $tr<Mat<T>> for &Mat<T> {
            type Output = Mat<T>;
            fn $f(self, rhs: Mat<T>) -> Mat<T> {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Scalar> Neg for Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        (&self).neg()
    }
}

impl<T: Scalar> AddAssign<&Mat<T>> for Mat<T> {
    fn add_assign(&mut self, rhs: &Mat<T>) {
        assert_eq!(self.n, rhs.n, "size mismatch");
        for (x, &y) in self.data.iter_mut().zip(&rhs.data) {
            *x = *x + y;
        }
    }
}

impl<T: Scalar> SubAssign<&Mat<T>> for Mat<T> {
    fn sub_assign(&mut self, rhs: &Mat<T>) {
        assert_eq!(self.n, rhs.n, "size mismatch");
        for (x, &y) in self.data.iter_mut().zip(&rhs.data) {
            *x = *x - y;
        }
    }
}

impl<T: Scalar> Mul<T> for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, c: T) -> Mat<T> {
        self.scale(c)
    }
}

impl<T: Scalar> Mul<T> for Mat<T> {
    type Output = Mat<T>;
    fn mul(self, c: T) -> Mat<T> {
        self.scale(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Mat<f64>;

    #[test]
    fn inverse_and_det() {
        let a = M::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]);
        let inv = a.inverse();
        assert!((&a * &inv).dist(&M::identity(3)) < 1e-14);
        assert!((a.det() - 18.0).abs() < 1e-12);
        assert!(M::zeros(2).inv().is_err());
    }

    #[test]
    fn unipotent_group_law() {
        let nil = M::from_fn(3, |j, k| if j == k + 1 { 0.7 } else { 0.0 });
        for k in -6..=6 {
            let p = M::unipotent_pow(&nil, k);
            let q = M::unipotent_pow(&nil, -k);
            assert!((&p * &q).dist(&M::identity(3)) < 1e-13);
        }
        let two = M::unipotent_pow(&nil, 2);
        let ipn = M::identity(3) + &nil;
        assert!(two.dist(&(&ipn * &ipn)) < 1e-15);
    }

    #[test]
    fn block_vandermonde_small() {
        assert_eq!(block_vandermonde_det::<f64>(&[M::identity(2)]), 1.0);
        // M(n) = n diag(1, 2) + s.u.t. at nodes 0, 1
        let b0 = M::from_rows(&[vec![0.0, 0.3], vec![0.0, 0.0]]);
        let b1 = M::from_rows(&[vec![1.0, -0.4], vec![0.0, 2.0]]);
        assert!((block_vandermonde_det(&[b0, b1]) - 2.0).abs() < 1e-12);
    }
}
