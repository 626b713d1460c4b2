//! Polynomials with matrix coefficients, `P(x) = sum_k x^k C_k`.
//!
//! The variable can be a scalar or a square matrix. A matrix variable placed
//! on the left gives `sum_k M^k C_k`; on the right it gives `sum_k C_k M^k`.

use crate::error::{domain, Result};
use crate::{Mat, Matrix, Scalar};

/// Position of the variable relative to the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarSide {
    Scalar,
    LeftMatrix,
    RightMatrix,
}

/// Matrix coefficient polynomial, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial<T: Scalar = f64> {
    coeffs: Vec<Mat<T>>,
    side: VarSide,
}

impl<T: Scalar> MatrixPolynomial<T> {
    /// # Errors
    /// Returns a domain error for an empty or ragged coefficient list.
    pub fn new(coeffs: Vec<Mat<T>>, side: VarSide) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return domain("polynomial needs at least one coefficient");
        };
        let n = first.size();
        if coeffs.iter().any(|c| c.size() != n) {
            return domain("coefficient sizes differ");
        }
        Ok(Self { coeffs, side })
    }

    pub fn constant(c: Mat<T>, side: VarSide) -> Self {
        Self { coeffs: vec![c], side }
    }

    pub fn side(&self) -> VarSide {
        self.side
    }

    pub fn size(&self) -> usize {
        self.coeffs[0].size()
    }

    /// Formal degree (length of the coefficient list minus one).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `x^k`, zero past the formal degree.
    pub fn coeff(&self, k: usize) -> Mat<T> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| Mat::zeros(self.size()))
    }

    pub fn coeffs(&self) -> &[Mat<T>] {
        &self.coeffs
    }

    pub fn leading(&self) -> &Mat<T> {
        &self.coeffs[self.degree()]
    }

    /// Value at a scalar point.
    pub fn eval(&self, x: T) -> Mat<T> {
        let mut acc = self.leading().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.scale(x) + c;
        }
        acc
    }

    /// Value at a matrix point, respecting the variable side. A scalar-side
    /// polynomial is evaluated with the variable on the left.
    pub fn eval_matrix(&self, m: &Mat<T>) -> Mat<T> {
        let mut acc = self.leading().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = match self.side {
                VarSide::RightMatrix => &acc * m + c,
                _ => m * &acc + c,
            };
        }
        acc
    }

    /// Same coefficients with a different variable side.
    pub fn with_side(mut self, side: VarSide) -> Self {
        self.side = side;
        self
    }

    /// `M P`, coefficientwise.
    pub fn left_mul(&self, m: &Mat<T>) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| m * c).collect(), side: self.side }
    }

    /// `P M`, coefficientwise.
    pub fn right_mul(&self, m: &Mat<T>) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * m).collect(), side: self.side }
    }

    /// Largest coefficientwise max-abs difference, padding with zeros.
    pub fn coeff_dist(&self, other: &Self) -> T {
        let d = self.degree().max(other.degree());
        (0..=d).map(|k| self.coeff(k).dist(&other.coeff(k))).fold(T::zero(), T::max)
    }
}

impl MatrixPolynomial {
    /// Interpolates the degree `values.len() - 1` polynomial through
    /// `(0, values[0]), (1, values[1]), ...` by forward differences.
    ///
    /// # Errors
    /// Returns a domain error for an empty value list.
    pub fn interpolate(values: &[Matrix]) -> Result<Self> {
        if values.is_empty() {
            return domain("interpolation needs at least one node");
        }
        let n = values[0].size();
        let d = values.len() - 1;
        // Newton form: P(x) = sum_k Delta^k P(0) (x)_k / k!, with falling
        // factorial (x)_k expanded through Stirling numbers of the first kind.
        let mut diffs = values.to_vec();
        let mut newton = Vec::with_capacity(d + 1);
        for k in 0..=d {
            newton.push(diffs[0].clone());
            for i in 0..d - k {
                diffs[i] = &diffs[i + 1] - &diffs[i];
            }
        }
        let mut coeffs = vec![Matrix::zeros(n); d + 1];
        let mut falling = vec![1.0];
        let mut fact = 1.0;
        for (k, nk) in newton.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
                let shift = (k - 1) as f64;
                let mut next = vec![0.0; k + 1];
                for (i, &c) in falling.iter().enumerate() {
                    next[i + 1] += c;
                    next[i] -= shift * c;
                }
                falling = next;
            }
            for (i, &c) in falling.iter().enumerate() {
                coeffs[i] += &nk.scale(c / fact);
            }
        }
        Ok(Self { coeffs, side: VarSide::Scalar })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: [[f64; 2]; 2]) -> Matrix {
        Matrix::from_rows(&[v[0].to_vec(), v[1].to_vec()])
    }

    #[test]
    fn interpolation_recovers_coefficients() {
        let c0 = m([[1.0, 2.0], [0.0, -1.0]]);
        let c1 = m([[0.5, 0.0], [3.0, 1.0]]);
        let c2 = m([[0.0, -2.0], [1.0, 0.25]]);
        let p = MatrixPolynomial::new(vec![c0, c1, c2], VarSide::Scalar).unwrap();
        let vals: Vec<_> = (0..4).map(|x| p.eval(f64::from(x))).collect();
        let q = MatrixPolynomial::interpolate(&vals).unwrap();
        assert!(q.coeff_dist(&p) < 1e-12);
        assert!(q.coeff(3).max_abs() < 1e-12);
    }

    #[test]
    fn matrix_sides() {
        let c0 = m([[1.0, 0.0], [0.0, 0.0]]);
        let c1 = m([[0.0, 1.0], [0.0, 0.0]]);
        let x = m([[2.0, 0.0], [1.0, 3.0]]);
        let left = MatrixPolynomial::new(vec![c0.clone(), c1.clone()], VarSide::LeftMatrix).unwrap();
        let right = left.clone().with_side(VarSide::RightMatrix);
        assert!(left.eval_matrix(&x).dist(&(&c0 + &(&x * &c1))) < 1e-15);
        assert!(right.eval_matrix(&x).dist(&(&c0 + &(&c1 * &x))) < 1e-15);
    }
}
