//! Model parameters `(N, a, lambda)` and the structural matrices built from
//! them: the nilpotent shift `A`, `J`, `T`, the unipotent `L(x)` and the
//! upper triangular `A_m` family.

use crate::error::{domain, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use crate::special::{charlier, factorial};

/// Model parameters with derived `mu` and `delta` vectors.
#[derive(Clone, PartialEq)]
pub struct ModelParams<T> {
    n: usize,
    a: T,
    lambda: u32,
    mu: Vec<T>,
    delta: Vec<T>,
    a_pows: Vec<Mat<T>>,
}

impl<T: Scalar> std::fmt::Debug for ModelParams<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelParams")
            .field("n", &self.n)
            .field("a", &self.a)
            .field("lambda", &self.lambda)
            .field("mu", &self.mu)
            .finish()
    }
}

impl<T: Scalar> ModelParams<T> {
    /// Builds the parameter set with `mu_j = a^{-j/2} / sqrt((N-j)!)`.
    ///
    /// # Errors
    /// Returns a domain error unless `N >= 2` and `a > 0` is finite.
    pub fn new(n: usize, a: T, lambda: u32) -> Result<Self> {
        if n < 2 {
            return domain("matrix size N must be at least 2");
        }
        if a <= T::zero() || !a.is_finite() {
            return domain("parameter a must be positive and finite");
        }
        let mu = (1..=n)
            .map(|j| T::one() / (a.sqrt().powi(j as i32) * factorial::<T>((n - j) as u32).sqrt()))
            .collect();
        Ok(Self::assemble(n, a, lambda, mu))
    }

    fn assemble(n: usize, a: T, lambda: u32, mu: Vec<T>) -> Self {
        let delta = delta_vec(n, a, lambda);
        let shift = Mat::from_fn(n, |j, k| if j == k + 1 { mu[j - 1] / mu[k - 1] } else { T::zero() });
        let mut a_pows = vec![Mat::identity(n)];
        for s in 1..n {
            let next = &a_pows[s - 1] * &shift;
            a_pows.push(next);
        }
        Self { n, a, lambda, mu, delta, a_pows }
    }

    /// Same model with every `mu_j` multiplied by `c`; all outputs are
    /// invariant under this rescaling.
    pub fn rescale_mu(&self, c: T) -> Self {
        let mu = self.mu.iter().map(|&m| m * c).collect();
        Self::assemble(self.n, self.a, self.lambda, mu)
    }

    /// Same model in another scalar type. The `mu` vector is rebuilt at the
    /// target precision and carries over any rescaling of `self`.
    pub fn cast<U: Scalar>(&self) -> ModelParams<U> {
        let a = U::of(self.a.to_f64());
        let base = ModelParams::new(self.n, a, self.lambda).expect("parameters already validated");
        let own = Self::new(self.n, self.a, self.lambda).expect("parameters already validated");
        base.rescale_mu(U::of((self.mu[0] / own.mu[0]).to_f64()))
    }

    /// Same model with a different `lambda`, keeping the `mu` vector.
    pub fn with_lambda(&self, lambda: u32) -> Self {
        Self::assemble(self.n, self.a, lambda, self.mu.clone())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    /// `mu_j`, 1-based.
    pub fn mu(&self, j: usize) -> T {
        self.mu[j - 1]
    }

    /// `delta_k = (a/2)^lambda (lambda+k-1)!/(k-1)!`, 1-based.
    pub fn delta(&self, k: usize) -> T {
        self.delta[k - 1]
    }

    /// Ratio `mu_j / mu_k`.
    pub fn mu_ratio(&self, j: usize, k: usize) -> T {
        self.mu[j - 1] / self.mu[k - 1]
    }

    /// Strictly lower triangular `A` with `A_{j+1,j} = mu_{j+1}/mu_j`.
    pub fn a_mat(&self) -> Mat<T> {
        self.a_pows[1].clone()
    }

    /// `J = diag(1, ..., N)`.
    pub fn j_mat(&self) -> Mat<T> {
        Mat::from_fn(self.n, |j, k| if j == k { T::int(j as i64) } else { T::zero() })
    }

    /// `T^{(lambda)} = diag(delta)`.
    pub fn t_mat(&self) -> Mat<T> {
        Mat::diag(&self.delta)
    }

    /// `T^{(l)}` for another value `l` of the family parameter.
    pub fn t_mat_at(&self, l: u32) -> Mat<T> {
        Mat::diag(&delta_vec(self.n, self.a, l))
    }

    /// `(I + A)^k` for any integer `k`, by the `N`-term binomial sum.
    pub fn ipa_pow(&self, k: i64) -> Mat<T> {
        let kk = T::int(k);
        let mut acc = Mat::identity(self.n);
        let mut b = T::one();
        for s in 1..self.n {
            b = b * (kk - T::int(s as i64 - 1)) / T::int(s as i64);
            acc += &self.a_pows[s].scale(b);
        }
        acc
    }

    /// `(I + A^*)^k`.
    pub fn ipa_star_pow(&self, k: i64) -> Mat<T> {
        self.ipa_pow(k).t()
    }

    /// `L(x)_{jk} = (mu_j/mu_k) (-a)^{j-k} c_{j-k}(x) / (j-k)!` for `j >= k`.
    pub fn mat_l(&self, x: i64) -> Mat<T> {
        let xx = T::int(x);
        Mat::from_fn(self.n, |j, k| {
            if j < k {
                return T::zero();
            }
            let d = (j - k) as u32;
            let c = charlier(d, self.a, xx).expect("a > 0");
            self.mu_ratio(j, k) * (-self.a).powi(d as i32) * c / factorial::<T>(d)
        })
    }

    /// `L(x)^{-1}_{jk} = (mu_j/mu_k) a^{j-k} c^{(-a)}_{j-k}(-x) / (j-k)!`.
    pub fn mat_l_inv(&self, x: i64) -> Mat<T> {
        let xx = T::int(x);
        Mat::from_fn(self.n, |j, k| {
            if j < k {
                return T::zero();
            }
            let d = (j - k) as u32;
            let c = charlier(d, -self.a, -xx).expect("a > 0");
            self.mu_ratio(j, k) * self.a.powi(d as i32) * c / factorial::<T>(d)
        })
    }

    /// `L_0 = L(0)`.
    pub fn l0(&self) -> Mat<T> {
        self.mat_l(0)
    }

    /// `A_m = (N + m - J)^{-1} J A^*`, strictly upper triangular.
    ///
    /// Row `N` of `J A^*` vanishes, so only rows `j < N` need `N + m - j != 0`.
    ///
    /// # Errors
    /// Returns a domain error if `N + m - j = 0` for some `j < N`.
    pub fn script_a(&self, m: T) -> Result<Mat<T>> {
        let nn = T::int(self.n as i64);
        if (1..self.n).any(|j| nn + m - T::int(j as i64) == T::zero()) {
            return domain("N + m - J is singular");
        }
        Ok(Mat::from_fn(self.n, |j, k| {
            if k == j + 1 {
                T::int(j as i64) * self.mu_ratio(k, j) / (nn + m - T::int(j as i64))
            } else {
                T::zero()
            }
        }))
    }
}

fn delta_vec<T: Scalar>(n: usize, a: T, lambda: u32) -> Vec<T> {
    let half = (a / T::of(2.0)).powi(lambda as i32);
    (1..=n)
        .map(|k| half * crate::special::pochhammer(T::int(k as i64), lambda))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = ModelParams<f64>;

    #[test]
    fn spec_examples() {
        let p = P::new(2, 1.0, 0).unwrap();
        assert!((p.a_mat().get(2, 1) - 1.0).abs() < 1e-15);
        assert!(p.l0().dist(&Mat::from_rows(&[vec![1.0, 0.0], vec![-1.0, 1.0]])) < 1e-15);
        assert!(p.mat_l_inv(0).dist(&Mat::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]])) < 1e-15);
        for k in 1..=2 {
            assert_eq!(p.delta(k), 1.0);
        }
        let q = P::new(3, 2.0, 1).unwrap();
        for k in 1..=3 {
            assert!((q.delta(k) - k as f64).abs() < 1e-15);
        }
        let sa = P::new(2, 1.0, 0).unwrap().script_a(1.0).unwrap();
        assert!((sa.get(1, 2) - 0.5).abs() < 1e-15);
        assert!(P::new(1, 1.0, 0).is_err());
        assert!(P::new(2, 0.0, 0).is_err());
        assert!(p.script_a(-1.0).is_err());
        assert!(p.script_a(0.0).is_ok());
    }

    #[test]
    fn mu_ratio_invariant() {
        let p = P::new(4, 2.5, 1).unwrap();
        for j in 1..=4 {
            for k in 1..=4 {
                let lhs = p.mu_ratio(j, k).powi(2);
                let rhs = 2.5_f64.powi(k as i32 - j as i32) * factorial::<f64>((4 - k) as u32)
                    / factorial::<f64>((4 - j) as u32);
                assert!((lhs - rhs).abs() < 1e-12 * rhs);
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let p = ModelParams::<f32>::new(3, 1.5, 2).unwrap();
        let l = p.mat_l(2);
        let li = p.mat_l_inv(2);
        assert!((&l * &li).dist(&Mat::identity(3)) < 1e-5);
    }
}
