//! The Charlier weight family `W^(lambda)`, the truncated matrix inner product
//! and the Pearson data `Phi`, `Psi`.

use crate::error::{Error, Result};
use crate::{Mat, Matrix, ModelParams, Params, Scalar};

/// `a^x / x!` as a running product.
pub fn poisson_factor(a: f64, x: u64) -> f64 {
    (1..=x).fold(1.0, |acc, i| acc * a / i as f64)
}

/// `W(x) = (a^x/x!) (I+A)^{x+lambda} T (I+A^*)^{x+lambda}` for `x >= 0`.
pub fn weight<T: Scalar>(p: &ModelParams<T>, x: u64) -> Mat<T> {
    let e = x as i64 + i64::from(p.lambda());
    let g = p.ipa_pow(e);
    let c = (1..=x).fold(T::one(), |acc, i| acc * p.a() / T::int(i as i64));
    (&(&g * &p.t_mat()) * &g.t()).scale(c)
}

/// Weight extended by zero to negative arguments.
pub fn weight_ext(p: &Params, x: i64) -> Matrix {
    if x < 0 {
        Matrix::zeros(p.size())
    } else {
        weight(p, x as u64)
    }
}

/// Stopping policy for infinite sums over `x` (or `n`).
///
/// Summation stops once three consecutive terms have max-abs entry below
/// `eps` times the max-abs entry of the running sum, or at `max_terms`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub eps: f64,
    pub max_terms: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { eps: 1e-14, max_terms: 400 }
    }
}

impl Truncation {
    /// Default policy for sums over the degree index.
    pub fn dual() -> Self {
        Self { eps: 1e-14, max_terms: 300 }
    }
}

/// A truncated sum and the number of terms it used.
#[derive(Debug, Clone)]
pub struct Summed<T: Scalar = f64> {
    pub value: Mat<T>,
    pub terms: usize,
}

/// Sums `term(0) + term(1) + ...` under the truncation policy.
///
/// # Errors
/// Returns [`Error::NoConverge`] if `max_terms` is reached first.
pub fn truncated_sum<T: Scalar>(t: Truncation, mut term: impl FnMut(u64) -> Mat<T>) -> Result<Summed<T>> {
    let eps = T::of(t.eps);
    let mut acc: Option<Mat<T>> = None;
    let mut small = 0;
    for i in 0..t.max_terms {
        let v = term(i as u64);
        let tm = v.max_abs();
        let sum = match acc.take() {
            Some(s) => s + v,
            None => v,
        };
        if tm < eps * sum.max_abs() {
            small += 1;
        } else {
            small = 0;
        }
        if small == 3 {
            return Ok(Summed { value: sum, terms: i + 1 });
        }
        acc = Some(sum);
    }
    Err(Error::NoConverge { max_terms: t.max_terms })
}

/// `<F, G> = sum_x F(x) W(x) G(x)^*`.
///
/// # Errors
/// Propagates a convergence failure of the truncated sum.
pub fn inner_product(
    f: impl Fn(i64) -> Matrix,
    g: impl Fn(i64) -> Matrix,
    p: &Params,
    t: Truncation,
) -> Result<Summed> {
    truncated_sum(t, |x| &(&f(x as i64) * &weight(p, x)) * &g(x as i64).t())
}

/// `J + (x + lambda)(I+A)^{-1}`.
pub fn jfrak<T: Scalar>(p: &ModelParams<T>, x: i64) -> Mat<T> {
    p.j_mat() + p.ipa_pow(-1).scale(T::int(x + i64::from(p.lambda())))
}

/// Coefficients of `Phi(x) = x^2 K2 + x K1 + K0` and `Psi(x) = x J1 + J0`.
#[derive(Debug, Clone)]
pub struct PearsonData<T: Scalar = f64> {
    pub k2: Mat<T>,
    pub k1: Mat<T>,
    pub k0: Mat<T>,
    pub j1: Mat<T>,
    pub j0: Mat<T>,
}

impl<T: Scalar> PearsonData<T> {
    pub fn phi(&self, x: i64) -> Mat<T> {
        let x = T::int(x);
        &(&self.k2.scale(x * x) + &self.k1.scale(x)) + &self.k0
    }

    pub fn psi(&self, x: i64) -> Mat<T> {
        &self.j1.scale(T::int(x)) + &self.j0
    }
}

/// Pearson coefficients for `W^(lambda)` with `d = 1`, `c = -(N+1)/2`.
pub fn pearson<T: Scalar>(p: &ModelParams<T>) -> PearsonData<T> {
    let n = p.size();
    let l = i64::from(p.lambda());
    let a = p.a();
    let half = T::of(0.5);
    let a_star = p.a_mat().t();
    let ipas_inv = p.ipa_star_pow(-1);
    let as_ipas_inv = &a_star * &ipas_inv;
    let t_inv = p.t_mat().inverse();
    let t_next = p.t_mat_at(p.lambda() + 1);
    let c = -T::int(n as i64 + 1) * half;

    let k2 = as_ipas_inv.scale(-half);
    let k1 = (&(&p.j_mat().scale(T::of(2.0)) - &a_star.scale(a)) - &as_ipas_inv.scale(T::int(2 * l + 1)))
        .scale(half)
        .shift(c);
    let k0 = &(&(&(&p.ipa_star_pow(-l) * &t_inv) * &p.ipa_pow(1)) * &t_next) * &p.ipa_star_pow(l + 1);
    let tail = &(&(&p.ipa_star_pow(-l - 1) * &t_inv) * &t_next) * &p.ipa_star_pow(l + 1);
    let j1 = &(&k2 + &k1) - &tail.scale(T::one() / a);
    PearsonData { k2, k1, j0: k0.clone(), k0, j1 }
}

/// `Phi(x)^*` in conjugated closed form
/// `(a/2)(I+A)^{x+lambda+1}(J(I+A^*) + lambda)(I+A)^{-x-lambda}`.
pub fn phi_star_closed(p: &Params, x: i64) -> Matrix {
    let l = i64::from(p.lambda());
    let inner = (&p.j_mat() * &p.ipa_star_pow(1)).shift(l as f64);
    (&(&p.ipa_pow(x + l + 1) * &inner) * &p.ipa_pow(-x - l)).scale(p.a() / 2.0)
}

/// Max-abs residuals of `W^(l+1)(x) = W^(l)(x) Phi(x)` and
/// `W^(l+1)(x) - W^(l+1)(x-1) = W^(l)(x) Psi(x)`.
pub fn strong_pearson_residual(p: &Params, x: u64) -> (f64, f64) {
    let up = p.with_lambda(p.lambda() + 1);
    let pd = pearson(p);
    let w = weight(p, x);
    let xi = x as i64;
    let w_up = weight(&up, x);
    let r1 = w_up.dist(&(&w * &pd.phi(xi)));
    let nabla = &w_up - &weight_ext(&up, xi - 1);
    let r2 = nabla.dist(&(&w * &pd.psi(xi)));
    (r1, r2)
}

/// Max of the residuals of `(I+A) W(x-1) = W(x) B x` with
/// `B = (a (I+A^*))^{-1}`, and of `Jfrak(x) W(x) = W(x) Jfrak(x)^*`.
pub fn weak_pearson_residual(p: &Params, x: u64) -> f64 {
    let xi = x as i64;
    let b = p.ipa_star_pow(-1).scale(1.0 / p.a());
    let w = weight(p, x);
    let lhs = &p.ipa_pow(1) * &weight_ext(p, xi - 1);
    let rhs = (&w * &b).scale(x as f64);
    let jf = jfrak(p, xi);
    let sym = (&jf * &w).dist(&(&w * &jf.t()));
    lhs.dist(&rhs).max(sym)
}

/// Forward difference `F(x+1) - F(x)`.
pub fn forward_diff(f: &dyn Fn(i64) -> Matrix, x: i64) -> Matrix {
    f(x + 1) - f(x)
}

/// Backward difference `F(x) - F(x-1)`.
pub fn backward_diff(f: &dyn Fn(i64) -> Matrix, x: i64) -> Matrix {
    f(x) - f(x - 1)
}
