//! Scalar special functions: Pochhammer symbols, Charlier and dual Hahn
//! polynomials, and the dual Hahn weight.
//!
//! Every hypergeometric sum here terminates, so it is evaluated as a plain
//! finite sum with the term ratio recurrence.

use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Rising factorial `(z)_k = z (z+1) ... (z+k-1)`, with `(z)_0 = 1`.
pub fn pochhammer<T: Scalar>(z: T, k: u32) -> T {
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * (z + T::int(i64::from(i)));
    }
    acc
}

/// `n!` as a floating point product.
pub fn factorial<T: Scalar>(n: u32) -> T {
    pochhammer(T::one(), n)
}

/// Generalized binomial coefficient `binom(top, s)` for real `top`.
pub fn binomial<T: Scalar>(top: T, s: u32) -> T {
    let mut acc = T::one();
    for i in 0..s {
        let i = T::int(i64::from(i));
        acc = acc * (top - i) / (i + T::one());
    }
    acc
}

/// Charlier polynomial `c_n^{(a)}(x) = 2F0(-n, -x; ; -1/a)`.
///
/// Negative `a` is allowed; it is needed for the inverse of the unipotent
/// matrix `L(x)`.
///
/// # Errors
/// Returns a domain error when `a == 0`.
///
/// # Examples
/// ```
/// use mvcharlier::special::charlier;
/// let c = charlier(1, 2.0_f64, 3.0).unwrap();
/// assert!((c + 0.5).abs() < 1e-15);
/// ```
pub fn charlier<T: Scalar>(n: u32, a: T, x: T) -> Result<T> {
    if a == T::zero() {
        return domain("Charlier parameter a must be nonzero");
    }
    let ratio = -T::one() / a;
    let nn = T::int(i64::from(n));
    let mut term = T::one();
    let mut sum = T::one();
    for k in 0..n {
        let kk = T::int(i64::from(k));
        term = term * (kk - nn) * (kk - x) / (kk + T::one()) * ratio;
        sum = sum + term;
    }
    Ok(sum)
}

/// Terminating `3F2(a1, a2, a3; b1, b2; 1)`.
///
/// At least one upper parameter must be a nonpositive integer; the sum runs up
/// to the first vanishing numerator. A vanishing denominator before that point
/// is a domain error.
pub fn hyp3f2_terminating<T: Scalar>(upper: [T; 3], lower: [T; 2]) -> Result<T> {
    let mut stop: Option<i64> = None;
    for &u in &upper {
        let f = u.to_f64();
        if f <= 0.0 && f == f.round() && u == T::of(f) {
            let m = -f as i64;
            stop = Some(stop.map_or(m, |s| s.min(m)));
        }
    }
    let Some(m) = stop else {
        return domain("3F2 does not terminate");
    };
    let mut term = T::one();
    let mut sum = T::one();
    for s in 0..m {
        let ss = T::int(s);
        let den = (lower[0] + ss) * (lower[1] + ss) * (ss + T::one());
        if den == T::zero() {
            return domain("3F2 lower parameter hits zero before termination");
        }
        term = term * (upper[0] + ss) * (upper[1] + ss) * (upper[2] + ss) / den;
        sum = sum + term;
    }
    Ok(sum)
}

/// Parameters `(gamma, delta, N)` of the dual Hahn family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualHahnParams<T> {
    pub gamma: T,
    pub delta: T,
    pub big_n: u32,
}

impl<T: Scalar> DualHahnParams<T> {
    /// # Errors
    /// Returns a domain error unless `gamma` is finite with `gamma + 1 > 0`.
    pub fn new(gamma: T, delta: T, big_n: u32) -> Result<Self> {
        if !gamma.is_finite() || gamma + T::one() <= T::zero() {
            return domain("dual Hahn requires gamma + 1 > 0");
        }
        Ok(Self { gamma, delta, big_n })
    }

    /// Quadratic lattice `x (x + gamma + delta + 1)`.
    pub fn lattice(&self, x: T) -> T {
        x * (x + self.gamma + self.delta + T::one())
    }
}

/// Dual Hahn polynomial `R_k(lambda(x); gamma, delta, N)`, the terminating
/// `3F2(-k, -x, x + gamma + delta + 1; gamma + 1, -N; 1)`.
///
/// # Errors
/// Returns a domain error when `k > N`.
pub fn dual_hahn<T: Scalar>(k: u32, x: u32, p: &DualHahnParams<T>) -> Result<T> {
    if k > p.big_n {
        return domain(format!("dual Hahn degree {k} exceeds N = {}", p.big_n));
    }
    let xx = T::int(i64::from(x));
    let kk = T::int(i64::from(k));
    let nn = T::int(i64::from(p.big_n));
    let upper = [-kk, -xx, xx + p.gamma + p.delta + T::one()];
    let lower = [p.gamma + T::one(), -nn];
    if k == 0 || x == 0 {
        return Ok(T::one());
    }
    hyp3f2_terminating(upper, lower)
}

/// Standard dual Hahn weight in factorial form,
/// `(2x+g+d+1) (g+x)! (x+g+d)! d! (N!)^2 / (x! g! (d+x)! (N-x)! (x+g+d+N+1)!)`.
///
/// # Errors
/// Returns a domain error for non-integer or negative `gamma`, `delta`, or
/// for `x > N`.
pub fn dual_hahn_weight<T: Scalar>(x: u32, p: &DualHahnParams<T>) -> Result<T> {
    let as_int = |v: T, what: &str| -> Result<u32> {
        let f = v.to_f64();
        if f < 0.0 || f != f.round() || v != T::of(f) {
            return domain(format!("dual Hahn weight needs a nonnegative integer {what}"));
        }
        Ok(f as u32)
    };
    let g = as_int(p.gamma, "gamma")?;
    let d = as_int(p.delta, "delta")?;
    if x > p.big_n {
        return domain("dual Hahn weight evaluated outside 0..=N");
    }
    let f = |m: u32| factorial::<T>(m);
    let num = T::int(i64::from(2 * x + g + d + 1))
        * f(g + x)
        * f(x + g + d)
        * f(d)
        * f(p.big_n)
        * f(p.big_n);
    let den = f(x) * f(g) * f(d + x) * f(p.big_n - x) * f(x + g + d + p.big_n + 1);
    Ok(num / den)
}
