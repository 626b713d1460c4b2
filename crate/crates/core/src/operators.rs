//! Matrix difference operators acting on the variable `x` from the right and
//! on the degree `n` from the left.
//!
//! Operators are stored extensionally: a map from shift `j` to a coefficient
//! function. Operator identities are checked by applying both sides to the
//! polynomial basis on a finite grid.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::duality::{dual_weight_u, eval_matrix_poly, DualFamily, GaugedDual};
use crate::error::{Error, Result};
use crate::mvop::{norm_h, p_at_zero, rec_b, rec_c, MvopFamily};
use crate::weight::{jfrak, Truncation};
use crate::{Mat, Matrix, ModelParams, Params, Scalar};

/// Coefficient function of an operator term.
pub type Coeff<T = f64> = Arc<dyn Fn(i64) -> Mat<T> + Send + Sync>;

fn coeff<T: Scalar>(f: impl Fn(i64) -> Mat<T> + Send + Sync + 'static) -> Coeff<T> {
    Arc::new(f)
}

/// `D = sum_j eta^j F_j(x)`, acting by `(F . D)(x) = sum_j F(x+j) F_j(x)`.
#[derive(Clone)]
pub struct RightDiffOp<T: Scalar = f64> {
    size: usize,
    terms: BTreeMap<i64, Coeff<T>>,
}

impl<T: Scalar> fmt::Debug for RightDiffOp<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RightDiffOp").field("size", &self.size).field("shifts", &self.shifts()).finish()
    }
}

impl<T: Scalar> RightDiffOp<T> {
    pub fn zero(size: usize) -> Self {
        Self { size, terms: BTreeMap::new() }
    }

    pub fn identity(size: usize) -> Self {
        Self::zero(size).with_term(0, move |_| Mat::identity(size))
    }

    /// Multiplication by the variable, `F(x) -> x F(x)`.
    pub fn variable(size: usize) -> Self {
        Self::zero(size).with_term(0, move |x| Mat::identity(size).scale(T::int(x)))
    }

    /// Adds `eta^j f(x)` to the operator.
    pub fn with_term(mut self, j: i64, f: impl Fn(i64) -> Mat<T> + Send + Sync + 'static) -> Self {
        let new = coeff(f);
        let merged = match self.terms.remove(&j) {
            Some(old) => coeff(move |x| old(x) + new(x)),
            None => new,
        };
        self.terms.insert(j, merged);
        self
    }

    pub fn shifts(&self) -> Vec<i64> {
        self.terms.keys().copied().collect()
    }

    /// Coefficient of `eta^j` at `x`, zero if absent.
    pub fn coeff_at(&self, j: i64, x: i64) -> Mat<T> {
        self.terms.get(&j).map_or_else(|| Mat::zeros(self.size), |f| f(x))
    }

    pub fn apply(&self, f: &dyn Fn(i64) -> Mat<T>, x: i64) -> Mat<T> {
        let mut out = Mat::zeros(self.size);
        for (j, c) in &self.terms {
            let cx = c(x);
            if cx.max_abs() != T::zero() {
                out += &(&f(x + j) * &cx);
            }
        }
        out
    }

    /// `self * other`, meaning `F . (self other) = (F . self) . other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.size);
        for (&j, f) in &self.terms {
            for (&k, g) in &other.terms {
                let (f, g) = (f.clone(), g.clone());
                out = out.with_term(j + k, move |x| &f(x + k) * &g(x));
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&j, g) in &other.terms {
            let g = g.clone();
            out = out.with_term(j, move |x| g(x));
        }
        out
    }

    pub fn scale(&self, c: T) -> Self {
        let mut out = Self::zero(self.size);
        for (&j, f) in &self.terms {
            let f = f.clone();
            out = out.with_term(j, move |x| f(x).scale(c));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    /// `[self, other] = self other - other self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }
}

/// `M = sum_j G_j(n) delta^j`, acting by `(M . P)_n = sum_j G_j(n) P_{n+j}`
/// with `P_m = 0` for `m < 0`.
#[derive(Clone)]
pub struct LeftDiffOp<T: Scalar = f64> {
    size: usize,
    terms: BTreeMap<i64, Coeff<T>>,
}

impl<T: Scalar> fmt::Debug for LeftDiffOp<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LeftDiffOp").field("size", &self.size).field("shifts", &self.shifts()).finish()
    }
}

impl<T: Scalar> LeftDiffOp<T> {
    pub fn zero(size: usize) -> Self {
        Self { size, terms: BTreeMap::new() }
    }

    pub fn identity(size: usize) -> Self {
        Self::zero(size).with_term(0, move |_| Mat::identity(size))
    }

    /// Adds `g(n) delta^j` to the operator.
    pub fn with_term(mut self, j: i64, g: impl Fn(i64) -> Mat<T> + Send + Sync + 'static) -> Self {
        let new = coeff(g);
        let merged = match self.terms.remove(&j) {
            Some(old) => coeff(move |n| old(n) + new(n)),
            None => new,
        };
        self.terms.insert(j, merged);
        self
    }

    pub fn shifts(&self) -> Vec<i64> {
        self.terms.keys().copied().collect()
    }

    /// Coefficient of `delta^j` at `n`, zero if absent.
    pub fn coeff_at(&self, j: i64, n: i64) -> Mat<T> {
        self.terms.get(&j).map_or_else(|| Mat::zeros(self.size), |g| g(n))
    }

    /// `(M . P)_n(x)` for a sequence given as `family(m, x)`.
    pub fn apply(&self, family: &dyn Fn(u32, i64) -> Mat<T>, n: u32, x: i64) -> Mat<T> {
        let mut out = Mat::zeros(self.size);
        for (j, g) in &self.terms {
            let m = i64::from(n) + j;
            if m >= 0 {
                out += &(&g(i64::from(n)) * &family(m as u32, x));
            }
        }
        out
    }

    /// `self * other`, meaning `(self other) . P = self . (other . P)`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.size);
        let size = self.size;
        for (&j, f) in &self.terms {
            for (&k, g) in &other.terms {
                let (f, g) = (f.clone(), g.clone());
                out = out.with_term(j + k, move |n| {
                    if n + j < 0 {
                        Mat::zeros(size)
                    } else {
                        &f(n) * &g(n + j)
                    }
                });
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&j, g) in &other.terms {
            let g = g.clone();
            out = out.with_term(j, move |n| g(n));
        }
        out
    }

    pub fn scale(&self, c: T) -> Self {
        let mut out = Self::zero(self.size);
        for (&j, g) in &self.terms {
            let g = g.clone();
            out = out.with_term(j, move |n| g(n).scale(c));
        }
        out
    }
}

/// Adjoint `M^dagger = sum_j H_n G_j(n-j)^* H_{n-j}^{-1} delta^{-j}` for the
/// square norms `norms(n)`.
pub fn adjoint_left<T: Scalar>(m: &LeftDiffOp<T>, norms: Coeff<T>) -> LeftDiffOp<T> {
    let mut out = LeftDiffOp::zero(m.size);
    for (&j, g) in &m.terms {
        let (g, h) = (g.clone(), norms.clone());
        out = out.with_term(-j, move |n| &(&h(n) * &g(n - j).t()) * &h(n - j).inverse());
    }
    out
}


/// `D = eta (I+A)`.
pub fn ladder_d<T: Scalar>(p: &ModelParams<T>) -> RightDiffOp<T> {
    let s = p.ipa_pow(1);
    RightDiffOp::zero(p.size()).with_term(1, move |_| s.clone())
}

/// `D^dagger = eta^{-1} (x/a)(I+A)^{-1}`.
pub fn ladder_d_dagger<T: Scalar>(p: &ModelParams<T>) -> RightDiffOp<T> {
    let s = p.ipa_pow(-1).scale(T::one() / p.a());
    RightDiffOp::zero(p.size()).with_term(-1, move |x| s.scale(T::int(x)))
}

/// `Jfrak(x) = J + (x+lambda)(I+A)^{-1}` as an order-zero operator.
pub fn jfrak_op<T: Scalar>(p: &ModelParams<T>) -> RightDiffOp<T> {
    let q = p.clone();
    RightDiffOp::zero(p.size()).with_term(0, move |x| jfrak(&q, x))
}

/// The second-order operator with eigenvalue `Gamma_n`.
pub fn dfrak_op(p: &Params) -> RightDiffOp {
    let fam = DualFamily::new(p, 1).expect("family 1 always exists");
    family_op(&fam)
}

/// `D_i = eta F_1 + F_0 + eta^{-1} F_{-1}` for a dual family.
pub fn family_op(fam: &DualFamily) -> RightDiffOp {
    let size = fam.params().size();
    let (f1, f0, fm) = (fam.clone(), fam.clone(), fam.clone());
    RightDiffOp::zero(size)
        .with_term(1, move |x| f1.operator_coeffs(x).0)
        .with_term(0, move |x| f0.operator_coeffs(x).1)
        .with_term(-1, move |x| fm.operator_coeffs(x).2)
}

/// `M = (I+A) + (1/a) H_n (I+A^*)^{-1} H_{n-1}^{-1} delta^{-1}`, paired with `D`.
pub fn ladder_m<T: Scalar>(p: &ModelParams<T>) -> LeftDiffOp<T> {
    let s = p.ipa_pow(1);
    let q = p.clone();
    let inv_star = p.ipa_star_pow(-1).scale(T::one() / p.a());
    LeftDiffOp::zero(p.size()).with_term(0, move |_| s.clone()).with_term(-1, move |n| {
        if n < 1 {
            return Mat::zeros(q.size());
        }
        &(&norm_h(&q, n as u32) * &inv_star) * &norm_h(&q, n as u32 - 1).inverse()
    })
}

/// `M^dagger = (1/a)(I+A)^{-1} delta + H_n (I+A^*) H_n^{-1}`, paired with `D^dagger`.
pub fn ladder_m_dagger<T: Scalar>(p: &ModelParams<T>) -> LeftDiffOp<T> {
    let up = p.ipa_pow(-1).scale(T::one() / p.a());
    let star = p.ipa_star_pow(1);
    let q = p.clone();
    LeftDiffOp::zero(p.size()).with_term(1, move |_| up.clone()).with_term(0, move |n| {
        let h = norm_h(&q, n.max(0) as u32);
        &(&h * &star) * &h.inverse()
    })
}

/// `L = delta + B_n + C_n delta^{-1}`, paired with multiplication by `x`.
pub fn recurrence_op(p: &Params) -> LeftDiffOp {
    let size = p.size();
    let (qb, qc) = (p.clone(), p.clone());
    LeftDiffOp::zero(size)
        .with_term(1, move |_| Matrix::identity(size))
        .with_term(0, move |n| rec_b(&qb, n.max(0) as u32))
        .with_term(-1, move |n| rec_c(&qc, n.max(0) as u32))
}

/// Left partner of `Jfrak`:
/// `(I+A)^{-1} delta + (J + (n+lambda)(I+A)^{-1} + a H_n (I+A^*) H_n^{-1})
///  + H_n (I+A^*)^{-1} H_{n-1}^{-1} delta^{-1}`.
pub fn jfrak_left<T: Scalar>(p: &ModelParams<T>) -> LeftDiffOp<T> {
    let inv = p.ipa_pow(-1);
    let up = inv.clone();
    let q0 = p.clone();
    let qm = p.clone();
    let star = p.ipa_star_pow(1);
    let inv_star = p.ipa_star_pow(-1);
    LeftDiffOp::zero(p.size())
        .with_term(1, move |_| up.clone())
        .with_term(0, move |n| {
            let h = norm_h(&q0, n.max(0) as u32);
            let lam = T::int(i64::from(q0.lambda()));
            &(&q0.j_mat() + &inv.scale(T::int(n) + lam)) + &(&(&h * &star) * &h.inverse()).scale(q0.a())
        })
        .with_term(-1, move |n| {
            if n < 1 {
                return Mat::zeros(qm.size());
            }
            &(&norm_h(&qm, n as u32) * &inv_star) * &norm_h(&qm, n as u32 - 1).inverse()
        })
}

/// Max over `n <= n_max`, `x <= x_max` of `|(M . P)_n(x) - (P_n . D)(x)|`
/// relative to `max(1, |P_n(x)|)`.
pub fn psi_residual(m: &LeftDiffOp, d: &RightDiffOp, fam: &MvopFamily, n_max: u32, x_max: i64) -> f64 {
    let pf = |n: u32, x: i64| fam.p_eval(n, x);
    let mut worst = 0.0_f64;
    for n in 0..=n_max {
        for x in 0..=x_max {
            let lhs = m.apply(&pf, n, x);
            let rhs = d.apply(&|y| pf(n, y), x);
            let scale = pf(n, x).max_abs().max(1.0);
            worst = worst.max(lhs.dist(&rhs) / scale);
        }
    }
    worst
}

/// Pointwise `tau(M)` at `n`: the terms `P_n(0)^{-1} G_j(n) P_{n+j}(0)` with
/// `n + j >= 0`.
pub fn tau<T: Scalar>(p: &ModelParams<T>, m: &LeftDiffOp<T>, n: u32) -> Vec<(i64, Mat<T>)> {
    let p0_inv = p_at_zero(p, n).inverse();
    m.terms
        .iter()
        .filter(|(j, _)| i64::from(n) + **j >= 0)
        .map(|(&j, g)| (j, &(&p0_inv * &g(i64::from(n))) * &p_at_zero(p, (i64::from(n) + j) as u32)))
        .collect()
}

/// `sigma(D)` coefficient `Upsilon(x+j) F_j(x) Upsilon(x)^{-1}` for a family.
pub fn sigma_coeff(fam: &DualFamily, d: &RightDiffOp, j: i64, x: u32) -> Matrix {
    let target = i64::from(x) + j;
    let c = d.coeff_at(j, i64::from(x));
    if target < 0 || c.max_abs() == 0.0 {
        return Matrix::zeros(fam.params().size());
    }
    &(&fam.upsilon(target as u32) * &c) * &fam.upsilon(x).inverse()
}

/// Residual of `P_n(0) (Q_x . sigma(D))(rho(n)) Upsilon(x) = (P_n . D)(x)`,
/// evaluated in `T` and relative to `max(1, |P_n(x)|)`. `d` must be built
/// from [`GaugedDual::wide_params`]; `x` plus the largest shift of `d` must
/// not exceed the gauged range.
pub fn sigma_residual<T: Scalar>(g: &GaugedDual<T>, d: &RightDiffOp<T>, x: u32, n: u32) -> f64 {
    let lhs = &g.zero_value(n) * &g.sigma_apply(d, x, n);
    let rhs = d.apply(&|y| g.primal(n, y), i64::from(x));
    (lhs.dist(&rhs) / g.primal(n, i64::from(x)).max_abs().max(T::one())).to_f64()
}

/// Commuting square `(tau(M) . Q_x)(rho(n)) = (Q_x . sigma(D))(rho(n))` for a
/// pair `M`, `D = psi(M)` built from [`GaugedDual::wide_params`], with both
/// sides multiplied on the right by `Upsilon(x)` and relative to
/// `max(1, |V_x(n)|)`.
pub fn square_residual<T: Scalar>(g: &GaugedDual<T>, m: &LeftDiffOp<T>, d: &RightDiffOp<T>, x: u32, n: u32) -> f64 {
    let left = g.tau_apply(m, x, n);
    let right = g.sigma_apply(d, x, n);
    (left.dist(&right) / g.gauged(x, n).max_abs().max(T::one())).to_f64()
}

/// Worst residual of `<tau(M) . Q_x, Q_y>_d = <Q_x, tau(M^dagger) . Q_y>_d`
/// over `x, y <= x_max`, each pair relative to the larger of the two sides
/// and `sqrt(|<Q_x,Q_x>_d| |<Q_y,Q_y>_d|)`. Both dual sums run over the same
/// truncated range in `n`, chosen as in [`DualFamily::dual_gram`].
///
/// # Errors
/// Returns [`Error::NoConverge`] if `max_terms` is reached first.
pub fn adjoint_transport_residual<T: Scalar>(
    fam: &DualFamily<T>,
    m: &LeftDiffOp<T>,
    m_dagger: &LeftDiffOp<T>,
    x_max: u32,
    t: Truncation,
) -> Result<f64> {
    let p = fam.params();
    let size = p.size();
    let qs = fam.q_matrix_polys(x_max);
    let k = qs.len();
    let eps = T::of(t.eps);
    let mut vals: Vec<Vec<Mat<T>>> = Vec::new();
    let mut zeros: Vec<Mat<T>> = Vec::new();
    let fill = |upto: usize, vals: &mut Vec<Vec<Mat<T>>>, zeros: &mut Vec<Mat<T>>| {
        while vals.len() <= upto {
            let r = fam.rho(vals.len() as u32);
            zeros.push(p_at_zero(p, vals.len() as u32));
            vals.push(qs.iter().map(|q| eval_matrix_poly(q, &r).expect("left-variable polynomial")).collect());
        }
    };
    let apply = |op: &LeftDiffOp<T>, n: u32, vals: &[Vec<Mat<T>>], zeros: &[Mat<T>]| -> Vec<Mat<T>> {
        let p0_inv = zeros[n as usize].inverse();
        let mut out = vec![Mat::zeros(size); k];
        for j in op.shifts() {
            let s = i64::from(n) + j;
            if s < 0 {
                continue;
            }
            let tau = &(&p0_inv * &op.coeff_at(j, i64::from(n))) * &zeros[s as usize];
            for (o, v) in out.iter_mut().zip(&vals[s as usize]) {
                *o += &(&tau * v);
            }
        }
        out
    };
    let mut left = vec![vec![Mat::zeros(size); k]; k];
    let mut right = vec![vec![Mat::zeros(size); k]; k];
    let mut diag = vec![Mat::zeros(size); k];
    let mut small = 0;
    for n in 0..t.max_terms as u32 {
        fill(n as usize + 1, &mut vals, &mut zeros);
        let u = dual_weight_u(p, n);
        let tm = apply(m, n, &vals, &zeros);
        let tmd = apply(m_dagger, n, &vals, &zeros);
        let q = &vals[n as usize];
        let mut settled = true;
        for x in 0..k {
            let qu = &q[x].t() * &u;
            let term = &qu * &q[x];
            if term.max_abs() >= eps * (&diag[x] + &term).max_abs() {
                settled = false;
            }
            diag[x] += &term;
            let tu = &tm[x].t() * &u;
            for y in 0..k {
                left[x][y] += &(&tu * &q[y]);
                right[x][y] += &(&qu * &tmd[y]);
            }
        }
        small = if settled { small + 1 } else { 0 };
        if small == 3 {
            let mut worst = T::zero();
            for x in 0..k {
                for y in 0..k {
                    let scale = left[x][y]
                        .max_abs()
                        .max(right[x][y].max_abs())
                        .max((diag[x].max_abs() * diag[y].max_abs()).sqrt());
                    worst = worst.max(left[x][y].dist(&right[x][y]) / scale);
                }
            }
            return Ok(worst.to_f64());
        }
    }
    Err(Error::NoConverge { max_terms: t.max_terms })
}

/// Named residuals of the Lie-algebra and Casimir checks.
#[derive(Debug, Clone, PartialEq)]
pub struct LieReport {
    pub rows: Vec<(String, f64)>,
}

impl LieReport {
    pub fn worst(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, (_, r)| m.max(*r))
    }
}

/// Applies `lhs - rhs` to `P_n`, `n <= n_max`, on `0..=x_max`; returns the
/// largest entry relative to `max(1, |P_n(x)|)`.
pub fn operator_gap(lhs: &RightDiffOp, rhs: &RightDiffOp, fam: &MvopFamily, n_max: u32, x_max: i64) -> f64 {
    let diff = lhs.sub(rhs);
    let mut worst = 0.0_f64;
    for n in 0..=n_max {
        let f = |y: i64| fam.p_eval(n, y);
        for x in 0..=x_max {
            let scale = f(x).max_abs().max(1.0);
            worst = worst.max(diff.apply(&f, x).max_abs() / scale);
        }
    }
    worst
}

/// Brackets `[Jfrak, D] = D`, `[Jfrak, D^dagger] = -D^dagger`, `[D, x] = -D`,
/// `[D^dagger, x] = D^dagger`, `[D, D^dagger] = -(1/a)`, the Casimir identity
/// `a D D^dagger - Jfrak = x - Jfrak` and its commutation with `D`,
/// `D^dagger` and `Jfrak`, each tested on `P_n`, `n <= 8`, `x <= 10`.
pub fn lie_checks(p: &Params) -> LieReport {
    let fam = MvopFamily::new(p.clone(), 10);
    let size = p.size();
    let d = ladder_d(p);
    let dd = ladder_d_dagger(p);
    let jf = jfrak_op(p);
    let x = RightDiffOp::variable(size);
    let zero = RightDiffOp::zero(size);
    let casimir = d.compose(&dd).scale(p.a()).sub(&jf);
    let gap = |l: &RightDiffOp, r: &RightDiffOp| operator_gap(l, r, &fam, 8, 10);
    let rows = vec![
        ("[J,D] = D", gap(&jf.commutator(&d), &d)),
        ("[J,D+] = -D+", gap(&jf.commutator(&dd), &dd.scale(-1.0))),
        ("[D,x] = -D", gap(&d.commutator(&x), &d.scale(-1.0))),
        ("[D+,x] = D+", gap(&dd.commutator(&x), &dd)),
        ("[D,D+] = -1/a", gap(&d.commutator(&dd), &RightDiffOp::identity(size).scale(-1.0 / p.a()))),
        ("casimir = x - J", gap(&casimir, &x.sub(&jf))),
        ("[casimir,D] = 0", gap(&casimir.commutator(&d), &zero)),
        ("[casimir,D+] = 0", gap(&casimir.commutator(&dd), &zero)),
        ("[casimir,J] = 0", gap(&casimir.commutator(&jf), &zero)),
    ];
    LieReport { rows: rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
}
