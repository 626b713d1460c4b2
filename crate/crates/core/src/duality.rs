//! The three dual families of the matrix Charlier polynomials and the two
//! dual-dual families.
//!
//! Family `i` is attached to a second-order operator `D_i` in `x` with
//! `P_n . D_i = Lambda_i(n) P_n`:
//!
//! * `i = 1`: the self-adjoint operator with eigenvalue `Gamma_n`;
//! * `i = 2`: `Delta S^(lambda)` with eigenvalue `n G_n^(lambda)`;
//! * `i = 3`: `S^(lambda-1) Delta` with eigenvalue `(n+1) G_{n+1}^(lambda-1)`,
//!   which needs `lambda >= 1`.
//!
//! The dual polynomial `Q_x` is monic of degree `x` in a matrix variable
//! acting from the left, and `P_n(x) = P_n(0) Q_x(rho(n)) Upsilon(x)`.

use crate::error::{domain, Error, Result};
use crate::mvop::{self, norm_d, norm_h, p_at_zero, p_eval};
use crate::poly::{MatrixPolynomial, VarSide};
use crate::weight::{jfrak, pearson, truncated_sum, weight, PearsonData, Truncation};
use crate::{block_vandermonde_det, Mat, Matrix, ModelParams, Params, Scalar, Wide};

/// One of the three dual families for a fixed parameter set.
#[derive(Debug, Clone)]
pub struct DualFamily<T: Scalar = f64> {
    index: u8,
    params: ModelParams<T>,
    pearson: PearsonData<T>,
}

impl<T: Scalar> DualFamily<T> {
    /// # Errors
    /// Returns a usage error for an index outside `1..=3` and a domain error
    /// for family 3 with `lambda = 0`.
    pub fn new(params: &ModelParams<T>, index: u8) -> Result<Self> {
        if !(1..=3).contains(&index) {
            return Err(Error::Usage(format!("dual family index must be 1, 2 or 3, got {index}")));
        }
        if index == 3 && params.lambda() == 0 {
            return domain("dual family 3 needs lambda >= 1");
        }
        let base = if index == 3 { params.with_lambda(params.lambda() - 1) } else { params.clone() };
        Ok(Self { index, params: params.clone(), pearson: pearson(&base) })
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    /// Coefficients `(F_1(x), F_0(x), F_{-1}(x))` of the operator
    /// `D_i = eta F_1 + F_0 + eta^{-1} F_{-1}`.
    pub fn operator_coeffs(&self, x: i64) -> (Mat<T>, Mat<T>, Mat<T>) {
        let p = &self.params;
        let pd = &self.pearson;
        match self.index {
            1 => {
                let inv = p.ipa_pow(-1);
                let lam = T::int(i64::from(p.lambda()));
                (
                    p.ipa_pow(1).scale(p.a()),
                    -(&p.j_mat() + &inv.scale(T::int(x) + lam)),
                    inv.scale(T::int(x)),
                )
            }
            2 => {
                let phi = pd.phi(x).t();
                let psi = pd.psi(x).t();
                (-phi.clone(), &phi.scale(T::of(2.0)) - &psi, &psi - &phi)
            }
            _ => {
                let phi1 = pd.phi(x + 1).t();
                let psi1 = pd.psi(x + 1).t();
                let phi = pd.phi(x).t();
                let psi = pd.psi(x).t();
                (-phi1.clone(), &(&phi1 - &psi1) + &phi, &psi - &phi)
            }
        }
    }

    /// Eigenvalue `Lambda_i(n)` of `D_i` on `P_n`.
    pub fn eigenvalue(&self, n: u32) -> Mat<T> {
        let p = &self.params;
        match self.index {
            1 => mvop::gamma(p, n),
            2 => mvop::shift_g(p, n).scale(T::int(i64::from(n))),
            _ => mvop::shift_g(&p.with_lambda(p.lambda() - 1), n + 1).scale(T::int(i64::from(n) + 1)),
        }
    }

    /// `rho_i(n) = P_n(0)^{-1} Lambda_i(n) P_n(0)`.
    pub fn rho_from_eigenvalue(&self, n: u32) -> Mat<T> {
        let p0 = p_at_zero(&self.params, n);
        &(&p0.inverse() * &self.eigenvalue(n)) * &p0
    }

    /// `rho_i(n)` in conjugated closed form `C^{-1}(c_i(n) (s_i - J + X)) C`
    /// with `C = (I+A)^{-lambda} L_0`, `X = n A_m (I + A_m)^{-1}`, `m = n + lambda`.
    ///
    /// `X` comes from `(I+A_m)^{-n} J (I+A_m)^n = J - n A_m (I+A_m)^{-1}`.
    pub fn rho(&self, n: u32) -> Mat<T> {
        let p = &self.params;
        let lam = T::int(i64::from(p.lambda()));
        let nf = T::int(i64::from(n));
        let big = T::int(p.size() as i64);
        let half = T::of(0.5);
        let c = &p.ipa_pow(-i64::from(p.lambda())) * &p.l0();
        let x = if n == 0 {
            Mat::zeros(p.size())
        } else {
            let sa = p.script_a(nf + lam).expect("N + m - j > 0");
            (&sa * &sa.shift(T::one()).inverse()).scale(nf)
        };
        let (scale, shift) = match self.index {
            1 => (T::one(), p.a() - nf - lam),
            2 => (nf * half, big + lam + T::one()),
            _ => ((nf + T::one()) * half, big + lam),
        };
        let inner = (&(-p.j_mat()).shift(shift) + &x).scale(scale);
        &(&c.inverse() * &inner) * &c
    }

    /// `Upsilon(x) = F_1(0)^{-1} F_1(1)^{-1} ... F_1(x-1)^{-1}`.
    pub fn upsilon(&self, x: u32) -> Mat<T> {
        let mut u = Mat::identity(self.params.size());
        for s in 0..i64::from(x) {
            u = &u * &self.operator_coeffs(s).0.inverse();
        }
        u
    }

    /// Closed form of `Upsilon(x)`.
    pub fn upsilon_closed(&self, x: u32) -> Mat<T> {
        let p = &self.params;
        let xi = i64::from(x);
        if self.index == 1 {
            return p.ipa_pow(-xi).scale(p.a().powi(-(x as i32)));
        }
        let lam = i64::from(p.lambda());
        let shift = if self.index == 2 { lam } else { lam - 1 };
        let bracket = (&p.j_mat() * &p.ipa_star_pow(1)).shift(T::int(shift)).inverse().powi(x);
        let c = (-T::of(2.0) / p.a()).powi(x as i32);
        (&(&p.ipa_pow(lam) * &bracket) * &p.ipa_pow(-xi - lam)).scale(c)
    }

    /// Recurrence pair `(Y_x, Z_x)` with `Z_0 = 0`, so that
    /// `N Q_x(N) = Q_{x+1}(N) + Q_x(N) Y_x + Q_{x-1}(N) Z_x`.
    pub fn recurrence_coeffs(&self, x: u32) -> (Mat<T>, Mat<T>) {
        let xi = i64::from(x);
        let (_, f0, fm) = self.operator_coeffs(xi);
        let u = self.upsilon(x);
        let u_inv = u.inverse();
        let y = &(&u * &f0) * &u_inv;
        let z = if x == 0 {
            Mat::zeros(self.params.size())
        } else {
            &(&self.upsilon(x - 1) * &fm) * &u_inv
        };
        (y, z)
    }

    /// Monic `Q_x` as a left-variable polynomial, built by the recurrence.
    pub fn q_matrix_poly(&self, x: u32) -> MatrixPolynomial<T> {
        self.q_matrix_polys(x).pop().expect("at least Q_0")
    }

    /// `Q_0, ..., Q_{x_max}` built together by the recurrence.
    pub fn q_matrix_polys(&self, x_max: u32) -> Vec<MatrixPolynomial<T>> {
        let size = self.params.size();
        let mut out: Vec<Vec<Mat<T>>> = vec![vec![Mat::identity(size)]];
        for x in 0..x_max as usize {
            let (y, z) = self.recurrence_coeffs(x as u32);
            let cur = &out[x];
            let mut next = vec![Mat::zeros(size); x + 2];
            for (k, c) in cur.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= &(c * &y);
            }
            if x > 0 {
                for (k, c) in out[x - 1].iter().enumerate() {
                    next[k] -= &(c * &z);
                }
            }
            out.push(next);
        }
        out.into_iter()
            .map(|c| MatrixPolynomial::new(c, VarSide::LeftMatrix).expect("nonempty coefficients"))
            .collect()
    }

    /// Raising coefficient `Upsilon(1)(I+A)` of the dual shift.
    pub fn raising_coeff(&self) -> Mat<T> {
        &self.upsilon(1) * &self.params.ipa_pow(1)
    }

    /// Closed-form dual norm `(Upsilon(x) W(x) Upsilon(x)^*)^{-1}`.
    pub fn dual_norm(&self, x: u32) -> Mat<T> {
        let u = self.upsilon(x);
        (&(&u * &weight(&self.params, u64::from(x))) * &u.t()).inverse()
    }

    /// Truncated `sum_n Q_x(rho(n))^* U(n) Q_y(rho(n))`.
    ///
    /// # Errors
    /// Returns [`Error::NoConverge`] if the sum does not settle.
    pub fn dual_inner_product(&self, x: u32, y: u32, t: Truncation) -> Result<Mat<T>> {
        let qs = self.q_matrix_polys(x.max(y));
        let (qx, qy) = (&qs[x as usize], &qs[y as usize]);
        let p = &self.params;
        truncated_sum(t, |n| {
            let n = n as u32;
            let r = self.rho(n);
            let a = eval_matrix_poly(qx, &r).expect("left-variable polynomial");
            let b = eval_matrix_poly(qy, &r).expect("left-variable polynomial");
            &(&a.t() * &dual_weight_u(p, n)) * &b
        })
        .map(|s| s.value)
    }

    /// All dual inner products `<Q_x, Q_y>` for `x, y <= x_max`, indexed
    /// `[x][y]`, from one pass over `n`. The sum stops once every diagonal
    /// entry meets the truncation rule, which bounds the off-diagonal terms
    /// by Cauchy-Schwarz.
    ///
    /// # Errors
    /// Returns [`Error::NoConverge`] if `max_terms` is reached first.
    pub fn dual_gram(&self, x_max: u32, t: Truncation) -> Result<Vec<Vec<Mat<T>>>> {
        let size = self.params.size();
        let qs = self.q_matrix_polys(x_max);
        let k = qs.len();
        let eps = T::of(t.eps);
        let mut gram = vec![vec![Mat::zeros(size); k]; k];
        let mut small = 0;
        for n in 0..t.max_terms as u32 {
            let r = self.rho(n);
            let u = dual_weight_u(&self.params, n);
            let vals: Vec<_> = qs.iter().map(|q| eval_matrix_poly(q, &r).expect("left-variable polynomial")).collect();
            let mut settled = true;
            for x in 0..k {
                let left = &vals[x].t() * &u;
                for y in 0..k {
                    let term = &left * &vals[y];
                    if x == y && term.max_abs() >= eps * (&gram[x][y] + &term).max_abs() {
                        settled = false;
                    }
                    gram[x][y] += &term;
                }
            }
            small = if settled { small + 1 } else { 0 };
            if small == 3 {
                return Ok(gram);
            }
        }
        Err(Error::NoConverge { max_terms: t.max_terms })
    }
}

impl DualFamily {
    /// `Q_x(rho(n)) = P_n(0)^{-1} P_n(x) Upsilon(x)^{-1}`.
    pub fn q_eval(&self, x: u32, n: u32) -> Matrix {
        let p = &self.params;
        &(&p_at_zero(p, n).inverse() * &p_eval(p, n, i64::from(x))) * &self.upsilon(x).inverse()
    }


    /// `|det|` of the block Vandermonde matrix on the nodes
    /// `rho(nu), ..., rho(nu + x)`.
    pub fn vandermonde_condition(&self, x: u32, nu: u32) -> f64 {
        let blocks: Vec<Matrix> = (nu..=nu + x).map(|n| self.rho(n)).collect();
        block_vandermonde_det(&blocks).abs()
    }

    /// Slope `T` and intercept `T_0` of the conjugated diagonal part of
    /// `rho(n)`, i.e. `C rho(n) C^{-1} = n T + T_0 + (strictly upper)`.
    pub fn rho_slope(&self) -> (Matrix, Matrix) {
        let p = &self.params;
        let big = p.size() as f64;
        let lam = f64::from(p.lambda());
        match self.index {
            1 => (Matrix::identity(p.size()).scale(-1.0), (-p.j_mat()).shift(p.a() - lam)),
            2 => ((-p.j_mat()).shift(big + lam + 1.0).scale(0.5), Matrix::zeros(p.size())),
            _ => {
                let d = (-p.j_mat()).shift(big + lam).scale(0.5);
                (d.clone(), d)
            }
        }
    }

    /// Block Vandermonde determinant predicted from the slope:
    /// `det(T)^{x(x+1)/2} prod_{s<t} (n_t - n_s)^N` on consecutive nodes.
    pub fn vandermonde_formula(&self, x: u32) -> f64 {
        let (slope, _) = self.rho_slope();
        let big = self.params.size() as i32;
        let mut prod = 1.0;
        for t in 0..=x {
            for s in 0..t {
                prod *= f64::from(t - s).powi(big);
            }
        }
        slope.det().powi((x * (x + 1) / 2) as i32) * prod
    }
}

/// Gauged dual values `V_x(n) = Q_x(rho(n)) Upsilon(x)`, with `Q_x` built by
/// the recurrence and evaluated at `rho(n)` through [`eval_matrix_poly`], all
/// in the scalar `T`.
///
/// The monomial coefficients of `Q_x` and the factor `Upsilon(x)` can differ
/// from `V_x(n)` by more than thirty orders of magnitude (for family 2,
/// `rho(0) = 0` and `Q_x(0) = Upsilon(x)^{-1}`), so `f64` cannot resolve
/// these identities for small `a` and large `x`. [`Wide`] resolves them on the
/// desk-scale grid; the `f64` polynomials are then compared against the
/// rounded result.
#[derive(Debug, Clone)]
pub struct GaugedDual<T: Scalar = Wide> {
    params: Params,
    family: DualFamily<T>,
    qs: Vec<MatrixPolynomial<T>>,
    upsilon: Vec<Mat<T>>,
    upsilon_inv: Vec<Mat<T>>,
    cache: Vec<DegreeCache<T>>,
}

/// Per-degree values reused across residuals.
#[derive(Debug, Clone)]
struct DegreeCache<T: Scalar> {
    p0: Mat<T>,
    p0_inv: Mat<T>,
    primal: Vec<Mat<T>>,
    gauged: Vec<Mat<T>>,
}

impl<T: Scalar> GaugedDual<T> {
    /// Builds `Q_0, ..., Q_{x_max}` for family `index` in the scalar `T`.
    ///
    /// # Errors
    /// Same as [`DualFamily::new`].
    pub fn new(p: &Params, index: u8, x_max: u32) -> Result<Self> {
        let family = DualFamily::new(&p.cast::<T>(), index)?;
        let qs = family.q_matrix_polys(x_max);
        let mut upsilon = vec![Mat::identity(p.size())];
        for s in 0..x_max {
            let next = &upsilon[s as usize] * &family.operator_coeffs(i64::from(s)).0.inverse();
            upsilon.push(next);
        }
        let upsilon_inv = upsilon.iter().map(Mat::inverse).collect();
        Ok(Self { params: p.clone(), family, qs, upsilon, upsilon_inv, cache: Vec::new() })
    }

    /// Tabulates `P_n(0)`, `P_n(x)` and `V_x(n)` for `n <= n_max` and every
    /// `x`, so repeated residuals reuse one evaluation per cell.
    pub fn with_degrees(mut self, n_max: u32) -> Self {
        let p = self.family.params();
        self.cache = (0..=n_max)
            .map(|n| {
                let r = self.family.rho(n);
                let p0 = p_at_zero(p, n);
                DegreeCache {
                    p0_inv: p0.inverse(),
                    p0,
                    primal: (0..self.qs.len() as i64).map(|x| p_eval(p, n, x)).collect(),
                    gauged: self
                        .qs
                        .iter()
                        .zip(&self.upsilon)
                        .map(|(q, u)| &eval_matrix_poly(q, &r).expect("left-variable polynomial") * u)
                        .collect(),
                }
            })
            .collect();
        self
    }

    pub fn x_max(&self) -> u32 {
        (self.qs.len() - 1) as u32
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// The parameters at the working precision.
    pub fn wide_params(&self) -> &ModelParams<T> {
        self.family.params()
    }

    pub fn family(&self) -> &DualFamily<T> {
        &self.family
    }

    /// `P_n(0)` at the working precision.
    pub fn zero_value(&self, n: u32) -> Mat<T> {
        match self.cache.get(n as usize) {
            Some(c) => c.p0.clone(),
            None => p_at_zero(self.wide_params(), n),
        }
    }

    fn zero_value_inv(&self, n: u32) -> Mat<T> {
        match self.cache.get(n as usize) {
            Some(c) => c.p0_inv.clone(),
            None => p_at_zero(self.wide_params(), n).inverse(),
        }
    }

    /// `P_n(x)` from the explicit entries at the working precision.
    pub fn primal(&self, n: u32, x: i64) -> Mat<T> {
        match self.cache.get(n as usize).and_then(|c| usize::try_from(x).ok().and_then(|i| c.primal.get(i))) {
            Some(v) => v.clone(),
            None => p_eval(self.wide_params(), n, x),
        }
    }

    /// `V_x(n)` at the working precision; `x <= x_max`.
    pub fn gauged(&self, x: u32, n: u32) -> Mat<T> {
        if let Some(c) = self.cache.get(n as usize) {
            return c.gauged[x as usize].clone();
        }
        let q = eval_matrix_poly(&self.qs[x as usize], &self.family.rho(n)).expect("left-variable polynomial");
        &q * &self.upsilon[x as usize]
    }

    /// `P_n(0) Q_x(rho(n)) Upsilon(x)` rounded to `f64`.
    pub fn dual_route(&self, x: u32, n: u32) -> Matrix {
        (&self.zero_value(n) * &self.gauged(x, n)).cast()
    }

    /// `Upsilon(x)^{-1} M Upsilon(y)`: moves a coefficient acting between
    /// `Q_x` and `Q_y` to one acting between `V_x` and `V_y`.
    pub fn transport(&self, x: u32, m: &Mat<T>, y: u32) -> Mat<T> {
        &(&self.upsilon_inv[x as usize] * m) * &self.upsilon[y as usize]
    }

    /// `(tau(M) . Q_x)(rho(n)) Upsilon(x) = sum_j tau_j(n) V_x(n+j)` with
    /// `tau_j(n) = P_n(0)^{-1} G_j(n) P_{n+j}(0)`.
    pub fn tau_apply(&self, m: &crate::operators::LeftDiffOp<T>, x: u32, n: u32) -> Mat<T> {
        let mut acc = Mat::zeros(self.params.size());
        let p0_inv = self.zero_value_inv(n);
        for j in m.shifts() {
            let t = i64::from(n) + j;
            if t >= 0 {
                let tau = &(&p0_inv * &m.coeff_at(j, i64::from(n))) * &self.zero_value(t as u32);
                acc += &(&tau * &self.gauged(x, t as u32));
            }
        }
        acc
    }

    /// `(Q_x . sigma(D))(rho(n)) Upsilon(x) = sum_j V_{x+j}(n) F_j(x)`: in the
    /// gauged values the `sigma(D)` coefficients reduce to those of `D`.
    pub fn sigma_apply(&self, d: &crate::operators::RightDiffOp<T>, x: u32, n: u32) -> Mat<T> {
        let mut acc = Mat::zeros(self.params.size());
        for j in d.shifts() {
            let t = i64::from(x) + j;
            if t >= 0 {
                acc += &(&self.gauged(t as u32, n) * &d.coeff_at(j, i64::from(x)));
            }
        }
        acc
    }

    /// Max-abs residual of `P_n(x) = P_n(0) Q_x(rho(n)) Upsilon(x)` with the
    /// left side from the `f64` explicit entries, relative to `max(1, |P_n(x)|)`.
    pub fn duality_residual(&self, x: u32, n: u32) -> f64 {
        let lhs = p_eval(&self.params, n, i64::from(x));
        lhs.dist(&self.dual_route(x, n)) / lhs.max_abs().max(1.0)
    }

    /// Distance between the recurrence-built `Q_x(rho(n))` and the
    /// duality-built `P_n(0)^{-1} P_n(x) Upsilon(x)^{-1}`, relative to
    /// `max(1, |.|)` of the latter.
    pub fn q_agreement(&self, x: u32, n: u32) -> f64 {
        let rec = &self.gauged(x, n) * &self.upsilon_inv[x as usize];
        let dual = &(&self.zero_value_inv(n) * &self.primal(n, i64::from(x))) * &self.upsilon_inv[x as usize];
        (rec.dist(&dual) / dual.max_abs().max(T::one())).to_f64()
    }

    /// Max of the residuals of the two dual shift relations
    /// `tau(M) . Q_x = Q_{x+1} Upsilon(1)(I+A)` and
    /// `tau(M^dagger) . Q_x = Q_{x-1} (x/a)(I+A)^{-1} Upsilon(1)^{-1}`
    /// at `rho(n)`, both multiplied on the right by `Upsilon(x)` and relative
    /// to `max(1, |V_x(n)|)`. Needs `x < x_max`.
    pub fn dual_shift_residual(&self, x: u32, n: u32) -> f64 {
        use crate::operators::{ladder_m, ladder_m_dagger};
        let p = self.wide_params();
        let raise = self.family.raising_coeff();
        let up = &self.gauged(x + 1, n) * &self.transport(x + 1, &raise, x);
        let r1 = self.tau_apply(&ladder_m(p), x, n).dist(&up);
        let down = if x == 0 {
            Mat::zeros(p.size())
        } else {
            let lower = raise.inverse().scale(T::int(i64::from(x)) / p.a());
            &self.gauged(x - 1, n) * &self.transport(x - 1, &lower, x)
        };
        let r2 = self.tau_apply(&ladder_m_dagger(p), x, n).dist(&down);
        (r1.max(r2) / self.gauged(x, n).max_abs().max(T::one())).to_f64()
    }
}

/// `sum_k M^k A_k` for a left-variable polynomial.
///
/// # Errors
/// Returns a usage error when the polynomial does not have a left matrix
/// variable.
pub fn eval_matrix_poly<T: Scalar>(q: &MatrixPolynomial<T>, m: &Mat<T>) -> Result<Mat<T>> {
    if q.side() != VarSide::LeftMatrix {
        return Err(Error::Usage("expected a left matrix variable polynomial".into()));
    }
    Ok(q.eval_matrix(m))
}

/// Dual weight `U(n)` in closed form.
pub fn dual_weight_u<T: Scalar>(p: &ModelParams<T>, n: u32) -> Mat<T> {
    let lam = i64::from(p.lambda());
    let sa = p.script_a(T::int(i64::from(n) + lam)).expect("N + m - j > 0").shift(T::one()).powi(n);
    let right = &(&sa * &p.ipa_pow(-lam)) * &p.l0();
    (&(&right.t() * &norm_d(p, n).inverse()) * &right).scale(p.a().powi(2 * n as i32))
}

/// `U(n) = P_n(0)^* H_n^{-1} P_n(0)`.
pub fn dual_weight_u_from_norm(p: &Params, n: u32) -> Matrix {
    let p0 = p_at_zero(p, n);
    &(&p0.t() * &norm_h(p, n).inverse()) * &p0
}

/// Recurrence pair `(B~_n, C~_n)` of the second dual-dual family, with
/// `P~_n(v) v = P~_{n+1}(v) + B~_n P~_n(v) + C~_n P~_{n-1}(v)`.
pub fn dualdual_coeffs<T: Scalar>(p: &ModelParams<T>, n: u32) -> (Mat<T>, Mat<T>) {
    let lam = i64::from(p.lambda());
    let left = &p.l0().inverse() * &p.ipa_pow(lam);
    let right = &p.ipa_pow(-lam) * &p.l0();
    let d = norm_d(p, n);
    let inner = &(&d * &p.a_mat().t()) * &d.inverse();
    let b = &(&p.j_mat().shift(T::int(i64::from(n)) + p.a()) + &p.ipa_pow(-1).scale(T::int(lam)))
        + &(&(&left * &inner) * &right).scale(p.a());
    let c = if n == 0 {
        Mat::zeros(p.size())
    } else {
        &(&left * &(&d * &norm_d(p, n - 1).inverse())) * &right
    };
    (b, c)
}

/// Monic `P~_0, ..., P~_{n_max}` with the variable on the right.
pub fn dualdual_polys(p: &Params, n_max: u32) -> Vec<MatrixPolynomial> {
    let size = p.size();
    let mut out: Vec<Vec<Matrix>> = vec![vec![Matrix::identity(size)]];
    for n in 0..n_max as usize {
        let (b, c) = dualdual_coeffs(p, n as u32);
        let mut next = vec![Matrix::zeros(size); n + 2];
        for (k, m) in out[n].iter().enumerate() {
            next[k + 1] += m;
            next[k] -= &(&b * m);
        }
        if n > 0 {
            for (k, m) in out[n - 1].iter().enumerate() {
                next[k] -= &(&c * m);
            }
        }
        out.push(next);
    }
    out.into_iter()
        .map(|c| MatrixPolynomial::new(c, VarSide::RightMatrix).expect("nonempty coefficients"))
        .collect()
}

/// `(I+A)^n P~_n(Jfrak(x))`, which reproduces `P_n(x)`. `P~_n` is evaluated
/// by running its recurrence at the matrix point, which avoids the
/// cancellation between monomial coefficients.
pub fn dualdual_eval<T: Scalar>(p: &ModelParams<T>, n: u32, x: i64) -> Mat<T> {
    let v = jfrak(p, x);
    let mut prev = Mat::zeros(p.size());
    let mut cur = Mat::identity(p.size());
    for k in 0..n {
        let (b, c) = dualdual_coeffs(p, k);
        let next = &(&(&cur * &v) - &(&b * &cur)) - &(&c * &prev);
        prev = std::mem::replace(&mut cur, next);
    }
    &p.ipa_pow(i64::from(n)) * &cur
}
