//! Monic matrix Charlier polynomials `P_n^(lambda)`.
//!
//! Values come from the explicit entry coefficients `xi_{j,k,n}` through the
//! conjugated polynomial `R_n(x)`. Norms use the LDU form
//! `H_n = L_0^{-1}(I+A)^{n+lambda} D_n (I+A^*)^{n+lambda} L_0^{-*}`, and the
//! shift operators come from the Pearson data of [`crate::weight`].

use crate::error::{Error, Result};
use crate::poly::MatrixPolynomial;
use crate::special::{binomial, charlier, factorial, hyp3f2_terminating, pochhammer};
use crate::weight::{self, pearson, PearsonData, Truncation};
use crate::{Mat, Matrix, ModelParams, Params, Scalar};

/// Which closed form of `xi` to use. [`XiBranch::Auto`] picks by `n + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiBranch {
    Auto,
    /// The `n + j >= N` expression.
    High,
    /// The `n + j < N` expression.
    Low,
}

fn xi_prefactor<T: Scalar>(p: &ModelParams<T>, j: usize, k: usize, n: u32) -> T {
    let nn = T::int(p.size() as i64);
    let l = T::int(i64::from(p.lambda()));
    let a = p.a();
    let sign = if (n as usize + j - 1).is_multiple_of(2) { T::one() } else { -T::one() };
    p.mu_ratio(j, k) * a.powi(j as i32 - k as i32) * sign * a.powi(n as i32) * pochhammer(l + T::one(), n)
        / (factorial::<T>(j as u32 - 1) * pochhammer(nn + l - T::int(j as i64) + T::one(), n))
}

/// Entry coefficient `xi_{j,k,n}` with an explicit branch choice.
///
/// Returns zero outside `1 <= j, k <= N` or when `n + j - k < 0`.
pub fn xi_branch<T: Scalar>(p: &ModelParams<T>, j: usize, k: usize, n: u32, branch: XiBranch) -> T {
    let big = p.size();
    if j == 0 || k == 0 || j > big || k > big || n as usize + j < k {
        return T::zero();
    }
    let high = match branch {
        XiBranch::Auto => n as usize + j >= big,
        XiBranch::High => true,
        XiBranch::Low => false,
    };
    let one = T::one();
    let nn = T::int(big as i64);
    let l = T::int(i64::from(p.lambda()));
    let (jf, kf, nf) = (T::int(j as i64), T::int(k as i64), T::int(i64::from(n)));
    let body = if high {
        pochhammer(one - nn, k as u32 - 1)
            * hyp3f2_terminating([one - kf, jf - nn, nf + l + one], [l + one, one - nn])
                .expect("xi high branch terminates")
    } else {
        pochhammer(one - nf - jf, k as u32 - 1)
            * hyp3f2_terminating([one - kf, -nf, nn - jf + l + one], [l + one, one - nf - jf])
                .expect("xi low branch terminates")
    };
    xi_prefactor(p, j, k, n) * body
}

/// Entry coefficient `xi_{j,k,n}`, so that `R_n(x)_{jk} = xi_{j,k,n} c_{n+j-k}(x)`.
pub fn xi<T: Scalar>(p: &ModelParams<T>, j: usize, k: usize, n: u32) -> T {
    xi_branch(p, j, k, n, XiBranch::Auto)
}

/// `xi_{N,1,n} = (-1)^{n+N-1} a^{n+(N-1)/2} / sqrt((N-1)!)` for the default `mu`.
pub fn xi_last_first(p: &Params, n: u32) -> f64 {
    let big = p.size();
    let sign = if (n as usize + big - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * p.a().powf(f64::from(n) + (big as f64 - 1.0) / 2.0) / factorial::<f64>(big as u32 - 1).sqrt()
}

/// `xi_{1,1,n} = (-a)^n (lambda+1)_{N-1} / (lambda+n+1)_{N-1}`.
pub fn xi_first_first(p: &Params, n: u32) -> f64 {
    let l = f64::from(p.lambda());
    let m = p.size() as u32 - 1;
    (-p.a()).powi(n as i32) * pochhammer(l + 1.0, m) / pochhammer(l + f64::from(n) + 1.0, m)
}

/// `xi_{j,1,n}` from `xi_{1,1,n}` by the closed solution of the `j`-recursion.
pub fn xi_first_column(p: &Params, j: usize, n: u32) -> f64 {
    let big = p.size() as f64;
    let l = f64::from(p.lambda());
    let d = j as u32 - 1;
    let sign = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * xi_first_first(p, n)
        * (factorial::<f64>(p.size() as u32 - 1) / factorial::<f64>((p.size() - j) as u32)).sqrt()
        * p.a().powf(f64::from(d) / 2.0)
        * pochhammer(1.0 - big - l - f64::from(n), d)
        / (factorial::<f64>(d) * pochhammer(1.0 - big - l, d))
}

/// Relative residual of the three-term recursion in `k` for `phi_k = xi_{j,k,n}`.
pub fn xi_k_recursion_residual(p: &Params, j: usize, k: usize, n: u32) -> f64 {
    let big = p.size() as f64;
    let l = f64::from(p.lambda());
    let a = p.a();
    let (jf, kf, nf) = (j as f64, k as f64, f64::from(n));
    let t1 = a.sqrt() * (kf + l) * (big - kf).sqrt() * xi(p, j, k + 1, n);
    let t0 = (jf * l - nf * (big + 1.0 - jf) - big - 1.0 + kf * (big + jf - l + nf + 2.0) - 2.0 * kf * kf)
        * xi(p, j, k, n);
    let tm = (nf + jf - kf + 1.0) * (kf - 1.0) * (big - kf + 1.0).sqrt() / a.sqrt() * xi(p, j, k - 1, n);
    relative(t1 + t0 + tm, [t1, t0, tm])
}

/// Relative residual of the three-term recursion in `j` for `psi_j = xi_{j,1,n}`.
pub fn xi_j_recursion_residual(p: &Params, j: usize, n: u32) -> f64 {
    let big = p.size() as f64;
    let l = f64::from(p.lambda());
    let a = p.a();
    let (jf, nf) = (j as f64, f64::from(n));
    let t1 = xi(p, j + 1, 1, n) / a.sqrt() * jf * (big + l - jf) * (nf + jf) * (big - jf).sqrt();
    let t0 = xi(p, j, 1, n)
        * ((nf + jf - 1.0) * (big + nf + l - jf) * (big + nf + l - jf + 1.0) - nf * (l + nf) * (big + l + nf)
            + jf * (big - jf) * (big + l - jf));
    let tm = if j > 1 {
        xi(p, j - 1, 1, n) * a.sqrt() * (big + nf + l - jf) * (big + nf + l - jf + 1.0) * (big - jf + 1.0).sqrt()
    } else {
        0.0
    };
    relative(t1 + t0 + tm, [t1, t0, tm])
}

fn relative(sum: f64, terms: [f64; 3]) -> f64 {
    let scale = terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        0.0
    } else {
        sum.abs() / scale
    }
}

/// Table of `xi_{j,k,n}` for fixed `n`, row-major in `(j, k)`.
fn xi_table<T: Scalar>(p: &ModelParams<T>, n: u32) -> Mat<T> {
    Mat::from_fn(p.size(), |j, k| xi(p, j, k, n))
}

fn r_from_table<T: Scalar>(p: &ModelParams<T>, table: &Mat<T>, n: u32, x: T) -> Mat<T> {
    Mat::from_fn(p.size(), |j, k| {
        if n as usize + j < k {
            return T::zero();
        }
        let d = (n as usize + j - k) as u32;
        table.get(j, k) * charlier(d, p.a(), x).expect("a > 0")
    })
}

/// `R_n(x) = L_0 (I+A)^{-n-lambda} P_n(x) (I+A)^{lambda+x}`, from its entries.
pub fn r_eval<T: Scalar>(p: &ModelParams<T>, n: u32, x: i64) -> Mat<T> {
    r_from_table(p, &xi_table(p, n), n, T::int(x))
}

fn p_from_r<T: Scalar>(p: &ModelParams<T>, n: u32, x: i64, r: &Mat<T>) -> Mat<T> {
    let l = i64::from(p.lambda());
    &(&(&p.mat_l_inv(-(n as i64) - l) * r) * &p.mat_l_inv(x + l)) * &p.l0()
}

/// Monic `P_n^(lambda)(x) = L(-n-lambda)^{-1} R_n(x) L(x+lambda)^{-1} L_0`.
pub fn p_eval<T: Scalar>(p: &ModelParams<T>, n: u32, x: i64) -> Mat<T> {
    p_from_r(p, n, x, &r_eval(p, n, x))
}

/// `P_n(0) = (-a)^n L_0^{-1}(I+A)^{n+lambda}(I+A_{n+lambda})^n (I+A)^{-lambda} L_0`.
pub fn p_at_zero<T: Scalar>(p: &ModelParams<T>, n: u32) -> Mat<T> {
    let l = i64::from(p.lambda());
    let ni = i64::from(n);
    let sa = p.script_a(T::int(ni + l)).expect("N + m - j > 0").shift(T::one()).powi(n);
    let core = &(&p.ipa_pow(ni + l) * &sa) * &p.ipa_pow(-l);
    (&(&p.l0().inverse() * &core) * &p.l0()).scale((-p.a()).powi(n as i32))
}

/// Diagonal LDU factor `D_n` of the square norm.
pub fn norm_d<T: Scalar>(p: &ModelParams<T>, n: u32) -> Mat<T> {
    let big = T::int(p.size() as i64);
    let l = T::int(i64::from(p.lambda()));
    let a = p.a();
    let nf = T::int(i64::from(n));
    // e^a is a common scalar; f64 accuracy suffices for it at any precision
    // since every identity built on these norms is homogeneous in it.
    let common = T::of(a.to_f64().exp())
        * factorial::<T>(n)
        * a.powi(n as i32)
        * (a / T::of(2.0)).powi(p.lambda() as i32)
        * factorial::<T>(p.lambda() + n);
    let d: Vec<T> = (1..=p.size())
        .map(|j| {
            let jf = T::int(j as i64);
            common / pochhammer(big + l - jf + T::one(), n) * binomial(big + l + nf, j as u32 - 1)
        })
        .collect();
    Mat::diag(&d)
}

/// Square norm `H_n` in LDU form.
pub fn norm_h<T: Scalar>(p: &ModelParams<T>, n: u32) -> Mat<T> {
    let e = i64::from(n) + i64::from(p.lambda());
    let l0_inv = p.l0().inverse();
    let left = &l0_inv * &p.ipa_pow(e);
    &(&left * &norm_d(p, n)) * &left.t()
}

/// Recurrence coefficient `C_n`, with `C_0 = 0`.
pub fn rec_c<T: Scalar>(p: &ModelParams<T>, n: u32) -> Mat<T> {
    if n == 0 {
        return Mat::zeros(p.size());
    }
    let e = i64::from(n) + i64::from(p.lambda());
    let mid = &(&norm_d(p, n) * &p.ipa_star_pow(1)) * &norm_d(p, n - 1).inverse();
    &(&(&(&p.l0().inverse() * &p.ipa_pow(e)) * &mid) * &p.ipa_pow(1 - e)) * &p.l0()
}

/// Recurrence coefficient `B_n` in conjugated closed form.
pub fn rec_b<T: Scalar>(p: &ModelParams<T>, n: u32) -> Mat<T> {
    let e = i64::from(n) + i64::from(p.lambda());
    let nf = T::int(i64::from(n));
    let ipa = p.ipa_pow(1);
    let sa_next = p.script_a(T::int(e + 1)).expect("N + m - j > 0");
    let sa = p.script_a(T::int(e)).expect("N + m - j > 0");
    let inner = (&(&ipa * &sa_next).scale(nf + T::one()) - &(&sa * &ipa).scale(nf)) + &ipa.shift(nf / p.a());
    (&(&(&(&p.l0().inverse() * &p.ipa_pow(e)) * &inner) * &p.ipa_pow(-e)) * &p.l0()).scale(p.a())
}

/// `B_n` from the ladder relations:
/// `(B^*)^{-1} H_n A^* H_n^{-1} + H_n (A^*)^{-1} H_{n-1}^{-1} B^*` with
/// `A = I + A`, `B = (a A^*)^{-1}`.
pub fn rec_b_ladder(p: &Params, n: u32) -> Matrix {
    let sa = p.ipa_pow(1);
    let sb_star = sa.inverse().scale(1.0 / p.a());
    let h = norm_h(p, n);
    let first = &(&(&sb_star.inverse() * &h) * &sa.t()) * &h.inverse();
    if n == 0 {
        return first;
    }
    let second = &(&(&h * &sa.t().inverse()) * &norm_h(p, n - 1).inverse()) * &sb_star;
    first + second
}

/// Forward shift eigenvalue `G_n = -(n-1) K_2^* - J_1^*`.
pub fn shift_g<T: Scalar>(p: &ModelParams<T>, n: u32) -> Mat<T> {
    shift_g_from(&pearson(p), n)
}

fn shift_g_from<T: Scalar>(pd: &PearsonData<T>, n: u32) -> Mat<T> {
    -(&pd.k2.t().scale(T::int(i64::from(n) - 1)) + &pd.j1.t())
}

/// `G_n` in diagonalized form
/// `(1/2) L_0^{-1}(I+A)^{n+lambda}((N+lambda+1)I - J)(I+A)^{-n-lambda} L_0`.
pub fn shift_g_diag(p: &Params, n: u32) -> Matrix {
    let e = i64::from(n) + i64::from(p.lambda());
    let mid = (-p.j_mat()).shift((p.size() + 1) as f64 + f64::from(p.lambda()));
    (&(&(&(&p.l0().inverse() * &p.ipa_pow(e)) * &mid) * &p.ipa_pow(-e)) * &p.l0()).scale(0.5)
}

/// `(F . Delta)(x) = F(x+1) - F(x)`.
pub fn apply_delta(f: &dyn Fn(i64) -> Matrix, x: i64) -> Matrix {
    weight::forward_diff(f, x)
}

/// Backward shift `(F . S)(x) = -F(x) Phi(x)^* + F(x-1)(Phi(x)^* - Psi(x)^*)`
/// built from the Pearson data of the lower parameter.
pub fn apply_s(pd: &PearsonData, f: &dyn Fn(i64) -> Matrix, x: i64) -> Matrix {
    let phi = pd.phi(x).t();
    let psi = pd.psi(x).t();
    let mut out = -(&f(x) * &phi);
    if x != 0 {
        out += &(&f(x - 1) * &(&phi - &psi));
    }
    out
}

/// `Gamma_n = a(I+A) - J - (n+lambda)(I+A)^{-1}`.
pub fn gamma<T: Scalar>(p: &ModelParams<T>, n: u32) -> Mat<T> {
    let shift = T::int(i64::from(n) + i64::from(p.lambda()));
    &(&p.ipa_pow(1).scale(p.a()) - &p.j_mat()) - &p.ipa_pow(-1).scale(shift)
}

/// Second-order operator
/// `D = eta a(I+A) - J - (x+lambda)(I+A)^{-1} + eta^{-1} x (I+A)^{-1}`.
pub fn apply_dfrak(p: &Params, f: &dyn Fn(i64) -> Matrix, x: i64) -> Matrix {
    let inv = p.ipa_pow(-1);
    let lam = f64::from(p.lambda());
    let mut out = &f(x + 1) * &p.ipa_pow(1).scale(p.a());
    out -= &(&f(x) * &(&p.j_mat() + &inv.scale(x as f64 + lam)));
    if x != 0 {
        out += &(&f(x - 1) * &inv.scale(x as f64));
    }
    out
}

/// `P_n` through the Rodrigues formula, for `x >= 0`.
///
/// Each term `W^(lambda+n)(x-i) W^(lambda)(x)^{-1}` is formed with the
/// `(I+A^*)` powers cancelled in closed form, which keeps it well conditioned.
///
/// # Errors
/// Returns [`Error::Singular`] if the `G` product is singular.
pub fn rodrigues_eval(p: &Params, n: u32, x: i64) -> Result<Matrix> {
    if x < 0 {
        return Err(Error::Domain("Rodrigues evaluation needs x >= 0".into()));
    }
    let l = i64::from(p.lambda());
    let ni = i64::from(n);
    let t_inv = p.t_mat().inverse();
    let t_up = p.t_mat_at(p.lambda() + n);
    let right = &t_inv * &p.ipa_pow(-x - l);
    let mut acc = Matrix::zeros(p.size());
    for i in 0..=ni.min(x) {
        let c = binomial(n as f64, i as u32) * if i % 2 == 0 { 1.0 } else { -1.0 };
        // a^{x-i}/(x-i)! divided by a^x/x!
        let ratio = (0..i).fold(1.0, |r, s| r * (x - s) as f64 / p.a());
        let term = &(&(&p.ipa_pow(x - i + l + ni) * &t_up) * &p.ipa_star_pow(ni - i)) * &right;
        acc += &term.scale(c * ratio);
    }
    let mut gprod = Matrix::identity(p.size());
    for k in 1..=n {
        gprod = &gprod * &shift_g(&p.with_lambda(p.lambda() + n - k), k);
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok((&gprod.inv()? * &acc).scale(sign))
}

/// `H_n = n! H_0^(lambda+n) (G_1^(lambda+n-1)*)^{-1} ... (G_n^(lambda)*)^{-1}`.
pub fn norm_chain(p: &Params, n: u32) -> Matrix {
    let mut h = norm_h(&p.with_lambda(p.lambda() + n), 0).scale(factorial(n));
    for k in 1..=n {
        h = &h * &shift_g(&p.with_lambda(p.lambda() + n - k), k).t().inverse();
    }
    h
}

/// Predicts `H_n` from `H_{n-1}` (and `H_{n-2}` when `n >= 2`) through the
/// quadratic norm recursion with step matrix `s` (`I + A` for this family).
///
/// Works for any matrix size, so `1 x 1` inputs give the scalar relation
/// `H_n = H_{n-1}^2 / H_{n-2} + a H_{n-1}`.
pub fn nonlinear_norm_step(s: &Matrix, a: f64, h1: &Matrix, h2: Option<&Matrix>) -> Matrix {
    let st = s.t();
    let h1_inv = h1.inverse();
    let sh = &(s * h1) * &st;
    let mut out = &(&(&(s * s) * h1) * &(&st * &st)).scale(a * a) - &(&(&sh * &h1_inv) * &sh).scale(a * a);
    out += &sh.scale(a);
    if let Some(h2) = h2 {
        out += &(&(&(&(&(&(s * h1) * &st.inverse()) * &h2.inverse()) * &s.inverse()) * h1) * &st);
    }
    out
}

/// Residual of the quadratic norm recursion at degree `n >= 1`.
pub fn nonlinear_norm_residual(p: &Params, n: u32) -> f64 {
    assert!(n >= 1, "norm recursion starts at n = 1");
    let h2 = (n >= 2).then(|| norm_h(p, n - 2));
    let pred = nonlinear_norm_step(&p.ipa_pow(1), p.a(), &norm_h(p, n - 1), h2.as_ref());
    pred.dist(&norm_h(p, n))
}

/// Residual of the diagonal difference equation satisfied by `R_n`.
pub fn r_difference_residual(p: &Params, n: u32, x: i64) -> f64 {
    let a = p.a();
    let lam = f64::from(p.lambda());
    let xf = x as f64;
    let ipa = p.ipa_pow(1);
    let jl = p.j_mat().shift(lam);
    let jb = (&p.j_mat() * &p.ipa_star_pow(1)).shift(lam);
    let lhs = &(-p.j_mat()).shift((p.size() + 1) as f64 + lam).scale(f64::from(n)) * &r_eval(p, n, x);
    let mut rhs = -(&r_eval(p, n, x + 1) * &jb.scale(a));
    rhs += &(&r_eval(p, n, x) * &(&(&ipa * &jb).scale(a) + &jl.scale(xf)));
    rhs -= &(&r_eval(p, n, x - 1) * &(&ipa * &jl).scale(xf));
    lhs.dist(&rhs)
}

/// Residual of the one-sided mixed equation for `R_n`, `n >= 1`.
pub fn r_mixed_residual(p: &Params, n: u32, x: i64) -> f64 {
    let a = p.a();
    let xf = x as f64;
    let ipa = p.ipa_pow(1);
    let d = norm_d(p, n);
    let d_ias = &d * &p.ipa_star_pow(-1);
    let m1 = &d_ias * &norm_d(p, n - 1).inverse();
    let m2 = &d_ias * &d.inverse();
    let mid = &(&m1.scale(1.0 / (a * a)) - &m2.scale(xf / a)) - &ipa;
    let r = &(&r_eval(p, n, x + 1) + &(&mid * &r_eval(p, n, x))) + &(&(&m2 * &ipa).scale(xf / a) * &r_eval(p, n, x - 1));
    r.max_abs()
}

/// Explicit `P_n` as a scalar-variable polynomial, interpolated at `0..=n`.
pub fn p_poly(p: &Params, n: u32) -> MatrixPolynomial {
    let vals: Vec<Matrix> = (0..=i64::from(n)).map(|x| p_eval(p, n, x)).collect();
    MatrixPolynomial::interpolate(&vals).expect("nonempty node set")
}

/// Brute-force monic orthogonalization of `x^k I` against the truncated
/// weighted sum, independent of every closed form in this module.
///
/// Each new polynomial starts from `x P_{n-1}` and is projected twice
/// against all previous ones.
///
/// # Errors
/// Returns [`Error::Oracle`] if a Gram matrix has condition above `1e12`,
/// and [`Error::NoConverge`] if the support cannot be truncated.
pub fn gram_schmidt_oracle(p: &Params, n_max: u32, t: Truncation) -> Result<Vec<MatrixPolynomial>> {
    use crate::poly::VarSide;
    let size = p.size();
    let heavy = 2 * i32::try_from(n_max).unwrap_or(i32::MAX);
    let support = weight::truncated_sum(t, |x| weight::weight(p, x).scale((x as f64).powi(heavy)))?.terms;
    let xs: Vec<u64> = (0..support as u64).collect();
    let ws: Vec<Matrix> = xs.iter().map(|&x| weight::weight(p, x)).collect();
    let ip = |f: &[Matrix], g: &[Matrix]| {
        let mut acc = Matrix::zeros(size);
        for ((fx, wx), gx) in f.iter().zip(&ws).zip(g) {
            acc += &(&(fx * wx) * &gx.t());
        }
        acc
    };

    let mut coeffs: Vec<Vec<Matrix>> = vec![vec![Matrix::identity(size)]];
    let mut values: Vec<Vec<Matrix>> = vec![vec![Matrix::identity(size); xs.len()]];
    let mut norms: Vec<Matrix> = vec![ip(&values[0], &values[0])];
    for n in 1..=n_max as usize {
        let mut c: Vec<Matrix> = std::iter::once(Matrix::zeros(size)).chain(coeffs[n - 1].iter().cloned()).collect();
        let mut v: Vec<Matrix> = values[n - 1].iter().zip(&xs).map(|(m, &x)| m.scale(x as f64)).collect();
        for _ in 0..2 {
            for m in 0..n {
                let proj = &ip(&v, &values[m]) * &norms[m].inverse();
                for (ck, pk) in c.iter_mut().zip(&coeffs[m]) {
                    *ck -= &(&proj * pk);
                }
                for (vx, px) in v.iter_mut().zip(&values[m]) {
                    *vx -= &(&proj * px);
                }
            }
        }
        let h = ip(&v, &v);
        if h.condition().is_nan() || h.condition() > 1e12 {
            return Err(Error::Oracle(format!("Gram matrix at degree {n} is ill-conditioned")));
        }
        coeffs.push(c);
        values.push(v);
        norms.push(h);
    }
    Ok(coeffs
        .into_iter()
        .map(|c| MatrixPolynomial::new(c, VarSide::Scalar).expect("nonempty coefficients"))
        .collect())
}

/// Precomputed tables for one parameter set, read-only after construction.
#[derive(Debug, Clone)]
pub struct MvopFamily {
    params: Params,
    n_max: u32,
    xi: Vec<Matrix>,
    d: Vec<Matrix>,
    h: Vec<Matrix>,
    b: Vec<Matrix>,
    c: Vec<Matrix>,
    p0: Vec<Matrix>,
}

impl MvopFamily {
    pub fn new(params: Params, n_max: u32) -> Self {
        let ns = 0..=n_max;
        let xi = ns.clone().map(|n| xi_table(&params, n)).collect();
        let d = ns.clone().map(|n| norm_d(&params, n)).collect();
        let h = ns.clone().map(|n| norm_h(&params, n)).collect();
        let b = ns.clone().map(|n| rec_b(&params, n)).collect();
        let c = ns.clone().map(|n| rec_c(&params, n)).collect();
        let p0 = ns.map(|n| p_at_zero(&params, n)).collect();
        Self { params, n_max, xi, d, h, b, c, p0 }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    fn cached<'a>(&'a self, table: &'a [Matrix], n: u32) -> Option<&'a Matrix> {
        table.get(n as usize)
    }

    pub fn xi_table(&self, n: u32) -> Matrix {
        self.cached(&self.xi, n).cloned().unwrap_or_else(|| xi_table(&self.params, n))
    }

    pub fn r_eval(&self, n: u32, x: i64) -> Matrix {
        match self.cached(&self.xi, n) {
            Some(t) => r_from_table(&self.params, t, n, x as f64),
            None => r_eval(&self.params, n, x),
        }
    }

    pub fn p_eval(&self, n: u32, x: i64) -> Matrix {
        p_from_r(&self.params, n, x, &self.r_eval(n, x))
    }

    pub fn norm_d(&self, n: u32) -> Matrix {
        self.cached(&self.d, n).cloned().unwrap_or_else(|| norm_d(&self.params, n))
    }

    pub fn norm_h(&self, n: u32) -> Matrix {
        self.cached(&self.h, n).cloned().unwrap_or_else(|| norm_h(&self.params, n))
    }

    pub fn rec_b(&self, n: u32) -> Matrix {
        self.cached(&self.b, n).cloned().unwrap_or_else(|| rec_b(&self.params, n))
    }

    pub fn rec_c(&self, n: u32) -> Matrix {
        self.cached(&self.c, n).cloned().unwrap_or_else(|| rec_c(&self.params, n))
    }

    pub fn p_at_zero(&self, n: u32) -> Matrix {
        self.cached(&self.p0, n).cloned().unwrap_or_else(|| p_at_zero(&self.params, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_zero_is_identity() {
        let p = Params::new(3, 1.5, 2).unwrap();
        for x in 0..5 {
            assert!(p_eval(&p, 0, x).dist(&Matrix::identity(3)) < 1e-12);
        }
        assert!(r_eval(&p, 0, 0).dist(&p.l0()) < 1e-12);
    }

    #[test]
    fn xi_examples() {
        let p = Params::new(2, 1.0, 0).unwrap();
        assert!((xi(&p, 1, 1, 1) + 0.5).abs() < 1e-14);
        assert_eq!(xi(&p, 1, 2, 0), 0.0);
        let q = Params::new(4, 2.5, 1).unwrap();
        for n in 0..6 {
            assert!((xi(&q, 4, 1, n) - xi_last_first(&q, n)).abs() < 1e-11 * xi_last_first(&q, n).abs());
        }
    }

    #[test]
    fn norm_d_example() {
        let p = Params::new(2, 1.0, 0).unwrap();
        let e = std::f64::consts::E;
        assert!(norm_d(&p, 0).dist(&Matrix::diag(&[e, 2.0 * e])) < 1e-14);
        let h0 = Matrix::from_rows(&[vec![e, e], vec![e, 3.0 * e]]);
        assert!(norm_h(&p, 0).dist(&h0) < 1e-12);
    }

    #[test]
    fn family_cache_matches_direct() {
        let p = Params::new(3, 1.0, 1).unwrap();
        let fam = MvopFamily::new(p.clone(), 4);
        for n in 0..6 {
            assert_eq!(fam.p_eval(n, 3), p_eval(&p, n, 3));
            assert_eq!(fam.norm_h(n), norm_h(&p, n));
            assert_eq!(fam.p_at_zero(n), p_at_zero(&p, n));
        }
    }
}
