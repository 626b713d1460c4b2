//! `verify`: identity residuals over a parameter grid.
//!
//! Grid cells run on a rayon pool; rows are sorted by
//! `(N, a, lambda, identity)` before emission.

use mvcharlier::duality::{dualdual_eval, DualFamily, GaugedDual};
use mvcharlier::mvop::{
    apply_delta, apply_dfrak, apply_s, gamma, nonlinear_norm_residual, norm_d, p_eval, rec_b, rec_c,
    rodrigues_eval, shift_g, xi_j_recursion_residual, xi_k_recursion_residual, MvopFamily,
};
use mvcharlier::operators::{
    jfrak_left, jfrak_op, ladder_d, ladder_d_dagger, ladder_m, ladder_m_dagger, lie_checks, psi_residual,
    recurrence_op, RightDiffOp,
};
use mvcharlier::special::charlier;
use mvcharlier::weight::{jfrak, pearson, truncated_sum, weight, Truncation};
use mvcharlier::{Error, Mat, Matrix, Params, Scalar, Wide};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::emit::{self, num, object};
use crate::CliError;

const SIZES: [usize; 2] = [2, 3];
const AS: [f64; 3] = [0.5, 1.0, 2.5];
const LAMBDAS: [u32; 3] = [0, 1, 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    NoConverge,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NoConverge => "no-converge",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub identity: String,
    pub size: usize,
    pub a: f64,
    pub lambda: u32,
    pub residual: Option<f64>,
    pub status: Status,
}

/// Rows of a full verification run together with the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub worst: Status,
}

fn grid(cfg: &RunConfig) -> Vec<Params> {
    let sizes = cfg.n.map_or(SIZES.to_vec(), |n| vec![n]);
    let as_ = cfg.a.map_or(AS.to_vec(), |a| vec![a]);
    let lambdas: Vec<u32> = match (cfg.lambda, cfg.family) {
        (Some(l), _) => vec![l],
        (None, Some(3)) => LAMBDAS.into_iter().filter(|&l| l >= 1).collect(),
        (None, _) => LAMBDAS.to_vec(),
    };
    let mut out = Vec::new();
    for &n in &sizes {
        for &a in &as_ {
            for &l in &lambdas {
                out.push(Params::new(n, a, l).expect("validated parameters"));
            }
        }
    }
    out
}

/// Runs the suite and renders the report.
///
/// # Errors
/// [`CliError::Io`] if CSV rendering fails.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut rows: Vec<Row> = grid(cfg).par_iter().flat_map_iter(|p| cell(p, cfg)).collect();
    rows.sort_by(|l, r| {
        l.size
            .cmp(&r.size)
            .then(l.a.total_cmp(&r.a))
            .then(l.lambda.cmp(&r.lambda))
            .then(l.identity.cmp(&r.identity))
    });
    let worst = rows.iter().map(|r| r.status).max().unwrap_or(Status::Pass);
    let text = match cfg.format {
        Format::Json => emit::json_text(&json(cfg, &rows)),
        Format::Csv => csv(&rows)?,
    };
    Ok(Outcome { text, worst })
}

fn json(cfg: &RunConfig, rows: &[Row]) -> Value {
    let count = |s: Status| Value::from(rows.iter().filter(|r| r.status == s).count());
    let meta = object([
        ("n_max", Value::from(cfg.n_max)),
        ("tol", num(cfg.tol)),
        ("trunc_eps", num(cfg.trunc_eps)),
        ("x_max", Value::from(cfg.x_max)),
    ]);
    let body = rows
        .iter()
        .map(|r| {
            object([
                ("N", Value::from(r.size)),
                ("a", num(r.a)),
                ("identity", Value::from(r.identity.clone())),
                ("lambda", Value::from(r.lambda)),
                ("residual", r.residual.map_or(Value::Null, num)),
                ("status", Value::from(r.status.label())),
            ])
        })
        .collect();
    let summary = object([
        ("fail", count(Status::Fail)),
        ("no_converge", count(Status::NoConverge)),
        ("pass", count(Status::Pass)),
    ]);
    object([("meta", meta), ("rows", Value::Array(body)), ("summary", summary)])
}

fn csv(rows: &[Row]) -> Result<String, CliError> {
    let header = ["identity", "N", "a", "lambda", "residual", "status"].map(String::from);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.identity.clone(),
                r.size.to_string(),
                emit::fmt_num(r.a),
                r.lambda.to_string(),
                r.residual.map(emit::fmt_num).unwrap_or_default(),
                r.status.label().to_string(),
            ]
        })
        .collect();
    emit::csv_text(&header, &body)
}

type Check = Result<f64, Error>;

fn cell(p: &Params, cfg: &RunConfig) -> Vec<Row> {
    let mut checks: Vec<(String, Check)> = Vec::new();
    let mut add = |name: &str, c: Check| checks.push((name.to_string(), c));
    let (n_max, x_max) = (cfg.n_max, i64::from(cfg.x_max));
    let fam = MvopFamily::new(p.clone(), n_max + 1);
    let t = cfg.truncation();

    add("charlier-equations", Ok(charlier_equations(p.a(), n_max, x_max)));
    match orthogonality(p, &fam, n_max, t) {
        Ok((off, diag)) => {
            add("orthogonality", Ok(off));
            add("norm-inner-product", Ok(diag));
        }
        Err(e) => {
            add("orthogonality", Err(e.clone()));
            add("norm-inner-product", Err(e));
        }
    }
    if p.lambda() >= 1 {
        add("norm-ratio", Ok(norm_ratio(p, n_max)));
    }
    add("recurrence", Ok(recurrence(p, n_max, x_max)));
    add("recurrence-symmetry", Ok(recurrence_symmetry(&fam, n_max)));
    let (strong, weak) = pearson_residuals(p, x_max);
    add("pearson-strong", Ok(strong));
    add("pearson-weak", Ok(weak));
    let (lower, raise) = shifts(p, &fam, n_max, x_max);
    add("shift-lowering", Ok(lower));
    add("shift-raising", Ok(raise));
    add("rodrigues", rodrigues(p, &fam, n_max.min(5), x_max));
    let (eig, darboux) = eigen(p, &fam, n_max, x_max);
    add("dfrak-eigen", Ok(eig));
    if let Some(d) = darboux {
        add("darboux", Ok(d));
    }
    add("nonlinear-norm", Ok(nonlinear(&fam, n_max)));
    add("xi-recursions", Ok(xi_recursions(p, n_max)));
    for i in families(p, cfg.family) {
        add(&format!("duality-{i}"), duality(p, i, n_max, cfg.x_max));
        add(&format!("dual-orthogonality-{i}"), dual_orthogonality(p, i, cfg.x_max));
    }
    add("dualdual", Ok(dualdual(p, &fam, n_max.min(8), x_max)));
    add("psi-pairing", Ok(psi_pairs(p, &fam, n_max, x_max)));
    add("lie-algebra", Ok(lie_checks(p).worst()));

    checks
        .into_iter()
        .map(|(identity, c)| {
            let (residual, status) = match c {
                Ok(r) if r <= cfg.tol => (Some(r), Status::Pass),
                Ok(r) => (Some(r), Status::Fail),
                Err(Error::NoConverge { .. }) => (None, Status::NoConverge),
                Err(_) => (None, Status::Fail),
            };
            Row { identity, size: p.size(), a: p.a(), lambda: p.lambda(), residual, status }
        })
        .collect()
}

fn families(p: &Params, only: Option<u8>) -> Vec<u8> {
    let top = if p.lambda() >= 1 { 3 } else { 2 };
    (1..=top).filter(|i| only.is_none_or(|f| f == *i)).collect()
}

fn rel(lhs: &Matrix, rhs: &Matrix) -> f64 {
    lhs.dist(rhs) / rhs.max_abs().max(1.0)
}

fn c(n: i64, a: f64, x: f64) -> f64 {
    if n < 0 {
        0.0
    } else {
        charlier(n as u32, a, x).expect("a > 0")
    }
}

/// Shift and second-order equations of the scalar Charlier polynomials,
/// each relative to `max(1, largest term)`.
fn charlier_equations(a: f64, n_max: u32, x_max: i64) -> f64 {
    let res = |terms: &[f64]| {
        let scale = terms.iter().fold(1.0_f64, |m, t| m.max(t.abs()));
        terms.iter().sum::<f64>().abs() / scale
    };
    let mut worst = 0.0_f64;
    for n in 0..=i64::from(n_max) {
        for x in 0..=x_max {
            let (nf, xf) = (n as f64, x as f64);
            worst = worst
                .max(res(&[c(n, a, xf + 1.0), -c(n, a, xf), nf / a * c(n - 1, a, xf)]))
                .max(res(&[c(n + 1, a, xf), -c(n, a, xf), xf / a * c(n, a, xf - 1.0)]))
                .max(res(&[a * c(n, a, xf + 1.0), -(xf + a) * c(n, a, xf), xf * c(n, a, xf - 1.0), nf * c(n, a, xf)]));
        }
    }
    worst
}

/// Off-diagonal inner products relative to `|H_n|`, and `H_n` against the
/// diagonal inner product.
fn orthogonality(p: &Params, fam: &MvopFamily, n_max: u32, t: Truncation) -> Result<(f64, f64), Error> {
    let mut values: Vec<Vec<Matrix>> = Vec::new();
    let mut weights: Vec<Matrix> = Vec::new();
    let (mut off, mut diag) = (0.0_f64, 0.0_f64);
    for n in 0..=n_max {
        let h = fam.norm_h(n);
        for m in 0..=n {
            let g = truncated_sum(t, |x| {
                let xi = x as usize;
                while values.len() <= xi {
                    let y = values.len() as i64;
                    values.push((0..=n_max).map(|k| fam.p_eval(k, y)).collect());
                    weights.push(weight(p, y as u64));
                }
                &(&values[xi][n as usize] * &weights[xi]) * &values[xi][m as usize].t()
            })?
            .value;
            if n == m {
                diag = diag.max(g.dist(&h) / h.max_abs());
            } else {
                off = off.max(g.max_abs() / h.max_abs().min(fam.norm_h(m).max_abs()));
            }
        }
    }
    Ok((off, diag))
}

fn norm_ratio(p: &Params, n_max: u32) -> f64 {
    let low = p.with_lambda(p.lambda() - 1);
    let big = p.size() as f64 + f64::from(p.lambda());
    (0..n_max).fold(0.0, |w, n| {
        let ratio = &norm_d(p, n) * &norm_d(&low, n + 1).inverse();
        let target = (-p.j_mat()).shift(big).scale(1.0 / (2.0 * f64::from(n + 1)));
        w.max(ratio.dist(&target) / target.max_abs())
    })
}

/// `x P_n = P_{n+1} + B_n P_n + C_n P_{n-1}` in `Wide`.
fn recurrence(p: &Params, n_max: u32, x_max: i64) -> f64 {
    let w = p.cast::<Wide>();
    let mut worst = 0.0_f64;
    for x in 0..=x_max {
        let vals: Vec<Mat<Wide>> = (0..=n_max + 1).map(|n| p_eval(&w, n, x)).collect();
        for n in 0..=n_max as usize {
            let lhs = vals[n].scale(Wide::int(x));
            let mut rhs = &vals[n + 1] + &(&rec_b(&w, n as u32) * &vals[n]);
            if n > 0 {
                rhs += &(&rec_c(&w, n as u32) * &vals[n - 1]);
            }
            worst = worst.max((lhs.dist(&rhs) / rhs.max_abs().max(Wide::int(1))).to_f64());
        }
    }
    worst
}

fn recurrence_symmetry(fam: &MvopFamily, n_max: u32) -> f64 {
    (0..=n_max).fold(0.0, |w, n| {
        let (b, h) = (fam.rec_b(n), fam.norm_h(n));
        let bh = &b * &h;
        w.max(bh.dist(&(&h * &b.t())) / bh.max_abs().max(1.0))
    })
}

/// Strong and weak Pearson residuals in `Wide`, absolute.
fn pearson_residuals(p: &Params, x_max: i64) -> (f64, f64) {
    let w = p.cast::<Wide>();
    let up = w.with_lambda(w.lambda() + 1);
    let pd = pearson(&w);
    let wt = |q: &mvcharlier::ModelParams<Wide>, x: i64| if x < 0 { Mat::zeros(q.size()) } else { weight(q, x as u64) };
    let b = w.ipa_star_pow(-1).scale(Wide::int(1) / w.a());
    let (mut strong, mut weak) = (0.0_f64, 0.0_f64);
    for x in 0..=x_max {
        let (lo, hi) = (wt(&w, x), wt(&up, x));
        let r1 = hi.dist(&(&lo * &pd.phi(x)));
        let r2 = (&hi - &wt(&up, x - 1)).dist(&(&lo * &pd.psi(x)));
        strong = strong.max(r1.max(r2).to_f64());
        let lhs = &w.ipa_pow(1) * &wt(&w, x - 1);
        let jf = jfrak(&w, x);
        let sym = (&jf * &lo).dist(&(&lo * &jf.t()));
        weak = weak.max(lhs.dist(&(&lo * &b).scale(Wide::int(x))).max(sym).to_f64());
    }
    (strong, weak)
}

fn shifts(p: &Params, fam: &MvopFamily, n_max: u32, x_max: i64) -> (f64, f64) {
    let up = MvopFamily::new(p.with_lambda(p.lambda() + 1), n_max);
    let pd = pearson(p);
    let (mut lower, mut raise) = (0.0_f64, 0.0_f64);
    for n in 1..=n_max {
        let g = shift_g(p, n);
        for x in 0..=x_max {
            let d = apply_delta(&|y| fam.p_eval(n, y), x);
            lower = lower.max(rel(&d, &up.p_eval(n - 1, x).scale(f64::from(n))));
            let s = apply_s(&pd, &|y| up.p_eval(n - 1, y), x);
            raise = raise.max(rel(&s, &(&g * &fam.p_eval(n, x))));
        }
    }
    (lower, raise)
}

fn rodrigues(p: &Params, fam: &MvopFamily, n_max: u32, x_max: i64) -> Check {
    let mut worst = 0.0_f64;
    for n in 0..=n_max {
        for x in 0..=x_max {
            worst = worst.max(rel(&rodrigues_eval(p, n, x)?, &fam.p_eval(n, x)));
        }
    }
    Ok(worst)
}

/// Eigenvalue residual of the second-order operator and, for `lambda >= 1`,
/// of the Darboux relation `2(Delta S - S Delta) = (a - N - 2 lambda) - D`.
fn eigen(p: &Params, fam: &MvopFamily, n_max: u32, x_max: i64) -> (f64, Option<f64>) {
    let pd = pearson(p);
    let low = (p.lambda() >= 1).then(|| pearson(&p.with_lambda(p.lambda() - 1)));
    let c0 = p.a() - p.size() as f64 - 2.0 * f64::from(p.lambda());
    let (mut eig, mut darboux) = (0.0_f64, 0.0_f64);
    for n in 0..=n_max {
        let f = |y: i64| fam.p_eval(n, y);
        let gm = gamma(p, n);
        for x in 0..=x_max {
            let px = f(x);
            let d = apply_dfrak(p, &f, x);
            eig = eig.max(rel(&d, &(&gm * &px)));
            if let Some(pl) = &low {
                let ds = apply_s(&pd, &|y| apply_delta(&f, y), x);
                let sd = apply_delta(&|y| apply_s(pl, &f, y), x);
                darboux = darboux.max(rel(&(&ds - &sd).scale(2.0), &(&px.scale(c0) - &d)));
            }
        }
    }
    (eig, low.map(|_| darboux))
}

fn nonlinear(fam: &MvopFamily, n_max: u32) -> f64 {
    (1..=n_max).fold(0.0, |w, n| w.max(nonlinear_norm_residual(fam.params(), n) / fam.norm_h(n).max_abs()))
}

fn xi_recursions(p: &Params, n_max: u32) -> f64 {
    let big = p.size();
    let mut worst = 0.0_f64;
    for n in 0..=n_max {
        for j in 1..=big {
            worst = worst.max(xi_j_recursion_residual(p, j, n));
            for k in 1..=big {
                worst = worst.max(xi_k_recursion_residual(p, j, k, n));
            }
        }
    }
    worst
}

fn duality(p: &Params, i: u8, n_max: u32, x_max: u32) -> Check {
    let g = GaugedDual::<Wide>::new(p, i, x_max)?.with_degrees(n_max);
    let mut worst = 0.0_f64;
    for n in 0..=n_max {
        for x in 0..=x_max {
            worst = worst.max(g.duality_residual(x, n)).max(g.q_agreement(x, n));
        }
    }
    Ok(worst)
}

/// Dual Gram matrix in `Wide` against the diagonal `(Upsilon W Upsilon^*)^{-1}`.
fn dual_orthogonality(p: &Params, i: u8, x_max: u32) -> Check {
    let f = DualFamily::<Wide>::new(&p.cast(), i)?;
    let gram = f.dual_gram(x_max, Truncation::dual())?;
    let h: Vec<Mat<Wide>> = (0..=x_max).map(|x| f.dual_norm(x)).collect();
    let mut worst = 0.0_f64;
    for (x, row) in gram.iter().enumerate() {
        for (y, v) in row.iter().enumerate() {
            let r = if x == y {
                v.dist(&h[x]) / h[x].max_abs()
            } else {
                v.max_abs() / (h[x].max_abs() * h[y].max_abs()).sqrt()
            };
            worst = worst.max(r.to_f64());
        }
    }
    Ok(worst)
}

fn dualdual(p: &Params, fam: &MvopFamily, n_max: u32, x_max: i64) -> f64 {
    let mut worst = 0.0_f64;
    for n in 0..=n_max {
        for x in 0..=x_max {
            worst = worst.max(rel(&dualdual_eval(p, n, x), &fam.p_eval(n, x)));
        }
    }
    worst
}

fn psi_pairs(p: &Params, fam: &MvopFamily, n_max: u32, x_max: i64) -> f64 {
    [
        psi_residual(&recurrence_op(p), &RightDiffOp::variable(p.size()), fam, n_max, x_max),
        psi_residual(&ladder_m(p), &ladder_d(p), fam, n_max, x_max),
        psi_residual(&ladder_m_dagger(p), &ladder_d_dagger(p), fam, n_max, x_max),
        psi_residual(&jfrak_left(p), &jfrak_op(p), fam, n_max, x_max),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}
