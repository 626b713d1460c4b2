//! `bench`: wall time of the explicit, Rodrigues and Gram-Schmidt routes to
//! `P_n(x)`, after checking that the routes agree.

use std::time::Instant;

use mvcharlier::mvop::{gram_schmidt_oracle, p_eval, rodrigues_eval, MvopFamily};
use mvcharlier::Params;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::emit::{self, num, object};
use crate::CliError;

/// Degree above which the Gram-Schmidt oracle is not attempted; its Gram
/// matrices lose conditioning beyond this on the desk-scale grid.
const ORACLE_MAX_DEGREE: u32 = 10;

struct Cell {
    n: u32,
    x: u32,
    cold_ns: u128,
    warm_ns: u128,
    rodrigues_ns: u128,
    oracle_ns: Option<u128>,
    deviation: f64,
}

pub struct Outcome {
    pub text: String,
    pub agree: bool,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, u128) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed().as_nanos())
}

/// Runs the benchmark at the configured parameter point.
///
/// # Errors
/// [`CliError::Usage`] for an invalid parameter point, [`CliError::Core`] if
/// the Rodrigues route fails.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (size, a, lambda, _) = cfg.point()?;
    let p = Params::new(size, a, lambda).map_err(|e| CliError::Usage(e.to_string()))?;
    let (warm, cache_build_ns) = timed(|| MvopFamily::new(p.clone(), cfg.n_max));
    let oracle_degree = cfg.n_max.min(ORACLE_MAX_DEGREE);
    let (oracle, oracle_build_ns) = timed(|| gram_schmidt_oracle(&p, oracle_degree, cfg.truncation()).ok());

    let mut cells = Vec::new();
    for n in 0..=cfg.n_max {
        for x in 0..=cfg.x_max {
            let xi = i64::from(x);
            let (cold, cold_ns) = timed(|| p_eval(&p, n, xi));
            let (hot, warm_ns) = timed(|| warm.p_eval(n, xi));
            let (rod, rodrigues_ns) = timed(|| rodrigues_eval(&p, n, xi));
            let rod = rod.map_err(CliError::Core)?;
            let gs = oracle.as_ref().and_then(|o| o.get(n as usize)).map(|q| timed(|| q.eval(f64::from(x))));
            let scale = cold.max_abs().max(1.0);
            let mut deviation = [&hot, &rod].iter().fold(0.0_f64, |m, v| m.max(v.dist(&cold) / scale));
            if let Some((g, _)) = &gs {
                deviation = deviation.max(g.dist(&cold) / scale);
            }
            cells.push(Cell { n, x, cold_ns, warm_ns, rodrigues_ns, oracle_ns: gs.map(|(_, t)| t), deviation });
        }
    }
    let agree = cells.iter().all(|c| c.deviation <= cfg.tol);
    let text = match cfg.format {
        Format::Json => emit::json_text(&json(&p, cfg, &cells, cache_build_ns, oracle_build_ns, oracle.is_some())),
        Format::Csv => csv(&cells)?,
    };
    Ok(Outcome { text, agree })
}

fn ns(t: u128) -> Value {
    Value::from(u64::try_from(t).unwrap_or(u64::MAX))
}

fn json(p: &Params, cfg: &RunConfig, cells: &[Cell], cache_ns: u128, oracle_ns: u128, oracle_ok: bool) -> Value {
    let cold_total: u128 = cells.iter().map(|c| c.cold_ns).sum();
    let warm_total: u128 = cells.iter().map(|c| c.warm_ns).sum();
    let rows = cells
        .iter()
        .map(|c| {
            object([
                ("deviation", num(c.deviation)),
                ("explicit_cold_ns", ns(c.cold_ns)),
                ("explicit_warm_ns", ns(c.warm_ns)),
                ("gram_schmidt_ns", c.oracle_ns.map_or(Value::Null, ns)),
                ("n", Value::from(c.n)),
                ("rodrigues_ns", ns(c.rodrigues_ns)),
                ("x", Value::from(c.x)),
            ])
        })
        .collect();
    object([
        ("cells", Value::Array(rows)),
        (
            "meta",
            object([
                ("N", Value::from(p.size())),
                ("a", num(p.a())),
                ("lambda", Value::from(p.lambda())),
                ("n_max", Value::from(cfg.n_max)),
                ("tol", num(cfg.tol)),
                ("x_max", Value::from(cfg.x_max)),
            ]),
        ),
        (
            "setup",
            object([
                ("gram_schmidt_build_ns", if oracle_ok { ns(oracle_ns) } else { Value::Null }),
                ("xi_cache_build_ns", ns(cache_ns)),
            ]),
        ),
        ("xi_cache", object([("cold_total_ns", ns(cold_total)), ("warm_total_ns", ns(warm_total))])),
    ])
}

fn csv(cells: &[Cell]) -> Result<String, CliError> {
    let header =
        ["n", "x", "explicit_cold_ns", "explicit_warm_ns", "rodrigues_ns", "gram_schmidt_ns", "deviation"].map(String::from);
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                c.n.to_string(),
                c.x.to_string(),
                c.cold_ns.to_string(),
                c.warm_ns.to_string(),
                c.rodrigues_ns.to_string(),
                c.oracle_ns.map(|t| t.to_string()).unwrap_or_default(),
                emit::fmt_num(c.deviation),
            ]
        })
        .collect();
    emit::csv_text(&header, &rows)
}
