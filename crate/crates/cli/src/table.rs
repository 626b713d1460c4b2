//! `table`: every computed object at one parameter point.
//!
//! Values are computed in `Wide` and rounded once to `f64`, so the emitted
//! digits do not depend on cancellation inside the evaluation.

use mvcharlier::duality::{dual_weight_u, DualFamily};
use mvcharlier::mvop::{norm_h, p_eval, rec_b, rec_c};
use mvcharlier::weight::weight;
use mvcharlier::{Matrix, Params, Wide};
use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::emit::{self, num, object};
use crate::CliError;

/// Which index a tabulated object runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Index {
    N,
    X,
    NX,
}

struct Entry {
    n: Option<u32>,
    x: Option<u32>,
    value: Matrix,
}

struct Object {
    name: &'static str,
    family: bool,
    entries: Vec<Entry>,
}

fn tabulate(name: &'static str, family: bool, index: Index, cfg: &RunConfig, f: impl Fn(u32, u32) -> Matrix) -> Object {
    let ns = 0..=cfg.n_max;
    let xs = 0..=cfg.x_max;
    let entries = match index {
        Index::N => ns.map(|n| Entry { n: Some(n), x: None, value: f(n, 0) }).collect(),
        Index::X => xs.map(|x| Entry { n: None, x: Some(x), value: f(0, x) }).collect(),
        Index::NX => ns
            .flat_map(|n| xs.clone().map(move |x| (n, x)))
            .map(|(n, x)| Entry { n: Some(n), x: Some(x), value: f(n, x) })
            .collect(),
    };
    Object { name, family, entries }
}

/// Renders the table in the configured format.
///
/// # Errors
/// [`CliError::Usage`] for an invalid parameter point.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let (size, a, lambda, family) = cfg.point()?;
    let p = Params::new(size, a, lambda).map_err(|e| CliError::Usage(e.to_string()))?;
    let w = p.cast::<Wide>();
    let fam = DualFamily::new(&w, family).map_err(|e| CliError::Usage(e.to_string()))?;
    let r = |m: mvcharlier::Mat<Wide>| m.cast::<f64>();
    let objects = [
        tabulate("B", false, Index::N, cfg, |n, _| r(rec_b(&w, n))),
        tabulate("C", false, Index::N, cfg, |n, _| r(rec_c(&w, n))),
        tabulate("H", false, Index::N, cfg, |n, _| r(norm_h(&w, n))),
        tabulate("P", false, Index::NX, cfg, |n, x| r(p_eval(&w, n, i64::from(x)))),
        tabulate("U", false, Index::N, cfg, |n, _| r(dual_weight_u(&w, n))),
        tabulate("Upsilon", true, Index::X, cfg, |_, x| r(fam.upsilon(x))),
        tabulate("W", false, Index::X, cfg, |_, x| r(weight(&w, u64::from(x)))),
        tabulate("Wdual", true, Index::X, cfg, |_, x| r(fam.dual_norm(x))),
        tabulate("rho", true, Index::N, cfg, |n, _| r(fam.rho(n))),
    ];
    match cfg.format {
        Format::Json => Ok(emit::json_text(&json(&p, family, cfg, &objects))),
        Format::Csv => csv(&p, family, &objects),
    }
}

fn meta(p: &Params, family: u8, cfg: &RunConfig) -> Value {
    object([
        ("N", Value::from(p.size())),
        ("a", num(p.a())),
        ("family", Value::from(family)),
        ("lambda", Value::from(p.lambda())),
        ("mu", Value::Array((1..=p.size()).map(|j| num(p.mu(j))).collect())),
        ("n_max", Value::from(cfg.n_max)),
        ("x_max", Value::from(cfg.x_max)),
    ])
}

fn json(p: &Params, family: u8, cfg: &RunConfig, objects: &[Object]) -> Value {
    let mut body = Map::new();
    for o in objects {
        let rows = o
            .entries
            .iter()
            .map(|e| {
                let mut m = Map::new();
                if let Some(n) = e.n {
                    m.insert("n".into(), Value::from(n));
                }
                if let Some(x) = e.x {
                    m.insert("x".into(), Value::from(x));
                }
                m.insert("value".into(), emit::matrix(&e.value));
                Value::Object(m)
            })
            .collect();
        body.insert(o.name.to_string(), Value::Array(rows));
    }
    object([("meta", meta(p, family, cfg)), ("objects", Value::Object(body))])
}

fn csv(p: &Params, family: u8, objects: &[Object]) -> Result<String, CliError> {
    let mut header: Vec<String> = ["object", "family", "N", "a", "lambda", "n", "x"].map(String::from).to_vec();
    header.extend(emit::matrix_headers(p.size()));
    let opt = |v: Option<u32>| v.map(|k| k.to_string()).unwrap_or_default();
    let rows: Vec<Vec<String>> = objects
        .iter()
        .flat_map(|o| {
            o.entries.iter().map(move |e| {
                let mut row = vec![
                    o.name.to_string(),
                    if o.family { family.to_string() } else { String::new() },
                    p.size().to_string(),
                    emit::fmt_num(p.a()),
                    p.lambda().to_string(),
                    opt(e.n),
                    opt(e.x),
                ];
                row.extend(emit::matrix_cells(&e.value));
                row
            })
        })
        .collect();
    emit::csv_text(&header, &rows)
}
