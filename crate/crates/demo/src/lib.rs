//! Browser bindings. Every entry point takes plain strings and numbers and
//! returns a JSON document, or an error message for the page to show.

use serde_json::json;
use wasm_bindgen::prelude::*;

use stieltjes::dist::{Distribution, Distribution1D};
use stieltjes::inversion::{feller_cdf, feller_cdf_alt, post_widder_density, TransformOracle};
use stieltjes::muntz::{golitschek_coeffs, qn_eval, sup_norm_estimate, MuntzSequence, SequenceKind};
use stieltjes::transforms::{Route, TransformRequest};

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: `{}`", t.trim())))
        .collect()
}

fn univariate(spec: &str) -> Result<Distribution1D, String> {
    match Distribution::from_json(spec).map_err(|e| e.to_string())? {
        Distribution::Univariate(u) => Ok(u),
        Distribution::Joint(_) => Err("inversion needs a one-dimensional law".into()),
    }
}

/// `L(s)` of the law described by `spec` at the comma-separated point `s`.
#[wasm_bindgen]
pub fn transform(spec: &str, s: &str, route: &str, tol: f64) -> Result<String, String> {
    let d = Distribution::from_json(spec).map_err(|e| e.to_string())?;
    let route: Route = route.parse().map_err(|e: stieltjes::Error| e.to_string())?;
    let s = parse_list(s)?;
    let v = TransformRequest::new(&d, s).route(route).tol(tol).evaluate().map_err(|e| e.to_string())?;
    serde_json::to_string(&v).map_err(|e| e.to_string())
}

/// Inverts a univariate transform at each comma-separated `x`.
/// `method` is `post-widder`, `feller` or `feller-alt`.
#[wasm_bindgen]
pub fn invert(spec: &str, xs: &str, n: usize, method: &str) -> Result<String, String> {
    let oracle = TransformOracle::from_distribution(&univariate(spec)?);
    let xs = parse_list(xs)?;
    let f = match method {
        "post-widder" => post_widder_density,
        "feller" => feller_cdf,
        "feller-alt" => feller_cdf_alt,
        other => return Err(format!("unknown method `{other}`")),
    };
    let mut rows = Vec::with_capacity(xs.len());
    for x in xs {
        let v = f(&oracle, x, n).map_err(|e| e.to_string())?;
        rows.push(json!({ "x": x, "value": v.value, "certified_error": v.certified_error }));
    }
    Ok(json!({ "method": method, "n": n, "points": rows }).to_string())
}

/// Samples `Q_n` on `[0, 1]` for the first `n` exponents of `grid`
/// (`primes` or `integers`).
#[wasm_bindgen]
pub fn muntz_curve(q: f64, grid: &str, n: usize, samples: usize) -> Result<String, String> {
    let kind = match grid {
        "primes" => SequenceKind::Primes,
        "integers" => SequenceKind::Integers,
        other => return Err(format!("unknown grid `{other}`")),
    };
    let seq = MuntzSequence::of_kind(kind, n).map_err(|e| e.to_string())?;
    let approx = golitschek_coeffs(q, seq.values(), n).map_err(|e| e.to_string())?;
    let samples = samples.max(2);
    let mut xs = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = i as f64 / (samples - 1) as f64;
        xs.push(x);
        ys.push(qn_eval(&approx, x).map_err(|e| e.to_string())?);
    }
    let sup = sup_norm_estimate(&approx, 200).map_err(|e| e.to_string())?;
    Ok(json!({
        "q": q,
        "n": n,
        "bound": approx.bound(),
        "sup": sup.sup,
        "argmax": sup.argmax,
        "x": xs,
        "y": ys,
    })
    .to_string())
}
