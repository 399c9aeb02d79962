//! Special-function helpers built on `statrs`.

use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

/// Regularized lower incomplete gamma `P(a, x)`, with `x = +inf` allowed.
pub fn reg_gamma_lower(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma_lr(a, x).clamp(0.0, 1.0)
    }
}

/// `P(a + m, x)` for `m = 0..len`, by the downward-difference recurrence
/// `P(a+1, x) = P(a, x) - x^a e^{-x} / Gamma(a+1)`.
pub fn reg_gamma_lower_ladder(a: f64, x: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    if x <= 0.0 {
        out.resize(len, 0.0);
        return out;
    }
    if x.is_infinite() {
        out.resize(len, 1.0);
        return out;
    }
    let mut p = reg_gamma_lower(a, x);
    // d = x^a e^{-x} / Gamma(a+1)
    let mut d = (a * x.ln() - x - ln_gamma(a + 1.0)).exp();
    for m in 0..len {
        out.push(p.max(0.0));
        p -= d;
        d *= x / (a + m as f64 + 1.0);
    }
    out
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn reg_gamma_upper(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        gamma_ur(a, x).clamp(0.0, 1.0)
    }
}

/// `Q(a + m, x)` for `m = 0..len`, using `Q(a+1, x) = Q(a, x) + x^a e^{-x} / Gamma(a+1)`.
pub fn reg_gamma_upper_ladder(a: f64, x: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if x <= 0.0 || x.is_infinite() {
        out.resize(len, if x <= 0.0 { 1.0 } else { 0.0 });
        return out;
    }
    let mut q = reg_gamma_upper(a, x);
    let mut d = (a * x.ln() - x - ln_gamma(a + 1.0)).exp();
    for m in 0..len {
        out.push(q.min(1.0));
        q += d;
        d *= x / (a + m as f64 + 1.0);
    }
    out
}

/// Gamma(shape, rate) density.
pub fn gamma_pdf(shape: f64, rate: f64, x: f64) -> f64 {
    if x < 0.0 || x.is_infinite() {
        return 0.0;
    }
    if x == 0.0 {
        return match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => rate,
            _ => 0.0,
        };
    }
    ((shape - 1.0) * x.ln() + shape * rate.ln() - rate * x - ln_gamma(shape)).exp()
}

/// Weights of the negative binomial law `NB(shape, p)`:
/// `w_n = Gamma(shape+n) / (Gamma(shape) n!) (1-p)^shape p^n`,
/// truncated once the remaining mass is below `tail_tol` or `max_terms`
/// is hit. Returns the weights and a bound on the omitted mass.
pub fn negative_binomial_weights(shape: f64, p: f64, tail_tol: f64, max_terms: usize) -> (Vec<f64>, f64) {
    let mut weights = Vec::new();
    if p == 0.0 {
        weights.push(1.0);
        return (weights, 0.0);
    }
    let mut w = (1.0 - p).powf(shape);
    let mut acc = 0.0;
    for n in 0..max_terms {
        weights.push(w);
        acc += w;
        let next = w * p * (shape + n as f64) / (n as f64 + 1.0);
        // every later term ratio is at most `ratio`
        let ratio = p * ((shape + n as f64 + 1.0) / (n as f64 + 2.0)).max(1.0);
        w = next;
        if ratio < 1.0 {
            let bound = next / (1.0 - ratio);
            if bound <= tail_tol {
                return (weights, bound);
            }
        }
    }
    (weights, (1.0 - acc).max(0.0))
}
