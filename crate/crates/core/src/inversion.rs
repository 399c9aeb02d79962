//! Inverting transforms: Post–Widder for densities, Feller's series for CDFs
//! (both of its forms), finite-difference derivatives for oracles without
//! closed-form derivatives, and the Watson asymptotic check.
//!
//! All sums run in extended precision; every result carries a certified
//! bound on the arithmetic error.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dist::{ContinuousLaw, Distribution1D, SingularLaw};
use crate::error::{Error, Result};
use crate::ext::{self, Ext};

/// Largest derivative order available by finite differences.
pub const MAX_SYNTH_ORDER: usize = 12;

/// Largest order accepted for closed-form derivatives.
pub const MAX_CLOSED_ORDER: usize = 1 << 20;

/// One closed-form piece of a transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum OracleTerm {
    /// `coef (shift + s)^(-power)`
    Power { coef: f64, shift: f64, power: f64 },
    /// `coef exp(-rate s)`
    Exponential { coef: f64, rate: f64 },
}

type F64Fn = dyn Fn(f64) -> f64 + Send + Sync;
type ExtFn = dyn Fn(&Ext) -> Ext + Send + Sync;

#[derive(Clone)]
enum Source {
    Terms(Vec<OracleTerm>),
    Plain(Arc<F64Fn>),
    Extended(Arc<ExtFn>),
}

/// A transform `L(s)`, `s > 0`, with closed-form derivatives when built from
/// terms and finite-difference derivatives otherwise.
#[derive(Clone)]
pub struct TransformOracle {
    source: Source,
    max_k: usize,
    precision_bits: usize,
}

impl fmt::Debug for TransformOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = match &self.source {
            Source::Terms(t) => format!("Terms({t:?})"),
            Source::Plain(_) => "Plain(..)".to_string(),
            Source::Extended(_) => "Extended(..)".to_string(),
        };
        f.debug_struct("TransformOracle")
            .field("source", &src)
            .field("max_k", &self.max_k)
            .field("precision_bits", &self.precision_bits)
            .finish()
    }
}

/// A derivative value with its certified error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

/// Result of an inversion formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionValue {
    /// The reported value (clamped to `[0, 1]` for CDFs).
    pub value: f64,
    /// The approximant before clamping.
    pub raw: f64,
    /// Bound on the arithmetic error of `raw`, not on the distance to the limit.
    pub certified_error: f64,
    pub n: usize,
    /// Number of derivative terms summed.
    pub terms: usize,
}

impl TransformOracle {
    /// Oracle for a sum of closed-form terms; derivatives of every order.
    pub fn from_terms(terms: Vec<OracleTerm>) -> Result<Self> {
        for t in &terms {
            let ok = match *t {
                OracleTerm::Power { coef, shift, power } => {
                    coef.is_finite() && shift >= 0.0 && shift.is_finite() && power > 0.0 && power.is_finite()
                }
                OracleTerm::Exponential { coef, rate } => coef.is_finite() && rate >= 0.0 && rate.is_finite(),
            };
            if !ok {
                return Err(Error::InvalidArgument(format!("invalid oracle term {t:?}")));
            }
        }
        Ok(TransformOracle {
            source: Source::Terms(terms),
            max_k: MAX_CLOSED_ORDER,
            precision_bits: ext::DEFAULT_PRECISION_BITS,
        })
    }

    /// Oracle from a double-precision evaluator; derivatives by finite
    /// differences, limited by the 53-bit inputs.
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TransformOracle {
            source: Source::Plain(Arc::new(f)),
            max_k: MAX_SYNTH_ORDER,
            precision_bits: ext::precision_for_order(MAX_SYNTH_ORDER),
        }
    }

    /// Oracle from an evaluator that works at the precision of its argument.
    pub fn from_ext_fn(f: impl Fn(&Ext) -> Ext + Send + Sync + 'static) -> Self {
        TransformOracle {
            source: Source::Extended(Arc::new(f)),
            max_k: MAX_SYNTH_ORDER,
            precision_bits: ext::precision_for_order(MAX_SYNTH_ORDER),
        }
    }

    /// Transform of a univariate law: closed-form terms when every part is an
    /// atom, exponential or Gamma law, an extended-precision evaluator otherwise.
    pub fn from_distribution(d: &Distribution1D) -> Self {
        let mut terms: Vec<OracleTerm> =
            d.atoms().iter().map(|a| OracleTerm::Exponential { coef: a.mass, rate: a.location }).collect();
        let mut closed = d.singular_components().is_empty();
        for (w, law) in d.continuous_components() {
            match *law {
                ContinuousLaw::Exponential { rate } => {
                    terms.push(OracleTerm::Power { coef: w * rate, shift: rate, power: 1.0 })
                }
                ContinuousLaw::Gamma { rate, shape } => {
                    terms.push(OracleTerm::Power { coef: w * rate.powf(shape), shift: rate, power: shape })
                }
                ContinuousLaw::PositiveStable { .. } => closed = false,
            }
        }
        if closed {
            Self::from_terms(terms).expect("distribution parameters are validated")
        } else {
            let d = d.clone();
            Self::from_ext_fn(move |s| ext_transform(&d, s))
        }
    }

    /// Sets the working precision; derivative work of order `k` always uses
    /// at least `64 + 8k` bits.
    pub fn with_precision(mut self, bits: usize) -> Self {
        self.precision_bits = bits.max(64);
        self
    }

    pub fn with_max_k(mut self, max_k: usize) -> Self {
        let cap = if matches!(self.source, Source::Terms(_)) { MAX_CLOSED_ORDER } else { MAX_SYNTH_ORDER };
        self.max_k = max_k.min(cap);
        self
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    pub fn has_closed_derivatives(&self) -> bool {
        matches!(self.source, Source::Terms(_))
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.source {
            Source::Terms(terms) => terms
                .iter()
                .map(|t| match *t {
                    OracleTerm::Power { coef, shift, power } => coef * (shift + s).powf(-power),
                    OracleTerm::Exponential { coef, rate } => coef * (-rate * s).exp(),
                })
                .sum(),
            Source::Plain(f) => f(s),
            Source::Extended(f) => ext::to_f64(&f(&ext::from_f64(s, self.precision_bits))),
        }
    }

    fn check_order(&self, k: usize) -> Result<()> {
        if k > self.max_k {
            Err(Error::DerivativeUnavailable { order: k, max: self.max_k })
        } else {
            Ok(())
        }
    }

    fn prec_for(&self, k: usize) -> usize {
        self.precision_bits.max(64 + 8 * k)
    }

    /// `L^{(k)}(s)` with its certified error.
    pub fn deriv(&self, k: usize, s: f64) -> Result<Derivative> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("s must be positive (got {s})")));
        }
        self.check_order(k)?;
        let prec = self.prec_for(k);
        let (v, e) = match &self.source {
            Source::Terms(terms) => {
                let d = closed_deriv(terms, k, &ext::from_f64(s, prec));
                (ext::to_f64(&d.value), d.error)
            }
            _ => {
                let d = self.synthesize(k, s)?;
                (d.value, d.error)
            }
        };
        Ok(Derivative { value: v, error: e })
    }

    /// `k`-th derivative by central differences with step
    /// `h = s 2^{-P/(2k+2)}` (capped so the stencil stays in `s > 0`),
    /// Richardson-extrapolated against step `2h`.
    pub fn synthesize(&self, k: usize, s: f64) -> Result<Derivative> {
        if k > MAX_SYNTH_ORDER {
            return Err(Error::DerivativeUnavailable { order: k, max: MAX_SYNTH_ORDER });
        }
        self.check_order(k)?;
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("s must be positive (got {s})")));
        }
        let prec = self.prec_for(k);
        if k == 0 {
            let v = self.eval(s);
            return Ok(Derivative { value: v, error: v.abs() * self.input_eps(prec) });
        }
        // effective input precision
        let p_eff = match self.source {
            Source::Plain(_) => 53,
            _ => prec,
        } as f64;
        let mut h = s * 2f64.powf(-p_eff / (2.0 * k as f64 + 2.0));
        let cap = s / (4.0 * k as f64);
        if h > cap {
            h = cap;
        }
        let (d1, r1) = self.central_difference(k, s, h, prec);
        let (d2, r2) = self.central_difference(k, s, 2.0 * h, prec);
        // D(h) = D + c h^2 + O(h^4)
        let three = ext::from_u64(3, prec);
        let four = ext::from_u64(4, prec);
        let extrapolated = (&four * &d1 - &d2) / &three;
        let value = ext::to_f64(&extrapolated);
        let truncation = ext::to_f64(&(&d1 - &d2)).abs() / 3.0;
        let error = truncation + (4.0 * r1 + r2) / 3.0 + value.abs() * f64::EPSILON;
        if !(error <= 0.1 * value.abs()) {
            return Err(Error::PrecisionExhausted { error, magnitude: value.abs() });
        }
        Ok(Derivative { value, error })
    }

    fn input_eps(&self, prec: usize) -> f64 {
        match self.source {
            // argument rounding plus evaluation error of a double-precision evaluator
            Source::Plain(_) => 4.0 * f64::EPSILON,
            _ => 4.0 * ext::epsilon(prec),
        }
    }

    /// `sum_j (-1)^j C(k,j) L(s + (k/2 - j) h) / h^k` and its roundoff bound.
    fn central_difference(&self, k: usize, s: f64, h: f64, prec: usize) -> (Ext, f64) {
        let eps = self.input_eps(prec);
        let mut acc = ext::zero(prec);
        let mut bound = 0.0;
        let mut binom = 1.0f64;
        let hk = h.powi(k as i32);
        for j in 0..=k {
            let offset = k as f64 / 2.0 - j as f64;
            let v = match &self.source {
                Source::Extended(f) => {
                    let point = ext::from_f64(s, prec) + ext::from_f64(offset, prec) * ext::from_f64(h, prec);
                    f(&point)
                }
                _ => ext::from_f64(self.eval(s + offset * h), prec),
            };
            bound += binom * ext::to_f64(&v).abs() * eps;
            let term = &v * &ext::from_f64(binom, prec);
            acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            binom = binom * (k - j) as f64 / (j as f64 + 1.0);
        }
        (acc / ext::from_f64(hk, prec), bound / hk)
    }
}

struct ExtValue {
    value: Ext,
    error: f64,
}

/// Closed-form `k`-th derivative of a term sum:
/// `(-1)^k (p)_k coef (a+s)^{-p-k}` and `(-rate)^k coef e^{-rate s}`.
fn closed_deriv(terms: &[OracleTerm], k: usize, s: &Ext) -> ExtValue {
    let prec = s.precision();
    let mut acc = ext::zero(prec);
    let mut mag = 0.0;
    for t in terms {
        let v = match *t {
            OracleTerm::Power { coef, shift, power } => {
                let base = ext::from_f64(shift, prec) + s;
                let p = ext::from_f64(power, prec);
                let kf = ext::from_u64(k as u64, prec);
                let inv = ext::powf(&base, &-(&p + &kf));
                ext::rising_factorial(&p, k) * ext::from_f64(coef, prec) * inv
            }
            OracleTerm::Exponential { coef, rate } => {
                let r = ext::from_f64(rate, prec);
                let e = (-(&r * s)).exp();
                ext::powi(&r, k as u64) * ext::from_f64(coef, prec) * e
            }
        };
        mag += ext::to_f64(&v).abs();
        acc = if k % 2 == 0 { &acc + &v } else { &acc - &v };
    }
    ExtValue { value: acc, error: mag * (4.0 * k as f64 + 40.0) * ext::epsilon(prec) }
}

/// Sums `sum_{k=0}^{K} (-1)^k c^k / k! L^{(k)}(s)` in extended precision.
///
/// For term oracles every summand is built by a recurrence in `k`; otherwise
/// derivatives are synthesized one at a time.
fn weighted_derivative_sum(oracle: &TransformOracle, s: f64, c: f64, last: usize) -> Result<(Ext, f64, usize)> {
    oracle.check_order(last)?;
    let prec = oracle.prec_for(last.min(MAX_SYNTH_ORDER)).max(oracle.precision_bits);
    match &oracle.source {
        Source::Terms(terms) => {
            let se = ext::from_f64(s, prec);
            let ce = ext::from_f64(c, prec);
            let mut total = ext::zero(prec);
            let mut mag = 0.0;
            for t in terms {
                // a_k = c^k/k! |L_t^{(k)}(s)| >= 0, with a_{k+1}/a_k a simple ratio
                let (mut a, step): (Ext, Box<dyn Fn(usize) -> Ext>) = match *t {
                    OracleTerm::Power { coef, shift, power } => {
                        let base = ext::from_f64(shift, prec) + &se;
                        let p = ext::from_f64(power, prec);
                        let a0 = ext::from_f64(coef, prec) * ext::powf(&base, &-p.clone());
                        let ce = ce.clone();
                        (a0, Box::new(move |k: usize| &ce * (&p + ext::from_u64(k as u64, prec)) / (ext::from_u64(k as u64 + 1, prec) * &base)))
                    }
                    OracleTerm::Exponential { coef, rate } => {
                        let r = ext::from_f64(rate, prec);
                        let a0 = ext::from_f64(coef, prec) * (-(&r * &se)).exp();
                        let cr = &ce * &r;
                        (a0, Box::new(move |k: usize| &cr / ext::from_u64(k as u64 + 1, prec)))
                    }
                };
                // (-1)^k L^{(k)} has the sign of coef, so each summand is a_k
                for k in 0..=last {
                    total = &total + &a;
                    if k < last {
                        a = &a * &step(k);
                    }
                }
                mag += ext::to_f64(&a).abs();
            }
            // every summand carries O(k) rounding steps
            let err = (ext::to_f64(&total).abs() + mag) * (8.0 * last as f64 + 40.0) * ext::epsilon(prec);
            Ok((total, err, last + 1))
        }
        _ => {
            let mut total = ext::zero(prec);
            let mut err = 0.0;
            let mut coef = 1.0f64;
            for k in 0..=last {
                let d = oracle.synthesize(k, s)?;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                total = &total + &ext::from_f64(sign * coef * d.value, prec);
                err += coef * d.error;
                coef *= c / (k as f64 + 1.0);
            }
            Ok((total, err, last + 1))
        }
    }
}

fn check_point(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("x must be positive (got {x})")))
    }
}

fn certify(raw: Ext, error: f64, n: usize, terms: usize, clamp: bool) -> Result<InversionValue> {
    let raw_f = ext::to_f64(&raw);
    if !(error <= raw_f.abs().max(if clamp { 1e-300 } else { 0.0 })) && error > 1e-300 {
        return Err(Error::PrecisionExhausted { error, magnitude: raw_f.abs() });
    }
    let value = if clamp { raw_f.clamp(0.0, 1.0) } else { raw_f };
    Ok(InversionValue { value, raw: raw_f, certified_error: error, n, terms })
}

fn ext_transform(d: &Distribution1D, s: &Ext) -> Ext {
    let prec = s.precision().max(64);
    let c = |x: f64| ext::from_f64(x, prec);
    // exact intermediates (ln 1, exp 0) carry unlimited precision, which exp rejects
    let exp_neg = |x: Ext| (-x).with_precision(prec).value().exp();
    let mut acc = ext::zero(prec);
    for a in d.atoms() {
        acc += c(a.mass) * exp_neg(c(a.location) * s);
    }
    for (w, law) in d.continuous_components() {
        let v = match *law {
            ContinuousLaw::Exponential { rate } => c(rate) / (c(rate) + s),
            ContinuousLaw::Gamma { rate, shape } => ext::powf(&(c(rate) / (c(rate) + s)), &c(shape)),
            ContinuousLaw::PositiveStable { alpha } => exp_neg(ext::powf(s, &c(alpha))),
        };
        acc += c(*w) * v;
    }
    for (w, law) in d.singular_components() {
        let v = match law {
            SingularLaw::Cantor => {
                // prod_k (1 + e^{-x_k})/2 with x_k = 2s/3^k; once x_k is below
                // the working precision the tail is exp(-(3/4) x_k)
                let three = c(3.0);
                let half = c(0.5);
                let mut x = c(2.0) * s / &three;
                let mut prod = ext::one(prec);
                let tiny = ext::epsilon(prec);
                while ext::to_f64(&x) > tiny {
                    prod *= &half * (ext::one(prec) + exp_neg(x.clone()));
                    x /= &three;
                }
                prod * exp_neg(c(0.75) * x)
            }
        };
        acc += c(*w) * v;
    }
    acc
}

/// `((-1)^n / n!) (n/x)^{n+1} L^{(n)}(n/x)`.
pub fn post_widder_density(oracle: &TransformOracle, x: f64, n: usize) -> Result<InversionValue> {
    check_point(x)?;
    oracle.check_order(n)?;
    let prec = oracle.prec_for(n.min(MAX_SYNTH_ORDER)).max(oracle.precision_bits);
    let xe = ext::from_f64(x, prec);
    let s = ext::from_u64(n.max(1) as u64, prec) / &xe;
    let s = if n == 0 { ext::one(prec) / &xe } else { s };
    let (d, err) = match &oracle.source {
        Source::Terms(terms) => {
            let d = closed_deriv(terms, n, &s);
            (d.value, d.error)
        }
        _ => {
            let d = oracle.synthesize(n, ext::to_f64(&s))?;
            (ext::from_f64(d.value, prec), d.error)
        }
    };
    // (n/x)^{n+1} / n!, exactly rounded in extended precision
    let scale = ext::powi(&s, n as u64 + 1) / ext::factorial(n, prec);
    let signed = if n % 2 == 0 { d } else { -d };
    let raw = &scale * &signed;
    let scale_f = ext::to_f64(&scale);
    let rel_round = (2.0 * n as f64 + 8.0) * ext::epsilon(prec);
    let error = scale_f * err + ext::to_f64(&raw).abs() * rel_round;
    certify(raw, error, n, 1, false)
}

/// Feller's first form: `sum_{k <= n x} (-1)^k (n^k / k!) L^{(k)}(n)`,
/// including `k = floor(n x)`.
pub fn feller_cdf(oracle: &TransformOracle, x: f64, n: usize) -> Result<InversionValue> {
    check_point(x)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let last = (n as f64 * x).floor();
    if last > MAX_CLOSED_ORDER as f64 {
        return Err(Error::DerivativeUnavailable { order: MAX_CLOSED_ORDER + 1, max: oracle.max_k });
    }
    let (sum, err, terms) = weighted_derivative_sum(oracle, n as f64, n as f64, last as usize)?;
    certify(sum, err, n, terms, true)
}

/// Feller's second form: `sum_{k=0}^{n} ((-1)^k / k!) (n/x)^k L^{(k)}(n/x)`.
pub fn feller_cdf_alt(oracle: &TransformOracle, x: f64, n: usize) -> Result<InversionValue> {
    check_point(x)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let s = n as f64 / x;
    let (sum, err, terms) = weighted_derivative_sum(oracle, s, s, n)?;
    certify(sum, err, n, terms, true)
}

/// Partial sums of `sum_n f^{(n)}(0) / s^{n+1}` against a reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatsonReport {
    pub s: f64,
    /// `partial_sums[N]` uses derivatives `0..=N`.
    pub partial_sums: Vec<f64>,
    /// `|reference - partial_sums[N]|`, when a reference is given.
    pub residuals: Option<Vec<f64>>,
    /// Set when the terms are not decreasing at the end: `s` is too small for
    /// the expansion to say anything.
    pub small_s: bool,
}

pub fn watson_check(derivs_at_zero: &[f64], s: f64, n_max: usize, reference: Option<f64>) -> WatsonReport {
    let count = (n_max + 1).min(derivs_at_zero.len());
    let mut partial = Vec::with_capacity(count);
    let mut sum = 0.0;
    let mut pow = 1.0 / s;
    let mut last_terms = [0.0f64; 2];
    for d in derivs_at_zero.iter().take(count) {
        let term = d * pow;
        sum += term;
        partial.push(sum);
        last_terms = [last_terms[1], term.abs()];
        pow /= s;
    }
    let small_s = !(s > 1.0) || (count >= 2 && last_terms[1] > last_terms[0] && last_terms[0] > 0.0);
    let residuals = reference.map(|r| partial.iter().map(|p| (r - p).abs()).collect());
    WatsonReport { s, partial_sums: partial, residuals, small_s }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> TransformOracle {
        TransformOracle::from_terms(vec![OracleTerm::Power { coef: 1.0, shift: 1.0, power: 1.0 }]).unwrap()
    }

    #[test]
    fn closed_derivatives_of_exponential() {
        let o = exp1();
        let d = o.deriv(3, 1.0).unwrap();
        // -3!/(2^4)
        assert!((d.value + 6.0 / 16.0).abs() < 1e-15);
        assert_eq!(o.deriv(0, 2.0).unwrap().value, 1.0 / 3.0);
    }

    #[test]
    fn post_widder_matches_its_closed_form() {
        // for L(s) = 1/(1+s): ((n/x)/(n/x + 1))^{n+1} = (n/(n+x))^{n+1}
        let o = exp1();
        for &n in &[1usize, 8, 64, 500] {
            let v = post_widder_density(&o, 1.0, n).unwrap();
            let expected = (-(n as f64 + 1.0) * (1.0 / n as f64).ln_1p()).exp();
            assert!((v.value - expected).abs() < 1e-14 * expected, "n={n}: {} vs {expected}", v.value);
        }
    }

    #[test]
    fn post_widder_reciprocal_is_one() {
        let o = TransformOracle::from_terms(vec![OracleTerm::Power { coef: 1.0, shift: 0.0, power: 1.0 }]).unwrap();
        for &(x, n) in &[(0.3, 5usize), (2.0, 40), (7.5, 101)] {
            assert_eq!(post_widder_density(&o, x, n).unwrap().value, 1.0);
        }
        // n = 0 is (1/x) L(1/x)
        let v = post_widder_density(&exp1(), 2.0, 0).unwrap();
        assert!((v.value - 0.5 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn feller_geometric_closed_form() {
        let o = exp1();
        let v = feller_cdf(&o, 1.0, 100).unwrap();
        let expected = 1.0 - (100.0f64 / 101.0).powi(101);
        assert!((v.value - expected).abs() < 1e-14);
        let far = feller_cdf(&o, 50.0, 10).unwrap();
        assert!((far.value - 1.0).abs() < 1e-6);
        let alt = feller_cdf_alt(&o, 1.0, 100).unwrap();
        let expected_alt = 1.0 - (100.0f64 / 101.0).powi(101);
        assert!((alt.value - expected_alt).abs() < 1e-14);
    }

    #[test]
    fn feller_point_mass_at_zero() {
        let o = TransformOracle::from_terms(vec![OracleTerm::Exponential { coef: 1.0, rate: 0.0 }]).unwrap();
        assert_eq!(feller_cdf(&o, 1.0, 5).unwrap().value, 1.0);
    }

    #[test]
    fn synthesized_derivatives() {
        let o = TransformOracle::from_fn(|s| 1.0 / (1.0 + s));
        let d = o.deriv(1, 1.0).unwrap();
        assert!((d.value + 0.25).abs() < 1e-10, "{d:?}");
        let e = TransformOracle::from_ext_fn(|s: &Ext| (-s.clone()).exp());
        let d = e.deriv(3, 2.0).unwrap();
        assert!((d.value + (-2.0f64).exp()).abs() < 1e-8, "{d:?}");
        let plain = TransformOracle::from_fn(|s: f64| (-s).exp());
        let d = plain.deriv(3, 2.0).unwrap();
        assert!((d.value + (-2.0f64).exp()).abs() < 1e-8, "{d:?}");
        assert!((d.value + (-2.0f64).exp()).abs() <= d.error);
    }

    #[test]
    fn oscillatory_input_exhausts_precision() {
        let o = TransformOracle::from_fn(|s: f64| (1e6 * s).sin() * 1e-3 + 1.0 / (1.0 + s));
        assert!(matches!(o.deriv(12, 1.0), Err(Error::PrecisionExhausted { .. })));
    }

    #[test]
    fn order_cap() {
        let o = TransformOracle::from_fn(|s| 1.0 / (1.0 + s));
        assert_eq!(o.deriv(13, 1.0), Err(Error::DerivativeUnavailable { order: 13, max: 12 }));
    }

    #[test]
    fn watson_exact_for_exponential() {
        let derivs: Vec<f64> = (0..=30).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = watson_check(&derivs, 2.0, 30, Some(1.0 / 3.0));
        assert!(r.residuals.unwrap()[30] < 1e-8);
        assert!(!r.small_s);
        let one = watson_check(&[1.0, 0.0, 0.0], 5.0, 2, Some(0.2));
        assert_eq!(one.partial_sums[0], 0.2);
        let lin = watson_check(&[0.0, 1.0, 0.0], 10.0, 2, Some(0.01));
        assert!((lin.partial_sums[1] - 0.01).abs() < 1e-18);
        assert!(watson_check(&derivs, 0.5, 30, None).small_s);
    }
}
