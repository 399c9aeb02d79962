//! Constructive Müntz approximation of `x^q` by `span{x^{λ_1}, ..., x^{λ_n}}`
//! on `[0, 1]`.
//!
//! `Q_0(x) = x^q` and
//!
//! ```text
//! Q_n(x) = (λ_n - q) x^{λ_n} ∫_x^1 Q_{n-1}(t) t^{-1-λ_n} dt = x^q - Σ_k a_{k,n} x^{λ_k}
//! ```
//!
//! with `a_{k,n} = a_{k,n-1} (λ_n - q)/(λ_n - λ_k)` for `k < n` and
//! `a_{n,n} = 1 - Σ_{k<n} a_{k,n}`. Each step contracts the sup norm by
//! `|1 - q/λ_n|`.
//!
//! The coefficients grow like binomials before cancelling, so they are held
//! in extended precision with enough bits to absorb the cancellation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::{self, Ext};
use dashu_int::IBig;

/// How a sequence is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Primes,
    Integers,
    Custom,
}

/// Divergence evidence for `Σ 1/λ_k = ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Certificate {
    /// Known to diverge for the whole sequence.
    APriori { reason: String },
    /// Only a partial sum; no claim about divergence.
    PartialSum { partial_sum: f64, terms: usize },
}

/// Strictly increasing positive exponents. Primes and integers are generated
/// on demand; custom sequences are exactly their listed prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuntzSequence {
    kind: SequenceKind,
    values: Vec<f64>,
}

impl MuntzSequence {
    /// The first `len` primes `2, 3, 5, ...`.
    pub fn primes(len: usize) -> Self {
        MuntzSequence { kind: SequenceKind::Primes, values: first_primes(len) }
    }

    /// `1, 2, ..., len`.
    pub fn integers(len: usize) -> Self {
        MuntzSequence { kind: SequenceKind::Integers, values: (1..=len).map(|k| k as f64).collect() }
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        validate_exponents(&values)?;
        Ok(MuntzSequence { kind: SequenceKind::Custom, values })
    }

    pub fn of_kind(kind: SequenceKind, len: usize) -> Result<Self> {
        match kind {
            SequenceKind::Primes => Ok(Self::primes(len)),
            SequenceKind::Integers => Ok(Self::integers(len)),
            SequenceKind::Custom => Err(Error::InvalidSequence("custom sequences need explicit values".into())),
        }
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Materializes at least `len` terms (generated kinds only).
    pub fn extend_to(&mut self, len: usize) -> Result<()> {
        if len <= self.values.len() {
            return Ok(());
        }
        match self.kind {
            SequenceKind::Primes => self.values = first_primes(len),
            SequenceKind::Integers => self.values = (1..=len).map(|k| k as f64).collect(),
            SequenceKind::Custom => {
                return Err(Error::InvalidSequence(format!(
                    "custom sequence has {} terms, {len} requested",
                    self.values.len()
                )))
            }
        }
        Ok(())
    }

    /// The first `len` terms, materializing them if needed.
    pub fn prefix(&self, len: usize) -> Result<MuntzSequence> {
        let mut s = self.clone();
        s.extend_to(len)?;
        s.values.truncate(len);
        Ok(s)
    }

    pub fn certificate(&self) -> Certificate {
        match self.kind {
            SequenceKind::Primes => Certificate::APriori {
                reason: "sum of prime reciprocals diverges (p_j ~ j ln j)".into(),
            },
            SequenceKind::Integers => Certificate::APriori { reason: "harmonic series diverges".into() },
            SequenceKind::Custom => {
                Certificate::PartialSum { partial_sum: reciprocal_sum(&self.values), terms: self.values.len() }
            }
        }
    }
}

fn validate_exponents(values: &[f64]) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidSequence(format!("term {i} = {v} is not a positive finite number")));
        }
        if i > 0 && v <= values[i - 1] {
            return Err(Error::InvalidSequence(format!(
                "not strictly increasing at term {i}: {} then {v}",
                values[i - 1]
            )));
        }
    }
    Ok(())
}

fn reciprocal_sum(values: &[f64]) -> f64 {
    // smallest terms first
    values.iter().rev().map(|v| 1.0 / v).sum()
}

/// The first `n` primes by a sieve sized from `p_n < n (ln n + ln ln n)`.
pub fn first_primes(n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let nf = n as f64;
    let mut limit = if n < 6 { 15 } else { (nf * (nf.ln() + nf.ln().ln())).ceil() as usize + 1 };
    loop {
        let mut composite = vec![false; limit + 1];
        let mut out = Vec::with_capacity(n);
        for i in 2..=limit {
            if composite[i] {
                continue;
            }
            out.push(i as f64);
            if out.len() == n {
                return out;
            }
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
        limit *= 2;
    }
}

/// What a finite prefix says about `Σ 1/λ_k = ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub kind: SequenceKind,
    pub prefix_len: usize,
    pub partial_sum: f64,
    pub certified_divergent: bool,
    pub statement: String,
}

pub fn divergence_certificate(seq: &MuntzSequence, prefix_len: usize) -> Result<DivergenceReport> {
    let prefix = seq.prefix(prefix_len)?;
    let partial_sum = reciprocal_sum(prefix.values());
    let (certified_divergent, statement) = match seq.certificate() {
        Certificate::APriori { reason } => (true, format!("certified divergent: {reason}")),
        Certificate::PartialSum { .. } => (
            false,
            "not certifiable: divergence of the reciprocal sum cannot be decided from a finite prefix".to_string(),
        ),
    };
    Ok(DivergenceReport { kind: seq.kind, prefix_len, partial_sum, certified_divergent, statement })
}

/// `Q_n(x) = x^q - Σ a_{k,n} x^{λ_k}` with its contraction bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MuntzApproximant {
    q: f64,
    lambdas: Vec<f64>,
    coeffs: Vec<Ext>,
    precision_bits: usize,
    bound: f64,
}

impl Serialize for MuntzApproximant {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("MuntzApproximant", 5)?;
        st.serialize_field("q", &self.q)?;
        st.serialize_field("lambdas", &self.lambdas)?;
        st.serialize_field("coeffs", &self.coeffs())?;
        st.serialize_field("bound", &self.bound)?;
        st.serialize_field("precision_bits", &self.precision_bits)?;
        st.end()
    }
}

impl MuntzApproximant {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `a_{1,n}, ..., a_{n,n}` rounded to `f64`.
    pub fn coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(ext::to_f64).collect()
    }

    pub fn coeffs_ext(&self) -> &[Ext] {
        &self.coeffs
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    /// `Π_k |1 - q/λ_k|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `|a_{n,n} - (1 - Σ_{k<n} a_{k,n})|` relative to the largest coefficient,
    /// recomputed from the stored values.
    pub fn coefficient_relation_residual(&self) -> f64 {
        let Some((last, rest)) = self.coeffs.split_last() else { return 0.0 };
        let prec = self.precision_bits;
        let mut s = ext::one(prec);
        let mut scale = 1.0f64;
        for a in rest {
            s = &s - a;
            scale = scale.max(ext::to_f64(a).abs());
        }
        ext::to_f64(&(&s - last)).abs() / scale.max(ext::to_f64(last).abs())
    }
}

/// Coefficients of `Q_n` for `λ_1 < ... < λ_n`, `q` not among them.
pub fn golitschek_coeffs(q: f64, lambdas: &[f64], n: usize) -> Result<MuntzApproximant> {
    Ok(golitschek_family(q, lambdas, n)?.pop().expect("family holds Q_0..Q_n"))
}

/// `Q_0, Q_1, ..., Q_n` from a single pass of the recursion.
pub fn golitschek_family(q: f64, lambdas: &[f64], n: usize) -> Result<Vec<MuntzApproximant>> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("q must be positive (got {q})")));
    }
    if n > lambdas.len() {
        return Err(Error::InvalidSequence(format!("{n} exponents requested, {} available", lambdas.len())));
    }
    let lambdas = &lambdas[..n];
    validate_exponents(lambdas)?;
    if lambdas.contains(&q) {
        return Err(Error::QCollidesWithLambda(q));
    }
    let mut prec = ext::DEFAULT_PRECISION_BITS;
    loop {
        let (family, growth) = recursion(q, lambdas, prec);
        // the last coefficient loses about `growth` bits to cancellation
        let needed = growth.ceil() as usize + 96;
        if needed <= prec {
            let mut bound = 1.0;
            return Ok(family
                .into_iter()
                .enumerate()
                .map(|(m, coeffs)| {
                    if m > 0 {
                        bound *= (1.0 - q / lambdas[m - 1]).abs();
                    }
                    MuntzApproximant { q, lambdas: lambdas[..m].to_vec(), coeffs, precision_bits: prec, bound }
                })
                .collect());
        }
        prec = needed + 32;
    }
}

/// Runs the recursion at `prec` bits, keeping every intermediate coefficient
/// vector; also returns the worst number of bits lost to cancellation.
fn recursion(q: f64, lambdas: &[f64], prec: usize) -> (Vec<Vec<Ext>>, f64) {
    let qe = ext::from_f64(q, prec);
    let lam: Vec<Ext> = lambdas.iter().map(|&l| ext::from_f64(l, prec)).collect();
    let mut coeffs: Vec<Ext> = Vec::with_capacity(lambdas.len());
    let mut family = vec![Vec::new()];
    let mut growth = 0.0f64;
    for m in 0..lambdas.len() {
        let lm = &lam[m];
        let num = lm - &qe;
        let mut sum = ext::zero(prec);
        let mut mag = 0.0f64;
        for (k, a) in coeffs.iter_mut().enumerate() {
            *a = &*a * &num / (lm - &lam[k]);
            sum = &sum + &*a;
            mag = mag.max(ext::log2_abs(a));
        }
        let last = ext::one(prec) - sum;
        // bits lost forming the new coefficient as a difference
        let last_mag = ext::log2_abs(&last);
        let loss = if last_mag.is_finite() { (mag - last_mag).max(0.0) } else { 0.0 };
        coeffs.push(last);
        growth = growth.max(mag.max(0.0) + loss + (m as f64 + 1.0).log2());
        family.push(coeffs.clone());
    }
    (family, growth)
}

/// `a_{k,n} = Π_{j≠k} (λ_j - q)/(λ_j - λ_k)`, the closed form of the recursion.
pub fn closed_form_coeffs(q: f64, lambdas: &[f64], prec: usize) -> Vec<Ext> {
    let qe = ext::from_f64(q, prec);
    let lam: Vec<Ext> = lambdas.iter().map(|&l| ext::from_f64(l, prec)).collect();
    (0..lam.len())
        .map(|k| {
            let mut p = ext::one(prec);
            for (j, lj) in lam.iter().enumerate() {
                if j != k {
                    p = p * (lj - &qe) / (lj - &lam[k]);
                }
            }
            p
        })
        .collect()
}

/// Evaluates `Q_n(x)` for `x ∈ [0, 1]`.
pub fn qn_eval(approx: &MuntzApproximant, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("x must lie in [0, 1] (got {x})")));
    }
    Ok(Evaluator::new(approx).eval(x))
}

/// Horner evaluation of `Σ a_k x^{λ_k}` in fixed point, with the
/// coefficients scaled by `2^P`. Only this sum cancels; `x^q` is added in
/// `f64`.
struct Evaluator<'a> {
    approx: &'a MuntzApproximant,
    fixed: Vec<IBig>,
    steps: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(approx: &'a MuntzApproximant) -> Self {
        let bits = approx.precision_bits;
        let fixed = approx.coeffs.iter().map(|c| ext::to_fixed(c, bits)).collect();
        let steps = approx.lambdas.windows(2).map(|w| w[1] - w[0]).collect();
        Evaluator { approx, fixed, steps }
    }

    fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let a = self.approx;
        let prec = a.precision_bits;
        if x == 1.0 {
            let mut s = ext::one(prec);
            for c in &a.coeffs {
                s = &s - c;
            }
            return ext::to_f64(&s);
        }
        let Some(first) = a.lambdas.first() else { return x.powf(a.q) };
        let xe = ext::from_f64(x, prec);
        let lnx = std::cell::OnceCell::new();
        let fixed_pow = |d: f64| {
            let v = if d.fract() == 0.0 && d <= 64.0 {
                ext::powi(&xe, d as u64)
            } else {
                (lnx.get_or_init(|| xe.ln()) * ext::from_f64(d, prec)).exp()
            };
            ext::to_fixed(&v, prec)
        };
        let mut cache: HashMap<u64, IBig> = HashMap::new();
        let mut acc = self.fixed[self.fixed.len() - 1].clone();
        for k in (0..self.steps.len()).rev() {
            let step = self.steps[k];
            let f = cache.entry(step.to_bits()).or_insert_with(|| fixed_pow(step));
            acc = ((acc * &*f) >> prec) + &self.fixed[k];
        }
        let sum = (acc * fixed_pow(*first)) >> prec;
        x.powf(a.q) - ext::fixed_to_f64(sum, prec)
    }
}

/// Largest sampled `|Q_n|` and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub sup: f64,
    pub argmax: f64,
    pub evaluations: usize,
}

/// Sampled sup norm: a Chebyshev grid of `max(grid_size, 10 n)` points on
/// `[0, 1]`, then golden-section polish around the largest local maxima.
pub fn sup_norm_estimate(approx: &MuntzApproximant, grid_size: usize) -> Result<SupEstimate> {
    if grid_size < 100 {
        return Err(Error::InvalidArgument(format!("grid_size must be >= 100 (got {grid_size})")));
    }
    if approx.n() == 0 {
        return Ok(SupEstimate { sup: 1.0, argmax: 1.0, evaluations: 0 });
    }
    let ev = Evaluator::new(approx);
    let m = grid_size.max(10 * approx.n());
    let xs: Vec<f64> = (0..m)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (m - 1) as f64).cos()))
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| ev.eval(x).abs()).collect();
    let mut evaluations = m;
    let mut peaks: Vec<usize> = (1..m - 1).filter(|&i| vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1]).collect();
    peaks.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    peaks.truncate(3);
    let (mut best, mut argmax) = vals
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, xs[i]))
        .fold((0.0, 0.0), |acc, p| if p.0 > acc.0 { p } else { acc });
    for i in peaks {
        let (x, v, used) = golden_max(|x| ev.eval(x).abs(), xs[i - 1], xs[i + 1]);
        evaluations += used;
        if v > best {
            best = v;
            argmax = x;
        }
    }
    Ok(SupEstimate { sup: best, argmax, evaluations })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64, usize) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut used = 2;
    while (b - a) > 1e-12 * (a.abs() + b.abs()).max(1e-300) && used < 120 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        used += 1;
    }
    if fc > fd {
        (c, fc, used)
    } else {
        (d, fd, used)
    }
}

/// `Q_n` at the points `xs`, computed from the integral recursion itself
/// rather than the coefficients.
///
/// With `x = e^{-u}` and `R_m(u) = Q_m(e^{-u})` the recursion reads
/// `R_m(u) = (λ_m - q) ∫_0^u R_{m-1}(v) e^{-λ_m (u - v)} dv`, i.e.
/// `R_m' = -λ_m R_m + (λ_m - q) R_{m-1}`, `R_m(0) = 0`, `R_0 = e^{-q u}`.
/// The triangular system is integrated with classical Runge–Kutta.
pub fn qn_by_integral_recursion(q: f64, lambdas: &[f64], xs: &[f64], step: f64) -> Vec<f64> {
    let n = lambdas.len();
    let rhs = |r: &[f64], out: &mut [f64]| {
        out[0] = -q * r[0];
        for m in 1..=n {
            let l = lambdas[m - 1];
            out[m] = -l * r[m] + (l - q) * r[m - 1];
        }
    };
    let mut targets: Vec<(usize, f64)> =
        xs.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(i, &x)| (i, -x.ln())).collect();
    targets.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out = vec![0.0; xs.len()];
    let mut r = vec![0.0; n + 1];
    r[0] = 1.0;
    let mut u = 0.0;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]);
    for (idx, target) in targets {
        while u < target {
            let h = step.min(target - u);
            rhs(&r, &mut k1);
            for i in 0..=n {
                tmp[i] = r[i] + 0.5 * h * k1[i];
            }
            rhs(&tmp, &mut k2);
            for i in 0..=n {
                tmp[i] = r[i] + 0.5 * h * k2[i];
            }
            rhs(&tmp, &mut k3);
            for i in 0..=n {
                tmp[i] = r[i] + h * k3[i];
            }
            rhs(&tmp, &mut k4);
            for i in 0..=n {
                r[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            u += h;
        }
        out[idx] = r[n];
    }
    out
}
