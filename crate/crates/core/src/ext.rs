//! Thin helpers over `dashu_float::FBig` for the extended-precision paths
//! (derivative synthesis, Post–Widder/Feller sums, Müntz coefficients).

use dashu_float::FBig;
use dashu_int::IBig;

/// Binary arbitrary-precision float.
pub type Ext = FBig;

/// Default working precision in bits.
pub const DEFAULT_PRECISION_BITS: usize = 128;

/// Working precision for derivative work up to order `k_max`.
pub fn precision_for_order(k_max: usize) -> usize {
    DEFAULT_PRECISION_BITS.max(64 + 8 * k_max)
}

/// Exact conversion of a finite `f64`, then widened to `prec` bits.
pub fn from_f64(x: f64, prec: usize) -> Ext {
    assert!(x.is_finite(), "non-finite value {x} in extended arithmetic");
    let v: Ext = Ext::try_from(x).expect("finite f64 converts exactly");
    v.with_precision(prec).value()
}

pub fn from_u64(n: u64, prec: usize) -> Ext {
    Ext::from(n).with_precision(prec).value()
}

pub fn zero(prec: usize) -> Ext {
    Ext::ZERO.with_precision(prec).value()
}

pub fn one(prec: usize) -> Ext {
    Ext::ONE.with_precision(prec).value()
}

pub fn to_f64(x: &Ext) -> f64 {
    x.to_f64().value()
}

/// `base^exponent` for a positive base and real exponent.
pub fn powf(base: &Ext, exponent: &Ext) -> Ext {
    if base.repr().significand().is_zero() {
        return base.clone();
    }
    let prec = base.precision().max(exponent.precision()).max(1);
    // ln(1) comes back exact with unlimited precision, which exp rejects
    (base.ln() * exponent).with_precision(prec).value().exp().with_precision(prec).value()
}

/// `base^n` by repeated squaring.
pub fn powi(base: &Ext, mut n: u64) -> Ext {
    let prec = base.precision().max(1);
    let mut acc = one(prec);
    let mut sq = base.clone();
    while n > 0 {
        if n & 1 == 1 {
            acc = &acc * &sq;
        }
        n >>= 1;
        if n > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

/// Rising factorial `(a)_k = a (a+1) ... (a+k-1)`.
pub fn rising_factorial(a: &Ext, k: usize) -> Ext {
    let prec = a.precision();
    let mut acc = one(prec);
    let mut term = a.clone();
    let unit = one(prec);
    for _ in 0..k {
        acc = &acc * &term;
        term = &term + &unit;
    }
    acc
}

pub fn factorial(n: usize, prec: usize) -> Ext {
    let mut acc = one(prec);
    for i in 2..=n as u64 {
        acc = acc * from_u64(i, prec);
    }
    acc
}

/// Unit roundoff of a `prec`-bit binary float.
pub fn epsilon(prec: usize) -> f64 {
    2f64.powi(-(prec.min(1000) as i32))
}

/// Estimate of `log2 |x|` (about 7 significant digits), usable on values
/// beyond the `f64` range.
pub fn log2_abs(x: &Ext) -> f64 {
    if x.repr().significand().is_zero() {
        return f64::NEG_INFINITY;
    }
    dashu_float::ops::EstimatedLog2::log2_est(x) as f64
}

/// `round(x 2^bits)` as an integer (fixed point with `bits` fractional bits).
pub fn to_fixed(x: &Ext, bits: usize) -> IBig {
    let sig = x.repr().significand().clone();
    let shift = x.repr().exponent() + bits as isize;
    if shift >= 0 {
        sig << shift as usize
    } else {
        sig >> (-shift) as usize
    }
}

/// Inverse of [`to_fixed`], rounded to `f64`.
pub fn fixed_to_f64(v: IBig, bits: usize) -> f64 {
    to_f64(&Ext::from_parts(v, -(bits as isize)))
}
