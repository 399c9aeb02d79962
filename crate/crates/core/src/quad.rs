//! Adaptive Gauss–Kronrod quadrature (7-point Gauss embedded in the
//! 15-point Kronrod rule) with global bisection, plus a nested tensor
//! version for up to four axes.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl QuadOptions {
    pub fn absolute(abs_tol: f64) -> Self {
        QuadOptions { abs_tol, rel_tol: 0.0, max_panels: 4000 }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One Gauss–Kronrod panel: (Kronrod value, error estimate, roundoff floor).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (result, err, floor)
}

/// Integrates `f` over `[a, b]`, starting from panels split at `breakpoints`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (hi - lo));

    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();
    let mut frozen = Vec::new();
    let mut left = lo;
    for right in cuts.into_iter().chain(std::iter::once(hi)) {
        let (value, error, floor) = gk15(&mut f, left, right);
        evaluations += 15;
        heap.push(Panel { a: left, b: right, value, error, floor });
        left = right;
    }

    loop {
        let total: f64 = heap.iter().chain(frozen.iter()).map(|p: &Panel| p.value).sum();
        let err: f64 = heap.iter().chain(frozen.iter()).map(|p: &Panel| p.error).sum();
        if err <= opts.target(total) {
            return Ok(QuadResult { value: sign * total, error: err, evaluations });
        }
        if heap.len() + frozen.len() >= opts.max_panels {
            return Err(Error::QuadratureNonConvergence { estimate: sign * total, error: err, tol: opts.target(total) });
        }
        let Some(worst) = heap.pop() else {
            // Every panel is at the resolution limit.
            return Err(Error::QuadratureNonConvergence { estimate: sign * total, error: err, tol: opts.target(total) });
        };
        let mid = 0.5 * (worst.a + worst.b);
        // Freeze panels whose estimate is pure roundoff or that can no longer
        // be split in floating point.
        let width = worst.b - worst.a;
        if worst.error <= worst.floor || mid <= worst.a || mid >= worst.b || width <= 8.0 * f64::EPSILON * worst.b.abs().max(worst.a.abs()) {
            frozen.push(worst);
            continue;
        }
        let (v1, e1, f1) = gk15(&mut f, worst.a, mid);
        let (v2, e2, f2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, floor: f1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, floor: f2 });
    }
}

/// Breakpoints for axis `axis` given the already-fixed outer coordinates
/// `outer` (length `axis`).
pub type BreakFn<'a> = dyn Fn(usize, &[f64]) -> Vec<f64> + Sync + 'a;

/// Nested adaptive integration of `f` over the box `bounds`.
///
/// Half of the absolute tolerance goes to each outer axis and the rest is
/// handed inward, scaled by the outer box length, so the accumulated inner
/// error stays within budget. Inner levels that stall report their error
/// upward; only the total is checked against `abs_tol`.
pub fn integrate_box(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    bounds: &[(f64, f64)],
    breaks: &BreakFn<'_>,
    abs_tol: f64,
) -> Result<QuadResult> {
    let dim = bounds.len();
    if dim == 0 {
        return Err(Error::InvalidArgument("empty integration box".into()));
    }
    if dim > 4 {
        return Err(Error::DimensionTooLarge(dim));
    }
    let counter = Cell::new(0usize);
    let mut point = vec![0.0; dim];
    let res = nested(f, bounds, breaks, abs_tol, 0, &mut point, &counter)?;
    if !(res.error <= abs_tol) {
        return Err(Error::QuadratureNonConvergence { estimate: res.value, error: res.error, tol: abs_tol });
    }
    Ok(QuadResult { value: res.value, error: res.error, evaluations: counter.get() })
}

fn soften(res: Result<QuadResult>) -> Result<QuadResult> {
    match res {
        Err(Error::QuadratureNonConvergence { estimate, error, .. }) => {
            Ok(QuadResult { value: estimate, error, evaluations: 0 })
        }
        other => other,
    }
}

fn nested(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    bounds: &[(f64, f64)],
    breaks: &BreakFn<'_>,
    tol: f64,
    axis: usize,
    point: &mut [f64],
    counter: &Cell<usize>,
) -> Result<QuadResult> {
    let dim = bounds.len();
    let (a, b) = bounds[axis];
    let cuts = breaks(axis, &point[..axis]);
    if axis + 1 == dim {
        let max_panels = if dim == 1 { 4000 } else { 400 };
        return soften(integrate(
            |x| {
                point[axis] = x;
                counter.set(counter.get() + 1);
                f(point)
            },
            a,
            b,
            &cuts,
            QuadOptions::absolute(tol).with_max_panels(max_panels),
        ));
    }
    let len = (b - a).abs().max(1e-300);
    let inner_tol = 0.5 * tol / len;
    let mut inner_err = 0.0f64;
    let mut failure: Option<Error> = None;
    let max_panels = if axis == 0 { 1000 } else { 400 };
    let outer = integrate(
        |x| {
            if failure.is_some() {
                return 0.0;
            }
            point[axis] = x;
            match nested(f, bounds, breaks, inner_tol, axis + 1, point, counter) {
                Ok(r) => {
                    inner_err = inner_err.max(r.error);
                    r.value
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        a,
        b,
        &cuts,
        QuadOptions::absolute(0.5 * tol).with_max_panels(max_panels),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = soften(outer)?;
    Ok(QuadResult { value: outer.value, error: outer.error + inner_err * len, evaluations: 0 })
}
