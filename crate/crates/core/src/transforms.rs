//! Laplace–Stieltjes transforms `E exp(-s . X)` by four routes:
//!
//! * `direct`: atoms plus the density integrated against `exp(-s x)` (1-D);
//! * `carson`: `(prod s_i) int H(x) exp(-s . x) dx`, which needs only the CDF;
//! * `survival`: `(prod s_i) int Hbar(x) exp(-s . x) dx = E prod (1 - exp(-s_i X_i))`,
//!   unwound by inclusion–exclusion over the marginals;
//! * `closed`: catalog formulas.
//!
//! Integrals over `[0, inf)^n` are truncated to a box `[0, T_1] x ... x [0, T_n]`
//! whose neglected part is bounded by `1 - prod (1 - exp(-s_i T_i))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Distribution1D, JointDist};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_box, QuadOptions};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Auto,
    Direct,
    Carson,
    Survival,
    #[serde(rename = "closed")]
    ClosedForm,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Auto => "auto",
            Route::Direct => "direct",
            Route::Carson => "carson",
            Route::Survival => "survival",
            Route::ClosedForm => "closed",
        })
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Route::Auto),
            "direct" => Ok(Route::Direct),
            "carson" => Ok(Route::Carson),
            "survival" => Ok(Route::Survival),
            "closed" | "closed-form" | "closed_form" => Ok(Route::ClosedForm),
            other => Err(Error::InvalidArgument(format!(
                "unknown route `{other}` (expected auto, direct, carson, survival or closed)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransformRequest<'a> {
    pub distribution: &'a Distribution,
    pub s: Vec<f64>,
    pub route: Route,
    pub tol: f64,
    /// Overrides the truncation point on every axis.
    pub truncation: Option<f64>,
}

impl<'a> TransformRequest<'a> {
    pub fn new(distribution: &'a Distribution, s: Vec<f64>) -> Self {
        TransformRequest { distribution, s, route: Route::Auto, tol: DEFAULT_TOL, truncation: None }
    }

    pub fn route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn truncation(mut self, t: f64) -> Self {
        self.truncation = Some(t);
        self
    }

    pub fn evaluate(&self) -> Result<TransformValue> {
        check_args(self.distribution.dim(), &self.s, self.tol)?;
        if let Some(t) = self.truncation {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("truncation {t} must be positive")));
            }
        }
        let d = self.distribution;
        let opts = Settings { tol: self.tol, truncation: self.truncation };
        match self.route {
            Route::Auto | Route::ClosedForm => closed_form_ls(d, &self.s),
            Route::Direct => match d {
                Distribution::Univariate(u) => direct(u, self.s[0], opts),
                Distribution::Joint(_) => Err(Error::NoDensityRoute),
            },
            Route::Carson => carson(d, &self.s, opts),
            Route::Survival => survival_route(d, &self.s, opts),
        }
    }
}

/// A transform value with its certified error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformValue {
    pub value: f64,
    pub est_error: f64,
    pub route: Route,
    /// Integrand evaluations spent.
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Settings {
    tol: f64,
    truncation: Option<f64>,
}

fn check_args(dim: usize, s: &[f64], tol: f64) -> Result<()> {
    if s.len() != dim {
        return Err(Error::GridDimensionMismatch { dist: dim, grids: s.len() });
    }
    if let Some(bad) = s.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!("s must be positive (got {bad})")));
    }
    if !(tol > 0.0 && tol <= MAX_TOL) {
        return Err(Error::InvalidArgument(format!("tol {tol} must lie in (0, {MAX_TOL}]")));
    }
    Ok(())
}

/// Truncation point for one axis: the integrand weight `s exp(-s x)` beyond
/// `T` has mass `exp(-s T) <= tol / (4 dim)`, and `T >= 20/s`. The 0.9999
/// quantile extends `T` when it is known.
pub fn truncation_point(s: f64, tol: f64, dim: usize, quantile: Option<f64>) -> f64 {
    let t = (20.0 / s).max((4.0 * dim as f64 / tol).ln() / s);
    match quantile {
        Some(q) if q.is_finite() => t.max(q),
        _ => t,
    }
}

/// Closed-form transform; `est_error` is the series truncation bound.
pub fn closed_form_ls(dist: &Distribution, s: &[f64]) -> Result<TransformValue> {
    let (value, est_error) = dist.closed_form_ls(s)?;
    Ok(TransformValue { value, est_error, route: Route::ClosedForm, evaluations: 0 })
}

/// `sum_atoms m e^{-s a} + int_0^T f(x) e^{-sx} dx`, with tail bound `e^{-sT}`.
pub fn ls_direct(dist: &Distribution1D, s: f64, tol: f64) -> Result<TransformValue> {
    check_args(1, &[s], tol)?;
    direct(dist, s, Settings { tol, truncation: None })
}

fn direct(dist: &Distribution1D, s: f64, opts: Settings) -> Result<TransformValue> {
    if !dist.singular_components().is_empty() {
        return Err(Error::NoDensityRoute);
    }
    let atoms: f64 = dist.atoms().iter().map(|a| a.mass * (-s * a.location).exp()).sum();
    if dist.continuous_components().is_empty() {
        return Ok(TransformValue { value: atoms, est_error: 0.0, route: Route::Direct, evaluations: 0 });
    }
    let t = opts.truncation.unwrap_or_else(|| truncation_point(s, opts.tol, 1, dist.quantile_hint()));
    let tail = (-s * t).exp() * dist.ac_weight();
    let q = integrate(|x| dist.ac_density(x) * (-s * x).exp(), 0.0, t, &[], QuadOptions::absolute(0.5 * opts.tol))?;
    Ok(TransformValue { value: atoms + q.value, est_error: q.error + tail, route: Route::Direct, evaluations: q.evaluations })
}

/// Laplace–Carson route: `(prod s_i) int H(x) exp(-s . x) dx` over `R_+^n`.
pub fn ls_carson(dist: &Distribution, s: &[f64], tol: f64) -> Result<TransformValue> {
    check_args(dist.dim(), s, tol)?;
    carson(dist, s, Settings { tol, truncation: None })
}

fn carson(dist: &Distribution, s: &[f64], opts: Settings) -> Result<TransformValue> {
    let all: Vec<usize> = (0..dist.dim()).collect();
    let r = weighted_integral(dist, &all, s, Kind::Cdf, opts)?;
    Ok(TransformValue { value: r.value, est_error: r.error, route: Route::Carson, evaluations: r.evaluations })
}

/// Survival route. In two dimensions this is
/// `L_H(s,t) = st int int Hbar e^{-sx-ty} - 1 + L_F(s) + L_G(t)`, and in
/// general `E prod (1 - e^{-s_i X_i}) = (prod s_i) int Hbar e^{-s . x}`
/// expanded over all marginals. Marginal transforms use the Carson route.
pub fn ls_survival_route(dist: &Distribution, s: &[f64], tol: f64) -> Result<TransformValue> {
    check_args(dist.dim(), s, tol)?;
    survival_route(dist, s, Settings { tol, truncation: None })
}

/// Two-dimensional form of [`ls_survival_route`].
pub fn ls_survival_route_2d(dist: &JointDist, s: f64, t: f64, tol: f64) -> Result<TransformValue> {
    if dist.dim() != 2 {
        return Err(Error::GridDimensionMismatch { dist: dist.dim(), grids: 2 });
    }
    ls_survival_route(&Distribution::Joint(dist.clone()), &[s, t], tol)
}

fn survival_route(dist: &Distribution, s: &[f64], opts: Settings) -> Result<TransformValue> {
    let n = dist.dim();
    let all: Vec<usize> = (0..n).collect();
    // budget: half to the survival integral, the rest shared by the 2^n - 2 marginals
    let marginals = (1usize << n) - 2;
    let main_opts = Settings { tol: if marginals == 0 { opts.tol } else { 0.5 * opts.tol }, ..opts };
    let main = weighted_integral(dist, &all, s, Kind::Survival, main_opts)?;
    let sub_opts = Settings { tol: 0.5 * opts.tol / marginals.max(1) as f64, ..opts };
    // L_H = (-1)^n [ (prod s) int Hbar - 1 - sum_{proper I != {}} (-1)^|I| L_{H_I} ]
    let mut inner = main.value - 1.0;
    let mut err = main.error;
    let mut evals = main.evaluations;
    for mask in 1u32..((1u32 << n) - 1) {
        let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let s_sub: Vec<f64> = subset.iter().map(|&i| s[i]).collect();
        let r = weighted_integral(dist, &subset, &s_sub, Kind::Cdf, sub_opts)?;
        if subset.len() % 2 == 1 {
            inner += r.value;
        } else {
            inner -= r.value;
        }
        err += r.error;
        evals += r.evaluations;
    }
    let value = if n % 2 == 0 { inner } else { -inner };
    Ok(TransformValue { value, est_error: err, route: Route::Survival, evaluations: evals })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Cdf,
    Survival,
}

struct Integral {
    value: f64,
    error: f64,
    evaluations: usize,
}

/// Breakpoints on `local` axis of the marginal on `subset`.
fn marginal_breaks(dist: &Distribution, subset: &[usize], local: usize, prefix: &[f64]) -> Vec<f64> {
    match dist {
        Distribution::Univariate(u) => u.breakpoints(),
        Distribution::Joint(j) => {
            if subset.len() == j.dim() {
                j.breakpoints(local, prefix)
            } else if subset.len() == 2 && matches!(j.kind(), crate::dist::JointKind::Product(_)) {
                j.marginal_breakpoints(subset[local])
            } else if subset.len() == 1 {
                j.marginal_breakpoints(subset[0])
            } else {
                Vec::new()
            }
        }
    }
}

/// `(prod s_i) int_{[0,T]} G(x) exp(-s . x) dx` where `G` is the CDF or the
/// survival function of the marginal on `subset`. For the CDF the neglected
/// region is filled in with `G = 1` exactly.
fn weighted_integral(dist: &Distribution, subset: &[usize], s: &[f64], kind: Kind, opts: Settings) -> Result<Integral> {
    let k = subset.len();
    let n = dist.dim();
    let t: Vec<f64> = subset
        .iter()
        .zip(s)
        .map(|(&axis, &si)| {
            opts.truncation.unwrap_or_else(|| truncation_point(si, opts.tol, k, dist.marginal_quantile_hint(axis)))
        })
        .collect();
    let scale: f64 = s.iter().product();
    // mass of the weight outside the box
    let outside = 1.0 - s.iter().zip(&t).map(|(si, ti)| -(-si * ti).exp_m1()).product::<f64>();
    let fill = if kind == Kind::Cdf { outside } else { 0.0 };

    let fill_value = if kind == Kind::Cdf { f64::INFINITY } else { f64::NEG_INFINITY };
    let eval = |x: &[f64]| -> f64 {
        let mut full = [fill_value; 4];
        for (&axis, &v) in subset.iter().zip(x) {
            full[axis] = v;
        }
        let g = match kind {
            Kind::Cdf => dist.cdf(&full[..n]),
            Kind::Survival => dist.survival(&full[..n]),
        };
        let e: f64 = s.iter().zip(x).map(|(si, xi)| si * xi).sum();
        g * (-e).exp()
    };
    let quad_tol = 0.5 * opts.tol / scale;
    let q = if k == 1 {
        let cuts = marginal_breaks(dist, subset, 0, &[]);
        integrate(|x| eval(&[x]), 0.0, t[0], &cuts, QuadOptions::absolute(quad_tol))?
    } else {
        let bounds: Vec<(f64, f64)> = t.iter().map(|&ti| (0.0, ti)).collect();
        let breaks = |axis: usize, prefix: &[f64]| marginal_breaks(dist, subset, axis, prefix);
        integrate_box(&eval, &bounds, &breaks, quad_tol)?
    };
    Ok(Integral {
        value: scale * q.value + fill,
        error: scale * q.error + outside + dist.evaluator_error(),
        evaluations: q.evaluations,
    })
}

/// Outcome of checking the Carson identity and its inclusion–exclusion
/// expansion at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub s: Vec<f64>,
    pub tol: f64,
    /// Closed form where available, otherwise the direct route.
    pub reference: TransformValue,
    pub carson: TransformValue,
    /// `|reference - carson|`.
    pub carson_gap: f64,
    pub carson_pass: bool,
    /// Present for dimensions up to 3.
    pub expanded: Option<ExpandedIdentity>,
    pub pass: bool,
}

/// Three evaluations of `E prod (1 - exp(-s_i X_i))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpandedIdentity {
    /// `1 + sum_{I != {}} (-1)^|I| L_{H_I}(s_I)` from the reference transforms.
    pub lhs_expectation: f64,
    /// `(prod s_i) int Hbar(x) exp(-s . x) dx` by quadrature.
    pub rhs_survival: f64,
    /// `1 + sum_{I != {}} (-1)^|I| (prod_{i in I} s_i) L_{H_I}(s_I)` with every
    /// `L_{H_I}` a Carson integral of the marginal CDF.
    pub rhs_marginal_cdfs: f64,
    pub survival_gap: f64,
    pub marginal_gap: f64,
    pub pass: bool,
}

/// Checks `L_H = (prod s_i) L_H^{Carson}` and, for `dim <= 3`, the expansion
/// of `E prod (1 - exp(-s_i X_i))` three ways. Quadratures run at `tol/10`;
/// each gap passes when it is at most `tol`.
pub fn verify_identity(dist: &Distribution, s: &[f64], tol: f64) -> Result<IdentityReport> {
    check_args(dist.dim(), s, tol)?;
    let qtol = (0.1 * tol).min(MAX_TOL);
    let opts = Settings { tol: qtol, truncation: None };
    let reference = reference_ls(dist, s, opts)?;
    let carson_value = carson(dist, s, opts)?;
    let carson_gap = (reference.value - carson_value.value).abs();
    let carson_pass = carson_gap <= tol;

    let n = dist.dim();
    let expanded = if n <= 3 {
        let all: Vec<usize> = (0..n).collect();
        let rhs15 = weighted_integral(dist, &all, s, Kind::Survival, opts)?;
        let mut lhs = 1.0;
        let mut rhs19 = 1.0;
        for mask in 1u32..(1u32 << n) {
            let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let sign = if subset.len() % 2 == 1 { -1.0 } else { 1.0 };
            let mut s_zeroed = vec![0.0; n];
            for &i in &subset {
                s_zeroed[i] = s[i];
            }
            lhs += sign * marginal_reference(dist, &s_zeroed, &subset, opts)?;
            let s_sub: Vec<f64> = subset.iter().map(|&i| s[i]).collect();
            rhs19 += sign * weighted_integral(dist, &subset, &s_sub, Kind::Cdf, opts)?.value;
        }
        let survival_gap = (lhs - rhs15.value).abs();
        let marginal_gap = (lhs - rhs19).abs();
        Some(ExpandedIdentity {
            lhs_expectation: lhs,
            rhs_survival: rhs15.value,
            rhs_marginal_cdfs: rhs19,
            survival_gap,
            marginal_gap,
            pass: survival_gap <= tol && marginal_gap <= tol,
        })
    } else {
        None
    };
    let pass = carson_pass && expanded.map_or(true, |e| e.pass);
    Ok(IdentityReport { s: s.to_vec(), tol, reference, carson: carson_value, carson_gap, carson_pass, expanded, pass })
}

fn reference_ls(dist: &Distribution, s: &[f64], opts: Settings) -> Result<TransformValue> {
    match closed_form_ls(dist, s) {
        Ok(v) => Ok(v),
        Err(Error::NoClosedForm(_)) => match dist {
            Distribution::Univariate(u) => direct(u, s[0], opts),
            Distribution::Joint(_) => Err(Error::NoClosedForm(dist.spec().kind.clone())),
        },
        Err(e) => Err(e),
    }
}

/// Reference transform of the marginal on `subset`: the closed form with the
/// other arguments set to 0.
fn marginal_reference(dist: &Distribution, s_zeroed: &[f64], subset: &[usize], opts: Settings) -> Result<f64> {
    match dist.closed_form_ls(s_zeroed) {
        Ok((v, _)) => Ok(v),
        Err(Error::NoClosedForm(_)) => {
            let s_sub: Vec<f64> = subset.iter().map(|&i| s_zeroed[i]).collect();
            Ok(weighted_integral(dist, subset, &s_sub, Kind::Cdf, opts)?.value)
        }
        Err(e) => Err(e),
    }
}
