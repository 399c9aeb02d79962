//! Transform values on Müntz grids, comparison of two such tensors, and a
//! seeded collision experiment over random finite mixtures.
//!
//! A full grid determines the law; a finite prefix can only separate laws.
//! "Indistinguishable" therefore means "not separated at this prefix and
//! tolerance", never "equal".

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{build, DistSpec, Distribution};
use crate::error::{Error, Result};
use crate::muntz::{MuntzSequence, SequenceKind};
use crate::quad::{integrate, QuadOptions};
use crate::transforms::{Route, TransformRequest, TransformValue};

/// One grid axis: the prefix that was used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub kind: SequenceKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintMeta {
    pub route: Route,
    pub tol: f64,
    pub distribution: DistSpec,
}

/// `L(m_{1,i_1}, ..., m_{d,i_d})` over all index combinations, row-major
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub dim: usize,
    pub grids: Vec<GridAxis>,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    pub est_errors: Vec<f64>,
    pub meta: FingerprintMeta,
}

impl Fingerprint {
    /// Row-major offset of a multi-index.
    pub fn offset(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.shape).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn multi_index(&self, mut offset: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for (slot, n) in idx.iter_mut().zip(&self.shape).rev() {
            *slot = offset % n;
            offset /= n;
        }
        idx
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.offset(index)]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fingerprint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("fingerprint JSON: {e}")))
    }
}

/// Evaluates the transform at every point of the product grid formed by the
/// first `prefix_lens[i]` terms of `grids[i]`.
pub fn compute_fingerprint(
    dist: &Distribution,
    grids: &[MuntzSequence],
    prefix_lens: &[usize],
    route: Route,
    tol: f64,
) -> Result<Fingerprint> {
    if grids.len() != dist.dim() {
        return Err(Error::GridDimensionMismatch { dist: dist.dim(), grids: grids.len() });
    }
    if prefix_lens.len() != grids.len() {
        return Err(Error::InvalidArgument(format!(
            "{} prefix lengths for {} grids",
            prefix_lens.len(),
            grids.len()
        )));
    }
    let mut axes = Vec::with_capacity(grids.len());
    for (g, &len) in grids.iter().zip(prefix_lens) {
        if len == 0 {
            return Err(Error::InvalidArgument("prefix lengths must be >= 1".into()));
        }
        let p = g.prefix(len)?;
        axes.push(GridAxis { kind: p.kind(), values: p.values().to_vec() });
    }
    let shape: Vec<usize> = prefix_lens.to_vec();
    let cells: usize = shape.iter().product();
    let point = |mut offset: usize| {
        let mut s = vec![0.0; shape.len()];
        for (axis, slot) in s.iter_mut().enumerate().rev() {
            *slot = axes[axis].values[offset % shape[axis]];
            offset /= shape[axis];
        }
        s
    };
    let eval = |offset: usize| -> Result<TransformValue> {
        TransformRequest::new(dist, point(offset)).route(route).tol(tol).evaluate()
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<TransformValue>> = {
        use rayon::prelude::*;
        (0..cells).into_par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<TransformValue>> = (0..cells).map(eval).collect();
    let mut values = Vec::with_capacity(cells);
    let mut est_errors = Vec::with_capacity(cells);
    for r in results {
        let v = r?;
        values.push(v.value);
        est_errors.push(v.est_error);
    }
    Ok(Fingerprint {
        dim: dist.dim(),
        grids: axes,
        shape,
        values,
        est_errors,
        meta: FingerprintMeta { route, tol, distribution: dist.spec().clone() },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Not separated on this prefix at this tolerance. Not a proof of equality.
    Indistinguishable,
    Distinct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub max_delta: f64,
    pub argmax: Vec<usize>,
    /// `tol` plus the two value errors at the argmax.
    pub threshold: f64,
    /// `threshold - max_delta` for indistinguishable pairs, `max_delta -
    /// threshold` for distinct ones; the worst cell decides.
    pub margin: f64,
    pub verdict: Verdict,
    pub note: String,
}

/// Compares two fingerprints on identical grids.
pub fn compare(a: &Fingerprint, b: &Fingerprint, tol: f64) -> Result<Comparison> {
    if a.shape != b.shape || a.grids != b.grids {
        return Err(Error::GridMismatch);
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tol {tol} must be >= 0")));
    }
    let mut max_delta = 0.0;
    let mut arg = 0;
    // the verdict is decided cell by cell against that cell's own error budget
    let mut excess = f64::NEG_INFINITY;
    let mut excess_at = 0;
    for i in 0..a.values.len() {
        let d = (a.values[i] - b.values[i]).abs();
        if d > max_delta {
            max_delta = d;
            arg = i;
        }
        let e = d - (tol + a.est_errors[i] + b.est_errors[i]);
        if e > excess {
            excess = e;
            excess_at = i;
        }
    }
    let distinct = excess > 0.0;
    let at = if distinct { excess_at } else { arg };
    let threshold = tol + a.est_errors[at] + b.est_errors[at];
    let (verdict, note) = if distinct {
        (Verdict::Distinct, "transform values differ beyond the combined error budget".to_string())
    } else {
        (
            Verdict::Indistinguishable,
            format!(
                "indistinguishable on this {}-cell prefix at tol {tol:e}; a finite prefix cannot prove equality",
                a.values.len()
            ),
        )
    };
    Ok(Comparison { max_delta, argmax: a.multi_index(arg), threshold, margin: excess.abs(), verdict, note })
}

/// Outcome of [`collision_experiment`]; failures are counted, not raised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub trials: usize,
    pub grid: GridAxis,
    pub tol: f64,
    pub equal_pairs: usize,
    pub unequal_pairs: usize,
    /// Unequal pairs reported indistinguishable.
    pub false_merges: usize,
    /// Equal pairs reported distinct.
    pub false_splits: usize,
    /// Smallest margin over all pairs (`None` when `trials == 0`).
    pub min_margin: Option<f64>,
    /// Smallest `max_delta` among unequal pairs.
    pub min_separation: Option<f64>,
    /// Smallest total-variation distance among unequal pairs.
    pub min_total_variation: Option<f64>,
    pub failures: Vec<String>,
}

/// Smallest total-variation distance accepted for an unequal pair.
pub const MIN_TOTAL_VARIATION: f64 = 0.01;

const ATOM_SITES: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq)]
enum Part {
    Atom(f64),
    Exp(f64),
    Gamma(f64, f64),
}

impl Part {
    fn spec(&self) -> DistSpec {
        match *self {
            Part::Atom(at) => DistSpec::new("point-mass").with_param("at", at),
            Part::Exp(rate) => DistSpec::new("exponential").with_param("lambda", rate),
            Part::Gamma(rate, shape) => DistSpec::new("gamma").with_param("lambda", rate).with_param("q", shape),
        }
    }

    fn density(&self, x: f64) -> f64 {
        match *self {
            Part::Atom(_) => 0.0,
            Part::Exp(rate) => rate * (-rate * x).exp(),
            Part::Gamma(rate, shape) => crate::special::gamma_pdf(shape, rate, x),
        }
    }
}

type Mixture = Vec<(f64, Part)>;

fn random_mixture(rng: &mut ChaCha8Rng) -> Mixture {
    let k = rng.random_range(1..=4usize);
    // Dirichlet(1, ..., 1) as normalized unit exponentials
    let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let log_rate = |rng: &mut ChaCha8Rng| (rng.random_range(0.1f64.ln()..=10f64.ln())).exp();
    raw.into_iter()
        .map(|w| {
            let part = match rng.random_range(0..3u8) {
                0 => Part::Atom(ATOM_SITES[rng.random_range(0..ATOM_SITES.len())]),
                1 => Part::Exp(log_rate(rng)),
                _ => {
                    let rate = log_rate(rng);
                    Part::Gamma(rate, rng.random_range(0.5..5.0))
                }
            };
            (w / total, part)
        })
        .collect()
}

fn mixture_spec(m: &Mixture) -> DistSpec {
    let entries = m.iter().map(|(w, p)| (*w, p.spec())).collect();
    DistSpec::new("mixture").with_mixture(entries)
}

/// The same law written differently: every component split in two and the
/// list reversed.
fn rewrite(m: &Mixture, rng: &mut ChaCha8Rng) -> Mixture {
    let mut out = Vec::with_capacity(2 * m.len());
    for (w, p) in m.iter().rev() {
        let f = rng.random_range(0.2..0.8);
        out.push((w * f, p.clone()));
        out.push((w * (1.0 - f), p.clone()));
    }
    out
}

/// Total variation between two mixtures: half the atom mass difference plus
/// half the L1 distance of the densities.
fn total_variation(a: &Mixture, b: &Mixture) -> Result<f64> {
    let mut atoms = 0.0;
    for &site in &ATOM_SITES {
        let mass = |m: &Mixture| -> f64 {
            m.iter().filter(|(_, p)| *p == Part::Atom(site)).map(|(w, _)| w).sum()
        };
        atoms += (mass(a) - mass(b)).abs();
    }
    let density = |m: &Mixture, x: f64| -> f64 { m.iter().map(|(w, p)| w * p.density(x)).sum() };
    let gap = |x: f64| (density(a, x) - density(b, x)).abs();
    let mut l1 = 0.0;
    let mut lo = 0.0;
    // slowest rate 0.1, shape <= 5: the tail past 1000 is negligible
    for hi in [1.0, 10.0, 100.0, 1000.0] {
        l1 += integrate(gap, lo, hi, &[], QuadOptions::absolute(1e-7))?.value;
        lo = hi;
    }
    Ok(0.5 * (atoms + l1))
}

/// Runs `trials` pairs of random mixtures through [`compare`]. Even trials
/// pair a law with a rewritten copy of itself; odd trials pair two laws at
/// total-variation distance at least [`MIN_TOTAL_VARIATION`]. Trial `i` draws
/// from its own stream of the seeded generator, so the report does not depend
/// on scheduling.
pub fn collision_experiment(seed: u64, trials: usize, grid: &MuntzSequence, tol: f64) -> Result<ExperimentReport> {
    let axis = GridAxis { kind: grid.kind(), values: grid.values().to_vec() };
    let len = grid.len();
    if len == 0 {
        return Err(Error::InvalidArgument("grid prefix must be non-empty".into()));
    }
    let run = |trial: usize| -> (bool, std::result::Result<(Comparison, Option<f64>), String>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let equal = trial % 2 == 0;
        let outcome = (|| -> Result<(Comparison, Option<f64>)> {
            let first = random_mixture(&mut rng);
            let (second, tv) = if equal {
                (rewrite(&first, &mut rng), None)
            } else {
                loop {
                    let candidate = random_mixture(&mut rng);
                    let tv = total_variation(&first, &candidate)?;
                    if tv >= MIN_TOTAL_VARIATION {
                        break (candidate, Some(tv));
                    }
                }
            };
            let fa = compute_fingerprint(&build(&mixture_spec(&first))?, std::slice::from_ref(grid), &[len], Route::Auto, tol)?;
            let fb = compute_fingerprint(&build(&mixture_spec(&second))?, std::slice::from_ref(grid), &[len], Route::Auto, tol)?;
            Ok((compare(&fa, &fb, tol)?, tv))
        })();
        (equal, outcome.map_err(|e| format!("trial {trial}: {e}")))
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<_> = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<_> = (0..trials).map(run).collect();

    let mut report = ExperimentReport {
        seed,
        trials,
        grid: axis,
        tol,
        equal_pairs: 0,
        unequal_pairs: 0,
        false_merges: 0,
        false_splits: 0,
        min_margin: None,
        min_separation: None,
        min_total_variation: None,
        failures: Vec::new(),
    };
    let fold_min = |slot: &mut Option<f64>, v: f64| *slot = Some(slot.map_or(v, |m: f64| m.min(v)));
    for (trial, (equal, outcome)) in outcomes.into_iter().enumerate() {
        if equal {
            report.equal_pairs += 1;
        } else {
            report.unequal_pairs += 1;
        }
        match outcome {
            Ok((cmp, tv)) => {
                let correct = (cmp.verdict == Verdict::Indistinguishable) == equal;
                if correct {
                    fold_min(&mut report.min_margin, cmp.margin);
                } else {
                    fold_min(&mut report.min_margin, -cmp.margin);
                    if equal {
                        report.false_splits += 1;
                        report.failures.push(format!("trial {trial}: equal pair split, max delta {:e}", cmp.max_delta));
                    } else {
                        report.false_merges += 1;
                        report.failures.push(format!("trial {trial}: unequal pair merged, max delta {:e}", cmp.max_delta));
                    }
                }
                if !equal {
                    fold_min(&mut report.min_separation, cmp.max_delta);
                }
                if let Some(tv) = tv {
                    fold_min(&mut report.min_total_variation, tv);
                }
            }
            Err(msg) => report.failures.push(msg),
        }
    }
    Ok(report)
}
