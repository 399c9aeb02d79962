mod common;

use proptest::prelude::*;

use stieltjes::dist::{build, DistSpec, Distribution};
use stieltjes::fingerprint::{compare, compute_fingerprint, Fingerprint, Verdict};
use stieltjes::muntz::MuntzSequence;
use stieltjes::transforms::Route;

fn exponential(rate: f64) -> Distribution {
    build(&DistSpec::new("exponential").with_param("lambda", rate)).unwrap()
}

fn gamma(rate: f64, shape: f64) -> Distribution {
    build(&DistSpec::new("gamma").with_param("lambda", rate).with_param("q", shape)).unwrap()
}

fn prime_fingerprint(d: &Distribution, len: usize) -> Fingerprint {
    let grids = vec![MuntzSequence::primes(len); d.dim()];
    compute_fingerprint(d, &grids, &vec![len; d.dim()], Route::ClosedForm, 1e-10).unwrap()
}

#[test]
fn values_decrease_along_every_axis() {
    for (name, d) in common::catalog_examples() {
        let len = match d.dim() {
            1 => 10,
            2 => 5,
            _ => 3,
        };
        let fp = prime_fingerprint(&d, len);
        assert_eq!(fp.values.len(), fp.shape.iter().product::<usize>());
        for offset in 0..fp.values.len() {
            let idx = fp.multi_index(offset);
            let v = fp.values[offset];
            assert!(v >= -fp.est_errors[offset] && v <= 1.0 + fp.est_errors[offset], "{name}: {v}");
            for axis in 0..fp.dim {
                if idx[axis] + 1 == fp.shape[axis] {
                    continue;
                }
                let mut next = idx.clone();
                next[axis] += 1;
                let w = fp.get(&next);
                assert!(w < v + 1e-12, "{name} axis {axis} at {idx:?}: {w} after {v}");
            }
        }
    }
}

#[test]
fn self_comparison_and_symmetry() {
    let laws: Vec<(&str, Distribution)> = common::catalog_examples().into_iter().filter(|(_, d)| d.dim() == 1).collect();
    let fps: Vec<Fingerprint> = laws.iter().map(|(_, d)| prime_fingerprint(d, 12)).collect();
    for (i, a) in fps.iter().enumerate() {
        assert_eq!(compare(a, a, 1e-9).unwrap().verdict, Verdict::Indistinguishable, "{}", laws[i].0);
        for b in &fps[i + 1..] {
            let ab = compare(a, b, 1e-9).unwrap();
            let ba = compare(b, a, 1e-9).unwrap();
            assert_eq!(ab.verdict, ba.verdict);
            assert_eq!(ab.max_delta, ba.max_delta);
        }
    }
}

#[test]
fn longer_prefixes_never_undo_a_separation() {
    let pairs = [
        (exponential(1.0), gamma(1.0, 1.001)),
        (exponential(1.0), exponential(1.01)),
        (gamma(2.0, 3.0), gamma(3.0, 4.5)),
    ];
    for (a, b) in &pairs {
        let mut last = 0.0;
        let mut separated = false;
        for len in 1..=12 {
            let c = compare(&prime_fingerprint(a, len), &prime_fingerprint(b, len), 1e-9).unwrap();
            assert!(c.max_delta >= last, "len {len}: {} < {last}", c.max_delta);
            if separated {
                assert_eq!(c.verdict, Verdict::Distinct, "len {len}");
            }
            separated = c.verdict == Verdict::Distinct;
            last = c.max_delta;
        }
        assert!(separated);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exponential_fingerprints_scale(rate in 0.05f64..20.0, len in 1usize..15) {
        let primes = MuntzSequence::primes(len);
        let scaled = MuntzSequence::custom(primes.values().iter().map(|m| m / rate).collect()).unwrap();
        let a = compute_fingerprint(&exponential(rate), &[primes], &[len], Route::ClosedForm, 1e-10).unwrap();
        let b = compute_fingerprint(&exponential(1.0), &[scaled], &[len], Route::ClosedForm, 1e-10).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn json_round_trip(rate in 0.1f64..10.0, len in 1usize..8) {
        let fp = prime_fingerprint(&exponential(rate), len);
        prop_assert_eq!(Fingerprint::from_json(&fp.to_json()).unwrap(), fp);
    }
}
