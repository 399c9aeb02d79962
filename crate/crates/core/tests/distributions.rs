mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stieltjes::dist::{blm_survival, positive_stable_density, BlmSpec, Distribution, Distribution1D, JointKind};

#[test]
fn inclusion_exclusion_matches_survival_on_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, d) in common::catalog_examples() {
        let Distribution::Joint(j) = d else { continue };
        let dim = j.dim();
        let axes: Vec<Vec<f64>> = (0..dim).map(|_| (0..5).map(|_| rng.random_range(0.0..3.0)).collect()).collect();
        let cells = 5usize.pow(dim as u32);
        for c in 0..cells {
            let x: Vec<f64> = (0..dim).map(|a| axes[a][(c / 5usize.pow(a as u32)) % 5]).collect();
            let ie = j.inclusion_exclusion_survival(&x).unwrap();
            let direct = j.survival(&x);
            assert!((ie - direct).abs() <= 1e-10, "{name} at {x:?}: {ie} vs {direct}");
        }
    }
}

#[test]
fn univariate_cdfs_are_monotone_and_complementary() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (name, d) in common::catalog_examples() {
        let Distribution::Univariate(u) = d else { continue };
        let mut xs: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..8.0)).collect();
        xs.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for &x in &xs {
            let f = u.cdf(x);
            assert!(f >= prev, "{name}: cdf decreases at {x}");
            assert!((u.survival(x) + f - 1.0).abs() <= 1e-12, "{name} at {x}");
            prev = f;
        }
    }
}

#[test]
fn half_stable_density_closed_form() {
    // alpha = 1/2: x^{-3/2} exp(-1/(4x)) / (2 sqrt(pi))
    for i in 0..=390 {
        let x = 0.5 + 0.05 * i as f64;
        let closed = x.powf(-1.5) * (-0.25 / x).exp() / (2.0 * std::f64::consts::PI.sqrt());
        let series = positive_stable_density(0.5, x, 400).unwrap();
        assert!((series.value - closed).abs() <= 1e-8, "x = {x}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blm_branches_agree_on_the_diagonal(t in 0.0f64..50.0, theta in 2.0f64..4.0) {
        let f = Distribution1D::exponential(2.0).unwrap();
        let g = Distribution1D::exponential(2.0).unwrap();
        let spec = BlmSpec::new(f.clone(), g.clone(), theta).unwrap();
        let upper = (-theta * t).exp() * f.survival(0.0);
        let lower = (-theta * t).exp() * g.survival(0.0);
        prop_assert_eq!(upper, lower);
        prop_assert_eq!(blm_survival(&spec, t, t), upper);
    }

    #[test]
    fn joint_survival_nonincreasing(x in 0.0f64..4.0, y in 0.0f64..4.0, dx in 0.0f64..1.0) {
        for (name, d) in common::catalog_examples() {
            let Distribution::Joint(j) = d else { continue };
            if j.dim() != 2 || matches!(j.kind(), JointKind::Product(_)) {
                continue;
            }
            let base = j.survival(&[x, y]);
            prop_assert!(j.survival(&[x + dx, y]) <= base + 1e-15, "{}", name);
            prop_assert!(j.survival(&[x, y + dx]) <= base + 1e-15, "{}", name);
        }
    }
}

#[test]
fn blm_diagonal_many_points() {
    let f = Distribution1D::gamma(2.0, 1.0).unwrap();
    let spec = BlmSpec::new(f.clone(), f.clone(), 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let t = rng.random_range(0.0..20.0);
        let v = blm_survival(&spec, t, t);
        assert_eq!(v, (-3.0 * t).exp() * f.survival(0.0));
    }
}
