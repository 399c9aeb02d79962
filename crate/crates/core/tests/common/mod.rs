#![allow(dead_code)]

use stieltjes::dist::{build, DistSpec, Distribution};

fn exp_spec(rate: f64) -> DistSpec {
    DistSpec::new("exponential").with_param("lambda", rate)
}

/// One representative per catalog kind, as specs.
pub fn catalog_specs() -> Vec<(&'static str, DistSpec)> {
    vec![
        ("exponential", exp_spec(1.5)),
        ("gamma", DistSpec::new("gamma").with_param("lambda", 2.0).with_param("q", 3.0)),
        ("positive-stable", DistSpec::new("positive-stable").with_param("alpha", 0.5)),
        ("point-mass", DistSpec::new("point-mass").with_param("at", 0.7)),
        ("cantor", DistSpec::new("cantor")),
        (
            "mixture",
            DistSpec::new("mixture").with_mixture(vec![
                (0.25, DistSpec::new("point-mass").with_param("at", 1.0)),
                (0.5, exp_spec(2.0)),
                (0.25, DistSpec::new("gamma").with_param("lambda", 1.0).with_param("q", 2.5)),
            ]),
        ),
        ("product", DistSpec::new("product").with_components(vec![exp_spec(1.0), exp_spec(2.0)])),
        (
            "marshall-olkin",
            DistSpec::new("marshall-olkin").with_param("lambda1", 1.0).with_param("lambda2", 2.0).with_param("lambda12", 0.5),
        ),
        (
            "freund",
            DistSpec::new("freund")
                .with_param("alpha", 1.0)
                .with_param("alpha_prime", 2.0)
                .with_param("beta", 1.0)
                .with_param("beta_prime", 2.0),
        ),
        ("moran-downton", DistSpec::new("moran-downton").with_param("r", 0.4)),
        ("bivariate-gamma", DistSpec::new("bivariate-gamma").with_param("r", 0.3).with_param("q", 2.0)),
        (
            "trivariate-gamma",
            DistSpec::new("trivariate-gamma").with_param("alpha", 1.0).with_param("a", 0.5).with_param("b", 0.5),
        ),
        ("blm", DistSpec::new("blm").with_param("theta", 3.0).with_components(vec![exp_spec(2.0), exp_spec(2.0)])),
    ]
}

pub fn catalog_examples() -> Vec<(&'static str, Distribution)> {
    catalog_specs().into_iter().map(|(n, s)| (n, build(&s).unwrap())).collect()
}
