#![allow(dead_code)]

use hemato_core::{Harmonic, Model, PeriodicFn, Term};
use proptest::prelude::*;

pub fn six_orbit_model() -> Model {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/six_orbits.model");
    Model::load(path).expect("bundled example model loads")
}

/// `(mean(lambda r), m, n)` of the four bundled terms.
pub fn six_orbit_params() -> [(f64, f64, f64); 4] {
    [(0.04, 0.95, 2.0), (1.3, 4.73, 3.74), (0.9, 1.0001, 10.2), (0.06, 1.12, 0.11)]
}

pub fn equilibrium_model() -> Model {
    Model::constant_coefficients(1.0, 1.0, &[(2.0, 1.0, 2.0, 0.2, 0.3)]).unwrap()
}

pub fn null_model(period: f64) -> Model {
    let b = PeriodicFn::trig(period, 1.0, vec![Harmonic::new(1, 0.1, 0.05)]).unwrap();
    let terms = vec![
        Term::constant(period, 0.0, 0.5, 2.0, 1.0, 0.0, 0.0).unwrap(),
        Term::constant(period, 0.0, 3.0, 1.0, 1.0, 0.1 * period, 0.0).unwrap(),
    ];
    Model::new_allowing_inactive(period, b, terms).unwrap()
}

/// Positive trig polynomial of degree <= 2: harmonic amplitudes sum to at
/// most 0.9 of the mean.
pub fn positive_trig(period: f64) -> impl Strategy<Value = PeriodicFn> {
    (0.05f64..3.0, proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..=2)).prop_map(move |(mean, raw)| {
        let total: f64 = raw.iter().map(|(c, s)| c.abs() + s.abs()).sum::<f64>().max(1e-12);
        let scale = 0.9 * mean / total.max(1.0);
        let harmonics = raw
            .iter()
            .enumerate()
            .map(|(j, (c, s))| Harmonic::new(j as u32 + 1, c * scale, s * scale))
            .collect();
        PeriodicFn::trig(period, mean, harmonics).unwrap()
    })
}

/// Nonnegative delay of degree <= 2 up to about two periods.
pub fn delay(period: f64) -> impl Strategy<Value = PeriodicFn> {
    (0.0f64..2.0, -0.3f64..0.3, -0.3f64..0.3).prop_map(move |(mean, c, s)| {
        let amp = mean * 0.45;
        PeriodicFn::trig(period, mean * period, vec![Harmonic::new(1, c * amp * period, s * amp * period)]).unwrap()
    })
}

fn term(period: f64) -> impl Strategy<Value = Term> {
    (0.2f64..3.0, 0.3f64..6.0, 0.2f64..6.0, positive_trig(period), delay(period), delay(period))
        .prop_map(|(lambda, m, n, r, tau, mu)| Term::new(lambda, m, n, r, tau, mu))
}

/// Valid models with 1..=3 terms and degree <= 2 trig coefficients.
pub fn random_model() -> impl Strategy<Value = Model> {
    (0.05f64..2.0)
        .prop_flat_map(|period| (Just(period), positive_trig(period), proptest::collection::vec(term(period), 1..=3)))
        .prop_map(|(period, b, terms)| Model::new(period, b, terms).unwrap())
}

/// Mean of `f` by an independent composite trapezoid rule (exact for
/// trig polynomials of degree below `panels`).
pub fn trapezoid_mean(f: &PeriodicFn, panels: usize) -> f64 {
    (0..panels)
        .map(|i| f.evaluate(i as f64 * f.period() / panels as f64))
        .sum::<f64>()
        / panels as f64
}
