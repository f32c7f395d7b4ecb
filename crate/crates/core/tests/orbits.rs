mod common;

use common::*;
use hemato_core::analysis::{scan_envelopes, EnvelopeGrid, GammaRange};
use hemato_core::orbits::*;
use hemato_core::{Model, PeriodicFn};
use proptest::prelude::*;

fn bundled_envelope(model: &Model) -> EnvelopeGrid {
    scan_envelopes(model, &GammaRange::new(-6.0, 35.0, 0.05).unwrap(), 1000, false).unwrap()
}

fn converged(model: &Model, seed: f64) -> PeriodicOrbit {
    solve_orbit(model, seed, &OrbitConfig::default()).unwrap().expect("converges")
}

#[test]
fn bundled_orbit_residual_on_and_off_grid() {
    let model = six_orbit_model();
    let orbit = converged(&model, -2.65);
    let on = collocation_residual(&model, &orbit.fourier);
    assert_eq!(on.len(), collocation_points(16));
    assert!(on.iter().all(|r| r.abs() <= 1e-10));
    let off = residual_on_grid(&model, &orbit.fourier, 0.5);
    assert!(off.iter().all(|r| r.abs() <= 1e-8), "{:?}", off.iter().fold(0.0f64, |m, r| m.max(r.abs())));
}

#[test]
fn seed_in_lower_band_stays_there() {
    let model = six_orbit_model();
    let orbit = converged(&model, -0.6);
    assert!(-5.0 < orbit.y_min && orbit.y_max < -0.3, "{orbit:?}");
    let v = validate_orbit(&model, &orbit, &OrbitConfig::default()).unwrap();
    assert!(v.period_map_discrepancy <= 1e-6);
    assert!(v.passed(), "{:?}", v.failures);
}

#[test]
fn whole_period_delays_change_nothing() {
    let model = six_orbit_model();
    let period = model.period();
    let zero = model.map_delays(|_| PeriodicFn::constant(period, 0.0).unwrap()).unwrap();
    let full = model.map_delays(|_| PeriodicFn::constant(period, period).unwrap()).unwrap();
    let a = converged(&zero, -2.65);
    let b = converged(&full, -2.65);
    assert!(a.fourier.distance(&b.fourier, 1024) <= 1e-9);
}

#[test]
fn bundled_model_has_six_orbits() {
    let model = six_orbit_model();
    let env = bundled_envelope(&model);
    let search = find_all_orbits(&model, &env, &OrbitConfig::default()).unwrap();
    assert_eq!(search.predicted, 6);
    assert!(search.warnings.is_empty(), "{:?}", search.warnings);
    assert!(search.orbits.len() >= 6);
    let edges = [f64::NEG_INFINITY, -5.0, -0.3, 0.2, 5.0, 34.0, f64::INFINITY];
    for w in edges.windows(2) {
        let inside = search.orbits.iter().filter(|o| w[0] < o.y_min && o.y_max < w[1]).count();
        assert!(inside >= 1, "no orbit in ({}, {})", w[0], w[1]);
    }
    for (i, a) in search.orbits.iter().enumerate() {
        assert!(a.residual_norm <= 1e-10);
        assert!(a.amplitude() <= model.decay_integral() + 1e-6);
        assert!(a.bracket.is_some());
        for b in &search.orbits[i + 1..] {
            assert!(a.fourier.distance(&b.fourier, DEDUP_POINTS) >= 0.05);
        }
        let v = validate_orbit(&model, a, &OrbitConfig::default()).unwrap();
        assert!(v.passed(), "orbit {i}: {:?}", v.failures);
        assert!(v.period_map_discrepancy <= 1e-5);
    }
    let means: Vec<f64> = search.orbits.iter().map(|o| o.mean()).collect();
    assert!(means.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn delays_shifted_by_a_period_give_the_same_orbits() {
    let model = six_orbit_model();
    let period = model.period();
    let shifted = model.map_delays(|f| f.add_constant(period)).unwrap();
    let config = OrbitConfig::default();
    let a = find_all_orbits(&model, &bundled_envelope(&model), &config).unwrap().orbits;
    let b = find_all_orbits(&shifted, &bundled_envelope(&shifted), &config).unwrap().orbits;
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!(x.fourier.distance(&y.fourier, DEDUP_POINTS) <= config.dedup_tol);
    }
}

#[test]
fn null_model_has_no_orbits() {
    let model = null_model(0.5);
    let env = scan_envelopes(&model, &GammaRange::new(-10.0, 10.0, 0.1).unwrap(), 100, false).unwrap();
    let search = find_all_orbits(&model, &env, &OrbitConfig::default()).unwrap();
    assert!(search.orbits.is_empty());
    assert_eq!(search.predicted, 0);
    assert!(search.warnings.is_empty());
}

#[test]
fn equilibrium_is_the_only_orbit() {
    let model = equilibrium_model();
    let env = scan_envelopes(&model, &GammaRange::new(-10.0, 10.0, 0.01).unwrap(), 100, false).unwrap();
    let search = find_all_orbits(&model, &env, &OrbitConfig::default()).unwrap();
    assert_eq!(search.orbits.len(), 1);
    let orbit = &search.orbits[0];
    assert!(orbit.mean().abs() < 1e-12 && orbit.amplitude() < 1e-12);
    assert!(orbit.residual_norm <= 1e-12);

    for i in 0..20 {
        let seed = -3.0 + 6.0 * i as f64 / 19.0;
        let o = converged(&model, seed);
        assert!(o.fourier.distance(&orbit.fourier, DEDUP_POINTS) < 1e-10, "seed {seed}");
    }
}

#[test]
fn corrupted_orbit_fails_time_domain_check() {
    let model = equilibrium_model();
    let mut orbit = converged(&model, 0.3);
    let v = validate_orbit(&model, &orbit, &OrbitConfig::default()).unwrap();
    assert!(v.passed());
    assert!(v.amplitude < 1e-12);
    orbit.fourier.mean += 0.1;
    let v = validate_orbit(&model, &orbit, &OrbitConfig::default()).unwrap();
    assert!(v.period_map_discrepancy > PERIOD_MAP_TOLERANCE);
    assert!(v.failures.iter().any(|f| f.contains("period map")));
}

#[test]
fn fourier_orbit_is_exactly_periodic() {
    let model = six_orbit_model();
    let orbit = converged(&model, 23.0);
    let period = model.period();
    for i in 0..100 {
        let t = i as f64 * 0.0137;
        let (a, b) = (orbit.y(t), orbit.y(t + period));
        assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs(), "t = {t}");
    }
}

#[test]
fn harmonic_refinement_is_stable() {
    let model = six_orbit_model();
    let orbit = converged(&model, 0.05);
    let change = refinement_change(&model, &orbit, &OrbitConfig::default()).unwrap().unwrap();
    assert!(change < 1e-9, "{change}");
}

#[test]
fn orbit_exports() {
    let model = equilibrium_model();
    let orbit = converged(&model, 0.3);
    let dir = tempfile::tempdir().unwrap();
    orbit.write_csv(dir.path().join("o.csv"), DEDUP_POINTS).unwrap();
    let text = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    assert!(text.starts_with("t,y,x\n"));
    assert_eq!(text.lines().count(), 257);
    write_manifest(&[orbit], dir.path().join("m.csv")).unwrap();
    let text = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("orbit_id,mean,y_min,y_max,residual,amplitude,bracket_lo,bracket_hi"));
    assert!(lines.next().unwrap().ends_with(",,"));
}

#[test]
fn bad_configs_are_rejected() {
    let model = equilibrium_model();
    let bad = [
        OrbitConfig { harmonics: 0, ..OrbitConfig::default() },
        OrbitConfig { residual_tolerance: 0.0, ..OrbitConfig::default() },
        OrbitConfig { damping: 1.5, ..OrbitConfig::default() },
    ];
    for config in bad {
        assert!(solve_orbit(&model, 0.0, &config).is_err());
    }
    let config = OrbitConfig { max_iter: 0, ..OrbitConfig::default() };
    assert!(solve_orbit(&model, 0.5, &config).unwrap().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Every converged orbit respects `y_max - y_min <= C`.
    #[test]
    fn a_priori_amplitude_bound(model in random_model()) {
        let config = OrbitConfig { harmonics: 8, max_iter: 40, ..OrbitConfig::default() };
        let bound = model.decay_integral() + 1e-6;
        for i in 0..5 {
            let seed = -3.0 + 1.5 * i as f64;
            if let Ok(orbit) = solve_orbit(&model, seed, &config).unwrap() {
                prop_assert!(orbit.amplitude() <= bound, "{} > {}", orbit.amplitude(), bound);
            }
        }
    }
}
