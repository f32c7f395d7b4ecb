mod common;

use common::*;
use hemato_core::dde::*;
use hemato_core::{Model, PeriodicFn, Term};
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

fn pure_decay(period: f64) -> Model {
    let b = PeriodicFn::constant(period, 1.0).unwrap();
    let terms = vec![Term::constant(period, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap()];
    Model::new_allowing_inactive(period, b, terms).unwrap()
}

#[test]
fn linear_decay_over_one_time_unit() {
    let traj = integrate(&pure_decay(1.0), &InitialHistory::Constant(1.0), (0.0, 1.0), 512, Mode::X).unwrap();
    assert!((traj.last().1 - (-1.0f64).exp()).abs() < 1e-8);
    let log = integrate(&pure_decay(1.0), &InitialHistory::Constant(1.0), (0.0, 1.0), 512, Mode::Log).unwrap();
    assert!((log.last().1 + 1.0).abs() < 1e-12);
}

#[test]
fn equilibrium_is_held() {
    let model = equilibrium_model();
    for mode in [Mode::X, Mode::Log] {
        let traj = integrate(&model, &InitialHistory::Constant(1.0), (0.0, 10.0), 128, mode).unwrap();
        let target = if mode == Mode::X { 1.0 } else { 0.0 };
        assert!(traj.values.iter().all(|v| (v - target).abs() < 1e-10), "{mode}");
    }
}

#[test]
fn bundled_rhs_at_origin() {
    let model = six_orbit_model();
    let by_hand = (0.042 + 1.302 + 0.902 + 0.062) / 2.0 - 1.12;
    let got = rhs(&model, 0.0, 1.0, &[(1.0, 1.0); 4]).unwrap();
    assert!((got - by_hand).abs() < 1e-12, "{got} vs {by_hand}");
    assert!(rhs(&model, 0.0, 1.0, &[(1.0, 1.0), (1.0, -0.5), (1.0, 1.0), (1.0, 1.0)]).is_err());
}

#[test]
fn rk4_order_on_linear_decay() {
    // x' = -x over one period of length 4 keeps errors well above roundoff
    let model = pure_decay(4.0);
    let exact = (-4.0f64).exp();
    let errors: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&n| {
            let traj = integrate(&model, &InitialHistory::Constant(1.0), (0.0, 4.0), n, Mode::X).unwrap();
            (traj.last().1 - exact).abs()
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.8, "order {order} from {errors:?}");
    }
}

#[test]
fn bundled_model_x_and_log_agree() {
    let model = six_orbit_model();
    let span = (0.0, 10.0 * model.period());
    let x = integrate(&model, &InitialHistory::Constant(1.3), span, 512, Mode::X).unwrap();
    let y = integrate(&model, &InitialHistory::Constant(1.3), span, 512, Mode::Log).unwrap();
    assert!(x.values.iter().all(|&v| v > 0.0));
    let gap = x
        .y_values()
        .iter()
        .zip(&y.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-7, "{gap}");
}

#[test]
fn dense_output_is_step_consistent() {
    let model = six_orbit_model();
    let span = (0.0, 10.0 * model.period());
    let history = InitialHistory::function(|t| 1.2 + 0.1 * (t * 900.0).sin());
    let coarse = integrate(&model, &history, span, 256, Mode::Log).unwrap();
    let fine = integrate(&model, &history, span, 512, Mode::Log).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..100 {
        let t = rng.random_range(span.0..span.1);
        let (a, b) = (coarse.dense(t).unwrap(), fine.dense(t).unwrap());
        assert!((a - b).abs() <= 1e-7, "t = {t}: {a} vs {b}");
    }
    // knots are reproduced exactly
    for i in [0, 17, coarse.len() - 1] {
        assert_eq!(coarse.dense(coarse.times[i]), Some(coarse.values[i]));
    }
    assert!(coarse.dense(span.1 + 1.0).is_none());
}

#[test]
fn subdivided_short_delay_matches_fine_steps() {
    let model = Model::constant_coefficients(1.0, 1.0, &[(2.0, 1.0, 2.0, 0.001, 0.0007)]).unwrap();
    let history = InitialHistory::Constant(1.6);
    let coarse = integrate(&model, &history, (0.0, 2.0), 64, Mode::Log).unwrap();
    assert!(coarse.subdivision > 1);
    let fine = integrate(&model, &history, (0.0, 2.0), 4096, Mode::Log).unwrap();
    assert_eq!(fine.subdivision, 1);
    assert!((coarse.last().1 - fine.last().1).abs() < 1e-8);
}

/// From a constant history inside the attracting band around 0.047 the
/// solution settles onto a periodic orbit.
#[test]
fn bundled_model_relaxes_to_periodic_orbit() {
    let model = six_orbit_model();
    let period = model.period();
    let periods = 1500.0;
    let run = |steps| {
        integrate(&model, &InitialHistory::Constant(0.1f64.exp()), (0.0, periods * period), steps, Mode::Log).unwrap()
    };
    let traj = run(128);
    let end = traj.last().0;
    let (mut lo, mut hi, mut shift) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for i in 0..=200 {
        let t = end - period + period * i as f64 / 200.0;
        let y = traj.dense(t).unwrap();
        lo = lo.min(y);
        hi = hi.max(y);
        shift = shift.max((y - traj.dense(t - period).unwrap()).abs());
    }
    assert!(hi - lo <= model.decay_integral() + 1e-4);
    assert!(shift <= 1e-6, "period-map displacement {shift}");
    assert!(-0.3 < lo && hi < 0.2);
    let halved = run(256);
    assert!((halved.last().1 - traj.last().1).abs() <= 1e-7);
}

/// The band (-5, -0.3) holds a repelling orbit near -0.56: a history just
/// below it drifts further down instead of converging inside 200 periods.
#[test]
fn repelling_orbit_is_not_reached_forward_in_time() {
    let model = six_orbit_model();
    let traj = integrate(&model, &InitialHistory::Constant((-0.65f64).exp()), (0.0, 200.0 * model.period()), 128, Mode::Log)
        .unwrap();
    let (_, y_end) = traj.last();
    assert!(y_end < -0.65);
    let shift = (y_end - traj.dense(traj.last().0 - model.period()).unwrap()).abs();
    assert!(shift > 1e-6);
}

#[test]
fn trajectory_csv() {
    let traj = integrate(&pure_decay(1.0), &InitialHistory::Constant(1.0), (0.0, 1.0), 64, Mode::Log).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    traj.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# mode=log"));
    assert_eq!(lines.next(), Some("t,y"));
    assert_eq!(lines.count(), 65);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Superlinear draws may blow up; that is reported as divergence, never
    /// as a nonpositive state.
    #[test]
    fn x_space_stays_positive(model in random_model(), x0 in 0.05f64..5.0) {
        let span = (0.0, 5.0 * model.period());
        for mode in [Mode::X, Mode::Log] {
            match integrate(&model, &InitialHistory::Constant(x0), span, 128, mode) {
                Ok(traj) => prop_assert!(traj.x_values().iter().all(|&v| v > 0.0)),
                Err(e) => prop_assert!(!matches!(e, hemato_core::Error::NonPositiveState { .. }), "{}", e),
            }
        }
    }
}
