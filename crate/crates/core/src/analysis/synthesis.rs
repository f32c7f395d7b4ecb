//! Constructive choice of the `lambda_k` that make `alpha(g1, .) > 0 > beta(g2, .)`
//! for a superlinear pattern with a one-hump class.

use super::{alpha_factor, beta_factor, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{ExponentClass, Model, Term};
use crate::periodic::{PeriodicFn, VALIDATION_POINTS};

/// Headroom on the one-hump coefficients.
const GROWTH_HEADROOM: f64 = 1.1;
/// Shrink factor on the superlinear coefficients.
const DECAY_HEADROOM: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub lambdas: Vec<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Tolerance actually used for the tail of the one-hump class. Equals the
    /// requested value unless that exceeded `b_min / 4`.
    pub epsilon: f64,
    /// The resulting model with zero delays. Delays do not enter `alpha` or `beta`.
    pub model: Model,
}

/// Requires `m_k > 1` for every k, at least one `m_j` in `(1, n_j + 1)` and at
/// least one `m_i > n_i + 1` (terms with `m_i = n_i + 1` are allowed and are
/// treated like the latter), and `0 < epsilon < b_min`.
///
/// 1. One-hump terms get a common `lambda` equal to 1.1 times
///    `max_t b(t) / S(t)`, where `S` is their unit-`lambda` alpha sum at `gamma1`.
/// 2. Past every hump peak and `gamma1`, the upper bound
///    `sum lambda_k r_k,max beta-factor(g)` decreases; step outward until it
///    drops below `epsilon` and put `gamma2` one unit further.
/// 3. The remaining terms share `lambda = 0.9 (b_min - 2 epsilon) / U` with `U`
///    their unit-`lambda` bound at `gamma2`.
///
/// Step 3 needs `b_min > 2 epsilon`; a requested `epsilon >= b_min / 4` is
/// replaced by `b_min / 4`, which only tightens step 2.
pub fn synthesize_lambdas(
    r: &[PeriodicFn],
    b: &PeriodicFn,
    m: &[f64],
    n: &[f64],
    gamma1: f64,
    epsilon: f64,
) -> Result<Synthesis> {
    let count = r.len();
    if count == 0 || m.len() != count || n.len() != count {
        return Err(Error::InvalidArgument(format!(
            "r, m and n must have the same nonzero length (got {}, {}, {})",
            count,
            m.len(),
            n.len()
        )));
    }
    if !gamma1.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma1 must be finite, got {gamma1}")));
    }
    let classes: Vec<ExponentClass> = m.iter().zip(n).map(|(&m, &n)| ExponentClass::of(m, n)).collect();
    let hump: Vec<usize> = (0..count).filter(|&k| classes[k] == ExponentClass::M3).collect();
    let steep: Vec<usize> = (0..count)
        .filter(|&k| matches!(classes[k], ExponentClass::M4 | ExponentClass::M5))
        .collect();
    let all_above_one = m.iter().all(|&v| v > 1.0);
    if !all_above_one || hump.is_empty() || !classes.contains(&ExponentClass::M5) {
        return Err(Error::PatternMismatch(
            "needs m_k > 1 for all k, 1 < m_j < n_j + 1 for some j and m_i > n_i + 1 for some i".into(),
        ));
    }

    let period = b.period();
    let b_min = b.grid_min(VALIDATION_POINTS);
    if !(epsilon > 0.0 && epsilon < b_min) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, b_min) = (0, {b_min}), got {epsilon}"
        )));
    }
    let epsilon = epsilon.min(0.25 * b_min);

    // Build with unit lambdas to reuse model validation and the time grid.
    let zero = PeriodicFn::constant(period, 0.0)?;
    let terms: Vec<Term> = (0..count)
        .map(|k| Term::new(1.0, m[k], n[k], r[k].clone(), zero.clone(), zero.clone()))
        .collect();
    let unit = Model::new(period, b.clone(), terms)?;
    let c = unit.decay_integral();
    let grid = TimeGrid::new(&unit, VALIDATION_POINTS);
    let mut lambdas = vec![0.0; count];

    // (i) one-hump class at gamma1
    let mut worst_ratio = 0.0f64;
    for j in 0..grid.len() {
        let s: f64 = hump
            .iter()
            .map(|&k| grid.production[k][j] * alpha_factor(m[k], n[k], gamma1, c))
            .sum();
        worst_ratio = worst_ratio.max(grid.decay[j] / s);
    }
    if !worst_ratio.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "one-hump terms underflow at gamma1 = {gamma1}; pick a gamma1 nearer their peaks"
        )));
    }
    let hump_lambda = GROWTH_HEADROOM * worst_ratio;
    for &k in &hump {
        lambdas[k] = hump_lambda;
    }

    // (ii) tail of the one-hump class
    let r_max: Vec<f64> = r.iter().map(|f| f.grid_max(VALIDATION_POINTS)).collect();
    let tail = |g: f64| -> f64 {
        hump.iter()
            .map(|&k| hump_lambda * r_max[k] * beta_factor(m[k], n[k], g, c))
            .sum()
    };
    let peak = hump
        .iter()
        .map(|&k| c + ((m[k] - 1.0) / (n[k] - m[k] + 1.0)).ln() / n[k])
        .fold(gamma1, f64::max);
    let mut radius = peak;
    let mut step = 1.0;
    while tail(radius) >= epsilon {
        radius += step;
        step *= 2.0;
        if !radius.is_finite() || radius > 1e6 {
            return Err(Error::InvalidArgument("no tail radius found below 1e6".into()));
        }
    }
    let gamma2 = radius + 1.0;

    // (iii) superlinear classes at gamma2
    let bound: f64 = steep
        .iter()
        .map(|&k| r_max[k] * beta_factor(m[k], n[k], gamma2, c))
        .sum();
    let steep_lambda = DECAY_HEADROOM * (b_min - 2.0 * epsilon) / bound;
    if !(steep_lambda.is_finite() && steep_lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "superlinear bound at gamma2 = {gamma2} is not representable"
        )));
    }
    for &k in &steep {
        lambdas[k] = steep_lambda;
    }

    let model = unit.with_lambdas(&lambdas)?;
    Ok(Synthesis {
        lambdas,
        gamma1,
        gamma2,
        epsilon,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(k: usize) -> Vec<PeriodicFn> {
        vec![PeriodicFn::constant(1.0, 1.0).unwrap(); k]
    }

    #[test]
    fn rejects_wrong_pattern_and_epsilon() {
        let b = PeriodicFn::constant(1.0, 1.0).unwrap();
        let err = synthesize_lambdas(&ones(2), &b, &[0.5, 0.7], &[1.0, 1.0], 0.0, 0.25).unwrap_err();
        assert!(matches!(err, Error::PatternMismatch(_)));
        assert!(synthesize_lambdas(&ones(2), &b, &[2.0, 5.0], &[3.0, 2.0], 0.0, 1.0).is_err());
        assert!(synthesize_lambdas(&ones(2), &b, &[2.0, 5.0], &[3.0, 2.0], 0.0, 0.0).is_err());
        assert!(synthesize_lambdas(&ones(1), &b, &[2.0, 5.0], &[3.0, 2.0], 0.0, 0.1).is_err());
    }

    #[test]
    fn large_epsilon_is_tightened() {
        let b = PeriodicFn::constant(1.0, 1.0).unwrap();
        let s = synthesize_lambdas(&ones(2), &b, &[2.0, 5.0], &[3.0, 2.0], 0.0, 0.9).unwrap();
        assert_eq!(s.epsilon, 0.25);
        assert!(s.gamma2 > s.gamma1);
    }
}
