use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::fourier::{for_each_harmonic, FourierSeries};
use super::{OrbitConfig, PeriodicOrbit, EXTREMA_POINTS};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::numeric::exp_ratio;

/// Residual of the log-space equation at time `t` for a T-periodic `y`:
/// `y'(t) - sum_k lambda_k r_k(t) e^(m_k y(t - tau_k) - y(t)) / (1 + e^(n_k y(t - mu_k))) + b(t)`.
pub fn residual_at(model: &Model, y: &FourierSeries, t: f64) -> f64 {
    let y_now = y.evaluate(t);
    let production: f64 = model
        .terms()
        .iter()
        .map(|term| {
            let yt = y.evaluate(t - term.tau.evaluate(t));
            let ym = y.evaluate(t - term.mu.evaluate(t));
            term.lambda * term.r.evaluate(t) * exp_ratio(term.m * yt - y_now, term.n * ym)
        })
        .sum();
    y.derivative(t) - production + model.b().evaluate(t)
}

/// Number of collocation times for `harmonics` coefficient pairs.
pub fn collocation_points(harmonics: usize) -> usize {
    4 * harmonics + 2
}

/// Residuals at the `4K + 2` uniform times `t_j = j T / (4K + 2)`.
pub fn collocation_residual(model: &Model, y: &FourierSeries) -> Vec<f64> {
    residual_on_grid(model, y, 0.0)
}

/// Residuals at `t_j = (j + offset) T / (4K + 2)`; `offset = 0.5` gives the
/// midpoints between collocation times.
pub fn residual_on_grid(model: &Model, y: &FourierSeries, offset: f64) -> Vec<f64> {
    let n = collocation_points(y.harmonics());
    (0..n)
        .map(|j| residual_at(model, y, (j as f64 + offset) * y.period / n as f64))
        .collect()
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Collocation system with every coefficient-independent quantity precomputed,
/// so a residual evaluation is a few matrix-vector products.
struct System {
    /// `lambda_k r_k(t_j)`, `[k][j]`.
    production: Vec<Vec<f64>>,
    decay: Vec<f64>,
    m: Vec<f64>,
    n: Vec<f64>,
    value: DMatrix<f64>,
    slope: DMatrix<f64>,
    tau: Vec<DMatrix<f64>>,
    mu: Vec<DMatrix<f64>>,
}

fn basis_row(period: f64, harmonics: usize, t: f64, row: &mut [f64]) {
    row[0] = 1.0;
    for_each_harmonic(period, t, harmonics, |j, c, s| {
        row[1 + j] = c;
        row[1 + harmonics + j] = s;
    });
}

impl System {
    fn new(model: &Model, harmonics: usize) -> Self {
        let period = model.period();
        let points = collocation_points(harmonics);
        let unknowns = 2 * harmonics + 1;
        let times: Vec<f64> = (0..points).map(|j| j as f64 * period / points as f64).collect();
        let w = std::f64::consts::TAU / period;
        let mut row = vec![0.0; unknowns];
        let basis_at = |shift: &dyn Fn(f64) -> f64, row: &mut Vec<f64>| {
            let mut m = DMatrix::zeros(points, unknowns);
            for (j, &t) in times.iter().enumerate() {
                basis_row(period, harmonics, t - shift(t), row);
                for (i, v) in row.iter().enumerate() {
                    m[(j, i)] = *v;
                }
            }
            m
        };
        let value = basis_at(&|_| 0.0, &mut row);
        let mut slope = DMatrix::zeros(points, unknowns);
        for j in 0..points {
            for h in 0..harmonics {
                let f = (h + 1) as f64 * w;
                // d/dt (a cos + b sin) = f (b cos - a sin)
                slope[(j, 1 + h)] = -f * value[(j, 1 + harmonics + h)];
                slope[(j, 1 + harmonics + h)] = f * value[(j, 1 + h)];
            }
        }
        let tau = model
            .terms()
            .iter()
            .map(|term| basis_at(&|t| term.tau.evaluate(t), &mut row))
            .collect();
        let mu = model
            .terms()
            .iter()
            .map(|term| basis_at(&|t| term.mu.evaluate(t), &mut row))
            .collect();
        Self {
            production: model
                .terms()
                .iter()
                .map(|term| times.iter().map(|&t| term.lambda * term.r.evaluate(t)).collect())
                .collect(),
            decay: times.iter().map(|&t| model.b().evaluate(t)).collect(),
            m: model.terms().iter().map(|t| t.m).collect(),
            n: model.terms().iter().map(|t| t.n).collect(),
            value,
            slope,
            tau,
            mu,
        }
    }

    fn residual(&self, c: &DVector<f64>) -> DVector<f64> {
        let y = &self.value * c;
        let mut r = &self.slope * c;
        for (j, d) in self.decay.iter().enumerate() {
            r[j] += d;
        }
        for k in 0..self.m.len() {
            let yt = &self.tau[k] * c;
            let ym = &self.mu[k] * c;
            for j in 0..r.len() {
                r[j] -= self.production[k][j] * exp_ratio(self.m[k] * yt[j] - y[j], self.n[k] * ym[j]);
            }
        }
        r
    }

    fn jacobian(&self, c: &DVector<f64>, r0: &DVector<f64>) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(r0.len(), c.len());
        let mut probe = c.clone();
        for i in 0..c.len() {
            let h = 1e-7 * c[i].abs().max(1.0);
            probe[i] = c[i] + h;
            let r = self.residual(&probe);
            jac.set_column(i, &((r - r0) / h));
            probe[i] = c[i];
        }
        jac
    }
}

/// Newton failed to bring the collocation residual under tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct NoConvergence {
    pub seed_mean: f64,
    pub iterations: usize,
    pub residual_norm: f64,
}

impl fmt::Display for NoConvergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no convergence from seed mean {} after {} iterations (residual {:.3e})",
            self.seed_mean, self.iterations, self.residual_norm
        )
    }
}

/// Damped Gauss-Newton from the constant `y = seed_mean`.
///
/// Each iteration builds a forward-difference Jacobian of the oversampled
/// residual, takes the least-squares (SVD) step, and halves the step until the
/// residual's 2-norm decreases. Convergence is `max |residual| <= residual_tolerance`.
pub fn solve_orbit(model: &Model, seed_mean: f64, config: &OrbitConfig) -> Result<std::result::Result<PeriodicOrbit, NoConvergence>> {
    let seed = FourierSeries::constant(model.period(), seed_mean, config.harmonics);
    solve_from(model, &seed, config)
}

/// As [`solve_orbit`], seeded with an arbitrary series (its harmonic count wins).
pub fn solve_from(
    model: &Model,
    seed: &FourierSeries,
    config: &OrbitConfig,
) -> Result<std::result::Result<PeriodicOrbit, NoConvergence>> {
    config.validate()?;
    if seed.harmonics() == 0 || !seed.mean.is_finite() {
        return Err(Error::InvalidArgument("orbit seed needs >= 1 harmonic and a finite mean".into()));
    }
    let system = System::new(model, seed.harmonics());
    let mut c = DVector::from_vec(seed.to_vector());
    let mut r = system.residual(&c);
    let mut norm = max_abs(&r);
    let fail = |iterations, residual_norm| {
        Ok(Err(NoConvergence {
            seed_mean: seed.mean,
            iterations,
            residual_norm,
        }))
    };
    if !norm.is_finite() {
        return fail(0, norm);
    }
    let mut iterations = 0;
    while norm > config.residual_tolerance {
        if iterations == config.max_iter {
            return fail(iterations, norm);
        }
        iterations += 1;
        let jac = system.jacobian(&c, &r);
        let svd = jac.svd(true, true);
        let cutoff = 1e-14 * svd.singular_values.max();
        let Ok(delta) = svd.solve(&(-&r), cutoff) else {
            return fail(iterations, norm);
        };
        let current = r.norm();
        let mut step = config.damping;
        loop {
            let trial = &c + &delta * step;
            let rt = system.residual(&trial);
            let trial_norm = rt.norm();
            if trial_norm.is_finite() && trial_norm < current {
                c = trial;
                r = rt;
                norm = max_abs(&r);
                break;
            }
            step *= 0.5;
            if step < 1e-10 {
                return fail(iterations, norm);
            }
        }
    }
    let fourier = FourierSeries::from_vector(model.period(), c.as_slice());
    let (y_min, y_max) = fourier.extrema(EXTREMA_POINTS);
    Ok(Ok(PeriodicOrbit {
        fourier,
        residual_norm: norm,
        y_min,
        y_max,
        bracket: None,
        iterations,
    }))
}
