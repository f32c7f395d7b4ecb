//! Fixed-step RK4 method of steps for the multi-delay model, in x-space
//!
//! ```text
//! x'(t) = sum_k lambda_k r_k(t) x(t - tau_k(t))^m_k / (1 + x(t - mu_k(t))^n_k) - b(t) x(t)
//! ```
//!
//! or in log-space, `y = ln x`,
//!
//! ```text
//! y'(t) = sum_k lambda_k r_k(t) e^(m_k y(t - tau_k(t)) - y(t)) / (1 + e^(n_k y(t - mu_k(t)))) - b(t)
//! ```
//!
//! Delayed values come from cubic Hermite interpolation of past knots; the
//! derivative stored at a knot is the first RK stage of the step leaving it.

mod history;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub use history::{History, InitialHistory};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::numeric::exp_ratio;
use crate::periodic::VALIDATION_POINTS;
use history::hermite;

pub const MIN_STEPS_PER_PERIOD: usize = 64;

/// Upper bound on how finely one step is split to keep short delays behind
/// the current step.
const MAX_SUBDIVISION: usize = 1 << 12;

/// A single step changing the state by more than this multiple of its size
/// is treated as blow-up.
const DIVERGENCE_RATIO: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// `y = ln x`.
    #[default]
    Log,
    X,
}

impl Mode {
    pub fn variable(self) -> &'static str {
        match self {
            Mode::Log => "y",
            Mode::X => "x",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Log => "log",
            Mode::X => "x",
        })
    }
}

/// X-space right-hand side. `delayed[k] = (x(t - tau_k(t)), x(t - mu_k(t)))`.
pub fn rhs(model: &Model, t: f64, x_now: f64, delayed: &[(f64, f64)]) -> Result<f64> {
    if x_now <= 0.0 {
        return Err(Error::NonPositiveState { time: t, value: x_now });
    }
    let mut sum = 0.0;
    for (term, &(xt, xm)) in model.terms().iter().zip(delayed) {
        for v in [xt, xm] {
            if v <= 0.0 {
                return Err(Error::NonPositiveState { time: t, value: v });
            }
        }
        sum += term.lambda * term.r.evaluate(t) * exp_ratio(term.m * xt.ln(), term.n * xm.ln());
    }
    Ok(sum - model.b().evaluate(t) * x_now)
}

/// Log-space right-hand side. `delayed[k] = (y(t - tau_k(t)), y(t - mu_k(t)))`.
pub fn rhs_log(model: &Model, t: f64, y_now: f64, delayed: &[(f64, f64)]) -> f64 {
    let sum: f64 = model
        .terms()
        .iter()
        .zip(delayed)
        .map(|(term, &(yt, ym))| term.lambda * term.r.evaluate(t) * exp_ratio(term.m * yt - y_now, term.n * ym))
        .sum();
    sum - model.b().evaluate(t)
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub mode: Mode,
    pub step: f64,
    /// Number of substeps each nominal step was split into.
    pub subdivision: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> (f64, f64) {
        (*self.times.last().unwrap(), *self.values.last().unwrap())
    }

    /// Hermite dense output inside `[t0, t1]`.
    pub fn dense(&self, t: f64) -> Option<f64> {
        let (t0, t1) = (self.times[0], *self.times.last()?);
        if !(t0..=t1).contains(&t) {
            return None;
        }
        if self.times.len() == 1 {
            return Some(self.values[0]);
        }
        let offset = (t - t0) / self.step;
        let i = (offset.floor() as usize).min(self.times.len() - 2);
        let h = self.times[i + 1] - self.times[i];
        let s = (t - self.times[i]) / h;
        Some(hermite(
            s,
            h,
            self.values[i],
            self.derivatives[i],
            self.values[i + 1],
            self.derivatives[i + 1],
        ))
    }

    /// Knot values as concentrations.
    pub fn x_values(&self) -> Vec<f64> {
        match self.mode {
            Mode::X => self.values.clone(),
            Mode::Log => self.values.iter().map(|y| y.exp()).collect(),
        }
    }

    /// Knot values as log-concentrations.
    pub fn y_values(&self) -> Vec<f64> {
        match self.mode {
            Mode::X => self.values.iter().map(|x| x.ln()).collect(),
            Mode::Log => self.values.clone(),
        }
    }

    /// CSV `t,x` or `t,y`, preceded by a `# mode=... step=...` comment.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "# mode={} step={:e} subdivision={}", self.mode, self.step, self.subdivision)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["t", self.mode.variable()])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([format!("{t:.12e}"), format!("{v:.12e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Smallest positive delay on the validation grid, if any delay is positive.
fn min_positive_delay(model: &Model) -> Option<f64> {
    let period = model.period();
    let mut best = f64::INFINITY;
    for term in model.terms() {
        for f in [&term.tau, &term.mu] {
            for j in 0..VALIDATION_POINTS {
                let v = f.evaluate(j as f64 * period / VALIDATION_POINTS as f64);
                if v > 0.0 {
                    best = best.min(v);
                }
            }
        }
    }
    best.is_finite().then_some(best)
}

struct Stepper<'a> {
    model: &'a Model,
    mode: Mode,
    history: History,
    delayed: Vec<(f64, f64)>,
}

impl Stepper<'_> {
    /// State at `t_read` while a stage at `t_stage` with state `y_stage` is
    /// being evaluated from the knot `(t_n, y_n)`. Reads newer than the last
    /// knot only happen for delays below the substep and use the straight
    /// line from the knot to the stage.
    fn read(&self, t_read: f64, t_stage: f64, y_stage: f64, t_n: f64, y_n: f64) -> Result<f64> {
        if t_read >= t_stage {
            Ok(y_stage)
        } else if t_read > t_n {
            let w = (t_read - t_n) / (t_stage - t_n);
            Ok(y_n + w * (y_stage - y_n))
        } else if t_read == t_n {
            Ok(y_n)
        } else {
            self.history.evaluate(t_read)
        }
    }

    fn derivative(&mut self, t: f64, y: f64, t_n: f64, y_n: f64) -> Result<f64> {
        for (k, term) in self.model.terms().iter().enumerate() {
            let a = self.read(t - term.tau.evaluate(t), t, y, t_n, y_n)?;
            let b = self.read(t - term.mu.evaluate(t), t, y, t_n, y_n)?;
            self.delayed[k] = (a, b);
        }
        match self.mode {
            Mode::Log => Ok(rhs_log(self.model, t, y, &self.delayed)),
            Mode::X => rhs(self.model, t, y, &self.delayed),
        }
    }
}

/// Integrates over `t_span = (t0, t1)` with nominal step `T / steps_per_period`.
///
/// The span is covered by whole steps (the step shrinks slightly when the
/// span is not a multiple). When some delay is positive but shorter than a
/// step, every step is split evenly so that delayed reads fall on completed
/// intervals.
pub fn integrate(
    model: &Model,
    initial: &InitialHistory,
    t_span: (f64, f64),
    steps_per_period: usize,
    mode: Mode,
) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if steps_per_period < MIN_STEPS_PER_PERIOD {
        return Err(Error::InvalidArgument(format!(
            "steps_per_period must be >= {MIN_STEPS_PER_PERIOD}, got {steps_per_period}"
        )));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(Error::InvalidArgument(format!("invalid time span ({t0}, {t1})")));
    }
    let nominal = model.period() / steps_per_period as f64;
    let subdivision = match min_positive_delay(model) {
        Some(d) if d < nominal => ((nominal / d).ceil() as usize).min(MAX_SUBDIVISION),
        _ => 1,
    };
    let steps = ((t1 - t0) / nominal - 1e-9).ceil().max(0.0) as usize * subdivision;
    let h = if steps == 0 { nominal } else { (t1 - t0) / steps as f64 };

    let horizon = model.max_delay() + model.period() + 2.0 * h;
    let mut stepper = Stepper {
        model,
        mode,
        history: History::new(initial.clone(), mode, t0, h, horizon),
        delayed: vec![(0.0, 0.0); model.terms().len()],
    };
    let mut traj = Trajectory {
        mode,
        step: h,
        subdivision,
        times: Vec::with_capacity(steps + 1),
        values: Vec::with_capacity(steps + 1),
        derivatives: Vec::with_capacity(steps + 1),
    };

    let mut y = initial.state(t0, mode)?;
    for n in 0..=steps {
        let t = if n == steps { t1 } else { t0 + n as f64 * h };
        stepper.history.push(y);
        let k1 = stepper.derivative(t, y, t, y)?;
        stepper.history.set_last_derivative(k1);
        traj.times.push(t);
        traj.values.push(y);
        traj.derivatives.push(k1);
        if n == steps {
            break;
        }
        let k2 = stepper.derivative(t + 0.5 * h, y + 0.5 * h * k1, t, y)?;
        let k3 = stepper.derivative(t + 0.5 * h, y + 0.5 * h * k2, t, y)?;
        let k4 = stepper.derivative(t + h, y + h * k3, t, y)?;
        let change = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !change.is_finite() || change.abs() > DIVERGENCE_RATIO * y.abs().max(1.0) {
            return Err(Error::Diverged { time: t + h });
        }
        y += change;
        if mode == Mode::X && y <= 0.0 {
            return Err(Error::NonPositiveState { time: t + h, value: y });
        }
    }
    Ok(traj)
}
