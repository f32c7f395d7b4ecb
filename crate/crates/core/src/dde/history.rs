use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use super::Mode;
use crate::error::{Error, Result};

/// State before the integration start, given in x-space or log-space.
#[derive(Clone)]
pub enum InitialHistory {
    /// Constant concentration `x`.
    Constant(f64),
    /// `t -> x(t)`.
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// `t -> y(t) = ln x(t)`.
    LogFunction(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl InitialHistory {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn log_function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::LogFunction(Arc::new(f))
    }

    /// Value at `t` in the state variable of `mode`.
    pub fn state(&self, t: f64, mode: Mode) -> Result<f64> {
        let x_state = |x: f64| -> Result<f64> {
            match mode {
                Mode::X if x > 0.0 => Ok(x),
                Mode::Log if x > 0.0 => Ok(x.ln()),
                _ => Err(Error::NonPositiveState { time: t, value: x }),
            }
        };
        match self {
            Self::Constant(x) => x_state(*x),
            Self::Function(f) => x_state(f(t)),
            Self::LogFunction(f) => {
                let y = f(t);
                match mode {
                    Mode::Log => Ok(y),
                    Mode::X => x_state(y.exp()),
                }
            }
        }
    }
}

impl fmt::Debug for InitialHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(x) => write!(f, "Constant({x})"),
            Self::Function(_) => f.write_str("Function(..)"),
            Self::LogFunction(_) => f.write_str("LogFunction(..)"),
        }
    }
}

/// Cubic Hermite value on `[t0, t0 + h]` at `s = (t - t0) / h`.
#[inline]
pub(crate) fn hermite(s: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
}

/// Uniform-step knots with derivatives, trimmed to a fixed look-back horizon.
#[derive(Debug, Clone)]
pub struct History {
    initial: InitialHistory,
    mode: Mode,
    start: f64,
    step: f64,
    horizon: f64,
    /// Index (from `start`) of the front knot.
    first: usize,
    values: VecDeque<f64>,
    derivatives: VecDeque<f64>,
}

impl History {
    pub fn new(initial: InitialHistory, mode: Mode, start: f64, step: f64, horizon: f64) -> Self {
        Self {
            initial,
            mode,
            start,
            step,
            horizon,
            first: 0,
            values: VecDeque::new(),
            derivatives: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last_time(&self) -> Option<f64> {
        (!self.values.is_empty()).then(|| self.knot_time(self.first + self.values.len() - 1))
    }

    fn knot_time(&self, index: usize) -> f64 {
        self.start + index as f64 * self.step
    }

    /// Appends the knot value; its derivative follows with [`History::set_last_derivative`].
    pub fn push(&mut self, value: f64) {
        self.values.push_back(value);
        self.derivatives.push_back(f64::NAN);
        let last = self.knot_time(self.first + self.values.len() - 1);
        while self.values.len() > 2 && self.knot_time(self.first + 1) < last - self.horizon {
            self.values.pop_front();
            self.derivatives.pop_front();
            self.first += 1;
        }
    }

    pub fn set_last_derivative(&mut self, d: f64) {
        if let Some(slot) = self.derivatives.back_mut() {
            *slot = d;
        }
    }

    /// Dense value at `t`. Times at or before the start use the initial
    /// history; times past the last completed interval are not supported and
    /// are clamped to it.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if t <= self.start || self.values.len() < 2 {
            return self.initial.state(t, self.mode);
        }
        let offset = (t - self.start) / self.step;
        let last_interval = self.first + self.values.len() - 2;
        let i = (offset.floor() as usize).clamp(self.first, last_interval);
        let j = i - self.first;
        let s = offset - i as f64;
        if s == 0.0 {
            return Ok(self.values[j]);
        }
        if self.derivatives[j + 1].is_nan() {
            // right derivative not computed yet: quadratic through both knots
            let (y0, y1, d0) = (self.values[j], self.values[j + 1], self.derivatives[j]);
            return Ok(y0 + self.step * d0 * s + (y1 - y0 - self.step * d0) * s * s);
        }
        Ok(hermite(
            s,
            self.step,
            self.values[j],
            self.derivatives[j],
            self.values[j + 1],
            self.derivatives[j + 1],
        ))
    }
}
