//! The averaged balance function `phi`, its per-class components, and the
//! pointwise envelopes `alpha`/`beta` used by the multiplicity conditions.
//!
//! With `C = T mean(b)`:
//!
//! ```text
//! phi(g)      = sum_k lambda_k mean(r_k) e^((m_k-1) g) / (1 + e^(n_k g)) - mean(b)
//! alpha(g, t) = sum_k lambda_k r_k(t) e^((m_k-1) g) e^(-C m_k) / (1 + e^(n_k (g + C))) - b(t)
//! beta(g, t)  = sum_k lambda_k r_k(t) e^((m_k-1) g) e^( C m_k) / (1 + e^(n_k (g - C))) - b(t)
//! ```
//!
//! Every ratio is evaluated through [`exp_ratio`] so the functions stay finite
//! for `|g|` in the hundreds with the exponents of interest.

mod brackets;
mod envelope;
mod synthesis;
mod theorems;

pub use brackets::{find_phi_brackets, Bracket, BracketScan, BRACKET_WIDTH};
pub use envelope::{
    alternation_chain, alternation_intervals, count_predicted_solutions, scan_envelopes, ChainPoint,
    EnvelopeGrid, GammaRange, Interval,
};
pub use synthesis::{synthesize_lambdas, Synthesis};
pub use theorems::{
    check_existence, check_multiplicity, CaseReport, CheckConfig, Hypothesis, Requirement, TheoremId,
    TheoremReport, Verdict,
};

use crate::model::{ExponentClass, Model, TermClassification};
use crate::numeric::exp_ratio;

/// Default number of uniformly spaced times per period for "for all t" checks.
pub const DEFAULT_T_POINTS: usize = 1000;

/// Default slack required of a strict inequality before it counts as satisfied.
pub const DEFAULT_MARGIN_FLOOR: f64 = 1e-9;

#[inline]
fn phi_factor(m: f64, n: f64, gamma: f64) -> f64 {
    exp_ratio((m - 1.0) * gamma, n * gamma)
}

#[inline]
fn alpha_factor(m: f64, n: f64, gamma: f64, c: f64) -> f64 {
    exp_ratio((m - 1.0) * gamma - c * m, n * (gamma + c))
}

#[inline]
fn beta_factor(m: f64, n: f64, gamma: f64, c: f64) -> f64 {
    exp_ratio((m - 1.0) * gamma + c * m, n * (gamma - c))
}

pub fn phi(model: &Model, gamma: f64) -> f64 {
    let sum: f64 = model
        .terms()
        .iter()
        .enumerate()
        .map(|(k, t)| model.weight(k) * phi_factor(t.m, t.n, gamma))
        .sum();
    sum - model.b_mean()
}

/// Partial sum of `phi` over one exponent class, without the `-mean(b)` term.
pub fn phi_component(model: &Model, classes: &TermClassification, class: ExponentClass, gamma: f64) -> f64 {
    classes
        .set(class)
        .iter()
        .map(|&k| {
            let t = &model.terms()[k];
            model.weight(k) * phi_factor(t.m, t.n, gamma)
        })
        .sum()
}

pub fn alpha(model: &Model, gamma: f64, t: f64) -> f64 {
    let c = model.decay_integral();
    pointwise(model, t, |m, n| alpha_factor(m, n, gamma, c))
}

pub fn beta(model: &Model, gamma: f64, t: f64) -> f64 {
    let c = model.decay_integral();
    pointwise(model, t, |m, n| beta_factor(m, n, gamma, c))
}

fn pointwise<F: Fn(f64, f64) -> f64>(model: &Model, t: f64, factor: F) -> f64 {
    let sum: f64 = model
        .terms()
        .iter()
        .map(|term| term.lambda * term.r.evaluate(t) * factor(term.m, term.n))
        .sum();
    sum - model.b().evaluate(t)
}

/// Limit of `phi` at one end of the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiLimit {
    PlusInfinity,
    Finite(f64),
}

impl PhiLimit {
    /// `+1`, `-1`, or `None` when the limit is exactly zero.
    pub fn sign(self) -> Option<i8> {
        match self {
            PhiLimit::PlusInfinity => Some(1),
            PhiLimit::Finite(v) if v > 0.0 => Some(1),
            PhiLimit::Finite(v) if v < 0.0 => Some(-1),
            PhiLimit::Finite(_) => None,
        }
    }
}

/// Limits of `phi` as `gamma -> -inf` and `gamma -> +inf`, read off the
/// classification. Only terms with `lambda_k mean(r_k) > 0` contribute.
///
/// At `-inf` each fraction behaves like `e^((m-1) g)`: classes M1 diverge and
/// M2 tend to one. At `+inf` it behaves like `e^((m-1-n) g)`: M5 diverges and
/// M4 tends to one.
pub fn phi_limits(model: &Model, classes: &TermClassification) -> (PhiLimit, PhiLimit) {
    let active_weight = |class: ExponentClass| -> f64 { classes.set(class).iter().map(|&k| model.weight(k)).sum() };
    let left = if active_weight(ExponentClass::M1) > 0.0 {
        PhiLimit::PlusInfinity
    } else {
        PhiLimit::Finite(active_weight(ExponentClass::M2) - model.b_mean())
    };
    let right = if active_weight(ExponentClass::M5) > 0.0 {
        PhiLimit::PlusInfinity
    } else {
        PhiLimit::Finite(active_weight(ExponentClass::M4) - model.b_mean())
    };
    (left, right)
}

/// Coefficients `lambda_k r_k(t_j)` and `b(t_j)` sampled on a uniform grid
/// `t_j = j T / points`, shared by every "for all t" check.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    times: Vec<f64>,
    /// `lambda_k r_k(t_j)`, indexed `[k][j]`.
    production: Vec<Vec<f64>>,
    decay: Vec<f64>,
}

impl TimeGrid {
    pub fn new(model: &Model, points: usize) -> Self {
        let points = points.max(1);
        let times: Vec<f64> = (0..points).map(|j| j as f64 * model.period() / points as f64).collect();
        let production = model
            .terms()
            .iter()
            .map(|term| times.iter().map(|&t| term.lambda * term.r.evaluate(t)).collect())
            .collect();
        let decay = times.iter().map(|&t| model.b().evaluate(t)).collect();
        Self {
            times,
            production,
            decay,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `sum_k lambda_k r_k(t_j) w_k - b(t_j)` for every grid time.
    pub fn weighted_excess<'a>(&'a self, weights: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        (0..self.times.len()).map(move |j| {
            let sum: f64 = self
                .production
                .iter()
                .zip(weights)
                .filter(|(_, &w)| w != 0.0)
                .map(|(row, w)| row[j] * w)
                .sum();
            sum - self.decay[j]
        })
    }

    /// `min_j` and `max_j` of [`TimeGrid::weighted_excess`].
    pub fn excess_extrema(&self, weights: &[f64]) -> (f64, f64) {
        self.weighted_excess(weights)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    pub fn alpha_row(&self, model: &Model, gamma: f64) -> Vec<f64> {
        self.weighted_excess(&alpha_weights(model, gamma)).collect()
    }

    pub fn beta_row(&self, model: &Model, gamma: f64) -> Vec<f64> {
        self.weighted_excess(&beta_weights(model, gamma)).collect()
    }

    /// `min_t alpha(gamma, t)` over the grid.
    pub fn min_alpha(&self, model: &Model, gamma: f64) -> f64 {
        self.excess_extrema(&alpha_weights(model, gamma)).0
    }

    /// `max_t beta(gamma, t)` over the grid.
    pub fn max_beta(&self, model: &Model, gamma: f64) -> f64 {
        self.excess_extrema(&beta_weights(model, gamma)).1
    }
}

pub(crate) fn alpha_weights(model: &Model, gamma: f64) -> Vec<f64> {
    let c = model.decay_integral();
    model.terms().iter().map(|t| alpha_factor(t.m, t.n, gamma, c)).collect()
}

pub(crate) fn beta_weights(model: &Model, gamma: f64) -> Vec<f64> {
    let c = model.decay_integral();
    model.terms().iter().map(|t| beta_factor(t.m, t.n, gamma, c)).collect()
}
