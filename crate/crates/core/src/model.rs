//! Domain types for the multi-delay equation
//!
//! ```text
//! x'(t) = sum_k lambda_k r_k(t) x(t - tau_k(t))^m_k / (1 + x(t - mu_k(t))^n_k) - b(t) x(t)
//! ```
//!
//! together with the exponent classification that decides which existence
//! and multiplicity results apply.

use std::fmt;

use crate::error::{Error, Result};
use crate::periodic::{PeriodicFn, VALIDATION_POINTS};

/// One production term `lambda r(t) x(t - tau)^m / (1 + x(t - mu)^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub lambda: f64,
    pub m: f64,
    pub n: f64,
    pub r: PeriodicFn,
    pub tau: PeriodicFn,
    pub mu: PeriodicFn,
}

impl Term {
    pub fn new(lambda: f64, m: f64, n: f64, r: PeriodicFn, tau: PeriodicFn, mu: PeriodicFn) -> Self {
        Self {
            lambda,
            m,
            n,
            r,
            tau,
            mu,
        }
    }

    /// Constant coefficient `r`, constant delays.
    pub fn constant(period: f64, lambda: f64, m: f64, n: f64, r: f64, tau: f64, mu: f64) -> Result<Self> {
        Ok(Self::new(
            lambda,
            m,
            n,
            PeriodicFn::constant(period, r)?,
            PeriodicFn::constant(period, tau)?,
            PeriodicFn::constant(period, mu)?,
        ))
    }
}

/// A fully parameterized model. Immutable once built; the coefficient means
/// and the decay integral `C = T mean(b)` are cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    period: f64,
    terms: Vec<Term>,
    b: PeriodicFn,
    r_means: Vec<f64>,
    b_mean: f64,
    allow_inactive: bool,
}

impl Model {
    /// Validates and builds a model; every `lambda_k` must be positive.
    pub fn new(period: f64, b: PeriodicFn, terms: Vec<Term>) -> Result<Self> {
        Self::build(period, b, terms, false)
    }

    /// Like [`Model::new`] but accepts `lambda_k = 0` ("inactive" terms).
    /// A model whose terms are all inactive is the pure-decay null model.
    pub fn new_allowing_inactive(period: f64, b: PeriodicFn, terms: Vec<Term>) -> Result<Self> {
        Self::build(period, b, terms, true)
    }

    fn build(period: f64, b: PeriodicFn, terms: Vec<Term>, allow_inactive: bool) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::model("period", format!("must be positive, got {period}")));
        }
        if terms.is_empty() {
            return Err(Error::model("terms", "at least one term is required"));
        }
        check_same_period(period, &b, "b")?;
        if b.grid_min(VALIDATION_POINTS) <= 0.0 {
            return Err(Error::model("b", "must be positive on the validation grid"));
        }
        for (i, term) in terms.iter().enumerate() {
            let field = |name: &str| format!("terms[{i}].{name}");
            let lambda_ok = if allow_inactive {
                term.lambda >= 0.0
            } else {
                term.lambda > 0.0
            };
            if !term.lambda.is_finite() || !lambda_ok {
                let bound = if allow_inactive { ">= 0" } else { "> 0" };
                return Err(Error::model(field("lambda"), format!("must be {bound}, got {}", term.lambda)));
            }
            for (name, v) in [("m", term.m), ("n", term.n)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::model(field(name), format!("must be > 0, got {v}")));
                }
            }
            check_same_period(period, &term.r, &field("r"))?;
            check_same_period(period, &term.tau, &field("tau"))?;
            check_same_period(period, &term.mu, &field("mu"))?;
            if term.r.grid_min(VALIDATION_POINTS) <= 0.0 {
                return Err(Error::model(field("r"), "must be positive on the validation grid"));
            }
            if term.tau.grid_min(VALIDATION_POINTS) < 0.0 {
                return Err(Error::model(field("tau"), "delay must be nonnegative"));
            }
            if term.mu.grid_min(VALIDATION_POINTS) < 0.0 {
                return Err(Error::model(field("mu"), "delay must be nonnegative"));
            }
        }
        let r_means = terms.iter().map(|t| t.r.mean()).collect();
        let b_mean = b.mean();
        Ok(Self {
            period,
            terms,
            b,
            r_means,
            b_mean,
            allow_inactive,
        })
    }

    /// Constant-coefficient model: each entry is `(lambda * r, m, n, tau, mu)`.
    pub fn constant_coefficients(period: f64, b: f64, terms: &[(f64, f64, f64, f64, f64)]) -> Result<Self> {
        let b = PeriodicFn::constant(period, b)?;
        let terms = terms
            .iter()
            .map(|&(lr, m, n, tau, mu)| Term::constant(period, 1.0, m, n, lr, tau, mu))
            .collect::<Result<Vec<_>>>()?;
        Self::new(period, b, terms)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn b(&self) -> &PeriodicFn {
        &self.b
    }

    pub fn allows_inactive_terms(&self) -> bool {
        self.allow_inactive
    }

    pub fn b_mean(&self) -> f64 {
        self.b_mean
    }

    /// `mean(r_k)` for each term.
    pub fn r_means(&self) -> &[f64] {
        &self.r_means
    }

    /// `lambda_k * mean(r_k)`.
    pub fn weight(&self, k: usize) -> f64 {
        self.terms[k].lambda * self.r_means[k]
    }

    /// `C = integral of b over one period = T mean(b)`.
    pub fn decay_integral(&self) -> f64 {
        self.period * self.b_mean
    }

    /// Largest delay over all terms, sampled on the validation grid.
    pub fn max_delay(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| [t.tau.grid_max(VALIDATION_POINTS), t.mu.grid_max(VALIDATION_POINTS)])
            .fold(0.0, f64::max)
    }

    pub fn with_lambdas(&self, lambdas: &[f64]) -> Result<Self> {
        if lambdas.len() != self.terms.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} lambdas, got {}",
                self.terms.len(),
                lambdas.len()
            )));
        }
        let terms = self
            .terms
            .iter()
            .zip(lambdas)
            .map(|(t, &lambda)| Term { lambda, ..t.clone() })
            .collect();
        Self::build(self.period, self.b.clone(), terms, self.allow_inactive)
    }

    /// Applies `f` to every delay function (both `tau_k` and `mu_k`).
    pub fn map_delays<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&PeriodicFn) -> PeriodicFn,
    {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                tau: f(&t.tau),
                mu: f(&t.mu),
                ..t.clone()
            })
            .collect();
        Self::build(self.period, self.b.clone(), terms, self.allow_inactive)
    }

    pub fn with_b(&self, b: PeriodicFn) -> Result<Self> {
        Self::build(self.period, b, self.terms.clone(), self.allow_inactive)
    }

    pub fn classify(&self) -> TermClassification {
        classify(self)
    }
}

fn check_same_period(period: f64, f: &PeriodicFn, field: &str) -> Result<()> {
    if f.period() != period {
        return Err(Error::model(
            field,
            format!("period {} differs from model period {period}", f.period()),
        ));
    }
    Ok(())
}

/// Where `m_k` falls relative to `1` and `n_k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExponentClass {
    /// `0 < m < 1`
    M1,
    /// `m = 1`
    M2,
    /// `1 < m < n + 1`
    M3,
    /// `m = n + 1`
    M4,
    /// `m > n + 1`
    M5,
}

impl ExponentClass {
    pub const ALL: [ExponentClass; 5] = [Self::M1, Self::M2, Self::M3, Self::M4, Self::M5];

    /// Exact comparisons on the stored values, no tolerance.
    pub fn of(m: f64, n: f64) -> Self {
        if m < 1.0 {
            Self::M1
        } else if m == 1.0 {
            Self::M2
        } else if m < n + 1.0 {
            Self::M3
        } else if m == n + 1.0 {
            Self::M4
        } else {
            Self::M5
        }
    }

    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i.checked_sub(1)?).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthCase {
    Superlinear,
    Sublinear,
    AsymptoticallyLinear,
}

impl fmt::Display for GrowthCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrowthCase::Superlinear => "superlinear",
            GrowthCase::Sublinear => "sublinear",
            GrowthCase::AsymptoticallyLinear => "asymptotically_linear",
        })
    }
}

/// Partition of the (zero-based) term indices into the five exponent classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermClassification {
    sets: [Vec<usize>; 5],
    classes: Vec<ExponentClass>,
    pub case: GrowthCase,
}

impl TermClassification {
    pub fn set(&self, class: ExponentClass) -> &[usize] {
        &self.sets[class.index() - 1]
    }

    pub fn class_of(&self, k: usize) -> ExponentClass {
        self.classes[k]
    }

    pub fn has(&self, class: ExponentClass) -> bool {
        !self.set(class).is_empty()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// `m_k > 1` for every term.
    pub fn all_m_above_one(&self) -> bool {
        !self.has(ExponentClass::M1) && !self.has(ExponentClass::M2)
    }

    /// `m_k >= 1` for every term and `m_i = 1` for some term.
    pub fn m_at_least_one_with_unit(&self) -> bool {
        !self.has(ExponentClass::M1) && self.has(ExponentClass::M2)
    }

    /// Some `m_j > 1`.
    pub fn some_m_above_one(&self) -> bool {
        self.has(ExponentClass::M3) || self.has(ExponentClass::M4) || self.has(ExponentClass::M5)
    }
}

impl fmt::Display for TermClassification {
    /// One-based indices, e.g. `M1={1} M2={} M3={2,3} M4={} M5={4} case=superlinear`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for class in ExponentClass::ALL {
            let members: Vec<String> = self.set(class).iter().map(|k| (k + 1).to_string()).collect();
            write!(f, "M{}={{{}}} ", class.index(), members.join(","))?;
        }
        write!(f, "case={}", self.case)
    }
}

pub fn classify(model: &Model) -> TermClassification {
    let classes: Vec<ExponentClass> = model.terms().iter().map(|t| ExponentClass::of(t.m, t.n)).collect();
    let mut sets: [Vec<usize>; 5] = Default::default();
    for (k, class) in classes.iter().enumerate() {
        sets[class.index() - 1].push(k);
    }
    let case = if !sets[4].is_empty() {
        GrowthCase::Superlinear
    } else if !sets[3].is_empty() {
        GrowthCase::AsymptoticallyLinear
    } else {
        GrowthCase::Sublinear
    };
    TermClassification { sets, classes, case }
}
