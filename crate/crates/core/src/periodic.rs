//! T-periodic scalar coefficient functions.
//!
//! Two representations are supported: a trigonometric polynomial (the
//! canonical form, evaluated and averaged exactly) and uniformly spaced
//! samples over one period joined by a periodic cubic spline.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::numeric::simpson;

/// Grid density used to validate sign constraints on coefficient functions.
pub const VALIDATION_POINTS: usize = 4096;

/// Default panel count for quadrature means of sampled functions.
pub const DEFAULT_MEAN_PANELS: usize = 1024;

/// One term `cos_coeff * cos(j w t) + sin_coeff * sin(j w t)` of a
/// trigonometric polynomial, `w = 2 pi / T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub multiple: u32,
    pub cos: f64,
    pub sin: f64,
}

impl Harmonic {
    pub fn new(multiple: u32, cos: f64, sin: f64) -> Self {
        Self { multiple, cos, sin }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Form {
    Trig {
        mean: f64,
        harmonics: Vec<Harmonic>,
    },
    Sampled {
        samples: Vec<f64>,
        /// Spline second derivatives at the knots.
        curvature: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFn {
    period: f64,
    form: Form,
}

impl PeriodicFn {
    pub fn constant(period: f64, value: f64) -> Result<Self> {
        Self::trig(period, value, Vec::new())
    }

    pub fn trig(period: f64, mean: f64, harmonics: Vec<Harmonic>) -> Result<Self> {
        check_period(period)?;
        if !mean.is_finite() {
            return Err(Error::model("mean", "must be finite"));
        }
        for h in &harmonics {
            if h.multiple == 0 {
                return Err(Error::model(
                    "harmonics",
                    "frequency multiple must be >= 1",
                ));
            }
            if !h.cos.is_finite() || !h.sin.is_finite() {
                return Err(Error::model("harmonics", "coefficients must be finite"));
            }
        }
        Ok(Self {
            period,
            form: Form::Trig { mean, harmonics },
        })
    }

    /// Builds a periodic cubic spline through `samples`, taken at
    /// `t_i = i T / samples.len()`.
    pub fn sampled(period: f64, samples: Vec<f64>) -> Result<Self> {
        check_period(period)?;
        if samples.len() < 3 {
            return Err(Error::model("samples", "need at least 3 samples"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::model("samples", "samples must be finite"));
        }
        let curvature = periodic_spline_curvature(&samples, period / samples.len() as f64);
        Ok(Self {
            period,
            form: Form::Sampled { samples, curvature },
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn is_trig(&self) -> bool {
        matches!(self.form, Form::Trig { .. })
    }

    /// True for a trig polynomial with no harmonics.
    pub fn is_constant(&self) -> bool {
        match &self.form {
            Form::Trig { harmonics, .. } => harmonics.iter().all(|h| h.cos == 0.0 && h.sin == 0.0),
            Form::Sampled { samples, .. } => samples.iter().all(|&v| v == samples[0]),
        }
    }

    /// Harmonic terms of the trig form, empty for sampled functions.
    pub fn harmonics(&self) -> &[Harmonic] {
        match &self.form {
            Form::Trig { harmonics, .. } => harmonics,
            Form::Sampled { .. } => &[],
        }
    }

    pub fn samples(&self) -> Option<&[f64]> {
        match &self.form {
            Form::Sampled { samples, .. } => Some(samples),
            Form::Trig { .. } => None,
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let s = t.rem_euclid(self.period);
        match &self.form {
            Form::Trig { mean, harmonics } => {
                let theta = TAU * s / self.period;
                harmonics.iter().fold(*mean, |acc, h| {
                    let (sin, cos) = (h.multiple as f64 * theta).sin_cos();
                    acc + h.cos * cos + h.sin * sin
                })
            }
            Form::Sampled { samples, curvature } => {
                let n = samples.len();
                let h = self.period / n as f64;
                let pos = s / h;
                let i = (pos.floor() as usize).min(n - 1);
                let u = pos - i as f64;
                let j = (i + 1) % n;
                let w = 1.0 - u;
                w * samples[i]
                    + u * samples[j]
                    + h * h / 6.0 * ((w * w * w - w) * curvature[i] + (u * u * u - u) * curvature[j])
            }
        }
    }

    /// Average over one period: exact for the trig form, composite Simpson
    /// with [`DEFAULT_MEAN_PANELS`] panels for sampled functions.
    pub fn mean(&self) -> f64 {
        match &self.form {
            Form::Trig { mean, .. } => *mean,
            Form::Sampled { .. } => self.mean_by_quadrature(DEFAULT_MEAN_PANELS),
        }
    }

    /// Composite Simpson average over one period, regardless of form.
    pub fn mean_by_quadrature(&self, panels: usize) -> f64 {
        simpson(|t| self.evaluate(t), 0.0, self.period, panels) / self.period
    }

    /// Minimum over `points` uniformly spaced times in one period.
    pub fn grid_min(&self, points: usize) -> f64 {
        self.grid_values(points).fold(f64::INFINITY, f64::min)
    }

    /// Maximum over `points` uniformly spaced times in one period.
    pub fn grid_max(&self, points: usize) -> f64 {
        self.grid_values(points).fold(f64::NEG_INFINITY, f64::max)
    }

    fn grid_values(&self, points: usize) -> impl Iterator<Item = f64> + '_ {
        let points = points.max(1);
        (0..points).map(move |i| self.evaluate(i as f64 * self.period / points as f64))
    }

    /// Returns a copy with `offset` added to every value.
    pub fn add_constant(&self, offset: f64) -> Self {
        let form = match &self.form {
            Form::Trig { mean, harmonics } => Form::Trig {
                mean: mean + offset,
                harmonics: harmonics.clone(),
            },
            Form::Sampled { samples, curvature } => Form::Sampled {
                samples: samples.iter().map(|v| v + offset).collect(),
                curvature: curvature.clone(),
            },
        };
        Self {
            period: self.period,
            form,
        }
    }

    /// Returns a copy with every value multiplied by `factor`.
    pub fn scale(&self, factor: f64) -> Self {
        let form = match &self.form {
            Form::Trig { mean, harmonics } => Form::Trig {
                mean: mean * factor,
                harmonics: harmonics
                    .iter()
                    .map(|h| Harmonic::new(h.multiple, h.cos * factor, h.sin * factor))
                    .collect(),
            },
            Form::Sampled { samples, curvature } => Form::Sampled {
                samples: samples.iter().map(|v| v * factor).collect(),
                curvature: curvature.iter().map(|v| v * factor).collect(),
            },
        };
        Self {
            period: self.period,
            form,
        }
    }
}

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(Error::model("period", format!("must be positive, got {period}")))
    }
}

/// Solves `M[i-1] + 4 M[i] + M[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]) / h^2`
/// with cyclic indices (Sherman-Morrison on the tridiagonal part).
fn periodic_spline_curvature(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let rhs: Vec<f64> = (0..n)
        .map(|i| {
            let prev = y[(i + n - 1) % n];
            let next = y[(i + 1) % n];
            6.0 * (next - 2.0 * y[i] + prev) / (h * h)
        })
        .collect();

    // corner entries are both 1
    let gamma = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;

    let x = solve_tridiagonal(&diag, &rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = 1.0;
    let z = solve_tridiagonal(&diag, &u);
    let fact = (x[0] + x[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

/// Thomas algorithm for unit off-diagonals.
fn solve_tridiagonal(diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = 1.0 / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - c[i - 1];
        c[i] = 1.0 / m;
        d[i] = (rhs[i] - d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: f64 = 0.005;

    fn b_trig() -> PeriodicFn {
        PeriodicFn::trig(T, 1.1, vec![Harmonic::new(1, 0.02, 0.0)]).unwrap()
    }

    fn b_sampled(n: usize) -> PeriodicFn {
        let b = b_trig();
        let samples = (0..n).map(|i| b.evaluate(i as f64 * T / n as f64)).collect();
        PeriodicFn::sampled(T, samples).unwrap()
    }

    #[test]
    fn trig_evaluates_at_origin_and_after_one_period() {
        let b = b_trig();
        assert!((b.evaluate(0.0) - 1.12).abs() < 1e-15);
        assert!((b.evaluate(0.005) - 1.12).abs() < 1e-12);
    }

    #[test]
    fn sampled_quarter_period_matches_closed_form() {
        let b = b_sampled(64);
        assert!((b.evaluate(0.00125) - 1.1).abs() < 1e-9);
    }

    #[test]
    fn sampled_between_knots_is_close() {
        // spline error for a single cosine at 64 knots/period is O(h^4)
        let exact = b_trig();
        let b = b_sampled(64);
        for i in 0..200 {
            let t = (i as f64 + 0.37) * T / 200.0;
            assert!((b.evaluate(t) - exact.evaluate(t)).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn spline_reproduces_knots_exactly() {
        let samples = vec![1.0, 3.0, 2.0, 5.0, 4.0];
        let f = PeriodicFn::sampled(2.0, samples.clone()).unwrap();
        for (i, s) in samples.iter().enumerate() {
            assert!((f.evaluate(i as f64 * 0.4) - s).abs() < 1e-12);
        }
    }

    #[test]
    fn means() {
        assert_eq!(PeriodicFn::constant(1.0, 3.5).unwrap().mean(), 3.5);
        assert_eq!(b_trig().mean(), 1.1);
        assert!((b_sampled(64).mean() - 1.1).abs() < 1e-10);
        assert!((b_trig().mean_by_quadrature(1024) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn grid_extrema() {
        let b = b_trig();
        assert!((b.grid_max(VALIDATION_POINTS) - 1.12).abs() < 1e-12);
        assert!((b.grid_min(VALIDATION_POINTS) - 1.08).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PeriodicFn::constant(0.0, 1.0).is_err());
        assert!(PeriodicFn::constant(-1.0, 1.0).is_err());
        assert!(PeriodicFn::trig(1.0, 1.0, vec![Harmonic::new(0, 1.0, 0.0)]).is_err());
        assert!(PeriodicFn::sampled(1.0, vec![1.0, 2.0]).is_err());
        assert!(PeriodicFn::sampled(1.0, vec![1.0, f64::NAN, 2.0]).is_err());
    }

    #[test]
    fn shift_and_scale() {
        let b = b_trig();
        assert!((b.add_constant(0.5).evaluate(0.0) - 1.62).abs() < 1e-15);
        assert!((b.scale(10.0).evaluate(0.0) - 11.2).abs() < 1e-12);
        let s = b_sampled(32);
        let t = 0.0013;
        assert!((s.scale(2.0).evaluate(t) - 2.0 * s.evaluate(t)).abs() < 1e-14);
        assert!((s.add_constant(1.0).evaluate(t) - 1.0 - s.evaluate(t)).abs() < 1e-14);
    }
}
