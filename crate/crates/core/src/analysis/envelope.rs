//! Gridded `alpha`/`beta` envelopes over `(gamma, t)` and the alternating
//! sign chain built from them.

use std::path::Path;

use rayon::prelude::*;

use super::{alpha_weights, beta_weights, phi, phi_limits, TimeGrid, DEFAULT_MARGIN_FLOOR};
use crate::error::{Error, Result};
use crate::model::Model;

/// Closed range `lo, lo + step, ..., <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GammaRange {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let range = Self { lo, hi, step };
        range.validate()?;
        Ok(range)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite() && self.step > 0.0;
        if !ok || self.hi < self.lo {
            return Err(Error::EmptyRange {
                lo: self.lo,
                hi: self.hi,
                step: self.step,
            });
        }
        Ok(())
    }

    /// Grid values, computed as `lo + i step` and rounded to 1e-12 so that
    /// nominal values such as `-0.3` print cleanly.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let g = self.lo + i as f64 * self.step;
                (g * 1e12).round() / 1e12
            })
            .collect()
    }
}

impl Default for GammaRange {
    fn default() -> Self {
        Self {
            lo: -50.0,
            hi: 50.0,
            step: 0.01,
        }
    }
}

/// `alpha`, `beta` and `phi` tabulated over a gamma grid and a uniform time grid.
#[derive(Debug, Clone)]
pub struct EnvelopeGrid {
    pub gammas: Vec<f64>,
    pub times: Vec<f64>,
    pub phi_values: Vec<f64>,
    /// `min_t alpha(gamma_i, t)`.
    pub min_alpha: Vec<f64>,
    /// `max_t beta(gamma_i, t)`.
    pub max_beta: Vec<f64>,
    /// Row-major `[gamma][t]`, present when the scan kept full values.
    pub alpha_values: Option<Vec<f64>>,
    pub beta_values: Option<Vec<f64>>,
}

impl EnvelopeGrid {
    pub fn alpha(&self, i: usize, j: usize) -> Option<f64> {
        self.alpha_values.as_ref().map(|v| v[i * self.times.len() + j])
    }

    pub fn beta(&self, i: usize, j: usize) -> Option<f64> {
        self.beta_values.as_ref().map(|v| v[i * self.times.len() + j])
    }

    /// Index of the grid gamma closest to `gamma`.
    pub fn nearest(&self, gamma: f64) -> Option<usize> {
        (0..self.gammas.len()).min_by(|&a, &b| {
            (self.gammas[a] - gamma)
                .abs()
                .total_cmp(&(self.gammas[b] - gamma).abs())
        })
    }

    /// CSV `gamma,t,alpha,beta`, one row per grid cell.
    pub fn write_values_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let (Some(alpha), Some(beta)) = (&self.alpha_values, &self.beta_values) else {
            return Err(Error::InvalidArgument("envelope was scanned without full values".into()));
        };
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["gamma", "t", "alpha", "beta"])?;
        let nt = self.times.len();
        for (i, g) in self.gammas.iter().enumerate() {
            for (j, t) in self.times.iter().enumerate() {
                let idx = i * nt + j;
                w.write_record([fmt(*g), fmt(*t), fmt(alpha[idx]), fmt(beta[idx])])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// CSV `gamma,phi,min_alpha,max_beta`.
    pub fn write_summary_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["gamma", "phi", "min_alpha", "max_beta"])?;
        for i in 0..self.gammas.len() {
            w.write_record([
                fmt(self.gammas[i]),
                fmt(self.phi_values[i]),
                fmt(self.min_alpha[i]),
                fmt(self.max_beta[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// `(phi, min alpha, max beta, full alpha/beta rows)` for one gamma.
type ScanRow = (f64, f64, f64, Option<(Vec<f64>, Vec<f64>)>);

/// Tabulates the envelopes. With `keep_values = false` only the per-gamma
/// extrema and `phi` are stored, which keeps wide fine scans cheap.
pub fn scan_envelopes(model: &Model, range: &GammaRange, t_points: usize, keep_values: bool) -> Result<EnvelopeGrid> {
    range.validate()?;
    if t_points < 2 {
        return Err(Error::InvalidArgument(format!("t_points must be >= 2, got {t_points}")));
    }
    let grid = TimeGrid::new(model, t_points);
    let gammas = range.values();
    let rows: Vec<ScanRow> = gammas
        .par_iter()
        .map(|&g| {
            let aw = alpha_weights(model, g);
            let bw = beta_weights(model, g);
            let phi_g = phi(model, g);
            if keep_values {
                let a: Vec<f64> = grid.weighted_excess(&aw).collect();
                let b: Vec<f64> = grid.weighted_excess(&bw).collect();
                let min_a = a.iter().copied().fold(f64::INFINITY, f64::min);
                let max_b = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (phi_g, min_a, max_b, Some((a, b)))
            } else {
                (phi_g, grid.excess_extrema(&aw).0, grid.excess_extrema(&bw).1, None)
            }
        })
        .collect();

    let mut env = EnvelopeGrid {
        gammas,
        times: grid.times().to_vec(),
        phi_values: Vec::with_capacity(rows.len()),
        min_alpha: Vec::with_capacity(rows.len()),
        max_beta: Vec::with_capacity(rows.len()),
        alpha_values: keep_values.then(Vec::new),
        beta_values: keep_values.then(Vec::new),
    };
    for (p, a, b, values) in rows {
        env.phi_values.push(p);
        env.min_alpha.push(a);
        env.max_beta.push(b);
        if let Some((av, bv)) = values {
            env.alpha_values.as_mut().unwrap().extend(av);
            env.beta_values.as_mut().unwrap().extend(bv);
        }
    }
    Ok(env)
}

/// A point of the alternation chain. `gamma` is `-inf`/`+inf` for the
/// endpoint limits of `phi`; `sign` is `+1` where `min_t alpha > 0` (or the
/// limit is positive) and `-1` where `max_t beta < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainPoint {
    pub gamma: f64,
    pub sign: i8,
}

/// Labels each grid gamma (`+1` if `min_t alpha > floor`, `-1` if
/// `max_t beta < -floor`), prepends/appends the endpoint limit signs of `phi`,
/// and keeps every labelled point in order.
pub fn alternation_chain(model: &Model, envelope: &EnvelopeGrid, margin_floor: f64) -> Vec<ChainPoint> {
    let (left, right) = phi_limits(model, &model.classify());
    let mut chain = Vec::new();
    if let Some(sign) = left.sign() {
        chain.push(ChainPoint {
            gamma: f64::NEG_INFINITY,
            sign,
        });
    }
    for (i, &gamma) in envelope.gammas.iter().enumerate() {
        if envelope.min_alpha[i] > margin_floor {
            chain.push(ChainPoint { gamma, sign: 1 });
        } else if envelope.max_beta[i] < -margin_floor {
            chain.push(ChainPoint { gamma, sign: -1 });
        }
    }
    if let Some(sign) = right.sign() {
        chain.push(ChainPoint {
            gamma: f64::INFINITY,
            sign,
        });
    }
    chain
}

/// Open band `(lo, hi)` between the last point of one sign run and the first
/// point of the next. Each such band is guaranteed to hold a periodic
/// solution whose log-range lies inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// Sign of the chain at `lo`; the sign at `hi` is the opposite.
    pub lower_sign: i8,
}

impl Interval {
    pub fn contains(&self, lo: f64, hi: f64) -> bool {
        self.lo < lo && hi < self.hi
    }
}

pub fn alternation_intervals(chain: &[ChainPoint]) -> Vec<Interval> {
    chain
        .windows(2)
        .filter(|w| w[0].sign != w[1].sign)
        .map(|w| Interval {
            lo: w[0].gamma,
            hi: w[1].gamma,
            lower_sign: w[0].sign,
        })
        .collect()
}

/// Lower bound on the number of positive periodic solutions: the number of
/// sign alternations along the chain.
pub fn count_predicted_solutions(model: &Model, envelope: &EnvelopeGrid) -> usize {
    alternation_intervals(&alternation_chain(model, envelope, DEFAULT_MARGIN_FLOOR)).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_values() {
        let r = GammaRange::new(-6.0, 35.0, 0.05).unwrap();
        let v = r.values();
        assert_eq!(v.len(), 821);
        assert!(v.contains(&-0.3) && v.contains(&0.2) && v.contains(&34.0) && v.contains(&-5.0));
        assert_eq!(*v.last().unwrap(), 35.0);
        assert!(GammaRange::new(1.0, 0.0, 0.1).is_err());
        assert!(GammaRange::new(0.0, 1.0, 0.0).is_err());
        assert_eq!(GammaRange::new(2.0, 2.0, 0.5).unwrap().values(), vec![2.0]);
    }

    #[test]
    fn intervals_from_chain() {
        let p = |gamma, sign| ChainPoint { gamma, sign };
        let chain = [
            p(f64::NEG_INFINITY, 1),
            p(-3.0, 1),
            p(-2.0, -1),
            p(-1.0, -1),
            p(0.5, 1),
        ];
        let iv = alternation_intervals(&chain);
        assert_eq!(iv.len(), 2);
        assert_eq!((iv[0].lo, iv[0].hi, iv[0].lower_sign), (-3.0, -2.0, 1));
        assert_eq!((iv[1].lo, iv[1].hi, iv[1].lower_sign), (-1.0, 0.5, -1));
    }
}
