//! Periodic orbits of the log-space equation by harmonic balance.
//!
//! A T-periodic `y` is a truncated Fourier series; every delayed argument is
//! reduced modulo `T`, so the collocation system needs no history. Seeds come
//! from the alternation chain of the envelope scan, one band at a time.

mod collocation;
mod fourier;

use std::path::Path;

use rayon::prelude::*;

pub use collocation::{
    collocation_points, collocation_residual, residual_at, residual_on_grid, solve_from, solve_orbit, NoConvergence,
};
pub use fourier::FourierSeries;

use crate::analysis::{alternation_chain, alternation_intervals, find_phi_brackets, phi, EnvelopeGrid, GammaRange, Interval};
use crate::dde::{integrate, InitialHistory, Mode};
use crate::error::{Error, Result};
use crate::model::Model;

/// Samples per period for `y_min`/`y_max`.
pub const EXTREMA_POINTS: usize = 1024;
/// Samples per period for the deduplication distance and the orbit CSV.
pub const DEDUP_POINTS: usize = 256;
/// Integrator resolution of the time-domain cross-check.
pub const VALIDATION_STEPS: usize = 512;
/// Allowed period-map discrepancy in the time-domain cross-check.
pub const PERIOD_MAP_TOLERANCE: f64 = 1e-5;
/// Cap on how far an unbounded band is searched for a sign of `phi`.
const MAX_OUTER_EXTENT: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitConfig {
    /// Fourier coefficient pairs `K`.
    pub harmonics: usize,
    pub max_iter: usize,
    /// Initial Newton step fraction.
    pub damping: f64,
    pub residual_tolerance: f64,
    pub amplitude_tolerance: f64,
    pub dedup_tol: f64,
    pub seeds_per_bracket: usize,
    pub margin_floor: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            harmonics: 16,
            max_iter: 100,
            damping: 1.0,
            residual_tolerance: 1e-10,
            amplitude_tolerance: 1e-6,
            dedup_tol: 1e-4,
            seeds_per_bracket: 5,
            margin_floor: crate::analysis::DEFAULT_MARGIN_FLOOR,
        }
    }
}

impl OrbitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("residual_tolerance", self.residual_tolerance),
            ("amplitude_tolerance", self.amplitude_tolerance),
            ("dedup_tol", self.dedup_tol),
            ("margin_floor", self.margin_floor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.harmonics == 0 {
            return Err(Error::InvalidArgument("harmonics must be >= 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    /// `y = ln x`.
    pub fourier: FourierSeries,
    /// Max collocation residual.
    pub residual_norm: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Alternation band containing `[y_min, y_max]`, if any.
    pub bracket: Option<(f64, f64)>,
    pub iterations: usize,
}

impl PeriodicOrbit {
    pub fn amplitude(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn mean(&self) -> f64 {
        self.fourier.mean
    }

    pub fn y(&self, t: f64) -> f64 {
        self.fourier.evaluate(t)
    }

    pub fn x(&self, t: f64) -> f64 {
        self.fourier.evaluate(t).exp()
    }

    /// CSV `t,y,x` on `points` uniform times of one period.
    pub fn write_csv(&self, path: impl AsRef<Path>, points: usize) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "y", "x"])?;
        let period = self.fourier.period;
        for i in 0..points {
            let t = i as f64 * period / points as f64;
            let y = self.y(t);
            w.write_record([format!("{t:.12e}"), format!("{y:.12e}"), format!("{:.12e}", y.exp())])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// CSV `orbit_id,mean,y_min,y_max,residual,amplitude,bracket_lo,bracket_hi`.
/// Missing brackets are written as empty fields.
pub fn write_manifest(orbits: &[PeriodicOrbit], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["orbit_id", "mean", "y_min", "y_max", "residual", "amplitude", "bracket_lo", "bracket_hi"])?;
    let f = |v: f64| format!("{v:.12e}");
    for (i, o) in orbits.iter().enumerate() {
        let (lo, hi) = o.bracket.map(|(a, b)| (f(a), f(b))).unwrap_or_default();
        w.write_record([
            i.to_string(),
            f(o.mean()),
            f(o.y_min),
            f(o.y_max),
            f(o.residual_norm),
            f(o.amplitude()),
            lo,
            hi,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct OrbitSearch {
    pub orbits: Vec<PeriodicOrbit>,
    /// Alternation bands (possibly unbounded) from the envelope.
    pub intervals: Vec<Interval>,
    /// Finite band actually seeded for each interval.
    pub seeded_bands: Vec<(f64, f64)>,
    pub predicted: usize,
    pub seeds_tried: usize,
    pub seeds_converged: usize,
    pub warnings: Vec<String>,
}

/// Pushes an unbounded end outward from `anchor` by doubling until `phi` has
/// `sign` there.
fn outer_end(model: &Model, anchor: f64, direction: f64, sign: i8) -> f64 {
    let mut width = (3.0 * model.decay_integral()).max(1.0);
    loop {
        let g = anchor + direction * width;
        if phi(model, g).signum() as i8 == sign || width >= MAX_OUTER_EXTENT {
            return g;
        }
        width *= 2.0;
    }
}

fn seeded_band(model: &Model, iv: &Interval) -> (f64, f64) {
    match (iv.lo.is_finite(), iv.hi.is_finite()) {
        (true, true) => (iv.lo, iv.hi),
        (false, true) => (outer_end(model, iv.hi, -1.0, iv.lower_sign), iv.hi),
        (true, false) => (iv.lo, outer_end(model, iv.lo, 1.0, -iv.lower_sign)),
        (false, false) => (
            outer_end(model, 0.0, -1.0, iv.lower_sign),
            outer_end(model, 0.0, 1.0, -iv.lower_sign),
        ),
    }
}

/// Seeds: every `phi` root inside the band, then `per_band` evenly spread
/// midpoints.
fn band_seeds(model: &Model, (lo, hi): (f64, f64), per_band: usize) -> Vec<f64> {
    let mut seeds = Vec::new();
    if let Ok(range) = GammaRange::new(lo, hi, (hi - lo) / 1000.0) {
        if let Ok(scan) = find_phi_brackets(model, &range) {
            seeds.extend(scan.brackets.iter().map(|b| b.midpoint()));
        }
    }
    seeds.extend((0..per_band).map(|i| lo + (i as f64 + 0.5) * (hi - lo) / per_band as f64));
    seeds
}

/// Seeds Newton in every alternation band, keeps converged orbits that meet
/// the amplitude bound, merges duplicates, and sorts by mean.
pub fn find_all_orbits(model: &Model, envelope: &EnvelopeGrid, config: &OrbitConfig) -> Result<OrbitSearch> {
    config.validate()?;
    let intervals = alternation_intervals(&alternation_chain(model, envelope, config.margin_floor));
    let seeded_bands: Vec<(f64, f64)> = intervals.iter().map(|iv| seeded_band(model, iv)).collect();
    let seeds: Vec<f64> = seeded_bands
        .iter()
        .flat_map(|&band| band_seeds(model, band, config.seeds_per_bracket))
        .collect();

    let results: Vec<Result<std::result::Result<PeriodicOrbit, NoConvergence>>> =
        seeds.par_iter().map(|&s| solve_orbit(model, s, config)).collect();

    let bound = model.decay_integral() + config.amplitude_tolerance;
    let mut warnings = Vec::new();
    let mut kept: Vec<PeriodicOrbit> = Vec::new();
    let mut converged = 0;
    for result in results {
        let Ok(mut orbit) = result? else { continue };
        converged += 1;
        if orbit.amplitude() > bound {
            warnings.push(format!(
                "discarded orbit with mean {:.6} whose amplitude {:.3e} exceeds C + tolerance",
                orbit.mean(),
                orbit.amplitude()
            ));
            continue;
        }
        if kept
            .iter()
            .any(|k| k.fourier.distance(&orbit.fourier, DEDUP_POINTS) <= config.dedup_tol)
        {
            continue;
        }
        orbit.bracket = intervals
            .iter()
            .find(|iv| iv.contains(orbit.y_min, orbit.y_max))
            .map(|iv| (iv.lo, iv.hi));
        kept.push(orbit);
    }
    kept.sort_by(|a, b| a.mean().total_cmp(&b.mean()));

    for iv in &intervals {
        if !kept.iter().any(|o| o.bracket == Some((iv.lo, iv.hi))) {
            warnings.push(format!("no orbit found inside ({}, {})", iv.lo, iv.hi));
        }
    }
    if kept.len() < intervals.len() {
        warnings.push(format!(
            "found {} orbit(s), predicted at least {}",
            kept.len(),
            intervals.len()
        ));
    }
    Ok(OrbitSearch {
        orbits: kept,
        predicted: intervals.len(),
        intervals,
        seeded_bands,
        seeds_tried: seeds.len(),
        seeds_converged: converged,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitValidation {
    pub amplitude: f64,
    pub amplitude_bound: f64,
    pub residual_norm: f64,
    /// L-infinity gap between the integrated period and the orbit, in log-space.
    pub period_map_discrepancy: f64,
    pub positive: bool,
    /// `None` when no bracket is attached.
    pub bracket_contains: Option<bool>,
    /// One label per failed check.
    pub failures: Vec<String>,
}

impl OrbitValidation {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the amplitude bound, the collocation residual, a one-period
/// time-domain integration started from the orbit itself, positivity, and
/// bracket containment.
pub fn validate_orbit(model: &Model, orbit: &PeriodicOrbit, config: &OrbitConfig) -> Result<OrbitValidation> {
    let mut failures = Vec::new();
    let amplitude = orbit.amplitude();
    let amplitude_bound = model.decay_integral() + config.amplitude_tolerance;
    if amplitude > amplitude_bound {
        failures.push(format!("amplitude {amplitude:.3e} exceeds C + tolerance = {amplitude_bound:.3e}"));
    }
    let residual_norm = collocation_residual(model, &orbit.fourier)
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    if residual_norm > config.residual_tolerance {
        failures.push(format!("collocation residual {residual_norm:.3e} exceeds tolerance"));
    }

    let fourier = orbit.fourier.clone();
    let history = InitialHistory::log_function(move |t| fourier.evaluate(t));
    let traj = integrate(model, &history, (0.0, model.period()), VALIDATION_STEPS, Mode::Log)?;
    let period_map_discrepancy = traj
        .times
        .iter()
        .zip(&traj.values)
        .map(|(&t, &y)| (y - orbit.y(t)).abs())
        .fold(0.0, f64::max);
    if period_map_discrepancy.is_nan() || period_map_discrepancy > PERIOD_MAP_TOLERANCE {
        failures.push(format!(
            "time-domain period map differs by {period_map_discrepancy:.3e} (> {PERIOD_MAP_TOLERANCE:e})"
        ));
    }

    let positive = traj.values.iter().all(|y| y.exp() > 0.0) && orbit.y_min.exp() > 0.0;
    if !positive {
        failures.push("x = e^y underflows to zero".into());
    }
    let bracket_contains = orbit.bracket.map(|(lo, hi)| lo < orbit.y_min && orbit.y_max < hi);
    if bracket_contains == Some(false) {
        failures.push("log range leaves its bracket".into());
    }
    Ok(OrbitValidation {
        amplitude,
        amplitude_bound,
        residual_norm,
        period_map_discrepancy,
        positive,
        bracket_contains,
        failures,
    })
}

/// Re-solves with twice the harmonics from `orbit` and returns the
/// L-infinity change, or `None` if the refined solve does not converge.
pub fn refinement_change(model: &Model, orbit: &PeriodicOrbit, config: &OrbitConfig) -> Result<Option<f64>> {
    let seed = orbit.fourier.resized(2 * orbit.fourier.harmonics());
    Ok(solve_from(model, &seed, config)?
        .ok()
        .map(|refined| refined.fourier.distance(&orbit.fourier, EXTREMA_POINTS)))
}
