use std::path::PathBuf;

use clap::Args;
use hemato_core::analysis::{CheckConfig, GammaRange, DEFAULT_MARGIN_FLOOR, DEFAULT_T_POINTS};
use hemato_core::orbits::OrbitConfig;
use hemato_core::{Error, Result};

/// A `lo:step:hi` gamma grid as typed; range checks happen in [`RunConfig::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSpec {
    pub lo: f64,
    pub step: f64,
    pub hi: f64,
}

pub fn parse_gamma_spec(s: &str) -> std::result::Result<GammaSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, step, hi] = parts[..] else {
        return Err(format!("expected lo:step:hi, got `{s}`"));
    };
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
    Ok(GammaSpec {
        lo: num(lo)?,
        step: num(step)?,
        hi: num(hi)?,
    })
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Points per period for "for all t" checks.
    #[arg(long, default_value_t = DEFAULT_T_POINTS)]
    pub t_points: usize,
    /// A pointwise inequality holds only with at least this margin.
    #[arg(long, default_value_t = DEFAULT_MARGIN_FLOOR)]
    pub margin_floor: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Newton and search settings; unset flags take the library defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct OrbitArgs {
    /// Fourier coefficient pairs K.
    #[arg(long)]
    pub harmonics: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub residual_tolerance: Option<f64>,
    #[arg(long)]
    pub amplitude_tolerance: Option<f64>,
    /// Orbits closer than this in log-space (L-infinity) are merged.
    #[arg(long)]
    pub dedup_tol: Option<f64>,
    /// Evenly spread Newton seeds per alternation band.
    #[arg(long)]
    pub seeds_per_bracket: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gamma: GammaRange,
    pub t_points: usize,
    pub margin_floor: f64,
    pub orbit: OrbitConfig,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(gamma: Option<GammaSpec>, grid: &GridArgs, orbit: &OrbitArgs) -> Result<Self> {
        let gamma = match gamma {
            Some(g) => GammaRange::new(g.lo, g.hi, g.step)?,
            None => GammaRange::default(),
        };
        let defaults = OrbitConfig::default();
        let config = Self {
            gamma,
            t_points: grid.t_points,
            margin_floor: grid.margin_floor,
            orbit: OrbitConfig {
                harmonics: orbit.harmonics.unwrap_or(defaults.harmonics),
                max_iter: orbit.max_iter.unwrap_or(defaults.max_iter),
                residual_tolerance: orbit.residual_tolerance.unwrap_or(defaults.residual_tolerance),
                amplitude_tolerance: orbit.amplitude_tolerance.unwrap_or(defaults.amplitude_tolerance),
                dedup_tol: orbit.dedup_tol.unwrap_or(defaults.dedup_tol),
                seeds_per_bracket: orbit.seeds_per_bracket.unwrap_or(defaults.seeds_per_bracket),
                margin_floor: grid.margin_floor,
                ..defaults
            },
            out: grid.out.clone(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.gamma.validate()?;
        if self.t_points < 2 {
            return Err(Error::InvalidArgument(format!("t-points must be >= 2, got {}", self.t_points)));
        }
        self.orbit.validate()
    }

    pub fn check_config(&self) -> CheckConfig {
        CheckConfig {
            t_points: self.t_points,
            margin_floor: self.margin_floor,
            gamma_range: self.gamma,
        }
    }

    pub fn create_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out)?;
        Ok(())
    }
}
