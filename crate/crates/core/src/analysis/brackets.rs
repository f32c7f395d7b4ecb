//! Sign-change brackets of `phi` on a gamma grid.

use rayon::prelude::*;

use super::{phi, GammaRange};
use crate::error::Result;
use crate::model::Model;
use crate::numeric::bisect;

/// Bisection target width for refined brackets.
pub const BRACKET_WIDTH: f64 = 1e-6;

/// `phi(lo) * phi(hi) < 0` (or `lo == hi` at an exact root).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    /// `phi` goes from negative to positive across the bracket.
    pub rising: bool,
}

impl Bracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, Default)]
pub struct BracketScan {
    pub brackets: Vec<Bracket>,
    /// Cells where a midpoint probe exposed a sign-change pair the coarse
    /// grid could not see. Those pairs are included in `brackets`.
    pub warnings: Vec<String>,
}

pub fn find_phi_brackets(model: &Model, range: &GammaRange) -> Result<BracketScan> {
    range.validate()?;
    let gammas = range.values();
    let values: Vec<f64> = gammas.par_iter().map(|&g| phi(model, g)).collect();
    let f = |g: f64| phi(model, g);

    // Probe every cell at its midpoint: a refinement that disagrees with the
    // coarse sign count means two roots hide inside one step.
    let cells: Vec<Vec<(f64, f64, f64, f64)>> = (0..gammas.len().saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let (a, b) = (gammas[i], gammas[i + 1]);
            let mid = 0.5 * (a + b);
            let fm = f(mid);
            let pts = [(a, values[i]), (mid, fm), (b, values[i + 1])];
            pts.windows(2)
                .filter(|w| w[0].1 != 0.0 && w[1].1 != 0.0 && (w[0].1 > 0.0) != (w[1].1 > 0.0))
                .map(|w| (w[0].0, w[0].1, w[1].0, w[1].1))
                .collect()
        })
        .collect();

    let mut scan = BracketScan::default();
    for (i, cell) in cells.iter().enumerate() {
        let coarse_change = values[i] != 0.0 && values[i + 1] != 0.0 && (values[i] > 0.0) != (values[i + 1] > 0.0);
        if !coarse_change && !cell.is_empty() {
            scan.warnings.push(format!(
                "two sign changes of phi hide inside [{}, {}]; refine gamma_step",
                gammas[i],
                gammas[i + 1]
            ));
        }
        for &(a, fa, b, _) in cell {
            let (lo, hi) = bisect(f, a, b, BRACKET_WIDTH);
            scan.brackets.push(Bracket { lo, hi, rising: fa < 0.0 });
        }
    }
    // exact zeros on the grid
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 {
            let before = values[..i].iter().rev().find(|x| **x != 0.0);
            scan.brackets.push(Bracket {
                lo: gammas[i],
                hi: gammas[i],
                rising: before.is_some_and(|x| *x < 0.0),
            });
        }
    }
    scan.brackets.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_root_at_half_ln3() {
        let model = Model::constant_coefficients(1.0, 1.0, &[(4.0, 1.0, 2.0, 0.0, 0.0)]).unwrap();
        let scan = find_phi_brackets(&model, &GammaRange::default()).unwrap();
        assert_eq!(scan.brackets.len(), 1);
        let b = scan.brackets[0];
        let root = 0.5 * 3f64.ln();
        assert!(b.lo <= root && root <= b.hi);
        assert!(b.hi - b.lo <= BRACKET_WIDTH);
        assert!(!b.rising);
        assert!(phi(&model, b.lo) * phi(&model, b.hi) < 0.0);
        assert!(scan.warnings.is_empty());
    }

    #[test]
    fn hidden_pair_is_reported() {
        // 2 e^g / (1 + e^{2g}) = 1 / cosh(g) peaks at 1 > 0.999, so phi has
        // roots at +-acosh(1/0.999) ~ +-0.0447, both inside one coarse cell
        let model = Model::constant_coefficients(1.0, 0.999, &[(2.0, 2.0, 2.0, 0.0, 0.0)]).unwrap();
        let scan = find_phi_brackets(&model, &GammaRange::new(-0.5, 0.5, 1.0).unwrap()).unwrap();
        assert_eq!(scan.warnings.len(), 1);
        assert_eq!(scan.brackets.len(), 2);
        assert!(scan.brackets[0].rising && !scan.brackets[1].rising);
        let root = (1.0f64 / 0.999).acosh();
        assert!(scan.brackets[1].lo <= root && root <= scan.brackets[1].hi);
    }
}
