use std::f64::consts::TAU;

/// `y(t) = mean + sum_{j=1..K} (cos_j cos(j w t) + sin_j sin(j w t))`, `w = 2 pi / T`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    pub period: f64,
    pub mean: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn constant(period: f64, mean: f64, harmonics: usize) -> Self {
        Self {
            period,
            mean,
            cos: vec![0.0; harmonics],
            sin: vec![0.0; harmonics],
        }
    }

    pub fn harmonics(&self) -> usize {
        self.cos.len()
    }

    /// Unknown vector `[mean, cos_1..cos_K, sin_1..sin_K]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + 2 * self.harmonics());
        v.push(self.mean);
        v.extend(&self.cos);
        v.extend(&self.sin);
        v
    }

    pub fn from_vector(period: f64, v: &[f64]) -> Self {
        let k = (v.len() - 1) / 2;
        Self {
            period,
            mean: v[0],
            cos: v[1..=k].to_vec(),
            sin: v[k + 1..=2 * k].to_vec(),
        }
    }

    /// Same function with `harmonics` coefficient pairs (zero-padded or truncated).
    pub fn resized(&self, harmonics: usize) -> Self {
        let mut out = self.clone();
        out.cos.resize(harmonics, 0.0);
        out.sin.resize(harmonics, 0.0);
        out
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let mut y = self.mean;
        for_each_harmonic(self.period, t, self.harmonics(), |j, c, s| {
            y += self.cos[j] * c + self.sin[j] * s;
        });
        y
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let w = TAU / self.period;
        let mut d = 0.0;
        for_each_harmonic(self.period, t, self.harmonics(), |j, c, s| {
            d += (j + 1) as f64 * w * (self.sin[j] * c - self.cos[j] * s);
        });
        d
    }

    /// `(min, max)` over `points` uniform samples of one period.
    pub fn extrema(&self, points: usize) -> (f64, f64) {
        (0..points)
            .map(|i| self.evaluate(i as f64 * self.period / points as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// L-infinity distance over `points` uniform samples.
    pub fn distance(&self, other: &FourierSeries, points: usize) -> f64 {
        (0..points)
            .map(|i| {
                let t = i as f64 * self.period / points as f64;
                (self.evaluate(t) - other.evaluate(t)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Calls `f(j, cos((j+1) w t), sin((j+1) w t))` for `j < harmonics`, using
/// angle-addition recurrences seeded from the reduced phase.
pub(crate) fn for_each_harmonic(period: f64, t: f64, harmonics: usize, mut f: impl FnMut(usize, f64, f64)) {
    let phase = TAU * (t / period).rem_euclid(1.0);
    let (s1, c1) = phase.sin_cos();
    let (mut c, mut s) = (c1, s1);
    for j in 0..harmonics {
        f(j, c, s);
        (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_and_differentiates() {
        let f = FourierSeries {
            period: 2.0,
            mean: 0.5,
            cos: vec![0.1, 0.0, -0.2],
            sin: vec![0.0, 0.3, 0.0],
        };
        let w = TAU / 2.0;
        for t in [0.0, 0.37, 1.9, -4.2] {
            let y = 0.5 + 0.1 * (w * t).cos() + 0.3 * (2.0 * w * t).sin() - 0.2 * (3.0 * w * t).cos();
            let d = -0.1 * w * (w * t).sin() + 0.6 * w * (2.0 * w * t).cos() + 0.6 * w * (3.0 * w * t).sin();
            assert!((f.evaluate(t) - y).abs() < 1e-13);
            assert!((f.derivative(t) - d).abs() < 1e-12);
        }
        assert_eq!(FourierSeries::from_vector(2.0, &f.to_vector()), f);
    }
}
