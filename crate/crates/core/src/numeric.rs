//! Small numerical kernels shared across the crate: overflow-safe exponential
//! ratios, composite Simpson quadrature and bisection.

/// `ln(1 + e^x)` without overflow for large `x` or underflow loss for small `x`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `e^a / (1 + e^b)`, evaluated as `exp(a - softplus(b))`.
///
/// Finite whenever the true ratio is representable, even when `e^a` and
/// `e^b` individually overflow.
#[inline]
pub fn exp_ratio(a: f64, b: f64) -> f64 {
    (a - softplus(b)).exp()
}

/// Composite Simpson rule for `f` on `[a, b]` with `panels` subintervals.
///
/// `panels` is rounded up to the next even number.
pub fn simpson<F>(f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let n = panels.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Shrinks a sign-change bracket `[lo, hi]` of `f` by bisection until its
/// width is at most `width`. Returns the refined bracket.
///
/// If the midpoint is an exact root the bracket collapses onto it.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return (mid, mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_branches() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(800.0), 800.0);
        assert!(softplus(-800.0) >= 0.0 && softplus(-800.0) < 1e-300);
        assert!((softplus(3.0) - (1.0 + 3f64.exp()).ln()).abs() < 1e-14);
        assert!((softplus(-3.0) - (1.0 + (-3f64).exp()).ln()).abs() < 1e-15);
    }

    #[test]
    fn exp_ratio_survives_naive_overflow() {
        // e^1342 / (1 + e^1061) = e^281, way past f64 for the naive form
        let naive = 1342f64.exp() / (1.0 + 1061f64.exp());
        assert!(naive.is_nan() || naive.is_infinite());
        let v = exp_ratio(1342.0, 1061.0);
        assert!(((v.ln() - 281.0) / 281.0).abs() < 1e-14);
        assert!((exp_ratio(0.0, 0.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 4);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn simpson_odd_panel_count_rounds_up() {
        let v = simpson(|x| x.sin(), 0.0, std::f64::consts::PI, 101);
        assert!((v - 2.0).abs() < 1e-7);
    }

    #[test]
    fn bisect_finds_ln3() {
        let (lo, hi) = bisect(|g| 4.0 / (1.0 + (2.0 * g).exp()) - 1.0, 0.0, 2.0, 1e-9);
        let root = 3f64.ln() / 2.0;
        assert!(lo <= root && root <= hi && hi - lo <= 1e-9);
    }
}
