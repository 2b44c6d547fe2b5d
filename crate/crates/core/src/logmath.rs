use serde::{Deserialize, Serialize};

/// Natural logarithm of a nonnegative count or weight. Zero is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogCount(pub f64);

impl LogCount {
    pub const ZERO: LogCount = LogCount(f64::NEG_INFINITY);
    pub const ONE: LogCount = LogCount(0.0);

    pub fn from_count(x: f64) -> LogCount {
        LogCount(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Equality of the represented values within a relative tolerance.
    pub fn approx_eq(self, other: LogCount, rel: f64) -> bool {
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        // |a/b - 1| <= rel  <=>  |ln a - ln b| <= ln(1 + rel) (to first order)
        (self.0 - other.0).abs() <= rel.ln_1p()
    }

    pub fn add(self, other: LogCount) -> LogCount {
        LogCount(log_add_exp(self.0, other.0))
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(sum e^x_i)`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + xs.iter().map(|x| (x - hi).exp()).sum::<f64>().ln()
}

/// Table of `ln k!` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_exp() {
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.5), 1.5);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_sum_exp(&[1f64.ln(), 2f64.ln(), 3f64.ln()]) - 6f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn factorials() {
        let t = ln_factorials(6);
        assert!((t[6] - 720f64.ln()).abs() < 1e-12);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn approx() {
        let a = LogCount::from_count(1e6);
        let b = LogCount::from_count(1e6 * (1.0 + 1e-12));
        assert!(a.approx_eq(b, 1e-9));
        assert!(!a.approx_eq(LogCount::from_count(1.001e6), 1e-9));
        assert!(LogCount::ZERO.approx_eq(LogCount::ZERO, 1e-9));
    }
}
