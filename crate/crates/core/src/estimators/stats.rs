//! Streaming accumulators and small fitting helpers, generic over the real
//! scalar.

use crate::scalar::Real;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Welford accumulator for mean and variance.
#[derive(Debug, Clone)]
pub struct Acc<F: Real> {
    count: u64,
    mean: F,
    m2: F,
}

impl<F: Real> Default for Acc<F> {
    fn default() -> Self {
        Acc {
            count: 0,
            mean: F::zero(),
            m2: F::zero(),
        }
    }
}

impl<F: Real> Acc<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: F) {
        self.count += 1;
        let n = F::from_u64(self.count).unwrap();
        let delta = value - self.mean;
        self.mean = self.mean + delta / n;
        self.m2 = self.m2 + delta * (value - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> F {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> F {
        if self.count < 2 {
            F::zero()
        } else {
            self.m2 / F::from_u64(self.count - 1).unwrap()
        }
    }

    pub fn std_dev(&self) -> F {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> F {
        if self.count == 0 {
            F::zero()
        } else {
            self.std_dev() / F::from_u64(self.count).unwrap().sqrt()
        }
    }
}

/// Least-squares line through (x, y) pairs; returns (slope, intercept).
pub fn linear_fit<F: Real>(xs: &[F], ys: &[F]) -> Option<(F, F)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = F::from_usize(xs.len()).unwrap();
    let sx = xs.iter().fold(F::zero(), |a, &b| a + b);
    let sy = ys.iter().fold(F::zero(), |a, &b| a + b);
    let sxx = xs.iter().fold(F::zero(), |a, &b| a + b * b);
    let sxy = xs
        .iter()
        .zip(ys)
        .fold(F::zero(), |a, (&x, &y)| a + x * y);
    let denom = n * sxx - sx * sx;
    if denom.is_zero() {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Some((slope, intercept))
}

/// Slope of log(y) against log(x), over the pairs with y > 0.
pub fn log_log_slope<F: Real>(xs: &[F], ys: &[F]) -> Option<F> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x > F::zero() && y > F::zero() {
            lx.push(x.ln());
            ly.push(y.ln());
        }
    }
    linear_fit(&lx, &ly).map(|(slope, _)| slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulator_matches_direct_formulas() {
        let data = [2.0f64, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        let mut acc = Acc::new();
        for &v in &data {
            acc.push(v);
        }
        assert!((acc.mean() - 5.0).abs() < 1e-12);
        assert!((acc.variance() - 32.0 / 7.0).abs() < 1e-12);
        assert!((acc.std_error() - (32.0f64 / 7.0 / 8.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exact_line_is_recovered() {
        let xs = [1.0f64, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let (slope, intercept) = linear_fit(&xs, &ys).unwrap();
        assert!((slope - 3.0).abs() < 1e-12);
        assert!((intercept + 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_slope_is_recovered() {
        let xs = [1.0f64, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(-2.5)).collect();
        let slope = log_log_slope(&xs, &ys).unwrap();
        assert!((slope + 2.5).abs() < 1e-9);
    }

    #[test]
    fn generic_over_f32() {
        let mut acc: Acc<f32> = Acc::new();
        acc.push(1.0);
        acc.push(3.0);
        assert_eq!(acc.mean(), 2.0);
    }
}
