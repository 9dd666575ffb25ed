//! Monotone piecewise-cubic (Fritsch-Carlson) interpolation.

use crate::error::{Error, Result};

/// Shape-preserving cubic Hermite interpolant on a strictly increasing grid.
/// Monotone data produce a monotone interpolant, so a decreasing wave
/// profile never picks up spurious oscillations.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "interpolation table needs >= 2 aligned points, got {} x / {} y",
                n,
                y.len()
            )));
        }
        for i in 1..n {
            if !(x[i] > x[i - 1]) {
                return Err(Error::ProfileConstruction(format!(
                    "interpolation abscissae not strictly increasing at index {i}"
                )));
            }
        }
        let d = fritsch_carlson_slopes(&x, &y);
        Ok(Self { x, y, d })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Index of the interval containing `t` (clamped to the table range).
    pub fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0;
        }
        if t >= self.x[n - 1] {
            return n - 2;
        }
        // partition_point returns the first index with x > t
        self.x.partition_point(|&xi| xi <= t) - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.interval(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (h00, h10, h01, h11) = hermite_basis(s);
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        let s = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![s, s];
    }
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = endpoint_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = endpoint_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// Three-point one-sided estimate with the usual monotonicity clamps.
fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let mut d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        d = 0.0;
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        d = 3.0 * d0;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_linear_data_exactly() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|&x| -2.0 * x + 1.0).collect();
        let p = MonotoneCubic::new(x, y).unwrap();
        for t in [0.05, 1.234, 4.4, 5.6] {
            assert!((p.eval(t) - (-2.0 * t + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn stays_monotone_on_decreasing_data() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let y: Vec<f64> = x.iter().map(|&x| (-x).exp()).collect();
        let p = MonotoneCubic::new(x.clone(), y).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..490 {
            let t = i as f64 * 0.02;
            let v = p.eval(t);
            assert!(v <= prev + 1e-15, "not monotone at t={t}");
            prev = v;
        }
    }

    #[test]
    fn rejects_non_increasing_abscissae() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
    }
}
