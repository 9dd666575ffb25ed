//! Shared small helpers.

/// Least-squares line fit. Returns (slope, intercept).
/// Panics if fewer than two points are supplied; callers validate.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert!(x.len() == y.len() && x.len() >= 2);
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.5, 6.0, 8.5];
        let (s, b) = linear_fit(&x, &y);
        assert!((s - 2.5).abs() < 1e-14);
        assert!((b - 1.0).abs() < 1e-14);
    }
}
