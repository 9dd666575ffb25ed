//! Independent oracles for the integration tests: an adaptive
//! Runge-Kutta integrator for the profile ODE and a dense linear solver.
//! Both are deliberately written with none of the library's machinery.

#![allow(dead_code)]

/// Dormand-Prince 5(4) with step-size control for the autonomous scalar
/// ODE dU/dz = f(U), from (z0, u0) to z1, absolute tolerance `tol`.
pub fn rk45_integrate(f: impl Fn(f64) -> f64, z0: f64, u0: f64, z1: f64, tol: f64) -> f64 {
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // embedded 4th-order weights
    const E1: f64 = 5179.0 / 57600.0;
    const E3: f64 = 7571.0 / 16695.0;
    const E4: f64 = 393.0 / 640.0;
    const E5: f64 = -92097.0 / 339200.0;
    const E6: f64 = 187.0 / 2100.0;
    const E7: f64 = 1.0 / 40.0;

    let total = z1 - z0;
    if total == 0.0 {
        return u0;
    }
    let dir = total.signum();
    let mut z = z0;
    let mut u = u0;
    let mut h = (0.01 * total.abs()).min(0.1) * dir;
    let mut steps = 0usize;
    while (z1 - z) * dir > 0.0 {
        if (z + h - z1) * dir > 0.0 {
            h = z1 - z;
        }
        let k1 = f(u);
        let k2 = f(u + h * A21 * k1);
        let k3 = f(u + h * (A31 * k1 + A32 * k2));
        let k4 = f(u + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(u + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(u + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let u5 = u + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(u5);
        let u4 = u + h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let err = (u5 - u4).abs();
        if err <= tol || h.abs() < 1e-14 {
            z += h;
            u = u5;
        }
        let scale = if err > 0.0 {
            0.9 * (tol / err).powf(0.2)
        } else {
            4.0
        };
        h *= scale.clamp(0.2, 4.0);
        steps += 1;
        assert!(steps < 2_000_000, "RK45 oracle exceeded its step budget");
    }
    u
}

/// Gaussian elimination with partial pivoting on a dense matrix.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|row| row.clone()).collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        m.swap(col, piv);
        x.swap(col, piv);
        assert!(m[col][col].abs() > 0.0, "oracle hit a zero pivot");
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                m[r][c] -= factor * m[col][c];
            }
            x[r] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= m[col][col];
        for r in 0..col {
            x[r] -= m[r][col] * x[col];
        }
    }
    x
}

/// xorshift-based deterministic f64 stream in (-1, 1), independent of any
/// RNG crate so the oracle inputs are stable forever.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    pub fn next_usize(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }
}
