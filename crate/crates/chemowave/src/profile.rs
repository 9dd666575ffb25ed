//! Traveling-wave profile construction.
//!
//! The wave (U, V, W) connects (u_-, v_-, 0) on the left to (0, 0, w_+) on
//! the right and moves with speed s = sqrt(chi * u_-). U solves the scalar
//! ODE dU/dz = h(U) with h(U) = chi * U^{2-p} * (U - u_-) / (s p); the
//! profile is built by tabulating the quadrature z(U) of 1/h and inverting.
//! V = -U/s, and W is recovered from the cumulative integral of U.

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quad::{adaptive_simpson, gauss_legendre_15};
use crate::util::linear_fit;
use serde::Serialize;

/// Relative distance from both end states at which the quadrature table is
/// clamped; beyond it the closed-form tail models extend the profile.
const ENDPOINT_CLAMP: f64 = 1e-10;
/// Absolute tolerance for each quadrature subintegral of 1/h.
const CELL_TOL: f64 = 1e-13;

/// Physical parameters plus the derived wave speed and left state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveParams {
    /// Diffusion exponent, fast-diffusion range 0 < p < 1.
    pub p: f64,
    /// Chemotactic coefficient, chi > 0.
    pub chi: f64,
    /// Left cell-density state, u_- > 0.
    pub u_minus: f64,
    /// Right signal state, w_+ > 0.
    pub w_plus: f64,
    /// Wave speed, s = sqrt(chi * u_-).
    pub s: f64,
    /// Left transformed-signal state, v_- = -u_-/s < 0.
    pub v_minus: f64,
}

impl WaveParams {
    pub fn new(p: f64, chi: f64, u_minus: f64, w_plus: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "diffusion exponent p must lie in (0, 1), got {p}"
            )));
        }
        for (name, v) in [("chi", chi), ("u_minus", u_minus), ("w_plus", w_plus)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let s = (chi * u_minus).sqrt();
        let v_minus = -u_minus / s;
        Ok(Self {
            p,
            chi,
            u_minus,
            w_plus,
            s,
            v_minus,
        })
    }

    /// Exponential rate of the left tail: u_- - U ~ C exp(rate * z).
    pub fn left_tail_rate(&self) -> f64 {
        self.chi * self.u_minus.powf(2.0 - self.p) / (self.s * self.p)
    }

    /// Coefficient kappa in the algebraic right-tail model
    /// U = (a + kappa z)^{-1/(1-p)}.
    pub fn right_tail_kappa(&self) -> f64 {
        self.chi * (1.0 - self.p) * self.u_minus / (self.s * self.p)
    }
}

/// Make validated parameters with derived s and v_-.
pub fn make_params(p: f64, chi: f64, u_minus: f64, w_plus: f64) -> Result<WaveParams> {
    WaveParams::new(p, chi, u_minus, w_plus)
}

/// Jump-condition residuals (s u_- + chi u_- v_-, s v_- + u_-).
/// Both vanish identically for parameters built by `make_params`.
pub fn check_rankine_hugoniot(params: &WaveParams) -> (f64, f64) {
    (
        params.s * params.u_minus + params.chi * params.u_minus * params.v_minus,
        params.s * params.v_minus + params.u_minus,
    )
}

#[inline]
pub(crate) fn slope_raw(u: f64, params: &WaveParams) -> f64 {
    u.powf(2.0 - params.p) / (params.s * params.p) * params.chi * (u - params.u_minus)
}

/// Profile slope dU/dz = h(U) for U in [0, u_-]. Negative in the interior,
/// zero at both end states.
pub fn profile_slope(u_value: f64, params: &WaveParams) -> Result<f64> {
    if !(0.0..=params.u_minus).contains(&u_value) {
        return Err(Error::InvalidParameter(format!(
            "profile slope requires U in [0, {}], got {u_value}",
            params.u_minus
        )));
    }
    Ok(slope_raw(u_value, params))
}

/// Closed-form right-tail model anchored at U(0) = u_-/2.
pub fn asymptotic_u_hat(z: f64, params: &WaveParams) -> f64 {
    let a = (0.5 * params.u_minus).powf(params.p - 1.0);
    (a + params.right_tail_kappa() * z).powf(-1.0 / (1.0 - params.p))
}

/// Closed-form left-tail model anchored at U(0) = u_-/2.
pub fn asymptotic_u_bar(z: f64, params: &WaveParams) -> f64 {
    params.u_minus - 0.5 * params.u_minus * (params.left_tail_rate() * z).exp()
}

/// Remaining integral of U over (z, +inf) expressed through the profile
/// value at z, using the algebraic tail model in closed form.
pub(crate) fn tail_integral_of_u(u_value: f64, params: &WaveParams) -> f64 {
    params.s * u_value.powf(params.p) / (params.chi * params.u_minus)
}

/// Invertible tabulation of the quadrature z(U), with closed-form tail
/// extensions beyond the clamped table. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    params: WaveParams,
    anchor_z: f64,
    z_tab: Vec<f64>,
    u_tab: Vec<f64>,
    interp: MonotoneCubic,
}

impl ProfileCurve {
    /// Tabulate z(U) on a U-grid geometrically clustered toward both end
    /// states, with `4 * n_samples` internal cells, then prepare the
    /// monotone inverse.
    pub fn build(params: &WaveParams, anchor_z: f64, n_samples: usize) -> Result<Self> {
        let um = params.u_minus;
        let u_min = ENDPOINT_CLAMP * um;
        let delta = ENDPOINT_CLAMP * um;
        let half = 2 * n_samples.max(8);

        // Descending U grid: [u_- - delta .. u_-/2] log-spaced in (u_- - U),
        // then [u_-/2 .. u_min] log-spaced in U.
        let mut u_desc = Vec::with_capacity(2 * half + 1);
        let lo = delta.ln();
        let hi = (0.5 * um).ln();
        for k in 0..half {
            // (u_- - U) from delta up to u_-/2, exclusive of the anchor
            let g = (lo + (hi - lo) * k as f64 / half as f64).exp();
            u_desc.push(um - g);
        }
        let top = (0.5 * um).ln();
        let bot = u_min.ln();
        for k in 0..=half {
            u_desc.push((top + (bot - top) * k as f64 / half as f64).exp());
        }
        let anchor_idx = half;
        debug_assert!((u_desc[anchor_idx] - 0.5 * um).abs() < 1e-12 * um);

        // Cell increments dz = integral of 1/h over each descending cell.
        let integrand = |tau: f64| 1.0 / slope_raw(tau, params);
        let m = u_desc.len();
        let mut z_tab = vec![0.0; m];
        z_tab[anchor_idx] = anchor_z;
        // tolerance scaled per cell: deep-tail increments grow without
        // bound in z, so a fixed absolute tolerance would never be met
        let cell = |ua: f64, ub: f64| -> Result<f64> {
            let crude = gauss_legendre_15(&integrand, ua, ub).abs();
            adaptive_simpson(&integrand, ua, ub, CELL_TOL * (1.0 + crude))
                .ok_or(Error::QuadratureNonConvergence { lo: ub, hi: ua })
        };
        for c in anchor_idx..m - 1 {
            let dz = cell(u_desc[c], u_desc[c + 1])?;
            z_tab[c + 1] = z_tab[c] + dz;
        }
        for c in (0..anchor_idx).rev() {
            let dz = cell(u_desc[c], u_desc[c + 1])?;
            z_tab[c] = z_tab[c + 1] - dz;
        }

        for i in 1..m {
            if !(u_desc[i] < u_desc[i - 1]) {
                return Err(Error::ProfileConstruction(format!(
                    "tabulated U not strictly decreasing at index {i}"
                )));
            }
        }
        let interp = MonotoneCubic::new(z_tab.clone(), u_desc.clone())?;
        Ok(Self {
            params: *params,
            anchor_z,
            z_tab,
            u_tab: u_desc,
            interp,
        })
    }

    pub fn params(&self) -> &WaveParams {
        &self.params
    }

    pub fn anchor_z(&self) -> f64 {
        self.anchor_z
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.z_tab[0], *self.z_tab.last().unwrap())
    }

    /// Profile value U(z). Inside the table: monotone-cubic initial guess
    /// refined by bracketed Newton on the quadrature, so the result matches
    /// z(U) = z to ~1e-13 relative. Outside: closed-form tail models
    /// anchored at the table ends.
    pub fn u_at(&self, z: f64) -> f64 {
        let p = &self.params;
        let m = self.z_tab.len();
        if z < self.z_tab[0] {
            let gap = p.u_minus - self.u_tab[0];
            return p.u_minus - gap * (p.left_tail_rate() * (z - self.z_tab[0])).exp();
        }
        if z > self.z_tab[m - 1] {
            let u_end = self.u_tab[m - 1];
            let a = u_end.powf(p.p - 1.0);
            return (a + p.right_tail_kappa() * (z - self.z_tab[m - 1]))
                .powf(-1.0 / (1.0 - p.p));
        }
        let k = self.interp.interval(z);
        // bracket in U: G is decreasing in U, G(hi) <= 0 <= G(lo)
        let mut lo = self.u_tab[k + 1];
        let mut hi = self.u_tab[k];
        let mut u = self.interp.eval(z).clamp(lo, hi);
        let integrand = |tau: f64| 1.0 / slope_raw(tau, p);
        let z_tol = 1e-13 * (1.0 + z.abs());
        for _ in 0..30 {
            let g = self.z_tab[k] + gauss_legendre_15(&integrand, self.u_tab[k], u) - z;
            if g.abs() <= z_tol {
                break;
            }
            if g > 0.0 {
                lo = lo.max(u);
            } else {
                hi = hi.min(u);
            }
            let mut next = u - g * slope_raw(u, p);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 1e-17 * p.u_minus {
                u = next;
                break;
            }
            u = next;
        }
        u
    }

    pub fn v_at(&self, z: f64) -> f64 {
        -self.u_at(z) / self.params.s
    }

    /// Left-tail gap u_- - U(z), computed from the anchored exponential
    /// model beyond the table so it stays meaningful where u_- - u_at(z)
    /// would cancel to zero in f64.
    pub fn gap_at(&self, z: f64) -> f64 {
        let p = &self.params;
        if z < self.z_tab[0] {
            let gap = p.u_minus - self.u_tab[0];
            return gap * (p.left_tail_rate() * (z - self.z_tab[0])).exp();
        }
        p.u_minus - self.u_at(z)
    }
}

/// Tabulated traveling wave on a uniform z-grid, carrying the quadrature
/// curve for off-grid evaluation.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub s: f64,
    pub params: WaveParams,
    curve: ProfileCurve,
}

impl WaveProfile {
    pub fn eval_u(&self, z: f64) -> f64 {
        self.curve.u_at(z)
    }

    pub fn eval_v(&self, z: f64) -> f64 {
        self.curve.v_at(z)
    }

    pub fn curve(&self) -> &ProfileCurve {
        &self.curve
    }
}

/// Construct the wave on a uniform grid over [z_min, z_max] with the
/// standard anchor U(0) = u_-/2.
pub fn compute_profile(
    params: &WaveParams,
    z_min: f64,
    z_max: f64,
    n_samples: usize,
) -> Result<WaveProfile> {
    compute_profile_anchored(params, z_min, z_max, n_samples, 0.0)
}

/// Same construction with the half-level anchor placed at `anchor_z`
/// instead of 0; the result is the translate by `anchor_z`.
pub fn compute_profile_anchored(
    params: &WaveParams,
    z_min: f64,
    z_max: f64,
    n_samples: usize,
    anchor_z: f64,
) -> Result<WaveProfile> {
    if !(z_min < anchor_z && anchor_z < z_max) {
        return Err(Error::InvalidParameter(format!(
            "z-range [{z_min}, {z_max}] must contain the anchor {anchor_z}"
        )));
    }
    if n_samples < 16 {
        return Err(Error::InvalidParameter(format!(
            "n_samples must be >= 16, got {n_samples}"
        )));
    }
    let curve = ProfileCurve::build(params, anchor_z, n_samples)?;
    let dz = (z_max - z_min) / (n_samples - 1) as f64;
    let z: Vec<f64> = (0..n_samples).map(|i| z_min + i as f64 * dz).collect();
    let u: Vec<f64> = z.iter().map(|&zi| curve.u_at(zi)).collect();

    // Strict decrease holds wherever f64 can resolve the tail gap; deep in
    // the exponential tail the gap underflows and U saturates at u_- exactly.
    for i in 0..n_samples {
        if !(u[i] > 0.0 && u[i] <= params.u_minus) || (i > 0 && !(u[i] <= u[i - 1])) {
            return Err(Error::ProfileConstruction(format!(
                "U violates monotonicity/bounds at sample {i} (z = {})",
                z[i]
            )));
        }
    }

    let v: Vec<f64> = u.iter().map(|&ui| -ui / params.s).collect();

    // W(z) = w_+ exp(-(1/s) * int_z^inf U): cumulative trapezoid from the
    // right plus the closed-form algebraic tail beyond z_max.
    let tail = tail_integral_of_u(u[n_samples - 1], params);
    let mut w = vec![0.0; n_samples];
    let mut acc = tail;
    w[n_samples - 1] = params.w_plus * (-acc / params.s).exp();
    for i in (0..n_samples - 1).rev() {
        acc += 0.5 * (u[i] + u[i + 1]) * dz;
        w[i] = params.w_plus * (-acc / params.s).exp();
    }

    Ok(WaveProfile {
        z,
        u,
        v,
        w,
        s: params.s,
        params: *params,
        curve,
    })
}

/// Measured tail behavior of a constructed profile, with the closed-form
/// targets attached.
#[derive(Debug, Clone, Serialize)]
pub struct TailModel {
    /// Fitted log-log slope of U on the right window.
    pub algebraic_exponent: f64,
    /// Fitted prefactor C in U ~ C z^exponent.
    pub algebraic_prefactor: f64,
    /// Target -1/(1-p).
    pub algebraic_exponent_target: f64,
    /// Fitted semilog slope of (u_- - U) on the left window.
    pub exp_rate: f64,
    /// Fitted prefactor C in u_- - U ~ C exp(rate z).
    pub exp_prefactor: f64,
    /// Target chi u_-^{2-p} / (s p).
    pub exp_rate_target: f64,
    /// ((right_lo, right_hi), (left_lo, left_hi)).
    pub fit_windows: ((f64, f64), (f64, f64)),
}

/// Least-squares tail fits on fixed windows: right tail on
/// [max(50, z_max/2), z_max], left tail on [z_min, min(-5, z_min/2)].
pub fn fit_tails(profile: &WaveProfile) -> Result<TailModel> {
    let params = &profile.params;
    let z_max = *profile.z.last().unwrap();
    let z_min = profile.z[0];
    let right = (50f64.max(0.5 * z_max), z_max);
    let left = (z_min, (-5f64).min(0.5 * z_min));

    let mut rx = Vec::new();
    let mut ry = Vec::new();
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (i, &z) in profile.z.iter().enumerate() {
        if z >= right.0 && z <= right.1 {
            let (t, v) = (z.ln(), profile.u[i].ln());
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::TailFit(format!(
                    "non-finite log-log value at z = {z}"
                )));
            }
            rx.push(t);
            ry.push(v);
        }
        if z >= left.0 && z <= left.1 {
            let gap = profile.curve().gap_at(z);
            let v = gap.ln();
            if !v.is_finite() {
                return Err(Error::TailFit(format!(
                    "non-finite semilog value at z = {z}"
                )));
            }
            lx.push(z);
            ly.push(v);
        }
    }
    if rx.len() < 2 {
        return Err(Error::TailFit(format!(
            "right fit window [{}, {}] holds {} samples; extend z_max",
            right.0,
            right.1,
            rx.len()
        )));
    }
    if lx.len() < 2 {
        return Err(Error::TailFit(format!(
            "left fit window [{}, {}] holds {} samples; extend z_min",
            left.0,
            left.1,
            lx.len()
        )));
    }
    let (r_slope, r_icept) = linear_fit(&rx, &ry);
    let (l_slope, l_icept) = linear_fit(&lx, &ly);
    Ok(TailModel {
        algebraic_exponent: r_slope,
        algebraic_prefactor: r_icept.exp(),
        algebraic_exponent_target: -1.0 / (1.0 - params.p),
        exp_rate: l_slope,
        exp_prefactor: l_icept.exp(),
        exp_rate_target: params.left_tail_rate(),
        fit_windows: (right, left),
    })
}
