//! Small quadrature kernels used by the profile construction.

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
///
/// Returns `None` if the recursion depth cap is reached before the local
/// error estimate drops below the tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Option<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a).abs() < f64::EPSILON * (a.abs() + b.abs()) {
        // Richardson extrapolation knocks the error down one more order.
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

// 15-point Gauss-Legendre nodes/weights on [-1, 1].
const GL15_X: [f64; 15] = [
    -0.987992518020485,
    -0.937273392400706,
    -0.848206583410427,
    -0.724417731360170,
    -0.570972172608539,
    -0.394151347077563,
    -0.201194093997435,
    0.0,
    0.201194093997435,
    0.394151347077563,
    0.570972172608539,
    0.724417731360170,
    0.848206583410427,
    0.937273392400706,
    0.987992518020485,
];
const GL15_W: [f64; 15] = [
    0.030753241996117,
    0.070366047488108,
    0.107159220467172,
    0.139570677926154,
    0.166269205816994,
    0.186161000015562,
    0.198431485327112,
    0.202578241925561,
    0.198431485327112,
    0.186161000015562,
    0.166269205816994,
    0.139570677926154,
    0.107159220467172,
    0.070366047488108,
    0.030753241996117,
];

/// Fixed 15-point Gauss-Legendre rule. Intended for short smooth
/// subintervals where adaptivity is unnecessary.
pub fn gauss_legendre_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in GL15_X.iter().zip(GL15_W.iter()) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Cumulative trapezoid of `y` on grid `x`, anchored at 0 on the left.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..y.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
        out.push(acc);
    }
    out
}

/// Trapezoid rule over the whole grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..y.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    acc
}
