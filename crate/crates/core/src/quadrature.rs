//! Adaptive Simpson quadrature used by the closed-form checks.

const MAX_DEPTH: u32 = 48;
const PANELS: usize = 32;

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol`.
///
/// The interval is cut into fixed panels first so narrow peaks are not
/// missed by the initial five-point sample.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi == lo {
        return 0.0;
    }
    let width = (hi - lo) / PANELS as f64;
    let panel_tol = tol / PANELS as f64;
    (0..PANELS)
        .map(|k| {
            let a = lo + k as f64 * width;
            let b = if k + 1 == PANELS { hi } else { a + width };
            let fa = f(a);
            let fb = f(b);
            let m = 0.5 * (a + b);
            let fm = f(m);
            let whole = simpson(a, b, fa, fm, fb);
            refine(&f, a, b, fa, fm, fb, whole, panel_tol, MAX_DEPTH)
        })
        .sum()
}

/// Integrates `f` over `[lo, ∞)` through `t = lo + (s/(1−s))²`, `s ∈ [0, 1)`.
///
/// The squared map keeps integrands decaying like `t^{-3/2}` bounded at `s = 1`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, lo: f64, tol: f64) -> f64 {
    let mapped = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let q = s / (1.0 - s);
        let jac = 2.0 * q / ((1.0 - s) * (1.0 - s));
        let value = f(lo + q * q);
        if jac.is_finite() && value != 0.0 {
            value * jac
        } else {
            0.0
        }
    };
    integrate(mapped, 0.0, 1.0, tol)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
