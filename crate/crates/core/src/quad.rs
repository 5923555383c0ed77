//! Panelled adaptive quadrature on top of double-exponential integration.

use quadrature::double_exponential;

/// Minimum number of panels per integral.
pub const MIN_PANELS: usize = 64;
const MAX_DEPTH: u32 = 12;

/// Integral of `f` over `[a, b]` to absolute error about `tol`.
///
/// The interval is cut at `breaks` (known kinks of the integrand) and into at
/// least [`MIN_PANELS`] panels; panels whose error estimate exceeds their
/// share of `tol` are bisected.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, breaks: &[f64]) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol, breaks);
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let len = b - a;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let panels = ((MIN_PANELS as f64 * (hi - lo) / len).ceil() as usize).max(1);
        let h = (hi - lo) / panels as f64;
        for k in 0..panels {
            let p0 = lo + h * k as f64;
            let p1 = if k + 1 == panels { hi } else { p0 + h };
            total += adaptive(&f, p0, p1, tol * (p1 - p0) / len, MAX_DEPTH);
        }
    }
    total
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let o = double_exponential::integrate(f, a, b, tol.max(f64::MIN_POSITIVE));
    if o.error_estimate <= tol || depth == 0 {
        return o.integral;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, tol / 2.0, depth - 1) + adaptive(f, m, b, tol / 2.0, depth - 1)
}
