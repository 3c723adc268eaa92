//! Scalar root finding (Brent) and bounded maximization (golden section).

use crate::error::{Error, Result};

/// Convergence settings for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub x_abs_tol: f64,
    pub x_rel_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            x_abs_tol: 1e-300,
            x_rel_tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Brent's method for a root of `f` inside `[a, b]`.
///
/// `f(a)` and `f(b)` must have opposite signs (or one of them be zero).
pub fn brent<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: RootOptions) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Bracket { lower: a, upper: b, f_lower: fa, f_upper: fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.x_abs_tol.max(opts.x_rel_tol * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::NoConvergence { method: "brent", iterations: opts.max_iter })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, x_rel_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        if (b - a).abs() <= x_rel_tol * (x1.abs() + x2.abs()) + 1e-300 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximum of `f` over `[a, b]` for functions that may not be unimodal:
/// a log- or linearly-spaced scan locates the best sample, then golden
/// section refines between its neighbours.
pub fn scan_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize, log_spaced: bool) -> (f64, f64) {
    let samples = samples.max(3);
    let xs: Vec<f64> = (0..samples)
        .map(|i| {
            let t = i as f64 / (samples - 1) as f64;
            if log_spaced {
                (a.ln() + t * (b.ln() - a.ln())).exp()
            } else {
                a + t * (b - a)
            }
        })
        .collect();
    let (best, _) = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, f(x)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(samples - 1)];
    golden_max(&f, lo, hi, 1e-13)
}
