//! Transmission of the two displaced PSFs into mode `v1`.
//!
//! With sources at `∓d`,
//!
//! ```text
//! τ1(d) = ½ (∫ v1(x) u(x−d) dx)² + ½ (∫ v1(x) u(x+d) dx)²
//! ```
//!
//! and `dτ1/dd` follows by differentiating under the integral. The closed
//! forms for the Gaussian and sinc PSFs are provided separately so that the
//! numeric route can be checked against them.
//!
//! The sinc closed form uses the prefactor `16σ⁴/(3d⁴)`. This is the value
//! obtained from the Fourier-domain overlap of a band-limited PSF; it is the
//! only prefactor consistent with the small-separation expansion
//! `d²/4σ²·(1 − 3d²/20σ²)` and it agrees with the numeric overlap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psf::{ModePair, PsfKind, TransferFunction};
use crate::roots;

/// `τ1` and its derivative at one separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub d: f64,
    pub tau1: f64,
    pub dtau1_dd: f64,
}

impl Transmission {
    fn zero(d: f64) -> Self {
        Self { d, tau1: 0.0, dtau1_dd: 0.0 }
    }

    /// Exact τ1: closed form for analytic PSFs, numeric overlap otherwise.
    pub fn exact(tf: &TransferFunction, d: f64) -> Result<Self> {
        match tf.kind() {
            PsfKind::Gaussian | PsfKind::Sinc => tau1_closed_with_derivative(tf.kind(), tf.sigma(), d),
            PsfKind::Tabulated => tau1_numeric(tf, d),
        }
    }
}

/// τ1 from the overlap integrals.
///
/// Negative `d` is folded onto `|d|` (τ1 is even), so
/// `tau1_numeric(-d) == tau1_numeric(d)` bit for bit and the derivative flips sign.
pub fn tau1_numeric(tf: &TransferFunction, d: f64) -> Result<Transmission> {
    if !d.is_finite() {
        return Err(Error::Domain(format!("separation must be finite, got {d}")));
    }
    if d == 0.0 {
        return Ok(Transmission::zero(d));
    }
    let s = d.abs();
    let modes = ModePair::new(tf.clone());
    // Source at -s: u(x + s); source at +s: u(x - s).
    let left = tf.integrate(|x| modes.v1(x) * tf.amplitude(x + s), s);
    let right = tf.integrate(|x| modes.v1(x) * tf.amplitude(x - s), s);
    let dleft = tf.integrate(|x| modes.v1(x) * tf.slope(x + s), s);
    let dright = -tf.integrate(|x| modes.v1(x) * tf.slope(x - s), s);
    let tau1 = 0.5 * left * left + 0.5 * right * right;
    let dtau1 = left * dleft + right * dright;
    if !tau1.is_finite() || !dtau1.is_finite() {
        return Err(Error::Domain(format!("overlap integral is not finite at d = {d}")));
    }
    Ok(Transmission {
        d,
        tau1,
        dtau1_dd: if d < 0.0 { -dtau1 } else { dtau1 },
    })
}

/// Closed-form τ1 for the Gaussian and sinc PSFs.
pub fn tau1_closed(kind: PsfKind, sigma: f64, d: f64) -> Result<f64> {
    Ok(tau1_closed_with_derivative(kind, sigma, d)?.tau1)
}

/// Closed-form τ1 together with `dτ1/dd`.
pub fn tau1_closed_with_derivative(kind: PsfKind, sigma: f64, d: f64) -> Result<Transmission> {
    if !(sigma > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("need σ > 0 and finite d, got σ = {sigma}, d = {d}")));
    }
    let s = d.abs();
    let (tau1, dtau1) = match kind {
        PsfKind::Gaussian => {
            let x = s * s / (4.0 * sigma * sigma);
            let e = (-x).exp();
            (x * e, s / (2.0 * sigma * sigma) * (1.0 - x) * e)
        }
        PsfKind::Sinc => sinc_tau1(sigma, s),
        PsfKind::Tabulated => {
            return Err(Error::Unsupported("no closed-form τ1 for a tabulated PSF".into()))
        }
    };
    Ok(Transmission {
        d,
        tau1,
        dtau1_dd: if d < 0.0 { -dtau1 } else { dtau1 },
    })
}

fn sinc_tau1(sigma: f64, d: f64) -> (f64, f64) {
    let a = 3f64.sqrt() / (2.0 * sigma);
    let y = a * d;
    if y < 0.2 {
        // τ1 = (9/4)(d/σ)² G(y)² with G(y) = (sin y − y cos y)/y³.
        let y2 = y * y;
        let g = 1.0 / 3.0 + y2 * (-1.0 / 30.0 + y2 * (1.0 / 840.0 + y2 * (-1.0 / 45360.0 + y2 / 3_991_680.0)));
        let y_dg = y2 * (-1.0 / 15.0 + y2 * (1.0 / 210.0 + y2 * (-1.0 / 7560.0 + y2 / 498_960.0)));
        let r = d / sigma;
        (2.25 * r * r * g * g, 4.5 * d / (sigma * sigma) * g * (g + y_dg))
    } else {
        let (sin, cos) = y.sin_cos();
        let g = sin - y * cos;
        let c = 16.0 * sigma.powi(4) / 3.0;
        let tau1 = c * g * g / d.powi(4);
        let dtau1 = 2.0 * c * g / d.powi(5) * (y * y * sin - 2.0 * g);
        (tau1, dtau1)
    }
}

/// Leading-order τ1 ≈ d²/4σ².
pub fn tau1_small_d(sigma: f64, d: f64) -> f64 {
    d * d / (4.0 * sigma * sigma)
}

/// Upper end of the branch on which τ1 increases from zero: `2σ` for the
/// Gaussian PSF, otherwise the first local maximum found numerically.
pub fn monotone_branch_end(tf: &TransferFunction) -> Result<f64> {
    let sigma = tf.sigma();
    if tf.kind() == PsfKind::Gaussian {
        return Ok(2.0 * sigma);
    }
    // Walk outward until τ1 first turns down, then refine.
    let step = 0.05 * sigma;
    let tau = |d: f64| Transmission::exact(tf, d).map(|t| t.tau1).unwrap_or(f64::NAN);
    let mut prev = tau(step);
    let mut d = step;
    for _ in 0..400 {
        let next = tau(d + step);
        if next < prev {
            let lo = (d - step).max(0.5 * step);
            let (peak, _) = roots::golden_max(tau, lo, d + step, 1e-12);
            return Ok(peak);
        }
        prev = next;
        d += step;
    }
    Err(Error::NoConvergence { method: "monotone branch search", iterations: 400 })
}
