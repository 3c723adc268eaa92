//! Direct intensity imaging on an ideal continuum detector, and the quantum
//! benchmark `n_s/σ²`.

use crate::error::{Error, Result};
use crate::integrate::AdaptiveOptions;
use crate::psf::TransferFunction;

/// Below this density the integrand `(∂p/∂d)²/p` is taken as zero.
const DENSITY_FLOOR: f64 = 1e-300;

/// Image-plane photon density `p(x) = ½u(x−d)² + ½u(x+d)²`.
#[derive(Debug, Clone)]
pub struct ImagePlaneDensity<'a> {
    pub tf: &'a TransferFunction,
    pub d: f64,
}

impl ImagePlaneDensity<'_> {
    pub fn density(&self, x: f64) -> f64 {
        let a = self.tf.amplitude(x - self.d);
        let b = self.tf.amplitude(x + self.d);
        0.5 * (a * a + b * b)
    }

    /// `∂p/∂d`.
    pub fn density_slope(&self, x: f64) -> f64 {
        let (xm, xp) = (x - self.d, x + self.d);
        self.tf.amplitude(xp) * self.tf.slope(xp) - self.tf.amplitude(xm) * self.tf.slope(xm)
    }

    fn information_density(&self, x: f64) -> f64 {
        let p = self.density(x);
        if p < DENSITY_FLOOR {
            return 0.0;
        }
        let dp = self.density_slope(x);
        dp * dp / p
    }
}

/// Fisher information `n_s ∫ (∂p/∂d)²/p dx` of direct imaging.
pub fn fi_direct(tf: &TransferFunction, d: f64, n_s: f64) -> Result<f64> {
    if !d.is_finite() {
        return Err(Error::Domain(format!("separation must be finite, got {d}")));
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    let density = ImagePlaneDensity { tf, d: d.abs() };
    let opts = AdaptiveOptions { abs_tol: 1e-15, rel_tol: 1e-10, max_subdivisions: 20_000 };
    let per_photon = tf.integrate_adaptive(|x| density.information_density(x), d.abs(), opts)?;
    Ok(n_s * per_photon)
}

/// Small-separation form `4 n_s d² ∫ (u'²/u + u'')² dx`, Gaussian PSF only.
pub fn fi_direct_small_d(tf: &TransferFunction, d: f64, n_s: f64) -> Result<f64> {
    Ok(4.0 * n_s * d * d * small_d_prefactor(tf)?)
}

/// `∫ (u'²/u + u'')² dx` for the Gaussian PSF, by quadrature.
pub fn small_d_prefactor(tf: &TransferFunction) -> Result<f64> {
    let TransferFunction::Gaussian { sigma } = *tf else {
        return Err(Error::Unsupported(format!(
            "the small-separation direct-imaging expansion needs a PSF without zeros; got {}",
            tf.kind()
        )));
    };
    let s2 = sigma * sigma;
    Ok(tf.integrate(
        |x| {
            let u = tf.amplitude(x);
            if u < DENSITY_FLOOR {
                return 0.0;
            }
            let du = tf.slope(x);
            let d2u = (x * x / (4.0 * s2 * s2) - 0.5 / s2) * u;
            (du * du / u + d2u).powi(2)
        },
        0.0,
    ))
}

/// Quantum Fisher information `n_s/σ²`.
pub fn qfi(n_s: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("σ must be positive, got {sigma}")));
    }
    Ok(n_s / (sigma * sigma))
}

/// `4 n_s ∫ u'² dx` evaluated by quadrature; equals [`qfi`] for a normalized PSF.
pub fn qfi_numeric(tf: &TransferFunction, n_s: f64) -> f64 {
    4.0 * n_s * tf.integrate(|x| tf.slope(x).powi(2), 0.0)
}
