//! Half-resolution distances and superresolution windows.

use serde::{Deserialize, Serialize};

use crate::counting::{NoiseModel, SourceScene, Statistics};
use crate::error::{Error, Result};
use crate::measurement::{fisher_information, MeasurementModel};
use crate::quadrature::QuadratureKind;
use crate::roots::{self, RootOptions};

/// Factor by which a separation must clear each window bound to count as
/// safely inside the window.
pub const WINDOW_SAFETY_FACTOR: f64 = 10.0;

/// `d½ = 2σ/√SNR` for photon counting with dark counts.
pub fn d_half_counting(sigma: f64, snr: f64) -> f64 {
    2.0 * sigma / snr.sqrt()
}

/// `d½ = (2√2 − 2)σ/√SNR` for homodyne or heterodyne detection, each with its
/// own shot-noise SNR.
pub fn d_half_quadrature(sigma: f64, snr: f64) -> f64 {
    (2.0 * 2f64.sqrt() - 2.0) * sigma / snr.sqrt()
}

/// [`d_half_quadrature`] from the source photon number and detection kind.
pub fn d_half_quadrature_for(sigma: f64, n_s: f64, kind: QuadratureKind) -> f64 {
    d_half_quadrature(sigma, kind.snr(n_s))
}

/// Range of separations over which binary SPADE with photon counting stays
/// close to the quantum limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub low: f64,
    pub high: f64,
}

impl Window {
    pub fn is_empty(&self) -> bool {
        self.low >= self.high
    }

    pub fn contains(&self, d: f64) -> bool {
        d > self.low && d < self.high
    }

    /// `d` clears both bounds by [`WINDOW_SAFETY_FACTOR`].
    pub fn safely_contains(&self, d: f64) -> bool {
        d >= WINDOW_SAFETY_FACTOR * self.low && d <= self.high / WINDOW_SAFETY_FACTOR
    }
}

/// Superresolution window `2σ/√SNR ≪ d ≪ σ` (Poisson) or
/// `2σ/√SNR ≪ d ≪ min(σ, 2σ/√n_s)` (thermal).
pub fn superres_window(sigma: f64, snr: f64, n_s: f64, statistics: Statistics) -> Window {
    let low = d_half_counting(sigma, snr);
    let high = match statistics {
        Statistics::Poisson => sigma,
        Statistics::Thermal => sigma.min(2.0 * sigma / n_s.sqrt()),
    };
    Window { low, high }
}

/// Solves `fi_fn(d) = target` inside `bracket` to relative precision 1e-10.
pub fn d_half_numeric<F>(fi_fn: F, target: f64, bracket: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = bracket;
    let f_lo = fi_fn(lo)? - target;
    let f_hi = fi_fn(hi)? - target;
    if f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        return Err(Error::Bracket { lower: lo, upper: hi, f_lower: f_lo, f_upper: f_hi });
    }
    let opts = RootOptions { x_rel_tol: 1e-12, ..RootOptions::default() };
    // Errors inside the solve surface as NaN, which Brent reports as non-convergence.
    roots::brent(|d| fi_fn(d).map(|v| v - target).unwrap_or(f64::NAN), lo, hi, opts)
}

/// Half-resolution distance read off the exact Fisher-information curve: the
/// smallest `d` where FI reaches the model's fraction of `n_s/σ²`.
///
/// Returns 0 for noiseless photon counting, whose FI starts at `n_s/σ²`.
pub fn d_half_exact(model: MeasurementModel, scene: &SourceScene, noise: &NoiseModel) -> Result<f64> {
    let fraction = model
        .half_resolution_fraction()
        .ok_or_else(|| Error::Unsupported(format!("no half-resolution distance for {model}")))?;
    if model == MeasurementModel::Counting && noise.n_b == 0.0 {
        return Ok(0.0);
    }
    let sigma = scene.sigma();
    let target = fraction * scene.qfi();
    let fi = |d: f64| fisher_information(model, &scene.at(d), noise);
    let (peak_d, peak) = roots::scan_max(|d| fi(d).unwrap_or(f64::NAN), 1e-6 * sigma, 2.0 * sigma, 240, true);
    if !(peak > target) {
        return Err(Error::Domain(format!(
            "Fisher information never reaches {fraction} n_s/σ² (maximum {:.6} n_s/σ² at d = {peak_d:.4e})",
            peak / scene.qfi()
        )));
    }
    d_half_numeric(fi, target, (1e-9 * sigma, peak_d))
}

/// Closed-form and curve-based resolution figures for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub model: MeasurementModel,
    pub snr: f64,
    pub d_half: f64,
    pub d_half_numeric: Option<f64>,
    /// Window bounds; present for photon counting only.
    pub window_low: Option<f64>,
    pub window_high: Option<f64>,
}

impl ResolutionReport {
    pub fn window(&self) -> Option<Window> {
        Some(Window { low: self.window_low?, high: self.window_high? })
    }
}

/// Builds a [`ResolutionReport`]; the numeric `d½` is extracted from the
/// exact FI curve when `numeric` is set.
pub fn resolution_report(
    model: MeasurementModel,
    scene: &SourceScene,
    noise: &NoiseModel,
    numeric: bool,
) -> Result<ResolutionReport> {
    let sigma = scene.sigma();
    let snr = model.snr(scene.n_s, noise);
    let (d_half, window) = match model {
        MeasurementModel::Counting => (
            d_half_counting(sigma, snr),
            Some(superres_window(sigma, snr, scene.n_s, scene.statistics)),
        ),
        MeasurementModel::Homodyne | MeasurementModel::Heterodyne => (d_half_quadrature(sigma, snr), None),
        MeasurementModel::DirectImaging => {
            return Err(Error::Unsupported("direct imaging has no half-resolution distance".into()))
        }
    };
    let d_half_numeric = if numeric { Some(d_half_exact(model, scene, noise)?) } else { None };
    Ok(ResolutionReport {
        model,
        snr,
        d_half,
        d_half_numeric,
        window_low: window.map(|w| w.low),
        window_high: window.map(|w| w.high),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::fi_counting_small_d;
    use crate::psf::TransferFunction;
    use crate::quadrature::fi_homodyne_small_d;

    fn scene(n_s: f64) -> SourceScene {
        SourceScene::new(TransferFunction::gaussian(1.0).unwrap(), 0.1, n_s, Statistics::Poisson).unwrap()
    }

    #[test]
    fn counting_closed_form() {
        assert!((d_half_counting(1.0, 100.0) - 0.2).abs() < 1e-16);
        assert!((d_half_counting(1.0, 1e4) - 0.02).abs() < 1e-16);
        assert_eq!(d_half_counting(1.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn quadrature_closed_form() {
        assert!((d_half_quadrature(1.0, 100.0) - 0.082_842_712_474_619).abs() < 1e-14);
        assert_eq!(
            d_half_quadrature_for(1.0, 50.0, QuadratureKind::Homodyne),
            d_half_quadrature_for(1.0, 100.0, QuadratureKind::Heterodyne)
        );
        assert!((d_half_quadrature(2.0, 100.0) - 2.0 * d_half_quadrature(1.0, 100.0)).abs() < 1e-16);
    }

    #[test]
    fn windows() {
        let w = superres_window(1.0, 1e4, 1.0, Statistics::Poisson);
        assert_eq!((w.low, w.high), (0.02, 1.0));
        assert!(!w.is_empty() && w.contains(0.3) && !w.safely_contains(0.1));
        let wide = superres_window(1.0, 1e6, 1.0, Statistics::Poisson);
        assert!(wide.safely_contains(0.05) && !wide.safely_contains(0.15) && !wide.safely_contains(0.01));
        let t = superres_window(1.0, 1e4, 100.0, Statistics::Thermal);
        assert!((t.low - 0.02).abs() < 1e-16 && (t.high - 0.2).abs() < 1e-16);
        assert!(superres_window(1.0, 1.0, 1.0, Statistics::Poisson).is_empty());
    }

    #[test]
    fn numeric_inversion_examples() {
        let noise = NoiseModel::from_snr(1.0, 100.0).unwrap();
        let root = d_half_exact(MeasurementModel::Counting, &scene(1.0), &noise).unwrap();
        assert!((root - 0.2).abs() / 0.2 < 0.05, "{root}");

        let n_s = 100.0;
        let s = scene(n_s);
        let root = d_half_numeric(|d| Ok(fi_homodyne_small_d(&s.at(d))), n_s / 8.0, (1e-9, (2.0 / n_s).sqrt())).unwrap();
        assert!((root - (2.0 - 2f64.sqrt()) / n_s.sqrt()).abs() < 1e-9);

        let mid = d_half_numeric(|d| Ok(3.0 * d + 1.0), 2.5, (0.0, 1.0)).unwrap();
        assert!((mid - 0.5).abs() < 1e-12);
        assert!(matches!(d_half_numeric(Ok, 5.0, (0.0, 1.0)), Err(Error::Bracket { .. })));
    }

    #[test]
    fn small_d_fi_at_d_half_is_exactly_half() {
        for snr in [1e2, 1e3, 1e4, 1e5] {
            let d = d_half_counting(1.0, snr);
            let s = scene(3.0).at(d);
            let v = fi_counting_small_d(&s, &NoiseModel::from_snr(3.0, snr).unwrap());
            assert!((v - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_scaling_law() {
        let snrs = [1e2, 1e3, 1e4, 1e5];
        for f in [d_half_counting, d_half_quadrature] {
            let pts: Vec<(f64, f64)> = snrs.iter().map(|&s| (f64::ln(s), f(1.0, s).ln())).collect();
            let slope = (pts[3].1 - pts[0].1) / (pts[3].0 - pts[0].0);
            assert!((slope + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn report_for_each_model() {
        let noise = NoiseModel::from_snr(1.0, 1e3).unwrap();
        let r = resolution_report(MeasurementModel::Counting, &scene(1.0), &noise, true).unwrap();
        assert!(r.window().is_some());
        assert!((r.d_half_numeric.unwrap() / r.d_half - 1.0).abs() < 0.05);
        let h = resolution_report(MeasurementModel::Homodyne, &scene(50.0), &noise, true).unwrap();
        assert_eq!(h.snr, 100.0);
        assert!(h.window().is_none());
        assert!((h.d_half_numeric.unwrap() / h.d_half - 1.0).abs() < 0.05);
        assert!(resolution_report(MeasurementModel::DirectImaging, &scene(1.0), &noise, false).is_err());
        let noiseless = resolution_report(MeasurementModel::Counting, &scene(1.0), &NoiseModel::noiseless(), true).unwrap();
        assert_eq!(noiseless.d_half, 0.0);
        assert_eq!(noiseless.d_half_numeric, Some(0.0));
    }
}
