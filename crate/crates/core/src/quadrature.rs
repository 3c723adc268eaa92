//! Homodyne and heterodyne detection of mode `v1`.
//!
//! The field in `v1` is a thermal state with mean photon number `n_s τ1(d)`.
//! In units where the vacuum variance of a quadrature is ½, homodyne detection
//! yields one zero-mean Gaussian outcome with variance `V = ½ + n_s τ1`;
//! heterodyne yields a pair `(q, p)` with `V = ½ + n_s τ1/2` each.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::counting::SourceScene;
use crate::error::{Error, Result};
use crate::overlap::Transmission;
use crate::psf::TransferFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureKind {
    Homodyne,
    Heterodyne,
}

impl QuadratureKind {
    /// Total vacuum noise of one measurement: ½ for one quadrature, 1 for both.
    pub fn noise_figure(self) -> f64 {
        match self {
            QuadratureKind::Homodyne => 0.5,
            QuadratureKind::Heterodyne => 1.0,
        }
    }

    /// Shot-noise-limited SNR for `n_s` source photons: `2n_s` or `n_s`.
    pub fn snr(self, n_s: f64) -> f64 {
        n_s / self.noise_figure()
    }

    /// Photon number giving the requested shot-noise SNR.
    pub fn n_s_for_snr(self, snr: f64) -> f64 {
        snr * self.noise_figure()
    }
}

/// Outcome-variance model `V(d)` of a quadrature measurement.
#[derive(Debug, Clone)]
pub struct QuadratureModel {
    pub kind: QuadratureKind,
    pub psf: TransferFunction,
    pub n_s: f64,
}

impl QuadratureModel {
    pub fn new(kind: QuadratureKind, psf: TransferFunction, n_s: f64) -> Result<Self> {
        if !(n_s > 0.0 && n_s.is_finite()) {
            return Err(Error::Validation(format!("n_s must be positive, got {n_s}")));
        }
        Ok(Self { kind, psf, n_s })
    }

    pub fn from_scene(kind: QuadratureKind, scene: &SourceScene) -> Self {
        Self { kind, psf: scene.psf.clone(), n_s: scene.n_s }
    }

    /// Signal photons per measured quadrature.
    fn signal_share(&self) -> f64 {
        match self.kind {
            QuadratureKind::Homodyne => self.n_s,
            QuadratureKind::Heterodyne => 0.5 * self.n_s,
        }
    }

    /// `V(d)` and `dV/dd`.
    pub fn variance(&self, d: f64) -> Result<(f64, f64)> {
        let t = Transmission::exact(&self.psf, d)?;
        let share = self.signal_share();
        Ok((0.5 + share * t.tau1, share * t.dtau1_dd))
    }

    /// Variance from a given transmission, for estimator inversion.
    pub fn variance_for_tau(&self, tau1: f64) -> f64 {
        0.5 + self.signal_share() * tau1
    }

    /// Transmission that produces variance `v`.
    pub fn tau_for_variance(&self, v: f64) -> f64 {
        (v - 0.5) / self.signal_share()
    }

    /// Fisher information about `d` from one measurement.
    pub fn fisher(&self, d: f64) -> Result<f64> {
        let (v, dv) = self.variance(d)?;
        match self.kind {
            QuadratureKind::Homodyne => fi_gaussian_1d(v, dv),
            QuadratureKind::Heterodyne => fi_gaussian_2d(v, dv),
        }
    }
}

/// Homodyne outcome density, `(π(1+2n_sτ1))^(-1/2) exp(−q²/(1+2n_sτ1))`.
pub fn density_homodyne(model: &QuadratureModel, d: f64, q: f64) -> Result<f64> {
    if model.kind != QuadratureKind::Homodyne {
        return Err(Error::Unsupported("homodyne density requested from a heterodyne model".into()));
    }
    let (v, _) = model.variance(d)?;
    Ok((-q * q / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt())
}

/// Heterodyne outcome density, `(π(1+n_sτ1))^(-1) exp(−(q²+p²)/(1+n_sτ1))`.
pub fn density_heterodyne(model: &QuadratureModel, d: f64, q: f64, p: f64) -> Result<f64> {
    if model.kind != QuadratureKind::Heterodyne {
        return Err(Error::Unsupported("heterodyne density requested from a homodyne model".into()));
    }
    let (v, _) = model.variance(d)?;
    Ok((-(q * q + p * p) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v))
}

/// Fisher information of a zero-mean Gaussian with variance `V(d)`:
/// `(∂V/∂d)²/(2V²)`.
pub fn fi_gaussian_1d(v: f64, dv: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("variance must be positive, got {v}")));
    }
    Ok(dv * dv / (2.0 * v * v))
}

/// Two independent quadratures with common variance `V(d)`: twice the 1D value.
pub fn fi_gaussian_2d(v: f64, dv: f64) -> Result<f64> {
    Ok(2.0 * fi_gaussian_1d(v, dv)?)
}

/// Homodyne Fisher information `2n_s²(∂τ1/∂d)²/(1+2n_sτ1)²` with exact τ1.
pub fn fi_homodyne(scene: &SourceScene) -> Result<f64> {
    let t = Transmission::exact(&scene.psf, scene.d)?;
    let n = scene.n_s;
    Ok(2.0 * n * n * t.dtau1_dd * t.dtau1_dd / (1.0 + 2.0 * n * t.tau1).powi(2))
}

/// Small-separation homodyne form `2n_s²d²/(n_sd² + 2σ²)²`.
pub fn fi_homodyne_small_d(scene: &SourceScene) -> f64 {
    let (n, d2, s2) = (scene.n_s, scene.d * scene.d, scene.sigma().powi(2));
    2.0 * n * n * d2 / (n * d2 + 2.0 * s2).powi(2)
}

/// Heterodyne Fisher information `n_s²(∂τ1/∂d)²/(1+n_sτ1)²` with exact τ1.
pub fn fi_heterodyne(scene: &SourceScene) -> Result<f64> {
    let t = Transmission::exact(&scene.psf, scene.d)?;
    let n = scene.n_s;
    Ok(n * n * t.dtau1_dd * t.dtau1_dd / (1.0 + n * t.tau1).powi(2))
}

/// Small-separation heterodyne form `4n_s²d²/(n_sd² + 4σ²)²`.
pub fn fi_heterodyne_small_d(scene: &SourceScene) -> f64 {
    let (n, d2, s2) = (scene.n_s, scene.d * scene.d, scene.sigma().powi(2));
    4.0 * n * n * d2 / (n * d2 + 4.0 * s2).powi(2)
}

/// Raw quadrature outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureSamples {
    Homodyne(Vec<f64>),
    Heterodyne(Vec<(f64, f64)>),
}

impl QuadratureSamples {
    pub fn len(&self) -> usize {
        match self {
            Self::Homodyne(v) => v.len(),
            Self::Heterodyne(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Maximum-likelihood variance per quadrature: `⟨q²⟩` or `⟨(q²+p²)/2⟩`.
    pub fn variance_estimate(&self) -> f64 {
        match self {
            Self::Homodyne(v) => v.iter().map(|q| q * q).sum::<f64>() / v.len() as f64,
            Self::Heterodyne(v) => v.iter().map(|(q, p)| 0.5 * (q * q + p * p)).sum::<f64>() / v.len() as f64,
        }
    }
}

/// Draws `count` i.i.d. outcomes at separation `d`.
pub fn sample_quadrature(model: &QuadratureModel, d: f64, count: usize, seed: u64) -> Result<QuadratureSamples> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(model, d, count, &mut rng)
}

pub(crate) fn sample_with<R: rand::Rng>(model: &QuadratureModel, d: f64, count: usize, rng: &mut R) -> Result<QuadratureSamples> {
    if count == 0 {
        return Err(Error::Validation("sample count must be at least 1".into()));
    }
    let (v, _) = model.variance(d)?;
    let normal = Normal::new(0.0, v.sqrt()).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(match model.kind {
        QuadratureKind::Homodyne => QuadratureSamples::Homodyne((0..count).map(|_| normal.sample(rng)).collect()),
        QuadratureKind::Heterodyne => QuadratureSamples::Heterodyne(
            (0..count).map(|_| (normal.sample(rng), normal.sample(rng))).collect(),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::Statistics;
    use crate::psf::PsfKind;
    use crate::roots;

    fn scene(d: f64, n_s: f64) -> SourceScene {
        SourceScene::new(TransferFunction::gaussian(1.0).unwrap(), d, n_s, Statistics::Thermal).unwrap()
    }

    fn model(kind: QuadratureKind, n_s: f64) -> QuadratureModel {
        QuadratureModel::new(kind, TransferFunction::gaussian(1.0).unwrap(), n_s).unwrap()
    }

    #[test]
    fn homodyne_density_examples() {
        let m = model(QuadratureKind::Homodyne, 100.0);
        let p0 = density_homodyne(&m, 0.0, 0.0).unwrap();
        assert!((p0 - std::f64::consts::PI.sqrt().recip()).abs() < 1e-15);
        assert!((p0 - 0.56419).abs() < 1e-5);
        let (v, _) = m.variance(2.0).unwrap();
        assert!((v - (0.5 + 100.0 * (-1f64).exp())).abs() < 1e-12);
        assert!((v - 37.29).abs() < 1e-2);
        // Matches the (1 + 2n_sτ1) parameterization.
        let tau = crate::overlap::tau1_closed(PsfKind::Gaussian, 1.0, 0.7).unwrap();
        let width = 1.0 + 200.0 * tau;
        let q = 1.3;
        let direct = (-q * q / width).exp() / (std::f64::consts::PI * width).sqrt();
        assert!((density_homodyne(&m, 0.7, q).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn densities_integrate_to_one() {
        let m = model(QuadratureKind::Homodyne, 10.0);
        let rule = crate::integrate::GaussLegendre::new(32);
        let total = rule.composite(|q| density_homodyne(&m, 0.8, q).unwrap(), -60.0, 60.0, 60);
        assert!((total - 1.0).abs() < 1e-12);
        let h = model(QuadratureKind::Heterodyne, 10.0);
        let radial = rule.composite(
            |r| 2.0 * std::f64::consts::PI * r * density_heterodyne(&h, 0.8, r, 0.0).unwrap(),
            0.0,
            60.0,
            60,
        );
        assert!((radial - 1.0).abs() < 1e-12);
        assert!(density_heterodyne(&m, 0.8, 0.0, 0.0).is_err());
    }

    #[test]
    fn snr_conventions() {
        assert_eq!(QuadratureKind::Homodyne.snr(50.0), 100.0);
        assert_eq!(QuadratureKind::Heterodyne.snr(100.0), 100.0);
        assert_eq!(QuadratureKind::Homodyne.n_s_for_snr(100.0), 50.0);
    }

    #[test]
    fn zero_separation_gives_zero() {
        assert_eq!(fi_homodyne(&scene(0.0, 10.0)).unwrap(), 0.0);
        assert_eq!(fi_heterodyne(&scene(0.0, 10.0)).unwrap(), 0.0);
        assert_eq!(fi_homodyne_small_d(&scene(0.0, 10.0)), 0.0);
    }

    #[test]
    fn gaussian_pipeline_reproduces_closed_forms() {
        for d in [0.01, 0.2, 1.0, 2.7] {
            let s = scene(d, 30.0);
            let t = Transmission::exact(&s.psf, d).unwrap();
            let hom = fi_gaussian_1d(0.5 + 30.0 * t.tau1, 30.0 * t.dtau1_dd).unwrap();
            assert!((hom - fi_homodyne(&s).unwrap()).abs() <= 1e-15 * hom.max(1e-300));
            let het = fi_gaussian_2d(0.5 + 15.0 * t.tau1, 15.0 * t.dtau1_dd).unwrap();
            assert!((het - fi_heterodyne(&s).unwrap()).abs() <= 1e-15 * het.max(1e-300));
            assert_eq!(model(QuadratureKind::Homodyne, 30.0).fisher(d).unwrap(), hom);
        }
    }

    #[test]
    fn gaussian_fi_examples() {
        assert_eq!(fi_gaussian_1d(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(fi_gaussian_1d(0.5, 1.0).unwrap(), 2.0);
        assert!(fi_gaussian_1d(0.0, 1.0).is_err());
        assert_eq!(fi_gaussian_2d(0.5, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn small_d_maxima_are_a_quarter_of_qfi() {
        for n_s in [10.0, 100.0, 1e4] {
            let (dh, fh) = roots::golden_max(|d| fi_homodyne_small_d(&scene(d, n_s)), 1e-9, 1.0, 1e-14);
            assert!((fh - n_s / 4.0).abs() / (n_s / 4.0) < 1e-9);
            assert!((dh - (2.0 / n_s).sqrt()).abs() < 1e-6);
            let (dt, ft) = roots::golden_max(|d| fi_heterodyne_small_d(&scene(d, n_s)), 1e-9, 1.0, 1e-14);
            assert!((ft - n_s / 4.0).abs() / (n_s / 4.0) < 1e-9);
            assert!((dt - 2.0 / n_s.sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn homodyne_half_point() {
        let d = (2.0 - 2f64.sqrt()) / 10.0;
        assert!((d - 0.05858).abs() < 1e-5);
        let v = fi_homodyne_small_d(&scene(d, 100.0));
        assert!((v - 12.5).abs() < 1e-12);
    }

    #[test]
    fn heterodyne_vs_homodyne() {
        // Heterodyne wins once n_sτ1 exceeds 1/√2.
        let n_s = 50.0;
        for i in 1..200 {
            let d = 0.01 * i as f64;
            let s = scene(d, n_s);
            let tau = Transmission::exact(&s.psf, d).unwrap().tau1;
            let (hom, het) = (fi_homodyne(&s).unwrap(), fi_heterodyne(&s).unwrap());
            let x = n_s * tau;
            if x < 0.7 {
                assert!(het < hom, "d={d}");
            } else if x > 0.72 {
                assert!(het > hom, "d={d}");
            }
        }
    }

    #[test]
    fn sampler_moments_and_determinism() {
        let m = model(QuadratureKind::Homodyne, 100.0);
        let tau_target = 0.01;
        let d = crate::roots::brent(
            |d| crate::overlap::tau1_closed(PsfKind::Gaussian, 1.0, d).unwrap() - tau_target,
            0.0,
            2.0,
            Default::default(),
        )
        .unwrap();
        let samples = sample_quadrature(&m, d, 1_000_000, 7).unwrap();
        let QuadratureSamples::Homodyne(q) = &samples else { panic!() };
        let mean = q.iter().sum::<f64>() / q.len() as f64;
        assert!(mean.abs() < 4.0 * (1.5f64 / 1e6).sqrt());
        let var = samples.variance_estimate();
        assert!((var - 1.5).abs() < 0.01, "{var}");
        assert_eq!(samples, sample_quadrature(&m, d, 1_000_000, 7).unwrap());
        assert!(sample_quadrature(&m, d, 0, 7).is_err());

        let het = sample_quadrature(&model(QuadratureKind::Heterodyne, 100.0), d, 200_000, 3).unwrap();
        assert!((het.variance_estimate() - 1.0).abs() < 0.01);
    }

    #[test]
    fn quadratic_onset() {
        let pts: Vec<(f64, f64)> = [1e-3f64, 3e-3, 1e-2]
            .iter()
            .map(|&d| (d.ln(), fi_homodyne(&scene(d, 100.0)).unwrap().ln()))
            .collect();
        let slope = (pts[2].1 - pts[0].1) / (pts[2].0 - pts[0].0);
        assert!((slope - 2.0).abs() < 0.02, "{slope}");
    }
}
