//! Measurement schemes and a common entry point for their Fisher information.

use serde::{Deserialize, Serialize};

use crate::counting::{self, NoiseModel, SourceScene};
use crate::direct_imaging;
use crate::error::Result;
use crate::quadrature::{self, QuadratureKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementModel {
    /// Binary SPADE followed by photon counting in `v1`.
    Counting,
    /// Binary SPADE followed by homodyne detection of `v1`.
    Homodyne,
    /// Binary SPADE followed by heterodyne detection of `v1`.
    Heterodyne,
    /// Intensity measurement on an ideal continuum detector.
    DirectImaging,
}

impl MeasurementModel {
    pub fn quadrature_kind(self) -> Option<QuadratureKind> {
        match self {
            Self::Homodyne => Some(QuadratureKind::Homodyne),
            Self::Heterodyne => Some(QuadratureKind::Heterodyne),
            _ => None,
        }
    }

    /// Fraction of `n_s/σ²` at which the half-resolution distance is defined:
    /// ½ for counting, ⅛ (half of the ¼ ceiling) for quadrature detection.
    pub fn half_resolution_fraction(self) -> Option<f64> {
        match self {
            Self::Counting => Some(0.5),
            Self::Homodyne | Self::Heterodyne => Some(0.125),
            Self::DirectImaging => None,
        }
    }

    /// SNR of the scheme: `n_s/n_b` for counting, the shot-noise value for
    /// quadrature detection.
    pub fn snr(self, n_s: f64, noise: &NoiseModel) -> f64 {
        match self.quadrature_kind() {
            Some(kind) => kind.snr(n_s),
            None => noise.snr(n_s),
        }
    }
}

impl std::fmt::Display for MeasurementModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Counting => "counting",
            Self::Homodyne => "homodyne",
            Self::Heterodyne => "heterodyne",
            Self::DirectImaging => "direct-imaging",
        })
    }
}

/// Exact Fisher information per observation window. Dark counts only enter
/// the counting model; direct imaging is noiseless.
pub fn fisher_information(model: MeasurementModel, scene: &SourceScene, noise: &NoiseModel) -> Result<f64> {
    match model {
        MeasurementModel::Counting => counting::fi_counting_exact(scene, noise),
        MeasurementModel::Homodyne => quadrature::fi_homodyne(scene),
        MeasurementModel::Heterodyne => quadrature::fi_heterodyne(scene),
        MeasurementModel::DirectImaging => direct_imaging::fi_direct(&scene.psf, scene.d, scene.n_s),
    }
}

/// Small-separation approximation of the Fisher information, where one exists.
pub fn fisher_information_small_d(model: MeasurementModel, scene: &SourceScene, noise: &NoiseModel) -> Result<f64> {
    match model {
        MeasurementModel::Counting => Ok(counting::fi_counting_small_d(scene, noise)),
        MeasurementModel::Homodyne => Ok(quadrature::fi_homodyne_small_d(scene)),
        MeasurementModel::Heterodyne => Ok(quadrature::fi_heterodyne_small_d(scene)),
        MeasurementModel::DirectImaging => direct_imaging::fi_direct_small_d(&scene.psf, scene.d, scene.n_s),
    }
}
