//! Photon counting in mode `v1` with dark counts.
//!
//! The mean count over one observation window is `k̄ = n_s τ1(d) + n_b`. For a
//! Poisson family the Fisher information about `d` is `(∂k̄/∂d)²/k̄`; a single
//! thermal (Bose–Einstein) mode carries the extra factor `1/(1+k̄)`. Dark
//! counts are folded into the same family as the signal.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::overlap::Transmission;
use crate::psf::TransferFunction;

/// Photon statistics of the sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Poisson,
    Thermal,
}

impl Statistics {
    pub fn family(self) -> CountFamily {
        match self {
            Statistics::Poisson => CountFamily::Poisson,
            Statistics::Thermal => CountFamily::BoseEinstein,
        }
    }
}

/// Two point sources at `∓d` imaged through `psf`, emitting `n_s` photons in
/// total per observation window.
#[derive(Debug, Clone)]
pub struct SourceScene {
    pub psf: TransferFunction,
    pub d: f64,
    pub n_s: f64,
    pub statistics: Statistics,
}

impl SourceScene {
    pub fn new(psf: TransferFunction, d: f64, n_s: f64, statistics: Statistics) -> Result<Self> {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::Validation(format!("separation must be finite and non-negative, got {d}")));
        }
        if !(n_s > 0.0 && n_s.is_finite()) {
            return Err(Error::Validation(format!("n_s must be positive, got {n_s}")));
        }
        Ok(Self { psf, d, n_s, statistics })
    }

    pub fn sigma(&self) -> f64 {
        self.psf.sigma()
    }

    /// Same scene at another separation.
    pub fn at(&self, d: f64) -> Self {
        Self { d, ..self.clone() }
    }

    /// Quantum Fisher information `n_s/σ²`.
    pub fn qfi(&self) -> f64 {
        self.n_s / (self.sigma() * self.sigma())
    }
}

/// Mean dark counts per observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub n_b: f64,
}

impl NoiseModel {
    pub fn new(n_b: f64) -> Result<Self> {
        if !(n_b >= 0.0 && n_b.is_finite()) {
            return Err(Error::Validation(format!("n_b must be finite and non-negative, got {n_b}")));
        }
        Ok(Self { n_b })
    }

    pub fn noiseless() -> Self {
        Self { n_b: 0.0 }
    }

    /// Dark counts giving `SNR = n_s/n_b`; an infinite SNR means no noise.
    pub fn from_snr(n_s: f64, snr: f64) -> Result<Self> {
        if !(snr > 0.0) {
            return Err(Error::Validation(format!("SNR must be positive, got {snr}")));
        }
        Self::new(n_s / snr)
    }

    /// `β = n_b/n_s = 1/SNR`.
    pub fn beta(&self, n_s: f64) -> f64 {
        self.n_b / n_s
    }

    pub fn snr(&self, n_s: f64) -> f64 {
        n_s / self.n_b
    }
}

/// Family of the photocount distribution in mode `v1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountFamily {
    Poisson,
    BoseEinstein,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    pub kbar: f64,
    pub family: CountFamily,
}

impl CountDistribution {
    pub fn new(kbar: f64, family: CountFamily) -> Result<Self> {
        if !(kbar >= 0.0 && kbar.is_finite()) {
            return Err(Error::Validation(format!("mean count must be finite and non-negative, got {kbar}")));
        }
        Ok(Self { kbar, family })
    }

    /// Probability of `k` counts, evaluated in log space.
    pub fn pmf(&self, k: u64) -> f64 {
        self.ln_pmf(k).exp()
    }

    pub fn ln_pmf(&self, k: u64) -> f64 {
        let kbar = self.kbar;
        if kbar == 0.0 {
            return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        let k = k as f64;
        match self.family {
            CountFamily::Poisson if k == 0.0 => -kbar,
            CountFamily::Poisson => -stirling_error(k) - deviance(k, kbar) - 0.5 * (2.0 * PI * k).ln(),
            CountFamily::BoseEinstein => k * (kbar / (kbar + 1.0)).ln() - kbar.ln_1p(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self.family {
            CountFamily::Poisson => self.kbar,
            CountFamily::BoseEinstein => self.kbar * (1.0 + self.kbar),
        }
    }
}

/// `ln Γ(n+1) − [(n+½) ln n − n + ½ ln 2π]`.
fn stirling_error(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - 0.5 * (2.0 * PI).ln();
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// `x ln(x/m) + m − x`, accurate when `x ≈ m`.
fn deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                break;
            }
            s = next;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// Mean count and its derivative with respect to `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCount {
    pub value: f64,
    pub derivative: f64,
}

/// `k̄ = n_s τ1(d) + n_b`.
pub fn mean_count(scene: &SourceScene, noise: &NoiseModel) -> Result<f64> {
    Ok(mean_count_with_derivative(scene, noise)?.value)
}

pub fn mean_count_with_derivative(scene: &SourceScene, noise: &NoiseModel) -> Result<MeanCount> {
    let t = Transmission::exact(&scene.psf, scene.d)?;
    Ok(MeanCount {
        value: scene.n_s * t.tau1 + noise.n_b,
        derivative: scene.n_s * t.dtau1_dd,
    })
}

/// Fisher information of the `v1` photocount with the exact τ1.
///
/// At `d = 0` the removable limit is returned: `n_s/σ²` without dark counts
/// and exactly zero with them.
pub fn fi_counting_exact(scene: &SourceScene, noise: &NoiseModel) -> Result<f64> {
    let beta = noise.beta(scene.n_s);
    if scene.d == 0.0 {
        return Ok(if noise.n_b > 0.0 { 0.0 } else { scene.qfi() });
    }
    let t = Transmission::exact(&scene.psf, scene.d)?;
    if t.tau1 + beta == 0.0 {
        // τ1 underflowed; only reachable without noise.
        return Ok(scene.qfi());
    }
    let poisson = scene.n_s * t.dtau1_dd * t.dtau1_dd / (t.tau1 + beta);
    Ok(match scene.statistics {
        Statistics::Poisson => poisson,
        Statistics::Thermal => poisson / (1.0 + scene.n_s * t.tau1 + noise.n_b),
    })
}

/// Small-separation approximation using `τ1 ≈ d²/4σ²`.
pub fn fi_counting_small_d(scene: &SourceScene, noise: &NoiseModel) -> f64 {
    let sigma2 = scene.sigma() * scene.sigma();
    let d2 = scene.d * scene.d;
    let beta = noise.beta(scene.n_s);
    let poisson = if beta == 0.0 {
        scene.qfi()
    } else {
        scene.qfi() / (1.0 + 4.0 * sigma2 * beta / d2)
    };
    match scene.statistics {
        Statistics::Poisson => poisson,
        Statistics::Thermal => poisson / (1.0 + scene.n_s * d2 / (4.0 * sigma2) + noise.n_b),
    }
}

/// Fisher information from single-photon events only, valid when
/// `n_s τ1 ≪ 1` and `n_b ≪ 1`. It does not depend on the photon statistics.
pub fn fi_single_photon_regime(scene: &SourceScene, noise: &NoiseModel) -> f64 {
    let beta = noise.beta(scene.n_s);
    if beta == 0.0 {
        return scene.qfi();
    }
    let sigma2 = scene.sigma() * scene.sigma();
    scene.qfi() / (1.0 + 4.0 * sigma2 * beta / (scene.d * scene.d))
}

/// Result of the brute-force PMF summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmfFisher {
    pub fi: f64,
    /// Largest count included in the sum.
    pub k_max: u64,
    /// Probability mass beyond `k_max`.
    pub tail_mass: f64,
    /// Whether the hard term cap cut the sum short.
    pub truncated: bool,
}

/// Hard cap on the number of summed terms.
pub const PMF_MAX_TERMS: u64 = 20_000_000;

/// Fisher information by literal summation `Σ_k (∂p_k/∂d)²/p_k`, with
/// `∂p_k/∂d` obtained through `k̄(d)`.
pub fn fi_from_pmf<F>(family: CountFamily, d: f64, kbar_fn: F) -> Result<PmfFisher>
where
    F: Fn(f64) -> Result<MeanCount>,
{
    let MeanCount { value: kbar, derivative: dkbar } = kbar_fn(d)?;
    let dist = CountDistribution::new(kbar, family)?;
    if dkbar == 0.0 {
        return Ok(PmfFisher { fi: 0.0, k_max: 0, tail_mass: 0.0, truncated: false });
    }
    if kbar == 0.0 {
        return Err(Error::Domain("Fisher information diverges where k̄ = 0 but ∂k̄/∂d ≠ 0".into()));
    }
    let mut k_max = (kbar + 12.0 * (kbar + 1.0).sqrt() + 30.0).ceil() as u64;
    if family == CountFamily::BoseEinstein {
        // Geometric tail mass beyond K is r^(K+1).
        let r = kbar / (kbar + 1.0);
        k_max = k_max.max((1e-17f64.ln() / r.ln()).ceil() as u64);
    }
    let truncated = k_max > PMF_MAX_TERMS;
    if truncated {
        log::warn!("PMF sum for k̄ = {kbar} truncated at {PMF_MAX_TERMS} terms");
        k_max = PMF_MAX_TERMS;
    }

    let ln_kbar = kbar.ln();
    let ln_ratio = (kbar / (kbar + 1.0)).ln();
    let mut ln_p = match family {
        CountFamily::Poisson => -kbar,
        CountFamily::BoseEinstein => -kbar.ln_1p(),
    };
    let mut fi = 0.0;
    let mut mass = 0.0;
    for k in 0..=k_max {
        if k > 0 {
            ln_p += match family {
                CountFamily::Poisson => ln_kbar - (k as f64).ln(),
                CountFamily::BoseEinstein => ln_ratio,
            };
        }
        let p = ln_p.exp();
        if p == 0.0 {
            continue;
        }
        let kf = k as f64;
        let score = match family {
            CountFamily::Poisson => kf / kbar - 1.0,
            CountFamily::BoseEinstein => kf / kbar - (kf + 1.0) / (kbar + 1.0),
        };
        let dp = p * score * dkbar;
        fi += dp * dp / p;
        mass += p;
    }
    debug_assert!(dist.kbar == kbar);
    Ok(PmfFisher { fi, k_max, tail_mass: (1.0 - mass).max(0.0), truncated })
}
