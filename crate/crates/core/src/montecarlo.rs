//! Monte Carlo Cramér–Rao experiments: simulated photocounts or quadrature
//! outcomes, separation estimates by inverting the mean, and comparison of
//! the estimator spread with `1/(M·F)`.
//!
//! Every trial draws from its own ChaCha stream selected by the trial index,
//! so results do not depend on how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{CountFamily, NoiseModel, SourceScene};
use crate::error::{Error, Result};
use crate::measurement::{fisher_information, MeasurementModel};
use crate::overlap::{monotone_branch_end, Transmission};
use crate::psf::TransferFunction;
use crate::quadrature::{self, QuadratureModel, QuadratureSamples};
use crate::roots::{self, RootOptions};

/// Default cap on `frames · trials`.
pub const DEFAULT_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone)]
pub struct Experiment {
    pub scene: SourceScene,
    pub noise: NoiseModel,
    pub measurement: MeasurementModel,
    /// Observation windows per trial (samples per trial for quadrature detection).
    pub frames: u64,
    pub trials: u64,
    pub seed: u64,
    /// Upper bound on `frames · trials`.
    pub budget: u64,
}

impl Experiment {
    pub fn new(
        scene: SourceScene,
        noise: NoiseModel,
        measurement: MeasurementModel,
        frames: u64,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        if frames == 0 || trials == 0 {
            return Err(Error::Validation(format!(
                "frames and trials must be at least 1, got {frames} and {trials}"
            )));
        }
        Ok(Self { scene, noise, measurement, frames, trials, seed, budget: DEFAULT_BUDGET })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// `frames · trials`, or a budget error naming the required value.
    pub fn check_budget(&self) -> Result<u64> {
        let required = self.frames.saturating_mul(self.trials);
        if required > self.budget {
            return Err(Error::Budget { required, budget: self.budget });
        }
        Ok(required)
    }

    fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }
}

fn sample_count<R: Rng>(kbar: f64, family: CountFamily, rng: &mut R) -> Result<u64> {
    if kbar == 0.0 {
        return Ok(0);
    }
    Ok(match family {
        CountFamily::Poisson => {
            let dist = Poisson::new(kbar).map_err(|e| Error::Domain(format!("Poisson mean {kbar}: {e}")))?;
            dist.sample(rng) as u64
        }
        // Failures before the first success with p = 1/(k̄+1) have mean k̄.
        CountFamily::BoseEinstein => {
            let dist = Geometric::new(1.0 / (kbar + 1.0))
                .map_err(|e| Error::Domain(format!("Bose–Einstein mean {kbar}: {e}")))?;
            dist.sample(rng)
        }
    })
}

fn counting_mean(exp: &Experiment) -> Result<f64> {
    if exp.measurement != MeasurementModel::Counting {
        return Err(Error::Unsupported(format!("photocount simulation needs counting, got {}", exp.measurement)));
    }
    let t = Transmission::exact(&exp.scene.psf, exp.scene.d)?;
    Ok(exp.scene.n_s * t.tau1 + exp.noise.n_b)
}

fn frames_with<R: Rng>(kbar: f64, family: CountFamily, frames: u64, rng: &mut R) -> Result<Vec<u64>> {
    (0..frames).map(|_| sample_count(kbar, family, rng)).collect()
}

/// Per-frame counts of one trial.
pub fn simulate_frame_counts(exp: &Experiment, trial: u64) -> Result<Vec<u64>> {
    let kbar = counting_mean(exp)?;
    frames_with(kbar, exp.scene.statistics.family(), exp.frames, &mut exp.trial_rng(trial))
}

/// Total count over the `M` frames of each trial.
pub fn simulate_counts(exp: &Experiment) -> Result<Vec<u64>> {
    exp.check_budget()?;
    let kbar = counting_mean(exp)?;
    let family = exp.scene.statistics.family();
    (0..exp.trials)
        .into_par_iter()
        .map(|trial| Ok(frames_with(kbar, family, exp.frames, &mut exp.trial_rng(trial))?.iter().sum()))
        .collect()
}

/// Which boundary, if any, an estimate was clipped to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clip {
    None,
    /// No excess signal over the background: `d̂ = 0`.
    Zero,
    /// Signal above the branch maximum: `d̂ = d_peak`.
    Peak,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub d: f64,
    pub clip: Clip,
}

impl Estimate {
    pub fn is_clipped(&self) -> bool {
        self.clip != Clip::None
    }
}

/// Inverts τ1 on `[0, d_peak]`, where it increases from zero.
#[derive(Debug, Clone)]
pub struct BranchInverter {
    psf: TransferFunction,
    d_peak: f64,
    tau_peak: f64,
}

impl BranchInverter {
    pub fn new(psf: &TransferFunction) -> Result<Self> {
        let d_peak = monotone_branch_end(psf)?;
        let tau_peak = Transmission::exact(psf, d_peak)?.tau1;
        Ok(Self { psf: psf.clone(), d_peak, tau_peak })
    }

    pub fn d_peak(&self) -> f64 {
        self.d_peak
    }

    /// `d` with `τ1(d) = tau`, clipped to the branch ends.
    pub fn invert(&self, tau: f64) -> Result<Estimate> {
        if !(tau > 0.0) {
            return Ok(Estimate { d: 0.0, clip: Clip::Zero });
        }
        if tau >= self.tau_peak {
            return Ok(Estimate { d: self.d_peak, clip: Clip::Peak });
        }
        let f = |d: f64| Transmission::exact(&self.psf, d).map(|t| t.tau1 - tau).unwrap_or(f64::NAN);
        let d = roots::brent(f, 0.0, self.d_peak, RootOptions { x_rel_tol: 1e-13, ..RootOptions::default() })?;
        Ok(Estimate { d, clip: Clip::None })
    }
}

/// Estimate from the average count per frame: solves `n_s(τ1(d̂)+β) = mean`.
pub fn estimate_from_mean_count(mean: f64, scene: &SourceScene, noise: &NoiseModel, inverter: &BranchInverter) -> Result<Estimate> {
    inverter.invert((mean - noise.n_b) / scene.n_s)
}

/// Maximum-likelihood separation from the total count of `frames` windows.
pub fn ml_estimate_counting(total_count: u64, frames: u64, scene: &SourceScene, noise: &NoiseModel) -> Result<Estimate> {
    let inverter = BranchInverter::new(&scene.psf)?;
    estimate_from_mean_count(total_count as f64 / frames as f64, scene, noise, &inverter)
}

fn quadrature_estimate(samples: &QuadratureSamples, model: &QuadratureModel, inverter: &BranchInverter) -> Result<Estimate> {
    if samples.len() < 2 {
        return Err(Error::Validation(format!("need at least 2 quadrature samples, got {}", samples.len())));
    }
    inverter.invert(model.tau_for_variance(samples.variance_estimate()))
}

/// Maximum-likelihood separation from quadrature samples by variance matching.
pub fn ml_estimate_quadrature(samples: &QuadratureSamples, scene: &SourceScene) -> Result<Estimate> {
    let kind = match samples {
        QuadratureSamples::Homodyne(_) => quadrature::QuadratureKind::Homodyne,
        QuadratureSamples::Heterodyne(_) => quadrature::QuadratureKind::Heterodyne,
    };
    let model = QuadratureModel::from_scene(kind, scene);
    quadrature_estimate(samples, &model, &BranchInverter::new(&scene.psf)?)
}

/// Estimator statistics of one experiment. Field order is the JSON order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub measurement: MeasurementModel,
    pub d_true: f64,
    pub sigma: f64,
    pub n_s: f64,
    pub n_b: f64,
    pub frames: u64,
    pub trials: u64,
    pub seed: u64,
    /// Exact Fisher information of one frame at `d_true`.
    pub fisher_information: f64,
    /// `1/(M·F)`; absent when `F = 0` and the bound is unbounded.
    pub crb: Option<f64>,
    pub mean_estimate: f64,
    pub empirical_variance: f64,
    pub empirical_mse: f64,
    /// `empirical_variance / crb`.
    pub variance_to_crb: Option<f64>,
    /// Fraction of trials clipped to either end of the branch.
    pub clip_fraction: f64,
    pub estimates: Vec<f64>,
}

impl TrialReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn run_trial(exp: &Experiment, trial: u64, inverter: &BranchInverter, quad: Option<&QuadratureModel>) -> Result<Estimate> {
    let mut rng = exp.trial_rng(trial);
    match quad {
        Some(model) => {
            let samples = quadrature::sample_with(model, exp.scene.d, exp.frames as usize, &mut rng)?;
            quadrature_estimate(&samples, model, inverter)
        }
        None => {
            let kbar = counting_mean(exp)?;
            let total: u64 = frames_with(kbar, exp.scene.statistics.family(), exp.frames, &mut rng)?.iter().sum();
            estimate_from_mean_count(total as f64 / exp.frames as f64, &exp.scene, &exp.noise, inverter)
        }
    }
}

/// Runs all trials and compares the estimator spread with `1/(M·F)`.
pub fn run_crb_experiment(exp: &Experiment) -> Result<TrialReport> {
    exp.check_budget()?;
    let quad = match exp.measurement {
        MeasurementModel::Counting => None,
        MeasurementModel::Homodyne | MeasurementModel::Heterodyne => {
            let kind = exp.measurement.quadrature_kind().expect("quadrature model");
            Some(QuadratureModel::from_scene(kind, &exp.scene))
        }
        MeasurementModel::DirectImaging => {
            return Err(Error::Unsupported("Monte Carlo runs cover counting and quadrature detection".into()))
        }
    };
    let inverter = BranchInverter::new(&exp.scene.psf)?;
    let fi = fisher_information(exp.measurement, &exp.scene, &exp.noise)?;
    let crb = (fi > 0.0).then(|| 1.0 / (exp.frames as f64 * fi));

    let outcomes: Vec<Estimate> = (0..exp.trials)
        .into_par_iter()
        .map(|trial| run_trial(exp, trial, &inverter, quad.as_ref()))
        .collect::<Result<_>>()?;

    let n = outcomes.len() as f64;
    let estimates: Vec<f64> = outcomes.iter().map(|e| e.d).collect();
    let mean = estimates.iter().sum::<f64>() / n;
    let variance = if outcomes.len() > 1 {
        estimates.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let d_true = exp.scene.d;
    let mse = estimates.iter().map(|d| (d - d_true).powi(2)).sum::<f64>() / n;
    let clipped = outcomes.iter().filter(|e| e.is_clipped()).count() as f64;
    log::debug!("{} trials at d = {d_true}: variance {variance:.4e}, crb {crb:?}", exp.trials);

    Ok(TrialReport {
        measurement: exp.measurement,
        d_true,
        sigma: exp.scene.sigma(),
        n_s: exp.scene.n_s,
        n_b: exp.noise.n_b,
        frames: exp.frames,
        trials: exp.trials,
        seed: exp.seed,
        fisher_information: fi,
        crb,
        mean_estimate: mean,
        empirical_variance: variance,
        empirical_mse: mse,
        variance_to_crb: crb.map(|c| variance / c),
        clip_fraction: clipped / n,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::Statistics;
    use crate::overlap::tau1_small_d;

    fn scene(d: f64, n_s: f64, statistics: Statistics) -> SourceScene {
        SourceScene::new(TransferFunction::gaussian(1.0).unwrap(), d, n_s, statistics).unwrap()
    }

    fn counting(d: f64, snr: f64, frames: u64, trials: u64, seed: u64) -> Experiment {
        let noise = NoiseModel::from_snr(100.0, snr).unwrap();
        Experiment::new(scene(d, 100.0, Statistics::Poisson), noise, MeasurementModel::Counting, frames, trials, seed)
            .unwrap()
    }

    #[test]
    fn sampler_moments() {
        for (statistics, kbar) in [(Statistics::Poisson, 2.5), (Statistics::Thermal, 2.5), (Statistics::Poisson, 0.03)] {
            let s = scene(2.0, kbar * std::f64::consts::E, statistics);
            let exp = Experiment::new(s, NoiseModel::noiseless(), MeasurementModel::Counting, 1_000_000, 1, 9).unwrap();
            let counts = simulate_frame_counts(&exp, 0).unwrap();
            let n = counts.len() as f64;
            let mean = counts.iter().sum::<u64>() as f64 / n;
            let var = match statistics {
                Statistics::Poisson => kbar,
                Statistics::Thermal => kbar * (1.0 + kbar),
            };
            assert!((mean - kbar).abs() < 4.0 * (var / n).sqrt(), "{statistics:?}: {mean} vs {kbar}");
            let sample_var = counts.iter().map(|&k| (k as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!((sample_var / var - 1.0).abs() < 0.02, "{statistics:?}: {sample_var} vs {var}");
        }
    }

    #[test]
    fn zero_mean_gives_zeros() {
        let exp = Experiment::new(scene(0.0, 5.0, Statistics::Thermal), NoiseModel::noiseless(), MeasurementModel::Counting, 50, 4, 1)
            .unwrap();
        assert!(simulate_counts(&exp).unwrap().iter().all(|&k| k == 0));
    }

    #[test]
    fn simulation_is_deterministic_and_stream_separated() {
        let exp = counting(0.3, 1e4, 20, 8, 42);
        let a = simulate_counts(&exp).unwrap();
        assert_eq!(a, simulate_counts(&exp).unwrap());
        assert_ne!(simulate_frame_counts(&exp, 0).unwrap(), simulate_frame_counts(&exp, 1).unwrap());
        assert_eq!(a[3], simulate_frame_counts(&exp, 3).unwrap().iter().sum::<u64>());
        assert_ne!(a, simulate_counts(&counting(0.3, 1e4, 20, 8, 43)).unwrap());
    }

    #[test]
    fn counting_estimator_boundaries() {
        let s = scene(0.3, 100.0, Statistics::Poisson);
        let noise = NoiseModel::from_snr(100.0, 1e4).unwrap();
        let e = ml_estimate_counting(2, 200, &s, &noise).unwrap();
        assert_eq!(e, Estimate { d: 0.0, clip: Clip::Zero });
        assert_eq!(ml_estimate_counting(0, 10, &s, &noise).unwrap().clip, Clip::Zero);
        let top = ml_estimate_counting(10_000, 1, &s, &NoiseModel::noiseless()).unwrap();
        assert_eq!(top, Estimate { d: 2.0, clip: Clip::Peak });
    }

    #[test]
    fn counting_estimator_inverts_known_points() {
        let s = scene(0.3, 100.0, Statistics::Poisson);
        let inv = BranchInverter::new(&s.psf).unwrap();
        let peak = estimate_from_mean_count(100.0 * (-1f64).exp() * (1.0 - 1e-12), &s, &NoiseModel::noiseless(), &inv).unwrap();
        assert!((peak.d - 2.0).abs() < 1e-5, "{peak:?}");
        for d in [1e-4, 3e-4, 1e-3] {
            let e = estimate_from_mean_count(100.0 * tau1_small_d(1.0, d), &s, &NoiseModel::noiseless(), &inv).unwrap();
            assert!((e.d - d).abs() < 1e-9, "{d}: {e:?}");
        }
        for d in [0.01, 0.3, 1.5] {
            let noise = NoiseModel::new(0.7).unwrap();
            let mean = 100.0 * Transmission::exact(&s.psf, d).unwrap().tau1 + 0.7;
            let e = estimate_from_mean_count(mean, &s, &noise, &inv).unwrap();
            assert!((e.d - d).abs() < 1e-10 * d.max(1.0));
        }
    }

    #[test]
    fn quadrature_estimator() {
        let s = scene(0.3, 100.0, Statistics::Thermal);
        let shot = QuadratureSamples::Homodyne(vec![1.0, 0.0]);
        assert_eq!(ml_estimate_quadrature(&shot, &s).unwrap().d, 0.0);
        assert!(ml_estimate_quadrature(&QuadratureSamples::Homodyne(vec![1.0]), &s).is_err());

        let tau = Transmission::exact(&s.psf, 0.3).unwrap().tau1;
        let q = (0.5 + 100.0 * tau).sqrt();
        let exact = QuadratureSamples::Homodyne(vec![q, -q]);
        assert!((ml_estimate_quadrature(&exact, &s).unwrap().d - 0.3).abs() < 1e-10);
        let p = (0.5 + 50.0 * tau).sqrt();
        let het = QuadratureSamples::Heterodyne(vec![(p, p), (-p, p)]);
        assert!((ml_estimate_quadrature(&het, &s).unwrap().d - 0.3).abs() < 1e-10);

        let model = QuadratureModel::from_scene(quadrature::QuadratureKind::Homodyne, &s);
        let samples = quadrature::sample_quadrature(&model, 0.3, 100_000, 5).unwrap();
        let d_hat = ml_estimate_quadrature(&samples, &s).unwrap().d;
        let tol = 3.0 / (100_000.0 * quadrature::fi_homodyne(&s).unwrap()).sqrt();
        assert!((d_hat - 0.3).abs() < tol, "{d_hat} ± {tol}");
    }

    #[test]
    fn crb_saturation_in_window() {
        for seed in [1, 2, 3] {
            let r = run_crb_experiment(&counting(0.3, 1e4, 200, 2000, seed)).unwrap();
            let ratio = r.variance_to_crb.unwrap();
            assert!((0.85..=1.15).contains(&ratio), "seed {seed}: {ratio}");
            assert!(r.clip_fraction < 0.01);
            let se = (r.empirical_variance / r.trials as f64).sqrt();
            assert!((r.mean_estimate - 0.3).abs() < 3.0 * se, "seed {seed}: mean {}", r.mean_estimate);
        }
    }

    #[test]
    fn resolution_loss_below_half_resolution() {
        for seed in [1, 2, 3] {
            let r = run_crb_experiment(&counting(0.005, 1e4, 200, 2000, seed)).unwrap();
            let noiseless_crb = 1.0 / (200.0 * 100.0);
            // Seeds 1-3 give clip 0.63-0.69, MSE/CRB 1.53-1.77, RMSE/d 1.75-1.88.
            assert!(r.clip_fraction > 0.5, "seed {seed}: {}", r.clip_fraction);
            assert!(r.empirical_mse > 1.4 * noiseless_crb, "seed {seed}: {}", r.empirical_mse);
            assert!(r.empirical_mse.sqrt() > 1.5 * 0.005, "seed {seed}: {}", r.empirical_mse);
        }
    }

    #[test]
    fn unbounded_crb_is_flagged() {
        let r = run_crb_experiment(&counting(0.0, 1e4, 10, 50, 1)).unwrap();
        assert_eq!(r.fisher_information, 0.0);
        assert_eq!((r.crb, r.variance_to_crb), (None, None));
        assert!(r.to_json().contains("\"crb\": null"));
    }

    #[test]
    fn mse_grows_as_snr_drops() {
        for seed in [11, 12, 13] {
            let mse: Vec<f64> = [1e4, 1e3, 1e2]
                .iter()
                .map(|&snr| run_crb_experiment(&counting(0.1, snr, 200, 400, seed)).unwrap().empirical_mse)
                .collect();
            assert!(mse[0] <= mse[1] && mse[1] <= mse[2], "seed {seed}: {mse:?}");
        }
    }

    #[test]
    fn quadrature_experiment_saturates() {
        let s = scene(0.3, 100.0, Statistics::Thermal);
        for m in [MeasurementModel::Homodyne, MeasurementModel::Heterodyne] {
            let exp = Experiment::new(s.clone(), NoiseModel::noiseless(), m, 400, 1000, 7).unwrap();
            let r = run_crb_experiment(&exp).unwrap();
            assert!((0.8..=1.2).contains(&r.variance_to_crb.unwrap()), "{m}: {:?}", r.variance_to_crb);
        }
    }

    #[test]
    fn report_is_deterministic() {
        let exp = counting(0.3, 1e4, 50, 200, 99);
        assert_eq!(run_crb_experiment(&exp).unwrap().to_json(), run_crb_experiment(&exp).unwrap().to_json());
    }

    #[test]
    fn budget_and_validation() {
        let exp = counting(0.3, 1e4, 200, 2000, 1).with_budget(1000);
        match run_crb_experiment(&exp) {
            Err(Error::Budget { required, budget }) => assert_eq!((required, budget), (400_000, 1000)),
            other => panic!("{other:?}"),
        }
        assert!(Experiment::new(scene(0.3, 1.0, Statistics::Poisson), NoiseModel::noiseless(), MeasurementModel::Counting, 0, 1, 0).is_err());
        let direct = Experiment::new(scene(0.3, 1.0, Statistics::Poisson), NoiseModel::noiseless(), MeasurementModel::DirectImaging, 1, 1, 0).unwrap();
        assert!(matches!(run_crb_experiment(&direct), Err(Error::Unsupported(_))));
    }
}
