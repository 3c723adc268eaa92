//! `spade`: Fisher-information curves, half-resolution distances and Monte
//! Carlo Cramér–Rao runs for binary SPADE.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spade_core::counting::{NoiseModel, SourceScene, Statistics};
use spade_core::direct_imaging;
use spade_core::measurement::{fisher_information, fisher_information_small_d};
use spade_core::montecarlo::{self, Experiment};
use spade_core::overlap::{tau1_closed, tau1_numeric, tau1_small_d};
use spade_core::resolution::resolution_report;
use spade_core::{Error, MeasurementModel, TransferFunction};

use output::{Format, Table};

#[derive(Parser)]
#[command(name = "spade", version, about = "Resolution limits of binary SPADE under noisy detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transmission τ1 of mode v1 over a separation grid.
    #[command(args_override_self = true)]
    TauCurve(JobArgs),
    /// Fisher information over a separation grid, one output per SNR.
    #[command(args_override_self = true)]
    FiCurve(JobArgs),
    /// Half-resolution distance and superresolution window.
    #[command(args_override_self = true)]
    DHalf(JobArgs),
    /// Monte Carlo estimator variance against the Cramér–Rao bound.
    #[command(args_override_self = true)]
    Simulate(JobArgs),
    /// Quantum Fisher information n_s/σ².
    #[command(args_override_self = true)]
    Qfi(JobArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Measurement {
    Counting,
    Homodyne,
    Heterodyne,
    DirectImaging,
}

impl From<Measurement> for MeasurementModel {
    fn from(m: Measurement) -> Self {
        match m {
            Measurement::Counting => MeasurementModel::Counting,
            Measurement::Homodyne => MeasurementModel::Homodyne,
            Measurement::Heterodyne => MeasurementModel::Heterodyne,
            Measurement::DirectImaging => MeasurementModel::DirectImaging,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Psf {
    Gaussian,
    Sinc,
    Tabulated,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Stats {
    Poisson,
    Thermal,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Scale {
    Linear,
    Log,
}

#[derive(Args, Debug)]
struct JobArgs {
    /// File of `key = value` lines using the long flag names; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    measurement: Option<Measurement>,
    #[arg(long, value_enum)]
    psf: Option<Psf>,
    /// PSF width σ.
    #[arg(long)]
    sigma: Option<f64>,
    /// Two-column `x u(x)` table for `--psf tabulated`.
    #[arg(long)]
    psf_table: Option<PathBuf>,
    /// Rescale a tabulated PSF to unit norm.
    #[arg(long)]
    normalize: bool,
    /// Mean source photons per observation window.
    #[arg(long = "n-s")]
    n_s: Option<f64>,
    /// Comma-separated SNR values (`inf` allowed). For quadrature detection
    /// the SNR sets n_s instead of a dark-count level.
    #[arg(long)]
    snr: Option<String>,
    /// Dark-count mean per window; excludes `--snr`.
    #[arg(long = "n-b")]
    n_b: Option<f64>,
    #[arg(long, value_enum)]
    statistics: Option<Stats>,
    #[arg(long)]
    d_min: Option<f64>,
    #[arg(long)]
    d_max: Option<f64>,
    #[arg(long)]
    d_count: Option<usize>,
    #[arg(long, value_enum)]
    d_scale: Option<Scale>,
    /// True separation for `simulate`.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    frames: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Upper bound on frames × trials.
    #[arg(long)]
    budget: Option<u64>,
    /// Report d and FI in absolute units instead of d/σ and FI·σ²/n_s.
    #[arg(long)]
    absolute: bool,
    /// Add a direct-imaging column to `fi-curve`.
    #[arg(long)]
    direct_imaging: bool,
    /// Also extract d½ from the exact FI curve in `d-half`.
    #[arg(long)]
    numeric: bool,
}

/// Fully resolved job, echoed into every output file.
#[derive(Debug, Clone, Serialize)]
struct Job {
    command: &'static str,
    measurement: Measurement,
    psf: Psf,
    sigma: f64,
    psf_table: Option<PathBuf>,
    n_s: f64,
    snr: Option<Vec<f64>>,
    n_b: Option<f64>,
    statistics: Stats,
    d_min: f64,
    d_max: f64,
    d_count: usize,
    d_scale: Scale,
    d: Option<f64>,
    format: Format,
    seed: u64,
    frames: u64,
    trials: u64,
    budget: u64,
    absolute: bool,
    direct_imaging: bool,
    numeric: bool,
    #[serde(skip)]
    output: Option<PathBuf>,
    #[serde(skip)]
    normalize: bool,
}

/// One `(n_s, n_b)` combination derived from the SNR list.
#[derive(Debug, Clone, Copy)]
struct Case {
    snr: Option<f64>,
    n_s: f64,
    n_b: f64,
}

enum Failure {
    Usage(String),
    Numeric(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. } => Failure::Budget(e.to_string()),
            Error::Validation(_) | Error::Parse { .. } | Error::Unsupported(_) | Error::Io(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

type CmdResult<T> = Result<T, Failure>;

fn parse_snrs(text: &str) -> CmdResult<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|_| Failure::Usage(format!("invalid SNR {t:?}")))?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Failure::Usage(format!("SNR must be positive, got {v}")))
            }
        })
        .collect()
}

impl Job {
    fn resolve(command: &'static str, a: JobArgs) -> CmdResult<Self> {
        if a.snr.is_some() && a.n_b.is_some() {
            return Err(Failure::Usage("give either --snr or --n-b, not both".into()));
        }
        let job = Job {
            command,
            measurement: a.measurement.unwrap_or(Measurement::Counting),
            psf: a.psf.unwrap_or(Psf::Gaussian),
            sigma: a.sigma.unwrap_or(1.0),
            psf_table: a.psf_table,
            n_s: a.n_s.unwrap_or(1.0),
            snr: a.snr.as_deref().map(parse_snrs).transpose()?,
            n_b: a.n_b,
            statistics: a.statistics.unwrap_or(Stats::Poisson),
            d_min: a.d_min.unwrap_or(0.0),
            d_max: a.d_max.unwrap_or(5.0),
            d_count: a.d_count.unwrap_or(101),
            d_scale: a.d_scale.unwrap_or(Scale::Linear),
            d: a.d,
            format: a.format.unwrap_or(Format::Csv),
            seed: a.seed.unwrap_or(0),
            frames: a.frames.unwrap_or(200),
            trials: a.trials.unwrap_or(2000),
            budget: a.budget.unwrap_or(montecarlo::DEFAULT_BUDGET),
            absolute: a.absolute,
            direct_imaging: a.direct_imaging,
            numeric: a.numeric,
            output: a.output,
            normalize: a.normalize,
        };
        if !(job.n_s > 0.0 && job.n_s.is_finite()) {
            return Err(Failure::Usage(format!("--n-s must be positive, got {}", job.n_s)));
        }
        if matches!(job.n_b, Some(n) if !(n >= 0.0 && n.is_finite())) {
            return Err(Failure::Usage("--n-b must be non-negative".into()));
        }
        Ok(job)
    }

    fn model(&self) -> MeasurementModel {
        self.measurement.into()
    }

    fn statistics(&self) -> Statistics {
        match self.statistics {
            Stats::Poisson => Statistics::Poisson,
            Stats::Thermal => Statistics::Thermal,
        }
    }

    fn transfer_function(&self) -> CmdResult<TransferFunction> {
        Ok(match self.psf {
            Psf::Gaussian => TransferFunction::gaussian(self.sigma)?,
            Psf::Sinc => TransferFunction::sinc(self.sigma)?,
            Psf::Tabulated => {
                let path = self
                    .psf_table
                    .as_ref()
                    .ok_or_else(|| Failure::Usage("--psf tabulated needs --psf-table".into()))?;
                TransferFunction::load_tabulated(path, self.normalize)?
            }
        })
    }

    fn cases(&self) -> Vec<Case> {
        let Some(snrs) = &self.snr else {
            let n_b = self.n_b.unwrap_or(0.0);
            let snr = (n_b > 0.0).then(|| self.n_s / n_b);
            return vec![Case { snr, n_s: self.n_s, n_b }];
        };
        snrs.iter()
            .map(|&snr| match self.model().quadrature_kind() {
                Some(kind) => Case { snr: Some(snr), n_s: kind.n_s_for_snr(snr), n_b: 0.0 },
                None if self.model() == MeasurementModel::DirectImaging => Case { snr: Some(snr), n_s: self.n_s, n_b: 0.0 },
                None => Case { snr: Some(snr), n_s: self.n_s, n_b: self.n_s / snr },
            })
            .collect()
    }

    /// Separations in the units given on the command line.
    fn grid(&self) -> CmdResult<Vec<f64>> {
        let (lo, hi, n) = (self.d_min, self.d_max, self.d_count);
        if n < 2 {
            return Err(Failure::Usage(format!("--d-count must be at least 2, got {n}")));
        }
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Failure::Usage(format!("need 0 ≤ d-min < d-max, got [{lo}, {hi}]")));
        }
        let last = (n - 1) as f64;
        Ok(match self.d_scale {
            Scale::Linear => (0..n).map(|i| lo + (hi - lo) * i as f64 / last).collect(),
            Scale::Log => {
                if lo <= 0.0 {
                    return Err(Failure::Usage("a log grid needs d-min > 0".into()));
                }
                let (a, b) = (lo.ln(), hi.ln());
                (0..n).map(|i| (a + (b - a) * i as f64 / last).exp()).collect()
            }
        })
    }

    /// Axis value in output units and the absolute separation.
    fn separations(&self, sigma: f64) -> CmdResult<Vec<(f64, f64)>> {
        let scale = if self.absolute { 1.0 } else { sigma };
        Ok(self.grid()?.into_iter().map(|g| (g, g * scale)).collect())
    }

    fn d_column(&self) -> &'static str {
        if self.absolute { "d" } else { "d_over_sigma" }
    }

    fn header(&self) -> String {
        serde_json::to_string(self).expect("job serializes")
    }
}

fn tau_curve(job: &Job) -> CmdResult<()> {
    let tf = job.transfer_function()?;
    let sigma = tf.sigma();
    let mut table = Table::new(job.header(), &[job.d_column(), "tau1_numeric", "tau1_closed", "tau1_small_d"]);
    for (axis, d) in job.separations(sigma)? {
        let numeric = tau1_numeric(&tf, d)?.tau1;
        let closed = tau1_closed(tf.kind(), sigma, d).unwrap_or(f64::NAN);
        table.push(vec![axis, numeric, closed, tau1_small_d(sigma, d)]);
    }
    output::write(&table, job.format, job.output.as_deref())
}

fn fi_curve(job: &Job) -> CmdResult<()> {
    let tf = job.transfer_function()?;
    let sigma = tf.sigma();
    let model = job.model();
    let cases = job.cases();
    let (fi_col, small_col, qfi_col, direct_col) = if job.absolute {
        ("fi", "fi_small_d", "qfi", "direct_imaging")
    } else {
        ("fi_times_sigma2_over_ns", "fi_small_d", "qfi_line", "direct_imaging")
    };
    let mut columns = vec![job.d_column(), fi_col, small_col, qfi_col];
    if job.direct_imaging {
        columns.push(direct_col);
    }
    for case in &cases {
        let base = SourceScene::new(tf.clone(), 0.0, case.n_s, job.statistics())?;
        let noise = NoiseModel::new(case.n_b)?;
        let qfi = base.qfi();
        let unit = if job.absolute { 1.0 } else { qfi };
        let mut header = job.clone();
        header.n_s = case.n_s;
        header.n_b = Some(case.n_b);
        header.snr = case.snr.map(|s| vec![s]);
        let mut table = Table::new(header.header(), &columns);
        for (axis, d) in job.separations(sigma)? {
            let scene = base.at(d);
            let exact = fisher_information(model, &scene, &noise)?;
            let small = fisher_information_small_d(model, &scene, &noise).unwrap_or(f64::NAN);
            let mut row = vec![axis, exact / unit, small / unit, qfi / unit];
            if job.direct_imaging {
                row.push(direct_imaging::fi_direct(&tf, d, case.n_s)? / unit);
            }
            table.push(row);
        }
        let path = job.output.as_deref().map(|p| output::path_for_snr(p, case.snr, cases.len() > 1));
        output::write(&table, job.format, path.as_deref())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DHalfOutput<'a> {
    config: &'a Job,
    reports: Vec<spade_core::resolution::ResolutionReport>,
}

fn d_half(job: &Job) -> CmdResult<()> {
    let tf = job.transfer_function()?;
    let mut reports = Vec::new();
    for case in job.cases() {
        let scene = SourceScene::new(tf.clone(), 0.0, case.n_s, job.statistics())?;
        let noise = NoiseModel::new(case.n_b)?;
        reports.push(resolution_report(job.model(), &scene, &noise, job.numeric)?);
    }
    let text = serde_json::to_string_pretty(&DHalfOutput { config: job, reports }).expect("report serializes");
    output::emit(&(text + "\n"), job.output.as_deref())
}

fn simulate(job: &Job) -> CmdResult<()> {
    let d = job.d.ok_or_else(|| Failure::Usage("simulate needs --d".into()))?;
    let cases = job.cases();
    let [case] = cases[..] else {
        return Err(Failure::Usage("simulate takes a single SNR".into()));
    };
    let d = if job.absolute { d } else { d * job.transfer_function()?.sigma() };
    let scene = SourceScene::new(job.transfer_function()?, d, case.n_s, job.statistics())?;
    let noise = NoiseModel::new(case.n_b)?;
    let exp = Experiment::new(scene, noise, job.model(), job.frames, job.trials, job.seed)?.with_budget(job.budget);
    let report = montecarlo::run_crb_experiment(&exp)?;
    output::emit(&(report.to_json() + "\n"), job.output.as_deref())
}

#[derive(Serialize)]
struct QfiOutput {
    psf: Psf,
    sigma: f64,
    n_s: f64,
    qfi: f64,
    qfi_numeric: f64,
}

fn qfi(job: &Job) -> CmdResult<()> {
    let tf = job.transfer_function()?;
    let out = QfiOutput {
        psf: job.psf,
        sigma: tf.sigma(),
        n_s: job.n_s,
        qfi: direct_imaging::qfi(job.n_s, tf.sigma())?,
        qfi_numeric: direct_imaging::qfi_numeric(&tf, job.n_s),
    };
    output::emit(&(serde_json::to_string_pretty(&out).expect("serializes") + "\n"), job.output.as_deref())
}

fn run(cli: Cli) -> CmdResult<()> {
    let (name, args, f): (_, _, fn(&Job) -> CmdResult<()>) = match cli.command {
        Command::TauCurve(a) => ("tau-curve", a, tau_curve),
        Command::FiCurve(a) => ("fi-curve", a, fi_curve),
        Command::DHalf(a) => ("d-half", a, d_half),
        Command::Simulate(a) => ("simulate", a, simulate),
        Command::Qfi(a) => ("qfi", a, qfi),
    };
    f(&Job::resolve(name, args)?)
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric failure: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("budget exceeded: {m}");
            ExitCode::from(4)
        }
    }
}
