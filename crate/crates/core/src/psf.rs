//! Amplitude transfer functions and the binary SPADE mode pair.
//!
//! A transfer function `u(x)` is the real field amplitude produced in the image
//! plane by a point source at the origin, normalized so that `∫ u² dx = 1`.
//! Its characteristic width is
//!
//! ```text
//! σ = ½ (∫ u'(x)² dx)^(-1/2)
//! ```
//!
//! and the two demultiplexed modes are `v0 = u` and `v1 = -2σ u'`.
//!
//! Besides pointwise evaluation this module owns the integration layout for
//! each PSF kind ([`TransferFunction::integrate`]), since the right scheme
//! depends on how the PSF decays: Gaussian tails are truncated at 10σ, while
//! the 1/x tails of the sinc PSF need period-aligned panels and extrapolation
//! in the truncation length.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{self, AdaptiveOptions, GaussLegendre};
use crate::spline::CubicSpline;

/// Allowed deviation of `∫ u² dx` from 1 for tabulated input.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Gaussian integrals are truncated at this many σ beyond the displaced support.
const GAUSSIAN_HALF_WIDTH: f64 = 10.0;
/// Panels per σ for Gaussian integrands.
const GAUSSIAN_PANELS_PER_SIGMA: f64 = 4.0;
/// Sinc truncations are `SINC_BASE_PERIODS · 2^k` oscillation periods, k = 0..SINC_LEVELS.
const SINC_BASE_PERIODS: usize = 50;
const SINC_LEVELS: usize = 4;

/// Shape family of a transfer function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsfKind {
    Gaussian,
    Sinc,
    Tabulated,
}

impl std::fmt::Display for PsfKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PsfKind::Gaussian => "gaussian",
            PsfKind::Sinc => "sinc",
            PsfKind::Tabulated => "tabulated",
        })
    }
}

/// A PSF given by samples on a grid, interpolated with a natural cubic spline.
#[derive(Debug, Clone)]
pub struct Tabulated {
    spline: CubicSpline,
    sigma: f64,
    norm: f64,
}

impl Tabulated {
    pub fn grid(&self) -> &[f64] {
        self.spline.knots()
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    /// `∫ u² dx` of the interpolant.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Real amplitude transfer function `u(x)`.
#[derive(Debug, Clone)]
pub enum TransferFunction {
    /// `u(x) = (2πσ²)^(-1/4) exp(-x²/4σ²)`.
    Gaussian { sigma: f64 },
    /// `u(x) = √(a/π) sin(ax)/(ax)` with `a = √3/(2σ)`.
    Sinc { sigma: f64 },
    Tabulated(Tabulated),
}

impl TransferFunction {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        check_width(sigma)?;
        Ok(Self::Gaussian { sigma })
    }

    pub fn sinc(sigma: f64) -> Result<Self> {
        check_width(sigma)?;
        Ok(Self::Sinc { sigma })
    }

    /// Sinc PSF from its scale `a` (the main lobe spans `±π/a`).
    pub fn sinc_from_scale(a: f64) -> Result<Self> {
        check_width(a)?;
        Self::sinc(3f64.sqrt() / (2.0 * a))
    }

    /// Tabulated PSF. The samples must already be normalized to `∫ u² = 1`
    /// within [`NORMALIZATION_TOL`].
    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spline = CubicSpline::natural(grid, values)?;
        let norm = spline_norm(&spline);
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Validation(format!(
                "tabulated PSF is not normalized: ∫u² dx = {norm:.9}"
            )));
        }
        let sigma = spline_sigma(&spline)?;
        Ok(Self::Tabulated(Tabulated { spline, sigma, norm }))
    }

    /// Tabulated PSF, rescaling the samples so that the interpolant has unit norm.
    pub fn tabulated_normalized(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spline = CubicSpline::natural(grid.clone(), values.clone())?;
        let norm = spline_norm(&spline);
        if !(norm > 0.0) {
            return Err(Error::Validation("tabulated PSF has zero norm".into()));
        }
        let scale = norm.sqrt().recip();
        Self::tabulated(grid, values.into_iter().map(|v| v * scale).collect())
    }

    /// Parses a two-column `position amplitude` table. Blank lines and text
    /// after `#` are ignored.
    pub fn parse_table(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected 2 columns, found {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("{s:?}: {e}"),
                })
            };
            grid.push(parse(fields[0])?);
            values.push(parse(fields[1])?);
        }
        Ok((grid, values))
    }

    /// Loads a tabulated PSF from a two-column text file.
    pub fn load_tabulated(path: impl AsRef<Path>, normalize: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let (grid, values) = Self::parse_table(&text)?;
        if normalize {
            Self::tabulated_normalized(grid, values)
        } else {
            Self::tabulated(grid, values)
        }
    }

    pub fn kind(&self) -> PsfKind {
        match self {
            Self::Gaussian { .. } => PsfKind::Gaussian,
            Self::Sinc { .. } => PsfKind::Sinc,
            Self::Tabulated(_) => PsfKind::Tabulated,
        }
    }

    /// Characteristic width σ.
    pub fn sigma(&self) -> f64 {
        match self {
            Self::Gaussian { sigma } | Self::Sinc { sigma } => *sigma,
            Self::Tabulated(t) => t.sigma,
        }
    }

    /// Sinc scale `a = √3/(2σ)`; `None` for other kinds.
    pub fn sinc_scale(&self) -> Option<f64> {
        match self {
            Self::Sinc { sigma } => Some(3f64.sqrt() / (2.0 * sigma)),
            _ => None,
        }
    }

    /// Support of the PSF; `None` when it extends over the whole line.
    pub fn hull(&self) -> Option<(f64, f64)> {
        match self {
            Self::Tabulated(t) => Some((t.spline.lower(), t.spline.upper())),
            _ => None,
        }
    }

    fn check_hull(&self, x: f64) -> Result<()> {
        if let Some((lo, hi)) = self.hull() {
            if !(x >= lo && x <= hi) {
                return Err(Error::Domain(format!(
                    "x = {x} is outside the tabulated range [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// `u(x)`.
    pub fn eval_u(&self, x: f64) -> Result<f64> {
        self.check_hull(x)?;
        Ok(self.amplitude(x))
    }

    /// `du/dx`.
    pub fn eval_u_prime(&self, x: f64) -> Result<f64> {
        self.check_hull(x)?;
        Ok(self.slope(x))
    }

    /// `u(x)`, extended by zero outside a tabulated PSF's range.
    pub(crate) fn amplitude(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { sigma } => gaussian_norm(*sigma) * (-x * x / (4.0 * sigma * sigma)).exp(),
            Self::Sinc { sigma } => {
                let a = 3f64.sqrt() / (2.0 * sigma);
                (a / PI).sqrt() * sinc(a * x)
            }
            Self::Tabulated(t) => {
                if t.spline.contains(x) {
                    t.spline.value(x)
                } else {
                    0.0
                }
            }
        }
    }

    /// `u'(x)`, extended by zero outside a tabulated PSF's range.
    pub(crate) fn slope(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { sigma } => -x / (2.0 * sigma * sigma) * self.amplitude(x),
            Self::Sinc { sigma } => {
                let a = 3f64.sqrt() / (2.0 * sigma);
                (a / PI).sqrt() * a * sinc_slope(a * x)
            }
            Self::Tabulated(t) => {
                if t.spline.contains(x) {
                    t.spline.derivative(x)
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫ f(x) dx` over the real line for an integrand built from copies of
    /// `u` and `u'` displaced by at most `|reach|`.
    ///
    /// For the sinc kind `f` must be a product of two sinc-family factors
    /// (each oscillating at frequency `a`), so that the truncation error has a
    /// power series in the inverse truncation length on period-aligned cuts.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, reach: f64) -> f64 {
        let reach = reach.abs();
        match self {
            Self::Gaussian { sigma } => {
                let half = GAUSSIAN_HALF_WIDTH * sigma + reach;
                let panels = (2.0 * half / sigma * GAUSSIAN_PANELS_PER_SIGMA).ceil() as usize;
                rule16().composite(f, -half, half, panels)
            }
            Self::Sinc { .. } => {
                let period = PI / self.sinc_scale().expect("sinc kind");
                let rule = rule24();
                sinc_extrapolated(period, |lo, hi| rule.integrate(&f, lo, hi))
            }
            Self::Tabulated(t) => {
                let (lo, hi) = (t.spline.lower() - reach, t.spline.upper() + reach);
                let spacing = (t.spline.upper() - t.spline.lower()) / (t.spline.knots().len() - 1) as f64;
                let panels = ((hi - lo) / spacing).ceil() as usize;
                rule8().composite(f, lo, hi, panels)
            }
        }
    }

    /// Adaptive counterpart of [`integrate`](Self::integrate) for integrands
    /// with sharp features (ratios that nearly vanish, clipped regions).
    pub fn integrate_adaptive<F: Fn(f64) -> f64>(&self, f: F, reach: f64, opts: AdaptiveOptions) -> Result<f64> {
        let reach = reach.abs();
        match self {
            Self::Gaussian { sigma } => {
                let half = GAUSSIAN_HALF_WIDTH * sigma + reach;
                let n = (2.0 * half / sigma).ceil() as usize;
                let breaks: Vec<f64> = (0..=n).map(|i| -half + 2.0 * half * i as f64 / n as f64).collect();
                Ok(integrate::adaptive_over(f, &breaks, opts)?.value)
            }
            Self::Sinc { .. } => {
                let period = PI / self.sinc_scale().expect("sinc kind");
                let mut failure = None;
                let value = sinc_extrapolated(period, |lo, hi| {
                    match integrate::adaptive(&f, lo, hi, opts) {
                        Ok(e) => e.value,
                        Err(err) => {
                            failure.get_or_insert(err);
                            f64::NAN
                        }
                    }
                });
                match failure {
                    Some(err) => Err(err),
                    None => Ok(value),
                }
            }
            Self::Tabulated(t) => {
                let (lo, hi) = (t.spline.lower() - reach, t.spline.upper() + reach);
                let n = 64;
                let breaks: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
                Ok(integrate::adaptive_over(f, &breaks, opts)?.value)
            }
        }
    }
}

fn check_width(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("width must be positive and finite, got {w}")))
    }
}

fn gaussian_norm(sigma: f64) -> f64 {
    (2.0 * PI * sigma * sigma).powf(-0.25)
}

/// `sin(y)/y` with its removable singularity.
pub(crate) fn sinc(y: f64) -> f64 {
    if y.abs() < 0.05 {
        let y2 = y * y;
        1.0 - y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0 * (1.0 - y2 / 72.0)))
    } else {
        y.sin() / y
    }
}

/// `d/dy [sin(y)/y] = (y cos y − sin y)/y²`.
pub(crate) fn sinc_slope(y: f64) -> f64 {
    if y.abs() < 0.05 {
        let y2 = y * y;
        y * (-1.0 / 3.0 + y2 * (1.0 / 30.0 + y2 * (-1.0 / 840.0 + y2 / 45360.0)))
    } else {
        (y * y.cos() - y.sin()) / (y * y)
    }
}

fn rule8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

fn rule16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

fn rule24() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(24))
}

/// Integrates over `[-L, L]` for period-aligned `L = 50·2^k` periods, one
/// panel per period, and Richardson-extrapolates `L → ∞` in powers of `1/L`.
fn sinc_extrapolated<P: FnMut(f64, f64) -> f64>(period: f64, mut panel: P) -> f64 {
    let mut partial = Vec::with_capacity(SINC_LEVELS);
    let mut sum = 0.0;
    let mut done = 0usize;
    for level in 0..SINC_LEVELS {
        let periods = SINC_BASE_PERIODS << level;
        for k in done..periods {
            let lo = k as f64 * period;
            let hi = lo + period;
            sum += panel(lo, hi) + panel(-hi, -lo);
        }
        done = periods;
        partial.push(sum);
    }
    integrate::richardson(&partial, 2.0)
}

fn spline_norm(spline: &CubicSpline) -> f64 {
    // u is cubic on each interval, so a 4-point rule is exact for u².
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(4));
    rule.over_breaks(|x| spline.value(x).powi(2), spline.knots())
}

fn spline_sigma(spline: &CubicSpline) -> Result<f64> {
    // u' is quadratic on each interval; 3 points integrate u'² exactly.
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(3));
    let slope2 = rule.over_breaks(|x| spline.derivative(x).powi(2), spline.knots());
    if !(slope2 > 0.0) || !slope2.is_finite() {
        return Err(Error::Validation("tabulated PSF has no slope energy".into()));
    }
    Ok(0.5 / slope2.sqrt())
}

/// Characteristic width `σ = ½(∫u'²)^(-1/2)`.
///
/// Analytic kinds return their parameter; tabulated PSFs are integrated from
/// the spline and must be normalized.
pub fn sigma_of(tf: &TransferFunction) -> Result<f64> {
    match tf {
        TransferFunction::Gaussian { sigma } | TransferFunction::Sinc { sigma } => Ok(*sigma),
        TransferFunction::Tabulated(t) => {
            let norm = spline_norm(&t.spline);
            if (norm - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Validation(format!("∫u² dx = {norm} is not 1")));
            }
            spline_sigma(&t.spline)
        }
    }
}

/// The mode pair `{v0 = u, v1 = -2σu'}` of binary SPADE.
#[derive(Debug, Clone)]
pub struct ModePair {
    tf: TransferFunction,
    sigma: f64,
}

impl ModePair {
    pub fn new(tf: TransferFunction) -> Self {
        let sigma = tf.sigma();
        Self { tf, sigma }
    }

    pub fn transfer_function(&self) -> &TransferFunction {
        &self.tf
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eval_v0(&self, x: f64) -> Result<f64> {
        self.tf.eval_u(x)
    }

    pub fn eval_v1(&self, x: f64) -> Result<f64> {
        Ok(-2.0 * self.sigma * self.tf.eval_u_prime(x)?)
    }

    pub(crate) fn v1(&self, x: f64) -> f64 {
        -2.0 * self.sigma * self.tf.slope(x)
    }

    /// Gram matrix entries `(∫v0², ∫v0v1, ∫v1²)` computed numerically.
    pub fn gram(&self) -> (f64, f64, f64) {
        let tf = &self.tf;
        let v00 = tf.integrate(|x| tf.amplitude(x).powi(2), 0.0);
        let v01 = tf.integrate(|x| tf.amplitude(x) * self.v1(x), 0.0);
        let v11 = tf.integrate(|x| self.v1(x).powi(2), 0.0);
        (v00, v01, v11)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled_gaussian(sigma: f64, half: f64, n: usize) -> TransferFunction {
        let tf = TransferFunction::gaussian(sigma).unwrap();
        let grid: Vec<f64> = (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
        let values = grid.iter().map(|&x| tf.eval_u(x).unwrap()).collect();
        TransferFunction::tabulated(grid, values).unwrap()
    }

    #[test]
    fn gaussian_peak_value() {
        let tf = TransferFunction::gaussian(1.0).unwrap();
        assert!((tf.eval_u(0.0).unwrap() - (2.0 * PI).powf(-0.25)).abs() < 1e-15);
        assert!((tf.eval_u(0.0).unwrap() - 0.631_618_7).abs() < 1e-7);
        assert_eq!(tf.eval_u(1.7).unwrap(), tf.eval_u(-1.7).unwrap());
    }

    #[test]
    fn sinc_peak_value() {
        let tf = TransferFunction::sinc_from_scale(1.0).unwrap();
        assert!((tf.sigma() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((tf.eval_u(0.0).unwrap() - PI.recip().sqrt()).abs() < 1e-15);
        assert!((tf.eval_u(0.0).unwrap() - 0.564_189_6).abs() < 1e-7);
    }

    #[test]
    fn slopes_at_center_and_unit_distance() {
        let g = TransferFunction::gaussian(1.0).unwrap();
        assert_eq!(g.eval_u_prime(0.0).unwrap(), 0.0);
        let expected = -0.5 * g.eval_u(1.0).unwrap();
        assert!((g.eval_u_prime(1.0).unwrap() - expected).abs() < 1e-15);
        assert!((g.eval_u_prime(1.0).unwrap() + 0.245_952_599_355_619_4).abs() < 1e-15);
        let s = TransferFunction::sinc_from_scale(1.0).unwrap();
        assert_eq!(s.eval_u_prime(0.0).unwrap(), 0.0);
    }

    #[test]
    fn slope_matches_finite_differences() {
        for tf in [TransferFunction::gaussian(1.3).unwrap(), TransferFunction::sinc(0.8).unwrap()] {
            let sigma = tf.sigma();
            let h = 1e-5 * sigma;
            for x in [0.3 * sigma, sigma, 2.0 * sigma] {
                let fd = (tf.eval_u(x + h).unwrap() - tf.eval_u(x - h).unwrap()) / (2.0 * h);
                let an = tf.eval_u_prime(x).unwrap();
                assert!((fd - an).abs() <= 1e-6 * an.abs(), "{:?} x={x}: {fd} vs {an}", tf.kind());
            }
        }
    }

    #[test]
    fn sinc_series_branch_is_continuous() {
        for y in [0.049_999_999, 0.050_000_001, -0.05] {
            assert!((sinc(y) - y.sin() / y).abs() < 1e-15);
            assert!((sinc_slope(y) - (y * y.cos() - y.sin()) / (y * y)).abs() < 1e-13);
        }
    }

    #[test]
    fn v1_closed_forms() {
        let modes = ModePair::new(TransferFunction::gaussian(1.0).unwrap());
        let u1 = modes.eval_v0(1.0).unwrap();
        assert!((modes.eval_v1(1.0).unwrap() - u1).abs() < 1e-15);
        assert!((modes.eval_v1(1.0).unwrap() - 0.4919).abs() < 1e-4);
        assert_eq!(modes.eval_v1(0.0).unwrap(), 0.0);

        let sinc_modes = ModePair::new(TransferFunction::sinc_from_scale(1.0).unwrap());
        let sigma = sinc_modes.sigma();
        let expected = 2.0 * sigma * PI.recip().sqrt() * (0.0 - (-1.0)) / PI;
        assert!((sinc_modes.eval_v1(PI).unwrap() - expected).abs() < 1e-15);
        for x in [0.4, 1.7, -3.3, 12.0] {
            let a = 1.0;
            let closed = 2.0 * sigma * (a / PI).sqrt() * (sinc(a * x) - (a * x).cos()) / x;
            assert!((sinc_modes.eval_v1(x).unwrap() - closed).abs() < 1e-14);
        }
        assert_eq!(sinc_modes.eval_v1(0.0).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_modes_are_orthonormal() {
        let (v00, v01, v11) = ModePair::new(TransferFunction::gaussian(0.7).unwrap()).gram();
        assert!((v00 - 1.0).abs() < 1e-9);
        assert!(v01.abs() < 1e-9);
        assert!((v11 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sinc_modes_are_orthonormal() {
        let (v00, v01, v11) = ModePair::new(TransferFunction::sinc(1.0).unwrap()).gram();
        assert!((v00 - 1.0).abs() < 1e-9, "{v00}");
        assert!(v01.abs() < 1e-9, "{v01}");
        assert!((v11 - 1.0).abs() < 1e-6, "{v11}");
    }

    #[test]
    fn analytic_sigma_round_trips() {
        assert_eq!(sigma_of(&TransferFunction::gaussian(2.0).unwrap()).unwrap(), 2.0);
        let s = sigma_of(&TransferFunction::sinc_from_scale(1.0).unwrap()).unwrap();
        assert!((s - 0.866_025_403_784_438_6).abs() < 1e-15);
    }

    #[test]
    fn tabulated_gaussian_sigma() {
        let tf = sampled_gaussian(1.0, 10.0, 4001);
        let s = sigma_of(&tf).unwrap();
        assert!((s - 1.0).abs() < 1e-6, "{s}");
    }

    #[test]
    fn tabulated_sigma_converges_with_refinement() {
        let errors: Vec<f64> = [101, 201, 401, 801]
            .iter()
            .map(|&n| (sigma_of(&sampled_gaussian(1.5, 15.0, n)).unwrap() - 1.5).abs() / 1.5)
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
        // Spline slopes converge at third order or better.
        assert!(errors[2] / errors[3] > 7.0, "{errors:?}");
        assert!(errors[3] < 1e-5, "{errors:?}");
    }

    #[test]
    fn tabulated_out_of_hull_is_domain_error() {
        let tf = sampled_gaussian(1.0, 5.0, 101);
        assert!(matches!(tf.eval_u(5.5), Err(Error::Domain(_))));
        assert!(matches!(tf.eval_u_prime(-5.01), Err(Error::Domain(_))));
        assert!(tf.eval_u(5.0).is_ok());
    }

    #[test]
    fn unnormalized_table_is_rejected() {
        let grid: Vec<f64> = (0..101).map(|i| -5.0 + 0.1 * i as f64).collect();
        let values: Vec<f64> = grid.iter().map(|x| 2.0 * (-x * x / 4.0f64).exp()).collect();
        assert!(matches!(
            TransferFunction::tabulated(grid.clone(), values.clone()),
            Err(Error::Validation(_))
        ));
        let tf = TransferFunction::tabulated_normalized(grid, values).unwrap();
        if let TransferFunction::Tabulated(t) = &tf {
            assert!((t.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_table_with_comments() {
        let text = "# position amplitude\n-1 0.1\n\n0 0.5 # peak\n1\t0.1\n";
        let (g, v) = TransferFunction::parse_table(text).unwrap();
        assert_eq!(g, vec![-1.0, 0.0, 1.0]);
        assert_eq!(v, vec![0.1, 0.5, 0.1]);
        let err = TransferFunction::parse_table("0 1\n1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(TransferFunction::parse_table("0 x\n").is_err());
    }

    #[test]
    fn invalid_widths() {
        assert!(TransferFunction::gaussian(0.0).is_err());
        assert!(TransferFunction::sinc(-1.0).is_err());
        assert!(TransferFunction::gaussian(f64::NAN).is_err());
    }
}
