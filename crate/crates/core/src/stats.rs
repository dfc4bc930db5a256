//! Driving functions of sampled interfaces and the statistics run on them:
//! κ estimation, increment normality, exponential moments and martingale
//! checks.

use std::fmt::{self, Write as _};

use num_complex::Complex;
use rand::Rng;
use thiserror::Error;

use crate::conformal::{ConformalError, UniformizerHandle};
use crate::curve::LatticeCurve;
use crate::domain::DiscreteDomain;
use crate::loewner::{forward_flow, zipper_extract_lenient, CurveInH, DrivingFunction, LoewnerError};
use crate::rng::{purpose, stream};

pub const GRID_POINTS: usize = 50;
pub const BOOTSTRAP_ROUNDS: usize = 200;
/// Image points closer to `ℝ` than this (relative) are hidden behind earlier
/// slits and carry no capacity.
const MIN_CLEARANCE_FRACTION: f64 = 0.125;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("curve point {index} is {distance} from the boundary (mesh units), below 1/8")]
    TooCloseToBoundary { index: usize, distance: f64 },
    #[error(transparent)]
    Loewner(#[from] LoewnerError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error("window [{lo}, {hi}] exceeds the common horizon {horizon}")]
    WindowBeyondHorizon { lo: f64, hi: f64, horizon: f64 },
    #[error("need at least {needed} drives, got {got}")]
    TooFewDrives { needed: usize, got: usize },
    #[error("degenerate time pair t1 = t2 = {0}")]
    DegeneratePair(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Where an ensemble came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Spin,
    Fk,
    SyntheticSle { kappa: f64 },
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Spin => write!(f, "spin"),
            Model::Fk => write!(f, "fk"),
            Model::SyntheticSle { kappa } => write!(f, "synthetic-sle({kappa})"),
        }
    }
}

/// Driving function of a lattice interface: the curve is mapped to `H` by
/// the handle and fed to the zipper, stopping at capacity `t_max`.
pub fn drive_from_interface(
    curve: &LatticeCurve,
    domain: &DiscreteDomain,
    handle: &UniformizerHandle<f64>,
    t_max: f64,
) -> Result<DrivingFunction<f64>, StatsError> {
    let phys = curve.physical_points(domain);
    let delta = domain.mesh();
    let mut image = Vec::with_capacity(phys.len());
    let last = phys.len() - 1;
    for (k, &(x, y)) in phys.iter().enumerate() {
        let z = Complex::new(x, y);
        if k > 0 && k < last {
            let d = handle.distance_to_boundary(z);
            if d < MIN_CLEARANCE_FRACTION * delta {
                return Err(StatsError::TooCloseToBoundary { index: k, distance: d / delta });
            }
        }
        image.push(handle.eval(z)?);
    }
    let w0 = image[0].re;
    for w in image.iter_mut() {
        *w -= w0;
        w.im = w.im.max(0.0);
    }
    image[0] = Complex::new(0.0, 0.0);
    let (drive, _) = zipper_extract_lenient(&CurveInH::new(image)?, t_max, usize::MAX)?;
    Ok(drive)
}

/// Drives sharing a common evaluation grid.
#[derive(Debug, Clone)]
pub struct DriveEnsemble {
    drives: Vec<DrivingFunction<f64>>,
    model: Model,
    mesh: Option<f64>,
    handle: Option<UniformizerHandle<f64>>,
    horizon: f64,
    t_grid: Vec<f64>,
}

impl DriveEnsemble {
    /// Grid of [`GRID_POINTS`] points over `[0.1, 0.9]` of the common horizon.
    pub fn new(drives: Vec<DrivingFunction<f64>>, model: Model) -> Result<Self, StatsError> {
        if drives.is_empty() {
            return Err(StatsError::TooFewDrives { needed: 1, got: 0 });
        }
        let horizon = drives.iter().map(|d| d.horizon()).fold(f64::INFINITY, f64::min);
        let t_grid = (0..GRID_POINTS)
            .map(|i| horizon * (0.1 + 0.8 * i as f64 / (GRID_POINTS - 1) as f64))
            .collect();
        Ok(DriveEnsemble { drives, model, mesh: None, handle: None, horizon, t_grid })
    }

    pub fn with_mesh(mut self, mesh: f64) -> Self {
        self.mesh = Some(mesh);
        self
    }

    /// Uniformizer used for observables `M_t(z)`.
    pub fn with_handle(mut self, handle: UniformizerHandle<f64>) -> Self {
        self.handle = Some(handle);
        self
    }

    pub fn drives(&self) -> &[DrivingFunction<f64>] {
        &self.drives
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn mesh(&self) -> Option<f64> {
        self.mesh
    }

    pub fn handle(&self) -> Option<&UniformizerHandle<f64>> {
        self.handle.as_ref()
    }

    pub fn len(&self) -> usize {
        self.drives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drives.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    /// `W(t)` for every drive.
    pub fn values_at(&self, t: f64) -> Vec<f64> {
        self.drives.iter().map(|d| d.value_at(t)).collect()
    }

    /// `(t, sample variance of W(t))` over the grid.
    pub fn variance_profile(&self) -> Vec<(f64, f64)> {
        self.t_grid.iter().map(|&t| (t, variance(&self.values_at(t)))).collect()
    }

    fn require(&self, needed: usize) -> Result<(), StatsError> {
        if self.len() < needed {
            Err(StatsError::TooFewDrives { needed, got: self.len() })
        } else {
            Ok(())
        }
    }

    fn check_time(&self, t: f64) -> Result<(), StatsError> {
        if !(0.0..=self.horizon * (1.0 + 1e-12)).contains(&t) {
            return Err(StatsError::WindowBeyondHorizon { lo: t, hi: t, horizon: self.horizon });
        }
        Ok(())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Ordinary least squares `y = a + b x`, returning `(b, a)`.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Asymptotic Kolmogorov p-value for statistic `d` on `n` samples.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Kolmogorov–Smirnov distance of a sample from the standard normal.
pub fn ks_statistic_normal(sample: &[f64]) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaEstimate {
    pub kappa: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub grid_points: usize,
}

/// κ̂ as the least-squares slope (with intercept) of the sample variance of
/// `W(t)` against `t` over the grid points inside `window`, with a bootstrap
/// standard error over drives.
pub fn estimate_kappa(ens: &DriveEnsemble, window: (f64, f64)) -> Result<KappaEstimate, StatsError> {
    ens.require(100)?;
    let (lo, hi) = window;
    if hi > ens.horizon * (1.0 + 1e-12) || lo >= hi {
        return Err(StatsError::WindowBeyondHorizon { lo, hi, horizon: ens.horizon });
    }
    let ts: Vec<f64> = ens.t_grid.iter().copied().filter(|t| *t >= lo && *t <= hi).collect();
    if ts.len() < 2 {
        return Err(StatsError::WindowBeyondHorizon { lo, hi, horizon: ens.horizon });
    }
    let table: Vec<Vec<f64>> = ts.iter().map(|&t| ens.values_at(t)).collect();
    let slope_for = |idx: &[usize]| {
        let vars: Vec<f64> = table
            .iter()
            .map(|col| variance(&idx.iter().map(|&i| col[i]).collect::<Vec<_>>()))
            .collect();
        ols(&ts, &vars)
    };
    let all: Vec<usize> = (0..ens.len()).collect();
    let (kappa, intercept) = slope_for(&all);
    let mut rng = stream(0, purpose::BOOTSTRAP);
    let boots: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
        .map(|_| {
            let idx: Vec<usize> = (0..ens.len()).map(|_| rng.random_range(0..ens.len())).collect();
            slope_for(&idx).0
        })
        .collect();
    Ok(KappaEstimate { kappa, stderr: variance(&boots).sqrt(), intercept, grid_points: ts.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub t1: f64,
    pub t2: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// KS test of `(W(t2) − W(t1)) / √(κ̂ (t2 − t1))` against `N(0, 1)`, with κ̂
/// fitted over the whole grid.
pub fn test_increment_normality(ens: &DriveEnsemble, pairs: &[(f64, f64)]) -> Result<Vec<KsResult>, StatsError> {
    ens.require(200)?;
    let kappa = estimate_kappa(ens, (ens.t_grid[0], ens.horizon))?.kappa;
    pairs
        .iter()
        .map(|&(t1, t2)| {
            if t1 == t2 {
                return Err(StatsError::DegeneratePair(t1));
            }
            ens.check_time(t1)?;
            ens.check_time(t2)?;
            let n = ens.len();
            let (statistic, p_value) = if kappa <= 0.0 {
                (1.0, 0.0)
            } else {
                let scale = (kappa * (t2 - t1)).sqrt();
                let z: Vec<f64> = ens.drives.iter().map(|d| (d.value_at(t2) - d.value_at(t1)) / scale).collect();
                let stat = ks_statistic_normal(&z);
                (stat, kolmogorov_p_value(stat, n))
            };
            Ok(KsResult { t1, t2, statistic, p_value, n })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpMoment {
    pub estimate: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

/// Sample mean of `exp(ε |W_t| / √t)` with a 95% percentile bootstrap
/// interval.
pub fn exp_moment(ens: &DriveEnsemble, eps: f64, t: f64) -> Result<ExpMoment, StatsError> {
    ens.require(2)?;
    ens.check_time(t)?;
    if t <= 0.0 {
        return Err(StatsError::Precondition("t must be positive".into()));
    }
    let xs: Vec<f64> = ens.values_at(t).iter().map(|w| (eps * w.abs() / t.sqrt()).exp()).collect();
    let n = xs.len();
    let estimate = mean(&xs);
    let stderr = (variance(&xs) / n as f64).sqrt();
    let mut rng = stream(1, purpose::BOOTSTRAP);
    let mut boots: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
        .map(|_| (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    boots.sort_by(|a, b| a.total_cmp(b));
    let at = |q: f64| boots[((q * (BOOTSTRAP_ROUNDS - 1) as f64).round() as usize).min(BOOTSTRAP_ROUNDS - 1)];
    Ok(ExpMoment { estimate, stderr, ci_low: at(0.025), ci_high: at(0.975), n })
}

/// `E[exp(ε √κ |Z|)] = 2 e^{a²/2} Φ(a)`, `a = ε √κ`, for standard normal `Z`.
pub fn gaussian_exp_moment(kappa: f64, eps: f64) -> f64 {
    let a = eps * kappa.sqrt();
    2.0 * (a * a / 2.0).exp() * normal_cdf(a)
}

/// Largest time the observable at `z` may be evaluated: `(Im w(z))² / 9`.
pub fn observable_horizon(z: Complex<f64>, handle: &UniformizerHandle<f64>) -> Result<f64, StatsError> {
    let w = handle.eval(z)?;
    Ok(w.im * w.im / 9.0)
}

/// `M_s(z) = (g_s′(w) w′(z) / G_s(w)²)^{1/2}` at each of the nondecreasing
/// `times`, `G_s = g_s − W_s`, with the square-root branch followed
/// continuously from the principal branch at `s = 0`.
pub fn observable_path(
    z: Complex<f64>,
    drive: &DrivingFunction<f64>,
    handle: &UniformizerHandle<f64>,
    times: &[f64],
) -> Result<Vec<Complex<f64>>, StatsError> {
    let dw = handle.derivative(z)?;
    let w = handle.eval(z)?;
    let cap = w.im * w.im / 9.0;
    if let Some(&t) = times.iter().find(|&&t| t > cap * (1.0 + 1e-12) || t < 0.0) {
        return Err(StatsError::Precondition(format!("t = {t} outside [0, T(z) = {cap}]")));
    }
    // refine so consecutive evaluations are close enough to track the branch
    let t_end = times.last().copied().unwrap_or(0.0);
    let mut all: Vec<f64> = (0..=32).map(|k| t_end * k as f64 / 32.0).chain(times.iter().copied()).collect();
    all.sort_by(|a, b| a.total_cmp(b));
    let flow = forward_flow(drive, w, &all)?;
    let mut out = Vec::with_capacity(times.len());
    let mut prev: Option<Complex<f64>> = None;
    let mut want = times.iter().peekable();
    for (&s, &(g, dg)) in all.iter().zip(&flow) {
        let big_g = g - drive.value_at(s);
        let mut m = (dg * dw / (big_g * big_g)).sqrt();
        if let Some(p) = prev {
            if (m - p).norm() > (m + p).norm() {
                m = -m;
            }
        }
        prev = Some(m);
        while want.peek().is_some_and(|&&t| t == s) {
            want.next();
            out.push(m);
        }
    }
    Ok(out)
}

/// `M_t(z)`; see [`observable_path`].
pub fn eval_observable(
    z: Complex<f64>,
    drive: &DrivingFunction<f64>,
    handle: &UniformizerHandle<f64>,
    t: f64,
) -> Result<Complex<f64>, StatsError> {
    Ok(observable_path(z, drive, handle, &[t])?[0])
}

/// First sample time `τ` of the drive with `3 (√τ + |W_τ|) ≥ Im w`, capped
/// at `t_cap`. Only sample times are considered: between samples the drive is
/// interpolated towards the next value, and looking at it there would make
/// `τ` anticipate the path.
pub fn observable_stopping_time(drive: &DrivingFunction<f64>, im_w: f64, t_cap: f64) -> f64 {
    drive
        .times()
        .iter()
        .zip(drive.values())
        .take_while(|(t, _)| **t < t_cap)
        .find(|(t, w)| 3.0 * (t.sqrt() + w.abs()) >= im_w)
        .map_or(t_cap, |(t, _)| *t)
}

/// Process checked for the martingale property.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    Constant(f64),
    W,
    WSquaredMinus3t,
    /// Real part of `M_{t∧τ}(z)`.
    ObservableRe(Complex<f64>),
    /// Imaginary part of `M_{t∧τ}(z)`.
    ObservableIm(Complex<f64>),
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Constant(c) => write!(f, "const({c})"),
            Functional::W => write!(f, "W"),
            Functional::WSquaredMinus3t => write!(f, "W2-3t"),
            Functional::ObservableRe(z) => write!(f, "ReM({};{})", z.re, z.im),
            Functional::ObservableIm(z) => write!(f, "ImM({};{})", z.re, z.im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleResult {
    pub deviation: f64,
    pub stderr: f64,
    /// Regression of `X_{t2}` on `X_{t1}`: slope and intercept.
    pub slope: f64,
    pub intercept: f64,
    pub n: usize,
}

/// `E[X_{t2}] − E[X_{t1}]` with a paired standard error, plus the regression
/// of `X_{t2}` on `X_{t1}` (slope ≈ 1, intercept ≈ 0 for a martingale).
pub fn martingale_deviation(
    ens: &DriveEnsemble,
    functional: Functional,
    t1: f64,
    t2: f64,
) -> Result<MartingaleResult, StatsError> {
    ens.require(200)?;
    if t1 >= t2 {
        return Err(StatsError::Precondition(format!("need t1 < t2, got {t1}, {t2}")));
    }
    ens.check_time(t2)?;
    let pairs: Vec<(f64, f64)> = match functional {
        Functional::Constant(c) => vec![(c, c); ens.len()],
        Functional::W => ens.drives.iter().map(|d| (d.value_at(t1), d.value_at(t2))).collect(),
        Functional::WSquaredMinus3t => ens
            .drives
            .iter()
            .map(|d| (d.value_at(t1).powi(2) - 3.0 * t1, d.value_at(t2).powi(2) - 3.0 * t2))
            .collect(),
        Functional::ObservableRe(z) | Functional::ObservableIm(z) => {
            let handle = ens
                .handle
                .as_ref()
                .ok_or_else(|| StatsError::Precondition("ensemble has no uniformizer".into()))?;
            let w = handle.eval(z)?;
            let cap = w.im * w.im / 9.0;
            if t2 > cap {
                return Err(StatsError::Precondition(format!("t2 = {t2} exceeds T(z) = {cap}")));
            }
            let part = |m: Complex<f64>| if matches!(functional, Functional::ObservableRe(_)) { m.re } else { m.im };
            ens.drives
                .iter()
                .map(|d| {
                    let tau = observable_stopping_time(d, w.im, t2);
                    let path = observable_path(z, d, handle, &[t1.min(tau), t2.min(tau)])?;
                    Ok((part(path[0]), part(path[1])))
                })
                .collect::<Result<_, StatsError>>()?
        }
    };
    let x1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let x2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.1 - p.0).collect();
    let n = pairs.len();
    let (slope, intercept) = if variance(&x1) > 0.0 { ols(&x1, &x2) } else { (1.0, mean(&x2) - mean(&x1)) };
    Ok(MartingaleResult { deviation: mean(&diff), stderr: (variance(&diff) / n as f64).sqrt(), slope, intercept, n })
}

/// Row of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct StatRow {
    pub stat: String,
    pub t1: f64,
    pub t2: f64,
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

/// CSV, header `stat,t1,t2,value,stderr,n`.
pub fn stats_csv(rows: &[StatRow]) -> String {
    let mut out = String::from("stat,t1,t2,value,stderr,n\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.stat, r.t1, r.t2, r.value, r.stderr, r.n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Shape;
    use crate::loewner::sample_sle_drive;
    use crate::rng::stream;

    fn synthetic(kappa: f64, n: usize, seed: u64) -> DriveEnsemble {
        let mut rng = stream(seed, purpose::SYNTHETIC);
        let drives = (0..n).map(|_| sample_sle_drive(kappa, 1.0, 200, &mut rng)).collect();
        DriveEnsemble::new(drives, Model::SyntheticSle { kappa }).unwrap()
    }

    fn linear(n: usize) -> DriveEnsemble {
        let drives = (0..n).map(|_| DrivingFunction::new(vec![0.0, 1.0], vec![0.0, 0.5]).unwrap()).collect();
        DriveEnsemble::new(drives, Model::SyntheticSle { kappa: 0.0 }).unwrap()
    }

    #[test]
    fn grid_spans_inner_horizon() {
        let e = synthetic(3.0, 10, 1);
        assert_eq!(e.t_grid().len(), GRID_POINTS);
        assert!((e.t_grid()[0] - 0.1).abs() < 1e-12);
        assert!((e.t_grid()[GRID_POINTS - 1] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn kappa_calibration() {
        for (kappa, lo, hi) in [(3.0, 2.9, 3.1), (16.0 / 3.0, 5.15, 5.52)] {
            let e = synthetic(kappa, 10_000, 2);
            let k = estimate_kappa(&e, (0.0, 1.0)).unwrap();
            assert!(k.kappa > lo && k.kappa < hi, "{k:?}");
            assert!(k.stderr > 0.0 && k.stderr < 0.1);
        }
        let zero = DriveEnsemble::new(vec![DrivingFunction::zero(1.0); 100], Model::SyntheticSle { kappa: 0.0 }).unwrap();
        assert_eq!(estimate_kappa(&zero, (0.1, 0.9)).unwrap().kappa, 0.0);
        assert!(matches!(estimate_kappa(&zero, (0.1, 2.0)), Err(StatsError::WindowBeyondHorizon { .. })));
        assert!(matches!(estimate_kappa(&synthetic(3.0, 50, 1), (0.1, 0.9)), Err(StatsError::TooFewDrives { .. })));
    }

    #[test]
    fn kappa_unbiased_across_values() {
        for (i, kappa) in [1.0, 3.0, 16.0 / 3.0, 8.0].into_iter().enumerate() {
            let e = synthetic(kappa, 2000, 10 + i as u64);
            let k = estimate_kappa(&e, (0.0, 1.0)).unwrap();
            assert!((k.kappa - kappa).abs() < 3.0 * k.stderr, "{kappa} {k:?}");
        }
    }

    #[test]
    fn normality_calibration() {
        let e = synthetic(3.0, 1000, 3);
        let pairs = [(0.1, 0.3), (0.3, 0.5), (0.2, 0.8), (0.5, 0.9)];
        let res = test_increment_normality(&e, &pairs).unwrap();
        let min_p = res.iter().map(|r| r.p_value).fold(1.0, f64::min);
        // Bonferroni over the four pairs
        assert!(min_p > 0.01 / 4.0, "{res:?}");
        let lin = test_increment_normality(&linear(300), &[(0.1, 0.5)]).unwrap();
        assert!(lin[0].p_value < 1e-6);
        assert!(matches!(test_increment_normality(&e, &[(0.2, 0.2)]), Err(StatsError::DegeneratePair(_))));
    }

    #[test]
    fn disjoint_increments_uncorrelated() {
        let e = synthetic(3.0, 2000, 4);
        let a: Vec<f64> = e.drives().iter().map(|d| d.value_at(0.4) - d.value_at(0.1)).collect();
        let b: Vec<f64> = e.drives().iter().map(|d| d.value_at(0.9) - d.value_at(0.5)).collect();
        let (ma, mb) = (mean(&a), mean(&b));
        let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64;
        let rho = cov / (variance(&a) * variance(&b)).sqrt();
        assert!(rho.abs() < 3.0 / (a.len() as f64).sqrt(), "{rho}");
    }

    #[test]
    fn ks_pvalue_reference() {
        // Kolmogorov distribution: P(K > 1.36) ≈ 0.049, P(K > 1.63) ≈ 0.0098
        let n = 1_000_000;
        let d = |lambda: f64| lambda / (n as f64).sqrt();
        assert!((kolmogorov_p_value(d(1.358), n) - 0.05).abs() < 2e-3);
        assert!((kolmogorov_p_value(d(1.628), n) - 0.01).abs() < 1e-3);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
    }

    fn quadrature_exp_moment(a: f64) -> f64 {
        // Simpson on [0, 12] of 2 e^{a x} φ(x)
        let n = 20_000;
        let h = 12.0 / n as f64;
        let f = |x: f64| 2.0 * (a * x - x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = f(0.0) + f(12.0);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn exp_moment_matches_quadrature() {
        let e = synthetic(3.0, 5000, 5);
        let oracle = quadrature_exp_moment(0.1 * 3f64.sqrt());
        assert!((gaussian_exp_moment(3.0, 0.1) - oracle).abs() < 1e-10);
        let m1 = exp_moment(&e, 0.1, 0.2).unwrap();
        let m4 = exp_moment(&e, 0.1, 0.8).unwrap();
        assert!((m1.estimate - oracle).abs() < 3.0 * m1.stderr, "{m1:?} {oracle}");
        assert!((m1.estimate - m4.estimate).abs() < 3.0 * (m1.stderr.powi(2) + m4.stderr.powi(2)).sqrt());
        assert!(m1.ci_low < m1.estimate && m1.estimate < m1.ci_high);
        assert_eq!(exp_moment(&e, 0.0, 0.3).unwrap().estimate, 1.0);
    }

    #[test]
    fn martingale_calibration() {
        let e3 = synthetic(3.0, 4000, 6);
        let c = martingale_deviation(&e3, Functional::Constant(2.5), 0.1, 0.5).unwrap();
        assert_eq!((c.deviation, c.stderr), (0.0, 0.0));
        for f in [Functional::W, Functional::WSquaredMinus3t] {
            let r = martingale_deviation(&e3, f, 0.1, 0.9).unwrap();
            assert!(r.deviation.abs() < 3.0 * r.stderr, "{f} {r:?}");
        }
        let w = martingale_deviation(&e3, Functional::W, 0.2, 0.8).unwrap();
        assert!((w.slope - 1.0).abs() < 0.1 && w.intercept.abs() < 0.1, "{w:?}");
        let e16 = synthetic(16.0 / 3.0, 4000, 7);
        let r = martingale_deviation(&e16, Functional::WSquaredMinus3t, 0.1, 0.9).unwrap();
        // E[W_t²] − 3t = (16/3 − 3) t
        assert!((r.deviation - 7.0 / 3.0 * 0.8).abs() < 3.0 * r.stderr);
        assert!(r.deviation > 3.0 * r.stderr);
    }

    fn rect_handle() -> UniformizerHandle<f64> {
        UniformizerHandle::rectangle(0.0, 0.0, 2.0, 1.0, Complex::new(0.0, 0.5), Complex::new(2.0, 0.5), 1.0 / 64.0).unwrap()
    }

    #[test]
    fn observable_initial_and_closed_form() {
        let h = rect_handle();
        let z = Complex::new(1.1, 0.55);
        let (w, dw) = h.eval_with_derivative(z);
        let zero = DrivingFunction::zero(1.0);
        let m0 = eval_observable(z, &zero, &h, 0.0).unwrap();
        assert!((m0 - (dw / (w * w)).sqrt()).norm() < 1e-12);
        let t = observable_horizon(z, &h).unwrap() / 2.0;
        let mut g = (w * w + 4.0 * t).sqrt();
        if g.im < 0.0 {
            g = -g;
        }
        let exact = (w / g * dw / (g * g)).sqrt();
        let m = eval_observable(z, &zero, &h, t).unwrap();
        assert!((m - exact).norm() < 1e-8 * exact.norm().max(1.0), "{m} {exact}");
        assert!(eval_observable(z, &zero, &h, 3.0 * t).is_err());
        assert!(eval_observable(Complex::new(1.0, 0.01), &zero, &h, 0.0).is_err());
    }

    #[test]
    fn observable_bounded_and_continuous() {
        let h = rect_handle();
        let mut rng = stream(8, purpose::SYNTHETIC);
        let zs = [Complex::new(1.0, 0.5), Complex::new(1.2, 0.6), Complex::new(1.3, 0.4)];
        let mut biggest: f64 = 0.0;
        for _ in 0..20 {
            let d = sample_sle_drive(3.0, 0.5, 500, &mut rng);
            for &z in &zs {
                let cap = observable_horizon(z, &h).unwrap() / 2.0;
                let times: Vec<f64> = (0..=20).map(|k| cap * k as f64 / 20.0).collect();
                let path = observable_path(z, &d, &h, &times).unwrap();
                for pair in path.windows(2) {
                    assert!((pair[1] / pair[0]).arg().abs() < std::f64::consts::FRAC_PI_2);
                }
                biggest = path.iter().map(|m| m.norm()).fold(biggest, f64::max);
            }
        }
        assert!(biggest < 10.0, "{biggest}");
    }

    #[test]
    fn stopping_time() {
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        let d = DrivingFunction::new(grid.clone(), grid).unwrap();
        // 3(√τ + τ) = 1.5 ⇒ √τ = (−1 + √3)/2, τ ≈ 0.134, next sample 0.14
        let tau = observable_stopping_time(&d, 1.5, 1.0);
        assert!((tau - 0.14).abs() < 1e-12, "{tau}");
        assert_eq!(observable_stopping_time(&d, 100.0, 0.3), 0.3);
        assert_eq!(observable_stopping_time(&d, 1.5, 0.1), 0.1);
    }

    #[test]
    fn slit_preimage_has_zero_drive() {
        let d = DiscreteDomain::build(Shape::Rectangle { width: 2.0, height: 1.0 }, 1.0 / 16.0, (0.0, 0.5), (2.0, 0.5)).unwrap();
        let h = UniformizerHandle::for_domain(&d).unwrap();
        // preimage of the vertical slit [0, 0.8i] by Newton iteration on w(z)
        let target: Vec<Complex<f64>> = (0..=40).map(|k| Complex::new(0.0, 0.02 * k as f64)).collect();
        let a = h.a();
        let mut z = a + Complex::new(1e-3, 0.0);
        let mut pts = vec![d.start_corner()];
        for w in &target[1..] {
            for _ in 0..50 {
                let (f, df) = h.eval_with_derivative(z);
                z -= (f - w) / df;
            }
            pts.push(d.to_lattice((z.re, z.im)));
        }
        let curve = LatticeCurve::new(pts, d.mesh());
        let drive = drive_from_interface(&curve, &d, &h, 10.0).unwrap();
        assert!(drive.values().iter().all(|w| w.abs() < 1e-9));
        assert!((drive.horizon() - 0.16).abs() < 1e-9);
    }

    #[test]
    fn csv_rows() {
        let rows = [StatRow { stat: "W".into(), t1: 0.0, t2: 0.1, value: 0.5, stderr: 0.25, n: 10 }];
        assert_eq!(stats_csv(&rows), "stat,t1,t2,value,stderr,n\nW,0,0.1,0.5,0.25,10\n");
    }
}
