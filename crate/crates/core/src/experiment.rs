//! Experiment configuration and the end-to-end runner behind the command
//! line tool: sampling, drive extraction, statistics, crossing experiments,
//! and the output files.
//!
//! Config files are flat `key = value` lines; `#` starts a comment. Lists are
//! comma separated, and lists of tuples separate tuples with `;`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex;
use thiserror::Error;

use crate::conformal::UniformizerHandle;
use crate::crossing::{
    crossing_probability_experiment, crossings_csv, detect_unforced_crossing, discrete_extremal_length, AnnulusSpec,
    BoundaryTags, CrossingRow, DiscreteQuad,
};
use crate::domain::{DiscreteDomain, Shape};
use crate::fk::FkAlgorithm;
use crate::loewner::{trace_curve, DrivingFunction};
use crate::plot::{line_chart, Series};
use crate::rng::{purpose, stream};
use crate::sampling::{drives_from_interfaces, sample_interfaces, synthetic_drives, ChainPlan, Sampler};
use crate::spin::SpinAlgorithm;
use crate::stats::{
    estimate_kappa, exp_moment, martingale_deviation, observable_horizon, stats_csv, test_increment_normality,
    DriveEnsemble, Functional, Model, StatRow,
};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Runtime(String),
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Spin,
    Fk,
    SyntheticSle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub kappa: Option<f64>,
    pub shape: Shape,
    pub mesh: f64,
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub samples: usize,
    pub chains: usize,
    pub burn_in: usize,
    pub decorrelation: usize,
    pub spin_algorithm: SpinAlgorithm,
    pub fk_algorithm: FkAlgorithm,
    pub t_max: f64,
    pub synthetic_steps: usize,
    pub kappa_window: (f64, f64),
    pub exp_eps: f64,
    pub martingale_t1: Vec<f64>,
    pub martingale_t2: Vec<f64>,
    pub observable_points: Vec<(f64, f64)>,
    pub annuli: Vec<(f64, f64, f64, f64)>,
    pub quads: Vec<f64>,
    pub quad_rows: usize,
    pub quad_tags: Vec<BoundaryTags>,
    pub crossing_samples: usize,
    pub curves: usize,
    pub seed: u64,
}

const KEYS: &[&str] = &[
    "model",
    "kappa",
    "shape",
    "width",
    "height",
    "radius",
    "mesh",
    "a",
    "b",
    "samples",
    "chains",
    "burn_in",
    "decorrelation",
    "algorithm",
    "t_max",
    "synthetic_steps",
    "kappa_window",
    "exp_eps",
    "martingale_t1",
    "martingale_t2",
    "observable_points",
    "annuli",
    "quads",
    "quad_rows",
    "quad_tags",
    "crossing_samples",
    "curves",
    "seed",
];

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

/// Splits config text into a key/value map.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        if !KEYS.contains(&k) {
            return Err(ConfigError::Unknown(k.to_string()));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::Duplicate(k.to_string()));
        }
    }
    Ok(map)
}

/// Number, optionally written as a fraction `p/q`.
fn number(key: &str, s: &str) -> Result<f64, ConfigError> {
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| invalid(key, format!("`{s}` is not a number")))?;
            let q: f64 = q.trim().parse().map_err(|_| invalid(key, format!("`{s}` is not a number")))?;
            p / q
        }
        None => s.parse().map_err(|_| invalid(key, format!("`{s}` is not a number")))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("`{s}` is not finite")))
    }
}

fn numbers(key: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',').map(|x| number(key, x.trim())).collect()
}

fn tuples<const N: usize>(key: &str, s: &str) -> Result<Vec<[f64; N]>, ConfigError> {
    if s == "none" {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|item| {
            let v = numbers(key, item)?;
            v.try_into().map_err(|_| invalid(key, format!("each entry needs {N} numbers")))
        })
        .collect()
}

fn count(key: &str, s: &str) -> Result<usize, ConfigError> {
    s.parse().map_err(|_| invalid(key, format!("`{s}` is not a nonnegative integer")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let num_or = |k: &str, d: f64| get(k).map_or(Ok(d), |s| number(k, s));
        let count_or = |k: &str, d: usize| get(k).map_or(Ok(d), |s| count(k, s));
        let positive = |k: &str, v: f64| if v > 0.0 { Ok(v) } else { Err(invalid(k, "must be positive")) };

        let seed = get("seed").ok_or_else(|| ConfigError::Missing("seed".into()))?;
        let seed: u64 = seed.parse().map_err(|_| invalid("seed", format!("`{seed}` is not a u64")))?;
        let model = match get("model").ok_or_else(|| ConfigError::Missing("model".into()))? {
            "spin" => ModelKind::Spin,
            "fk" => ModelKind::Fk,
            "synthetic-sle" => ModelKind::SyntheticSle,
            other => return Err(invalid("model", format!("`{other}`; expected spin, fk or synthetic-sle"))),
        };
        let kappa = match (model, get("kappa")) {
            (ModelKind::SyntheticSle, None) => return Err(ConfigError::Missing("kappa".into())),
            (_, Some(s)) => {
                let k = number("kappa", s)?;
                if k < 0.0 {
                    return Err(invalid("kappa", "must be nonnegative"));
                }
                Some(k)
            }
            _ => None,
        };
        let (shape, default_a, default_b) = match get("shape").unwrap_or("rectangle") {
            "rectangle" => {
                let w = positive("width", num_or("width", 2.0)?)?;
                let h = positive("height", num_or("height", 1.0)?)?;
                (Shape::Rectangle { width: w, height: h }, (0.0, h / 2.0), (w, h / 2.0))
            }
            "disc" => {
                let r = positive("radius", num_or("radius", 1.0)?)?;
                (Shape::Disc { radius: r }, (-r, 0.0), (r, 0.0))
            }
            other => return Err(invalid("shape", format!("`{other}`; expected rectangle or disc"))),
        };
        let point = |k: &str, d: (f64, f64)| -> Result<(f64, f64), ConfigError> {
            match get(k) {
                None => Ok(d),
                Some(s) => match numbers(k, s)?.as_slice() {
                    [x, y] => Ok((*x, *y)),
                    _ => Err(invalid(k, "expected `x, y`")),
                },
            }
        };
        let (spin_algorithm, fk_algorithm) = match get("algorithm").unwrap_or("swendsen-wang") {
            "swendsen-wang" => (SpinAlgorithm::SwendsenWang, FkAlgorithm::SwendsenWang),
            "metropolis" if model == ModelKind::Spin => (SpinAlgorithm::MetropolisSweep, FkAlgorithm::SwendsenWang),
            "wolff" if model == ModelKind::Spin => (SpinAlgorithm::WolffCluster, FkAlgorithm::SwendsenWang),
            "heat-bath" if model == ModelKind::Fk => (SpinAlgorithm::SwendsenWang, FkAlgorithm::HeatBathSweep),
            other => return Err(invalid("algorithm", format!("`{other}` is not available for this model"))),
        };
        let window = numbers("kappa_window", get("kappa_window").unwrap_or("0.02, 0.2"))?;
        let kappa_window = match window.as_slice() {
            [lo, hi] if lo < hi => (*lo, *hi),
            _ => return Err(invalid("kappa_window", "expected `lo, hi` with lo < hi")),
        };
        let t_max = positive("t_max", num_or("t_max", 0.25)?)?;
        let martingale_t1 = numbers("martingale_t1", get("martingale_t1").unwrap_or("0, 0.02, 0.04, 0.06, 0.08"))?;
        let martingale_t2 = numbers("martingale_t2", get("martingale_t2").unwrap_or("0.12, 0.14, 0.16, 0.18, 0.2"))?;
        for &t in martingale_t1.iter().chain(&martingale_t2) {
            if !(0.0..=t_max).contains(&t) {
                return Err(invalid("martingale_t1", format!("time {t} outside [0, t_max]")));
            }
        }
        let quad_tags = get("quad_tags")
            .unwrap_or("ffff, wwww, wfwf, fwfw")
            .split(',')
            .map(|s| BoundaryTags::parse(s.trim()).ok_or_else(|| invalid("quad_tags", format!("`{}`", s.trim()))))
            .collect::<Result<_, _>>()?;
        let default_annuli = match shape {
            Shape::Rectangle { width, height } => {
                let mut v = Vec::new();
                for y in [0.0, height] {
                    for i in 1..8 {
                        v.push([width * i as f64 / 8.0, y, 0.03, 0.3]);
                    }
                }
                v
            }
            _ => Vec::new(),
        };
        let annuli = match get("annuli") {
            Some(s) => tuples::<4>("annuli", s)?,
            None => default_annuli,
        };
        for a in &annuli {
            AnnulusSpec::new((a[0], a[1]), a[2], a[3]).map_err(|e| invalid("annuli", e.to_string()))?;
        }
        let quads = match get("quads") {
            Some("none") | None => Vec::new(),
            Some(s) => numbers("quads", s)?,
        };
        if quads.iter().any(|&l| l <= 0.0) {
            return Err(invalid("quads", "extremal lengths must be positive"));
        }
        let cfg = ExperimentConfig {
            model,
            kappa,
            shape,
            mesh: positive("mesh", num_or("mesh", 1.0 / 64.0)?)?,
            a: point("a", default_a)?,
            b: point("b", default_b)?,
            samples: count_or("samples", 1000)?,
            chains: count_or("chains", 16)?.max(1),
            burn_in: count_or("burn_in", 200)?,
            decorrelation: count_or("decorrelation", 10)?.max(1),
            spin_algorithm,
            fk_algorithm,
            t_max,
            synthetic_steps: count_or("synthetic_steps", 1000)?.max(1),
            kappa_window,
            exp_eps: num_or("exp_eps", 0.1)?,
            martingale_t1,
            martingale_t2,
            observable_points: tuples::<2>("observable_points", get("observable_points").unwrap_or("none"))?
                .into_iter()
                .map(|[x, y]| (x, y))
                .collect(),
            annuli: annuli.into_iter().map(|[x, y, r, big_r]| (x, y, r, big_r)).collect(),
            quads,
            quad_rows: count_or("quad_rows", 32)?,
            quad_tags,
            crossing_samples: count_or("crossing_samples", 1000)?,
            curves: count_or("curves", 10)?,
            seed,
        };
        if cfg.samples < 100 {
            return Err(invalid("samples", "at least 100 samples are needed for the statistics"));
        }
        if kappa_window.1 > t_max {
            return Err(invalid("kappa_window", "upper end exceeds t_max"));
        }
        if !cfg.quads.is_empty() && cfg.crossing_samples < 100 {
            return Err(invalid("crossing_samples", "at least 100"));
        }
        if !cfg.quads.is_empty() && cfg.quad_rows < 2 {
            return Err(invalid("quad_rows", "at least 2"));
        }
        Ok(cfg)
    }

    /// Domain described by the config.
    pub fn domain(&self) -> Result<DiscreteDomain, ConfigError> {
        DiscreteDomain::build(self.shape, self.mesh, self.a, self.b).map_err(|e| invalid("mesh", e.to_string()))
    }

    fn reference_kappa(&self) -> f64 {
        match self.model {
            ModelKind::Spin => 3.0,
            ModelKind::Fk => 16.0 / 3.0,
            ModelKind::SyntheticSle => self.kappa.unwrap_or(0.0),
        }
    }
}

/// Everything an experiment produced, before it is written out.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub ensemble: DriveEnsemble,
    pub kappa: crate::stats::KappaEstimate,
    pub stats: Vec<StatRow>,
    pub crossings: Vec<CrossingRow>,
    pub annuli: Vec<(AnnulusSpec, usize, usize)>,
    pub extraction_failures: usize,
    pub files: BTreeMap<PathBuf, String>,
}

fn fmt_drive_grid(ens: &DriveEnsemble) -> String {
    let mut out = String::from("drive,t,w\n");
    for (i, d) in ens.drives().iter().enumerate() {
        for &t in ens.t_grid() {
            let _ = writeln!(out, "{i},{t},{}", d.value_at(t));
        }
    }
    out
}

fn runtime(e: impl std::fmt::Display) -> RunError {
    RunError::Runtime(e.to_string())
}

/// Runs the configured pipeline. Deterministic in `(config, seed)` whatever
/// the size of the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let mut files = BTreeMap::new();
    let mut failures = 0;
    let mut annulus_rows = Vec::new();
    let (ensemble, kappa_tag) = match cfg.model {
        ModelKind::SyntheticSle => {
            let kappa = cfg.kappa.unwrap_or(0.0);
            let drives = synthetic_drives(kappa, cfg.samples, cfg.t_max, cfg.synthetic_steps, cfg.seed);
            for (i, d) in drives.iter().take(cfg.curves).enumerate() {
                files.insert(PathBuf::from(format!("curves/drive_{i:03}.csv")), d.to_csv());
                files.insert(PathBuf::from(format!("curves/trace_{i:03}.csv")), trace_curve(d, 400).to_csv());
            }
            (DriveEnsemble::new(drives, Model::SyntheticSle { kappa }).map_err(runtime)?, kappa)
        }
        ModelKind::Spin | ModelKind::Fk => {
            let domain = Arc::new(cfg.domain()?);
            let handle = UniformizerHandle::for_domain(&domain).map_err(|e| invalid("shape", e.to_string()))?;
            let sampler = if cfg.model == ModelKind::Spin { Sampler::Spin(cfg.spin_algorithm) } else { Sampler::Fk(cfg.fk_algorithm) };
            let plan = ChainPlan { samples: cfg.samples, chains: cfg.chains, burn_in: cfg.burn_in, decorrelation: cfg.decorrelation };
            let curves = sample_interfaces(&domain, sampler, &plan, cfg.seed);
            let mut drives: Vec<DrivingFunction<f64>> = Vec::with_capacity(curves.len());
            for (i, r) in drives_from_interfaces(&curves, &domain, &handle, cfg.t_max).into_iter().enumerate() {
                match r {
                    Ok(d) => {
                        if drives.len() < cfg.curves {
                            let mut csv = String::from("x,y\n");
                            for &p in curves[i].points() {
                                let (x, y) = domain.to_physical(p);
                                let _ = writeln!(csv, "{x},{y}");
                            }
                            files.insert(PathBuf::from(format!("curves/curve_{i:03}.csv")), csv);
                            files.insert(PathBuf::from(format!("curves/drive_{i:03}.csv")), d.to_csv());
                        }
                        drives.push(d)
                    }
                    Err(_) => failures += 1,
                }
            }
            if drives.len() < 100 {
                return Err(RunError::Runtime(format!("only {} of {} interfaces gave a driving function", drives.len(), curves.len())));
            }
            for &(x, y, r, big_r) in &cfg.annuli {
                let ann = AnnulusSpec::new((x, y), r, big_r).map_err(|e| invalid("annuli", e.to_string()))?;
                let mut hits = 0;
                for c in &curves {
                    if detect_unforced_crossing(c, &domain, &ann).map_err(|e| invalid("annuli", e.to_string()))? {
                        hits += 1;
                    }
                }
                annulus_rows.push((ann, hits, curves.len()));
            }
            let model = if cfg.model == ModelKind::Spin { Model::Spin } else { Model::Fk };
            let ens = DriveEnsemble::new(drives, model).map_err(runtime)?.with_mesh(cfg.mesh).with_handle(handle);
            (ens, cfg.reference_kappa())
        }
    };
    if ensemble.horizon() < cfg.kappa_window.1 {
        return Err(RunError::Runtime(format!("common horizon {} is shorter than the kappa window", ensemble.horizon())));
    }
    let kappa = estimate_kappa(&ensemble, cfg.kappa_window).map_err(runtime)?;
    let mut stats = vec![StatRow {
        stat: "kappa".into(),
        t1: cfg.kappa_window.0,
        t2: cfg.kappa_window.1,
        value: kappa.kappa,
        stderr: kappa.stderr,
        n: ensemble.len(),
    }];
    let horizon = ensemble.horizon();
    if ensemble.len() >= 200 {
        let pairs = [(0.1 * horizon, 0.3 * horizon), (0.3 * horizon, 0.6 * horizon), (0.6 * horizon, 0.9 * horizon)];
        for r in test_increment_normality(&ensemble, &pairs).map_err(runtime)? {
            stats.push(StatRow { stat: "ks".into(), t1: r.t1, t2: r.t2, value: r.statistic, stderr: r.p_value, n: r.n });
        }
        let mut functionals = vec![Functional::W, Functional::WSquaredMinus3t];
        if let Some(h) = ensemble.handle() {
            for &(x, y) in &cfg.observable_points {
                let z = Complex::new(x, y);
                observable_horizon(z, h).map_err(|e| invalid("observable_points", e.to_string()))?;
                functionals.push(Functional::ObservableRe(z));
                functionals.push(Functional::ObservableIm(z));
            }
        }
        for f in functionals {
            let (t1s, t2s): (Vec<f64>, Vec<f64>) = match f {
                Functional::ObservableRe(z) | Functional::ObservableIm(z) => {
                    let cap = observable_horizon(z, ensemble.handle().unwrap()).map_err(runtime)?.min(horizon);
                    (vec![0.0], vec![cap / 4.0, cap / 2.0])
                }
                _ => (cfg.martingale_t1.clone(), cfg.martingale_t2.clone()),
            };
            for &t1 in &t1s {
                for &t2 in &t2s {
                    if t1 >= t2 {
                        continue;
                    }
                    let r = martingale_deviation(&ensemble, f, t1, t2).map_err(runtime)?;
                    stats.push(StatRow { stat: format!("mart:{f}"), t1, t2, value: r.deviation, stderr: r.stderr, n: r.n });
                }
            }
        }
    }
    for t in [0.05 * horizon / 0.25, 0.2 * horizon / 0.25] {
        let m = exp_moment(&ensemble, cfg.exp_eps, t).map_err(runtime)?;
        stats.push(StatRow { stat: format!("exp_moment:{}", cfg.exp_eps), t1: t, t2: t, value: m.estimate, stderr: m.stderr, n: m.n });
    }

    let mut crossings = Vec::new();
    for (qi, &ell) in cfg.quads.iter().enumerate() {
        let rows = cfg.quad_rows;
        let m = ((ell * rows as f64).round() as usize).max(2);
        let quad = DiscreteQuad::grid(m, rows - 1, BoundaryTags::ALL_FREE).map_err(|e| invalid("quads", e.to_string()))?;
        let l_d = discrete_extremal_length(&quad).map_err(runtime)?;
        for (ti, &tags) in cfg.quad_tags.iter().enumerate() {
            let mut rng = stream(cfg.seed, purpose::CROSSING + (qi * 64 + ti) as u64);
            let result = crossing_probability_experiment(&quad, tags, cfg.crossing_samples, &mut rng).map_err(runtime)?;
            crossings.push(CrossingRow { quad_id: format!("q{qi}"), l_d, bc: tags, result });
        }
    }

    let profile = ensemble.variance_profile();
    let reference: Vec<(f64, f64)> = profile.iter().map(|&(t, _)| (t, kappa_tag * t)).collect();
    let mut variance = String::from("t,variance,reference\n");
    for (&(t, v), &(_, r)) in profile.iter().zip(&reference) {
        let _ = writeln!(variance, "{t},{v},{r}");
    }
    let summary = format!(
        "kappa = {}\nstderr = {}\nintercept = {}\nwindow = {}, {}\ngrid_points = {}\ndrives = {}\nextraction_failures = {}\nmodel = {}\nreference_kappa = {}\nhorizon = {}\n",
        kappa.kappa,
        kappa.stderr,
        kappa.intercept,
        cfg.kappa_window.0,
        cfg.kappa_window.1,
        kappa.grid_points,
        ensemble.len(),
        failures,
        ensemble.model(),
        kappa_tag,
        horizon
    );
    let mut annuli_csv = String::from("x0,y0,r,R,frequency,stderr,n\n");
    for (a, hits, n) in &annulus_rows {
        let f = *hits as f64 / *n as f64;
        let _ = writeln!(annuli_csv, "{},{},{},{},{},{},{}", a.center.0, a.center.1, a.r, a.big_r, f, (f * (1.0 - f) / *n as f64).sqrt(), n);
    }
    let svg = line_chart(
        &format!("Var(W_t), {}", ensemble.model()),
        "t",
        "Var(W_t)",
        &[
            Series { label: "sample variance", color: "#1f4e9c", points: &profile, dashed: false },
            Series { label: &format!("{kappa_tag:.4} t"), color: "#b03030", points: &reference, dashed: true },
        ],
    );
    files.insert(PathBuf::from("drives.csv"), fmt_drive_grid(&ensemble));
    files.insert(PathBuf::from("variance.csv"), variance);
    files.insert(PathBuf::from("kappa.txt"), summary);
    files.insert(PathBuf::from("stats.csv"), stats_csv(&stats));
    files.insert(PathBuf::from("crossings.csv"), crossings_csv(&crossings));
    files.insert(PathBuf::from("annuli.csv"), annuli_csv);
    files.insert(PathBuf::from("plots/variance.svg"), svg);
    Ok(ExperimentOutput { ensemble, kappa, stats, crossings, annuli: annulus_rows, extraction_failures: failures, files })
}

/// Writes the output files under `dir`.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir.join("curves"))?;
    fs::create_dir_all(dir.join("plots"))?;
    for (path, body) in &out.files {
        fs::write(dir.join(path), body)?;
    }
    Ok(())
}

/// Loads the config at `path`, applies the seed override and runs it on a
/// pool of `workers` threads.
pub fn run_from_file(path: &Path, out_dir: &Path, seed: Option<u64>, workers: Option<usize>) -> Result<ExperimentOutput, RunError> {
    let text = fs::read_to_string(path).map_err(|e| invalid("--config", format!("{}: {e}", path.display())))?;
    let mut pairs = parse_pairs(&text)?;
    if let Some(s) = seed {
        pairs.insert("seed".into(), s.to_string());
    }
    let cfg = ExperimentConfig::from_pairs(&pairs)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(runtime)?;
    let out = pool.install(|| run_experiment(&cfg))?;
    write_outputs(&out, out_dir)?;
    Ok(out)
}
