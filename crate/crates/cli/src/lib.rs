//! Batch commands over NC measure specs. Every command returns a [`Report`]
//! carrying the library version, a hash of the configuration and the spec
//! file, every tolerance used, and a list of named checks.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nclebesgue::classical::compare_to_pencil;
use nclebesgue::freemonoid::enumerate_words;
use nclebesgue::gns::{diagnostics, gns_space, wandering_test};
use nclebesgue::lebesgue::{
    classify_with, decompose, default_threshold, Verdict, DEFAULT_VERDICT_TOL,
};
use nclebesgue::linalg::{op_norm, CMat};
use nclebesgue::ncmeasure::{from_scalar_point, positivity_check, MomentTable};
use nclebesgue::spec::{MeasureKind, MeasureSpec};
use nclebesgue::transforms::{cayley_to_schur, herglotz_eval, MatrixPoint};
use nclebesgue::{Error, Word, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Moments,
    Positivity,
    Gns,
    Herglotz,
    Decompose,
    Classify,
    Example8,
    Convergence,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Positivity => "positivity",
            Command::Gns => "gns",
            Command::Herglotz => "herglotz",
            Command::Decompose => "decompose",
            Command::Classify => "classify",
            Command::Example8 => "example8",
            Command::Convergence => "convergence",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub spec: Option<PathBuf>,
    pub level: Option<usize>,
    pub depth: Option<usize>,
    pub out_depth: Option<usize>,
    pub threshold: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub samples: usize,
    pub schedule: Option<Vec<usize>>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            spec: None,
            level: None,
            depth: None,
            out_depth: None,
            threshold: None,
            tol: None,
            out: None,
            seed: 0,
            samples: 100,
            schedule: None,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or an unreadable or malformed spec: exit code 2.
    Usage(String),
    /// A library failure while running a check: exit code 1.
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Spec(_)
            | Error::Io(_)
            | Error::InvalidParameter(_)
            | Error::InvalidWord(..)
            | Error::LetterOutOfRange { .. }
            | Error::DepthExceeded { .. }
            | Error::NotRowContraction(_)
            | Error::NegativeDensity { .. } => CliError::Usage(e.to_string()),
            other => CliError::Run(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

impl Check {
    /// Passes when `value ≤ bound`.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= bound,
            value,
            bound,
            detail: String::new(),
        }
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= bound,
            value,
            bound,
            detail: String::new(),
        }
    }

    pub fn flag(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            bound: 1.0,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub result: Value,
    pub status: Status,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }
}

struct Builder {
    tolerances: BTreeMap<String, f64>,
    checks: Vec<Check>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    fn tol(&mut self, name: &str, v: f64) -> f64 {
        self.tolerances.insert(name.into(), v);
        v
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn finish(self, config: &RunConfig, spec_text: Option<&str>, result: Value) -> CliResult<Report> {
        let status = if self.checks.iter().all(|c| c.passed) {
            Status::Pass
        } else {
            Status::Fail
        };
        let report = Report {
            command: config.command.name().into(),
            version: VERSION.into(),
            config_hash: config_hash(config, spec_text),
            config: config.clone(),
            seed: config.seed,
            tolerances: self.tolerances,
            checks: self.checks,
            result,
            status,
        };
        if let Some(dir) = &config.out {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            write_file(dir, "report.json", text.as_bytes())?;
        }
        Ok(report)
    }
}

/// SHA-256 over the serialized configuration and the spec file contents.
pub fn config_hash(config: &RunConfig, spec_text: Option<&str>) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config).expect("config serializes"));
    if let Some(t) = spec_text {
        h.update(t.as_bytes());
    }
    hex::encode(h.finalize())
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn load_spec(config: &RunConfig) -> CliResult<(MeasureSpec, String)> {
    let path = config
        .spec
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("{} needs --spec", config.command.name())))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let spec = MeasureSpec::from_json(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok((spec, text))
}

fn validate(config: &RunConfig, level: usize) -> CliResult<()> {
    if level == 0 {
        return Err(CliError::Usage("--level must be at least 1".into()));
    }
    if let Some(k) = config.out_depth {
        if k + 1 > level {
            return Err(CliError::Usage(format!(
                "--out-depth {k} must be at most level − 1 = {}",
                level - 1
            )));
        }
    }
    if let Some(t) = config.threshold {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Usage(format!("--threshold {t} outside (0, 1)")));
        }
    }
    Ok(())
}

pub fn run(config: &RunConfig) -> CliResult<Report> {
    match config.command {
        Command::Moments => cmd_moments(config),
        Command::Positivity => cmd_positivity(config),
        Command::Gns => cmd_gns(config),
        Command::Herglotz => cmd_herglotz(config),
        Command::Decompose => cmd_decompose(config),
        Command::Classify => cmd_classify(config),
        Command::Example8 => cmd_example8(config),
        Command::Convergence => cmd_convergence(config),
    }
}

fn table_csv(mu: &MomentTable) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    mu.write_csv(&mut buf, mu.dense_rows_at_most(65536))?;
    Ok(buf)
}

/// Writes the moment table of the spec. Without `--out` the CSV goes to
/// stdout and the report to stderr.
pub fn cmd_moments(config: &RunConfig) -> CliResult<Report> {
    let (spec, text) = load_spec(config)?;
    let depth = config.depth.unwrap_or(spec.depth);
    let mu = spec.build_to(depth)?;
    let csv = table_csv(&mu)?;
    let csv_path = match &config.out {
        Some(dir) => Some(write_file(dir, "moments.csv", &csv)?),
        None => {
            print!("{}", String::from_utf8_lossy(&csv));
            None
        }
    };
    let result = json!({
        "d": mu.d(),
        "depth": mu.depth(),
        "mass": mu.mass(),
        "nonzero": mu.nnz(),
        "csv": csv_path,
    });
    Builder::new().finish(config, Some(&text), result)
}

fn level_of(config: &RunConfig, spec: &MeasureSpec) -> usize {
    config.level.unwrap_or(spec.level())
}

pub fn cmd_positivity(config: &RunConfig) -> CliResult<Report> {
    let (spec, text) = load_spec(config)?;
    let level = level_of(config, &spec);
    validate(config, level)?;
    let mut b = Builder::new();
    let tol = b.tol("min_eigenvalue", config.tol.unwrap_or(1e-10));
    let mu = spec.build_to(level.max(spec.depth))?;
    let r = positivity_check(&mu, level, tol)?;
    b.push(Check::at_least("min_eigenvalue", r.min_eigenvalue, -tol));
    let result = json!({ "level": level, "min_eigenvalue": r.min_eigenvalue, "is_positive": r.is_positive });
    b.finish(config, Some(&text), result)
}

pub fn cmd_gns(config: &RunConfig) -> CliResult<Report> {
    let (spec, text) = load_spec(config)?;
    let level = level_of(config, &spec);
    validate(config, level)?;
    let mut b = Builder::new();
    let tol = b.tol("isometry_defect", config.tol.unwrap_or(1e-10));
    let mu = spec.build_to(level.max(spec.depth))?;
    let space = gns_space(&mu, level, None)?;
    let diag = diagnostics(&space)?;
    b.push(Check::at_most("isometry_defect", diag.isometry_defect, tol));
    let result = json!({ "level": level, "diagnostics": diag });
    b.finish(config, Some(&text), result)
}

/// A random point of `𝔹^d_1` with row norm below `radius`.
pub fn random_scalar_point(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<C64> {
    let raw: Vec<C64> = (0..d)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    let r = radius * rng.random_range(0.0..1.0);
    raw.into_iter().map(|z| z * (r / norm)).collect()
}

/// A random `d`-tuple of `n × n` matrices with row norm below `radius`.
pub fn random_matrix_point(rng: &mut ChaCha8Rng, d: usize, n: usize, radius: f64) -> MatrixPoint {
    let mats: Vec<CMat> = (0..d)
        .map(|_| {
            CMat::from_fn(n, n, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
        })
        .collect();
    let raw = MatrixPoint::new(mats.clone()).expect("square matrices");
    let s = radius * rng.random_range(0.0..1.0) / raw.row_norm().max(1e-300);
    MatrixPoint::new(mats.into_iter().map(|m| m * faer::Scale(C64::new(s, 0.0))).collect())
        .expect("square matrices")
}

/// Herglotz values at random scalar points and a Schur-class sweep of the
/// Cayley transform at random `2 × 2` points.
pub fn cmd_herglotz(config: &RunConfig) -> CliResult<Report> {
    let (spec, text) = load_spec(config)?;
    let m = config.depth.unwrap_or(spec.depth);
    let mu = spec.build_to(m)?;
    let mut b = Builder::new();
    let tol = b.tol("contractivity", config.tol.unwrap_or(1e-9));
    let radius = b.tol("sample_radius", 0.9);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut values = Vec::new();
    let mut worst_re = f64::INFINITY;
    for _ in 0..config.samples {
        let z = random_scalar_point(&mut rng, mu.d(), radius);
        let h = herglotz_eval(&mu, &MatrixPoint::scalar(&z)?, m)?;
        let v = h.value[(0, 0)];
        worst_re = worst_re.min(v.re + h.tail_bound);
        values.push(json!({ "z": z, "value": v, "tail_bound": h.tail_bound }));
    }
    let mut worst_norm: f64 = 0.0;
    for _ in 0..config.samples {
        let z = random_matrix_point(&mut rng, mu.d(), 2, radius);
        worst_norm = worst_norm.max(op_norm(&cayley_to_schur(&mu, &z, m)?)?);
    }
    b.push(Check::at_most("real_part_nonnegative", -worst_re, 0.0));
    b.push(Check::at_most("schur_contractive", worst_norm, 1.0 + tol));
    let result = json!({ "truncation": m, "samples": values, "max_schur_norm": worst_norm });
    b.finish(config, Some(&text), result)
}

fn decomposition_setup(config: &RunConfig, spec: &MeasureSpec) -> CliResult<(usize, usize, f64)> {
    let level = level_of(config, spec);
    validate(config, level)?;
    let out_depth = config.out_depth.unwrap_or(level - 1);
    let threshold = config.threshold.unwrap_or_else(|| default_threshold(level));
    Ok((level, out_depth, threshold))
}

pub fn cmd_decompose(config: &RunConfig) -> CliResult<Report> {
    let (spec, text) = load_spec(config)?;
    let (level, out_depth, threshold) = decomposition_setup(config, &spec)?;
    let mut b = Builder::new();
    b.tol("threshold", threshold);
    let verdict_tol = b.tol("verdict_mass", config.tol.unwrap_or(DEFAULT_VERDICT_TOL));
    let mu = spec.build_to(level.max(spec.depth))?;
    let dec = decompose(&mu, level, threshold, out_depth)?;
    let space = gns_space(&mu, level, None)?;
    let class = classify_with(&mu, &dec, &space, verdict_tol)?;
    let ac_min = positivity_check(&dec.mu_ac, out_depth, 0.0)?.min_eigenvalue;
    let s_min = positivity_check(&dec.mu_s, out_depth, 0.0)?.min_eigenvalue;
    if let Some(dir) = &config.out {
        write_file(dir, "mu_ac.csv", &table_csv(&dec.mu_ac)?)?;
        write_file(dir, "mu_s.csv", &table_csv(&dec.mu_s)?)?;
        let mut buf = Vec::new();
        dec.write_spectrum_csv(&mut buf)?;
        write_file(dir, "spectrum.csv", &buf)?;
    }
    let head: Vec<f64> = dec.pencil_spectrum.iter().take(16).copied().collect();
    let result = json!({
        "level": level,
        "out_depth": out_depth,
        "threshold": threshold,
        "singular_rank": dec.singular_rank,
        "pencil_spectrum_head": head,
        "classification": class,
        "mu_ac_min_eigenvalue": ac_min,
        "mu_s_min_eigenvalue": s_min,
    });
    b.finish(config, Some(&text), result)
}

pub fn cmd_classify(config: &RunConfig) -> CliResult<Report> {
    let (spec, text) = load_spec(config)?;
    let (level, _, threshold) = decomposition_setup(config, &spec)?;
    let mut b = Builder::new();
    b.tol("threshold", threshold);
    let verdict_tol = b.tol("verdict_mass", config.tol.unwrap_or(DEFAULT_VERDICT_TOL));
    let mu = spec.build_to(level.max(spec.depth))?;
    let dec = decompose(&mu, level, threshold, 0)?;
    let space = gns_space(&mu, level, None)?;
    let class = classify_with(&mu, &dec, &space, verdict_tol)?;
    b.finish(config, Some(&text), json!({ "level": level, "classification": class }))
}

/// Error-by-level of the pencil against the analytic split of a `d = 1`
/// circle measure.
pub fn cmd_convergence(config: &RunConfig) -> CliResult<Report> {
    let (spec, text) = load_spec(config)?;
    let classical = match &spec.measure {
        MeasureKind::Classical(c) if spec.d == 1 => c.clone(),
        _ => return Err(CliError::Usage("convergence needs a d = 1 classical spec".into())),
    };
    let schedule = config.schedule.clone().unwrap_or_else(|| vec![8, 16, 32, 64]);
    for &n in &schedule {
        validate(config, n)?;
    }
    let mut b = Builder::new();
    let slack = b.tol("monotone_slack", config.tol.unwrap_or(1e-12));
    let report = compare_to_pencil(&classical, &schedule, config.threshold, config.out_depth)?;
    if let Some(dir) = &config.out {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_file(dir, "error_by_N.csv", &buf)?;
    }
    b.push(Check::flag(
        "error_monotone",
        report.is_monotone(slack),
        format!("{:?}", report.error_by_n),
    ));
    b.finish(config, Some(&text), serde_json::to_value(&report).expect("serializes"))
}

/// Per-item outcome of the dilation-type example.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Example8Grid {
    pub z1: f64,
    pub herglotz: C64,
    pub herglotz_error: f64,
    pub tail_bound: f64,
    pub cayley_error: f64,
    pub cayley_bound: f64,
}

/// The point mass at `(1, 0)` for `d = 2`: moment table, wandering vector,
/// Cuntz and column-extreme statistics, Herglotz and Cayley values on a grid
/// and the decomposition verdict with its mass trend.
pub fn cmd_example8(config: &RunConfig) -> CliResult<Report> {
    let n = config.level.unwrap_or(8);
    let m = config.depth.unwrap_or(60);
    validate(config, n)?;
    if n < 2 {
        return Err(CliError::Usage("example8 needs --level ≥ 2".into()));
    }
    let mut b = Builder::new();
    let moment_tol = b.tol("moments", 0.0);
    let wandering_tol = b.tol("wandering", 1e-12);
    let cuntz_tol = b.tol("cuntz_defect", 1e-8);
    let distance_tol = b.tol("column_extreme_distance", 1e-8);
    let roundoff = b.tol("herglotz_roundoff", 1e-12);
    let cayley_tol = b.tol("cayley", 1e-8);
    let ac_bound = b.tol("ac_mass", 0.1);
    let threshold = config.threshold.unwrap_or_else(|| default_threshold(n));
    b.tol("threshold", threshold);
    let verdict_tol = b.tol("verdict_mass", DEFAULT_VERDICT_TOL);

    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mu = from_scalar_point(&[one, zero], n.max(m))?;

    // moments are 1 on words free of the letter 2 and 0 otherwise
    let moment_err = enumerate_words(2, n)
        .iter()
        .map(|w| {
            let expected = if w.contains(2) { zero } else { one };
            (mu.moment(w) - expected).norm()
        })
        .fold(0.0, f64::max);
    b.push(Check::at_most("moment_table", moment_err, moment_tol));

    let space = gns_space(&mu.truncate(n), n, None)?;
    let iso = space.row_isometry()?;
    let v = space.class_of(&Word::letter(2)).expect("level ≥ 1");
    let wander = wandering_test(&iso, &v, n - 1, wandering_tol)?;
    b.push(Check::at_most("wandering_word2", wander.max_violation, wandering_tol));
    let cuntz = iso.cuntz_defect()?;
    b.push(Check::at_most("cuntz_defect", cuntz, cuntz_tol));
    let distance = space.column_extreme_distance()?;
    b.push(Check::at_most("column_extreme_distance", distance, distance_tol));

    let mut grid = Vec::new();
    let (mut h_ok, mut b_ok) = (true, true);
    for i in 0..20 {
        let x = -0.9 + 1.8 * i as f64 / 19.0;
        let z = MatrixPoint::scalar(&[C64::new(x, 0.0), zero])?;
        let h = herglotz_eval(&mu, &z, m)?;
        let hv = h.value[(0, 0)];
        let herglotz_error = (hv - C64::new((1.0 + x) / (1.0 - x), 0.0)).norm();
        h_ok &= herglotz_error <= h.tail_bound + roundoff;
        let bz = cayley_to_schur(&mu, &z, m)?[(0, 0)];
        let cayley_error = (bz - C64::new(x, 0.0)).norm();
        // B = 1 − 2/(H + 1) moves by at most 2δ/(|H+1|(|H+1| − δ))
        let s = (hv + 1.0).norm();
        let cayley_bound = cayley_tol + 2.0 * h.tail_bound / (s * (s - h.tail_bound));
        b_ok &= cayley_error <= cayley_bound;
        grid.push(Example8Grid {
            z1: x,
            herglotz: hv,
            herglotz_error,
            tail_bound: h.tail_bound,
            cayley_error,
            cayley_bound,
        });
    }
    let worst_h = grid.iter().map(|g| g.herglotz_error - g.tail_bound).fold(f64::MIN, f64::max);
    let worst_b = grid.iter().map(|g| g.cayley_error - g.cayley_bound).fold(f64::MIN, f64::max);
    b.push(Check {
        name: "herglotz_grid".into(),
        passed: h_ok,
        value: worst_h,
        bound: roundoff,
        detail: "max of |H − (1+z₁)/(1−z₁)| − tail_bound over 20 points".into(),
    });
    b.push(Check {
        name: "cayley_grid".into(),
        passed: b_ok,
        value: worst_b,
        bound: 0.0,
        detail: "max of |B − z₁| − (1e−8 + propagated tail) over 20 points".into(),
    });

    let mut trend = Vec::new();
    let levels: Vec<usize> = (4..=n).step_by(2).collect();
    let levels = if levels.is_empty() { vec![n] } else { levels };
    for &k in &levels {
        let th = if k == n { threshold } else { default_threshold(k) };
        let dec = decompose(&mu.truncate(k), k, th, 0)?;
        trend.push((k, dec.ac_mass()));
    }
    let dec = decompose(&mu.truncate(n), n, threshold, n - 1)?;
    let class = classify_with(&mu, &dec, &space, verdict_tol)?;
    b.push(Check::flag(
        "decompose_verdict",
        class.verdict == Verdict::Singular,
        class.verdict.to_string(),
    ));
    b.push(Check::at_most("ac_mass", class.ac_mass.abs(), ac_bound));
    let monotone = trend.windows(2).all(|w| w[1].1.abs() <= w[0].1.abs());
    b.push(Check::flag("ac_mass_non_increasing", monotone, format!("{trend:?}")));

    let result = json!({
        "level": n,
        "truncation": m,
        "moment_error": moment_err,
        "wandering": wander,
        "cuntz_defect": cuntz,
        "column_extreme_distance": distance,
        "grid": grid,
        "classification": class,
        "ac_mass_by_level": trend,
        "max_abs_ac_moment": dec.mu_ac.max_abs(n - 1),
    });
    b.finish(config, None, result)
}
