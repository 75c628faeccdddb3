//! Run configuration: a TOML file plus `--set key=value` overrides, resolved
//! into a problem, discretization choices and per-command settings.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use nfuq::model::{problem1, problem2, problem3, ring};
use nfuq::{IntegratorConfig, ProblemSpec, SpatialKind};
use serde::Deserialize;
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("missing required field `{0}`")]
    Missing(String),

    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error("unknown field `{0}`")]
    Unknown(String),

    #[error("bad override `{0}`: expected key=value with a dotted key")]
    BadOverride(String),
}

type Result<T, E = ConfigError> = std::result::Result<T, E>;

fn invalid(field: impl Into<String>, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

/// Parses a TOML document, reporting syntax errors with their location.
pub fn parse_document(text: &str, origin: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| ConfigError::Parse {
        origin: origin.to_string(),
        message: e.to_string(),
    })
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string (`--set problem.preset=ring`).
fn parse_override_value(raw: &str) -> Value {
    let raw = raw.trim();
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `key.path=value` to `table`, creating intermediate tables.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<()> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
    let parts: Vec<&str> = key.trim().split('.').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::BadOverride(spec.to_string()));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(invalid(key.trim(), "is not a table")),
        };
    }
    cur.insert(
        parts[parts.len() - 1].to_string(),
        parse_override_value(value),
    );
    Ok(())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Option<Table>,
    #[serde(default)]
    spatial: RawSpatial,
    #[serde(default)]
    stochastic: RawStochastic,
    #[serde(default)]
    integrator: RawIntegrator,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    execution: RawExecution,
    #[serde(default)]
    converge: RawConverge,
    #[serde(default)]
    mc: RawMc,
    #[serde(default)]
    spectrum: RawSpectrum,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpatial {
    kind: Option<String>,
    n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawPoint {
    Named(String),
    Values(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStochastic {
    orders: Option<Vec<usize>>,
    reference_orders: Option<Vec<usize>>,
    point: Option<RawPoint>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    rtol: Option<f64>,
    atol: Option<f64>,
    max_steps: Option<usize>,
    initial_step: Option<f64>,
    output_times: Option<Vec<f64>>,
    output_count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    formats: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawWorkers {
    Count(usize),
    Named(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExecution {
    workers: Option<RawWorkers>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConverge {
    n: Option<Vec<usize>>,
    q: Option<Vec<usize>>,
    orders: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    samples: Option<usize>,
    seed: Option<u64>,
    noise_floor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    state: Option<String>,
}

/// Which named problem family a configuration selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    Problem1,
    Problem2,
    Problem3,
    Ring,
}

impl PresetKind {
    fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "problem1" => PresetKind::Problem1,
            "problem2" => PresetKind::Problem2,
            "problem3" => PresetKind::Problem3,
            "ring" => PresetKind::Ring,
            other => {
                return Err(invalid(
                    "problem.preset",
                    format!(
                        "unknown preset `{other}` (expected problem1, problem2, problem3, ring or custom-file)"
                    ),
                ))
            }
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PresetKind::Problem1 => "problem1",
            PresetKind::Problem2 => "problem2",
            PresetKind::Problem3 => "problem3",
            PresetKind::Ring => "ring",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub preset: PresetKind,
    pub spec: ProblemSpec,
    /// Closed-form mean companion, available for unscaled Problem 1.
    pub exact: Option<problem1::Problem1Params>,
}

impl ProblemConfig {
    pub fn exact_mean(&self) -> Option<impl Fn(f64) -> f64 + Sync> {
        self.exact
            .map(|p| move |x: f64| problem1::exact_mean(x, p.time_horizon, p.alpha, p.beta))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointChoice {
    Midpoint,
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearizationState {
    Initial,
    Final,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub spatial_kind: SpatialKind,
    pub n: usize,
    pub orders: Vec<usize>,
    pub reference_orders: Option<Vec<usize>>,
    pub point: Option<PointChoice>,
    pub integrator: IntegratorConfig,
    pub output_dir: PathBuf,
    pub formats: Formats,
    /// `0` means one worker per available core.
    pub workers: usize,
    pub converge_n: Vec<usize>,
    pub converge_orders: Vec<Vec<usize>>,
    pub mc_samples: usize,
    pub mc_seed: u64,
    /// Absolute floor added in quadrature to the Monte Carlo standard error
    /// (default 0).
    pub mc_noise_floor: Option<f64>,
    pub linearization: LinearizationState,
}

impl RunConfig {
    pub fn dims(&self) -> usize {
        self.problem.spec.params().len()
    }

    /// The parameter point for single realizations.
    pub fn resolved_point(&self) -> Option<Vec<f64>> {
        self.point.as_ref().map(|p| match p {
            PointChoice::Midpoint => self.problem.spec.params().midpoint(),
            PointChoice::Values(v) => v.clone(),
        })
    }
}

/// Loads `path` (if any), applies overrides, and resolves everything.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let (mut table, base_dir) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                path: p.to_path_buf(),
                source,
            })?;
            let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (parse_document(&text, &p.display().to_string())?, dir)
        }
        None => (Table::new(), PathBuf::new()),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    resolve(table, &base_dir)
}

/// Resolves an already-parsed configuration table. Relative paths in
/// `problem.file` are taken against `base_dir`.
pub fn resolve(table: Table, base_dir: &Path) -> Result<RunConfig> {
    let raw: RawConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse {
            origin: "configuration".into(),
            message: e.message().to_string(),
        })?;
    let problem_table = raw
        .problem
        .ok_or_else(|| ConfigError::Missing("problem.preset".into()))?;
    let problem = resolve_problem(problem_table, base_dir)?;
    let m = problem.spec.params().len();
    let t_end = problem.spec.time_horizon();
    let preset = problem.preset;

    let spatial_kind = match raw.spatial.kind.as_deref() {
        None => match preset {
            PresetKind::Ring => SpatialKind::PeriodicEquispaced,
            _ => SpatialKind::Chebyshev,
        },
        Some("chebyshev") => SpatialKind::Chebyshev,
        Some("fem") => SpatialKind::FemP1,
        Some("periodic") => SpatialKind::PeriodicEquispaced,
        Some(other) => {
            return Err(invalid(
                "spatial.kind",
                format!("unknown kind `{other}` (expected chebyshev, fem or periodic)"),
            ))
        }
    };
    let ring_domain = matches!(problem.spec.domain(), nfuq::Domain::Ring { .. });
    if ring_domain != (spatial_kind == SpatialKind::PeriodicEquispaced) {
        return Err(invalid(
            "spatial.kind",
            "periodic grids go with ring domains and chebyshev/fem with intervals",
        ));
    }
    let n = raw.spatial.n.unwrap_or(match preset {
        PresetKind::Ring => 64,
        _ => 40,
    });

    let orders = raw.stochastic.orders.unwrap_or_else(|| match preset {
        PresetKind::Problem1 => vec![20],
        PresetKind::Problem2 => vec![8, 8],
        PresetKind::Problem3 => vec![4; 4],
        PresetKind::Ring => vec![2; 6],
    });
    check_orders("stochastic.orders", &orders, m)?;
    let reference_orders = match raw.stochastic.reference_orders {
        Some(r) => Some(r),
        None => match preset {
            PresetKind::Problem1 => problem.exact.is_none().then(|| vec![24]),
            PresetKind::Problem2 => Some(vec![12, 12]),
            PresetKind::Problem3 => Some(vec![8; 4]),
            PresetKind::Ring => Some(vec![4; 6]),
        },
    };
    if let Some(r) = &reference_orders {
        check_orders("stochastic.reference_orders", r, m)?;
    }
    let point = match raw.stochastic.point {
        None => None,
        Some(RawPoint::Named(s)) if s == "midpoint" => Some(PointChoice::Midpoint),
        Some(RawPoint::Named(s)) => {
            return Err(invalid(
                "stochastic.point",
                format!("expected a list or \"midpoint\", got `{s}`"),
            ))
        }
        Some(RawPoint::Values(v)) => {
            if v.len() != m {
                return Err(invalid(
                    "stochastic.point",
                    format!("has {} entries but the problem has {m} parameters", v.len()),
                ));
            }
            Some(PointChoice::Values(v))
        }
    };

    let ri = raw.integrator;
    let (rtol_default, atol_default) = match preset {
        PresetKind::Ring => (1e-9, 1e-11),
        _ => (1e-12, 1e-13),
    };
    let mut integrator = IntegratorConfig::with_tolerances(
        ri.rtol.unwrap_or(rtol_default),
        ri.atol.unwrap_or(atol_default),
    );
    if let Some(ms) = ri.max_steps {
        integrator.max_steps = ms;
    }
    integrator.initial_step = ri.initial_step;
    let output_times = match (ri.output_times, ri.output_count) {
        (Some(_), Some(_)) => {
            return Err(invalid(
                "integrator.output_times",
                "give either output_times or output_count, not both",
            ))
        }
        (Some(t), None) => t,
        (None, Some(0)) => return Err(invalid("integrator.output_count", "must be at least 1")),
        (None, Some(k)) => equispaced_times(t_end, k),
        (None, None) => match preset {
            PresetKind::Ring => equispaced_times(t_end, 40),
            _ => vec![t_end],
        },
    };
    integrator = integrator.output_times(output_times);
    integrator
        .validate(t_end)
        .map_err(|e| invalid("integrator", e))?;

    let output_dir = raw.output.directory.unwrap_or_else(|| PathBuf::from("out"));
    let formats = parse_formats(
        raw.output
            .formats
            .as_deref()
            .unwrap_or(&["csv".to_string()]),
    )?;

    let workers = match raw.execution.workers {
        None => 1,
        Some(RawWorkers::Count(0)) => {
            return Err(invalid(
                "execution.workers",
                "must be at least 1 or \"auto\"",
            ))
        }
        Some(RawWorkers::Count(k)) => k,
        Some(RawWorkers::Named(s)) if s == "auto" => 0,
        Some(RawWorkers::Named(s)) => {
            return Err(invalid(
                "execution.workers",
                format!("expected an integer or \"auto\", got `{s}`"),
            ))
        }
    };

    let converge_n = raw.converge.n.unwrap_or_else(|| vec![n]);
    if converge_n.is_empty() {
        return Err(invalid("converge.n", "must not be empty"));
    }
    let converge_orders = match (raw.converge.q, raw.converge.orders) {
        (Some(_), Some(_)) => {
            return Err(invalid("converge.q", "give either q or orders, not both"))
        }
        (Some(q), None) => q.into_iter().map(|q| vec![q; m]).collect(),
        (None, Some(o)) => o,
        (None, None) => {
            let qs: Vec<usize> = match preset {
                PresetKind::Problem1 => (1..=10).map(|k| 2 * k).collect(),
                PresetKind::Problem2 => vec![2, 4, 6, 8],
                PresetKind::Problem3 => vec![2, 4, 6],
                PresetKind::Ring => vec![1, 2, 3],
            };
            qs.into_iter().map(|q| vec![q; m]).collect()
        }
    };
    if converge_orders.is_empty() {
        return Err(invalid("converge.orders", "must not be empty"));
    }
    for o in &converge_orders {
        check_orders("converge.orders", o, m)?;
    }

    let mc_samples = raw.mc.samples.unwrap_or(2000);
    if mc_samples < 2 {
        return Err(invalid(
            "mc.samples",
            format!("needs at least 2 samples for a standard error, got {mc_samples}"),
        ));
    }
    if let Some(f) = raw.mc.noise_floor {
        if !(f >= 0.0) || !f.is_finite() {
            return Err(invalid(
                "mc.noise_floor",
                "must be a finite nonnegative number",
            ));
        }
    }

    let linearization = match raw.spectrum.state.as_deref() {
        None | Some("final") => LinearizationState::Final,
        Some("initial") => LinearizationState::Initial,
        Some(other) => {
            return Err(invalid(
                "spectrum.state",
                format!("expected initial or final, got `{other}`"),
            ))
        }
    };

    Ok(RunConfig {
        problem,
        spatial_kind,
        n,
        orders,
        reference_orders,
        point,
        integrator,
        output_dir,
        formats,
        workers,
        converge_n,
        converge_orders,
        mc_samples,
        mc_seed: raw.mc.seed.unwrap_or(12345),
        mc_noise_floor: raw.mc.noise_floor,
        linearization,
    })
}

/// `k + 1` equispaced times from 0 to `t_end`.
pub fn equispaced_times(t_end: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|j| t_end * j as f64 / k as f64).collect()
}

fn check_orders(field: &str, orders: &[usize], m: usize) -> Result<()> {
    if orders.len() != m {
        return Err(invalid(
            field,
            format!(
                "has {} entries but the problem has {m} parameters",
                orders.len()
            ),
        ));
    }
    Ok(())
}

pub fn parse_formats(list: &[String]) -> Result<Formats> {
    let mut f = Formats {
        csv: false,
        svg: false,
    };
    for item in list {
        match item.trim() {
            "csv" => f.csv = true,
            "svg" => f.svg = true,
            other => {
                return Err(invalid(
                    "output.formats",
                    format!("unknown format `{other}`"),
                ))
            }
        }
    }
    if !f.csv && !f.svg {
        return Err(invalid(
            "output.formats",
            "at least one of csv, svg is required",
        ));
    }
    Ok(f)
}

/// Reads preset-specific keys from the `[problem]` table, tracking which
/// ones were consumed so leftovers can be reported.
struct Fields {
    table: Table,
    used: BTreeSet<String>,
}

impl Fields {
    fn new(table: Table) -> Self {
        Self {
            table,
            used: BTreeSet::new(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<&Value> {
        self.used.insert(key.to_string());
        self.table.get(key)
    }

    fn number(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => {
                as_number(v).ok_or_else(|| invalid(format!("problem.{key}"), "expected a number"))
            }
        }
    }

    fn pair(&mut self, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => as_pair(v)
                .ok_or_else(|| invalid(format!("problem.{key}"), "expected a pair [a, b]")),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(invalid(format!("problem.{key}"), "expected a string")),
        }
    }

    fn finish(self) -> Result<()> {
        match self.table.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(ConfigError::Unknown(format!("problem.{k}"))),
            None => Ok(()),
        }
    }
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_pair(v: &Value) -> Option<(f64, f64)> {
    match v.as_array()?.as_slice() {
        [a, b] => Some((as_number(a)?, as_number(b)?)),
        _ => None,
    }
}

fn resolve_problem(mut table: Table, base_dir: &Path) -> Result<ProblemConfig> {
    let preset_name = match table.get("preset") {
        None => return Err(ConfigError::Missing("problem.preset".into())),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(invalid("problem.preset", "expected a string")),
    };
    if preset_name == "custom-file" {
        table = merge_problem_file(table, base_dir)?;
    } else if table.contains_key("file") {
        return Err(invalid(
            "problem.file",
            "only used with preset = \"custom-file\"",
        ));
    }
    let preset_name = table["preset"].as_str().unwrap_or_default().to_string();
    let preset = PresetKind::parse(&preset_name)?;
    let mut f = Fields::new(table);
    f.raw("preset");
    let kernel_scale = f.number("kernel_scale", 1.0)?;
    let (spec, exact) = match preset {
        PresetKind::Problem1 => {
            let d = problem1::Problem1Params::default();
            let p = problem1::Problem1Params {
                alpha: f.number("alpha", d.alpha)?,
                beta: f.number("beta", d.beta)?,
                time_horizon: f.number("T", d.time_horizon)?,
            };
            let spec = problem1::spec(p).map_err(|e| invalid("problem", e))?;
            (spec, (kernel_scale == 1.0).then_some(p))
        }
        PresetKind::Problem2 => {
            let p = problem2_params(&mut f, true)?;
            (problem2::spec(p).map_err(|e| invalid("problem", e))?, None)
        }
        PresetKind::Problem3 => {
            let base = problem2_params(&mut f, false)?;
            let d = problem3::Problem3Params::default();
            let p = problem3::Problem3Params {
                base,
                y1: f.pair("y1", d.y1)?,
                y2: f.pair("y2", d.y2)?,
                a0: f.pair("a0_range", d.a0)?,
                f0: f.pair("f0_range", d.f0)?,
            };
            (problem3::spec(p).map_err(|e| invalid("problem", e))?, None)
        }
        PresetKind::Ring => {
            let d = ring::RingParams::default();
            let mut ranges = d.ranges;
            if let Some(v) = f.raw("ranges").cloned() {
                let list = v
                    .as_array()
                    .filter(|a| a.len() == 6)
                    .ok_or_else(|| invalid("problem.ranges", "expected six pairs [a, b]"))?;
                for (slot, item) in ranges.iter_mut().zip(list) {
                    *slot = as_pair(item)
                        .ok_or_else(|| invalid("problem.ranges", "expected six pairs [a, b]"))?;
                }
            }
            let p = ring::RingParams {
                length: f.number("length", d.length)?,
                time_horizon: f.number("T", d.time_horizon)?,
                pulse_amplitude: f.number("pulse", d.pulse_amplitude)?,
                slope: f.number("slope", d.slope)?,
                threshold: f.number("threshold", d.threshold)?,
                ranges,
            };
            (ring::spec(p).map_err(|e| invalid("problem", e))?, None)
        }
    };
    f.finish()?;
    let spec = if kernel_scale == 1.0 {
        spec
    } else {
        spec.with_kernel_scale(kernel_scale)
    };
    Ok(ProblemConfig {
        preset,
        spec,
        exact,
    })
}

fn problem2_params(f: &mut Fields, with_distribution: bool) -> Result<problem2::Problem2Params> {
    let d = problem2::Problem2Params::default();
    let distribution = if with_distribution {
        match f.string("distribution")?.as_deref() {
            None | Some("uniform") => {
                let problem2::Problem2Distribution::Uniform { y1, y2 } =
                    problem2::Problem2Distribution::default_uniform()
                else {
                    unreachable!()
                };
                problem2::Problem2Distribution::Uniform {
                    y1: f.pair("y1", y1)?,
                    y2: f.pair("y2", y2)?,
                }
            }
            Some("normal") => {
                let problem2::Problem2Distribution::Normal { y1, y2 } =
                    problem2::Problem2Distribution::default_normal()
                else {
                    unreachable!()
                };
                problem2::Problem2Distribution::Normal {
                    y1: f.pair("y1", y1)?,
                    y2: f.pair("y2", y2)?,
                }
            }
            Some(other) => {
                return Err(invalid(
                    "problem.distribution",
                    format!("expected uniform or normal, got `{other}`"),
                ))
            }
        }
    } else {
        d.distribution
    };
    Ok(problem2::Problem2Params {
        sigma_w: f.number("sigma_w", d.sigma_w)?,
        a0: if with_distribution {
            f.number("a0", d.a0)?
        } else {
            d.a0
        },
        a1: f.number("a1", d.a1)?,
        omega_a: f.number("omega_a", d.omega_a)?,
        f0: if with_distribution {
            f.number("f0", d.f0)?
        } else {
            d.f0
        },
        mu: f.number("mu", d.mu)?,
        h: f.number("h", d.h)?,
        omega_g: f.number("omega_g", d.omega_g)?,
        sigma_g: f.number("sigma_g", d.sigma_g)?,
        half_width: f.number("half_width", d.half_width)?,
        time_horizon: f.number("T", d.time_horizon)?,
        distribution,
    })
}

/// `custom-file`: the named file holds a `[problem]` table (or a bare one)
/// with a built-in preset; keys given alongside `file` override it.
fn merge_problem_file(table: Table, base_dir: &Path) -> Result<Table> {
    let file = match table.get("file") {
        Some(Value::String(s)) => base_dir.join(s),
        Some(_) => return Err(invalid("problem.file", "expected a path string")),
        None => return Err(ConfigError::Missing("problem.file".into())),
    };
    let text = std::fs::read_to_string(&file).map_err(|source| ConfigError::Read {
        path: file.clone(),
        source,
    })?;
    let mut doc = parse_document(&text, &file.display().to_string())?;
    let mut base = match doc.remove("problem") {
        Some(Value::Table(t)) => t,
        Some(_) => {
            return Err(invalid(
                "problem.file",
                "[problem] in the included file is not a table",
            ))
        }
        None => doc,
    };
    match base.get("preset").and_then(Value::as_str) {
        Some("custom-file") => {
            return Err(invalid(
                "problem.file",
                "included file must name a built-in preset",
            ))
        }
        Some(_) => {}
        None => {
            return Err(ConfigError::Missing(format!(
                "problem.preset in {}",
                file.display()
            )))
        }
    }
    for (k, v) in table {
        if k != "preset" && k != "file" {
            base.insert(k, v);
        }
    }
    Ok(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Result<RunConfig> {
        resolve(parse_document(text, "test").unwrap(), Path::new("."))
    }

    #[test]
    fn defaults_per_preset() {
        let c = cfg("[problem]\npreset = \"problem1\"").unwrap();
        assert_eq!(c.n, 40);
        assert_eq!(c.orders, vec![20]);
        assert_eq!(c.spatial_kind, SpatialKind::Chebyshev);
        assert!(c.problem.exact.is_some());
        assert_eq!(c.reference_orders, None);
        assert_eq!(c.integrator.rtol, 1e-12);
        assert_eq!(c.workers, 1);

        let r = cfg("[problem]\npreset = \"ring\"").unwrap();
        assert_eq!(r.n, 64);
        assert_eq!(r.orders, vec![2; 6]);
        assert_eq!(r.spatial_kind, SpatialKind::PeriodicEquispaced);
        assert_eq!(r.integrator.output_times.len(), 41);
    }

    #[test]
    fn missing_preset_is_named() {
        let e = cfg("[spatial]\nn = 10").unwrap_err();
        assert!(e.to_string().contains("problem.preset"), "{e}");
        let e = cfg("[problem]\nalpha = 1.0").unwrap_err();
        assert!(e.to_string().contains("problem.preset"), "{e}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let e = cfg("[problem]\npreset = \"problem1\"\ngamma = 2").unwrap_err();
        assert!(e.to_string().contains("problem.gamma"), "{e}");
        let e = cfg("[problem]\npreset = \"problem1\"\n[spatial]\nm = 3").unwrap_err();
        assert!(e.to_string().contains('m'), "{e}");
    }

    #[test]
    fn overrides_apply_dotted_paths() {
        let mut t = parse_document("[problem]\npreset = \"problem1\"", "t").unwrap();
        apply_override(&mut t, "problem.alpha=-0.5").unwrap();
        apply_override(&mut t, "stochastic.orders=[6]").unwrap();
        apply_override(&mut t, "execution.workers=auto").unwrap();
        let c = resolve(t, Path::new(".")).unwrap();
        assert_eq!(c.problem.exact.unwrap().alpha, -0.5);
        assert_eq!(c.orders, vec![6]);
        assert_eq!(c.workers, 0);
        let mut t = Table::new();
        assert!(apply_override(&mut t, "noequals").is_err());
        assert!(apply_override(&mut t, ".a=1").is_err());
    }

    #[test]
    fn order_count_must_match_dimension() {
        let e = cfg("[problem]\npreset = \"problem2\"\n[stochastic]\norders = [3]").unwrap_err();
        assert!(e.to_string().contains("stochastic.orders"), "{e}");
    }

    #[test]
    fn problem2_normal_distribution() {
        let c = cfg("[problem]\npreset = \"problem2\"\ndistribution = \"normal\"\ny1 = [1.5, 0.1]")
            .unwrap();
        let d = &c.problem.spec.params().dims()[0].distribution;
        assert_eq!(
            *d,
            nfuq::Distribution::Normal {
                mu: 1.5,
                sigma: 0.1
            }
        );
    }

    #[test]
    fn kernel_scale_drops_exact_reference() {
        let c = cfg("[problem]\npreset = \"problem1\"\nkernel_scale = 3").unwrap();
        assert!(c.problem.exact.is_none());
        assert_eq!(c.reference_orders, Some(vec![24]));
    }

    #[test]
    fn custom_file_merges_problem_table() {
        let dir = std::env::temp_dir().join(format!("nfuq-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(
            dir.join("p.toml"),
            "[problem]\npreset = \"problem1\"\nalpha = -1.0\nbeta = 1.0\n",
        )
        .unwrap();
        let t = parse_document(
            "[problem]\npreset = \"custom-file\"\nfile = \"p.toml\"\nbeta = 0.25",
            "t",
        )
        .unwrap();
        let c = resolve(t, &dir).unwrap();
        let p = c.problem.exact.unwrap();
        assert_eq!((p.alpha, p.beta), (-1.0, 0.25));
        let t = parse_document("[problem]\npreset = \"custom-file\"", "t").unwrap();
        assert!(resolve(t, &dir)
            .unwrap_err()
            .to_string()
            .contains("problem.file"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn bad_values_are_reported() {
        assert!(cfg("[problem]\npreset = \"problem1\"\n[mc]\nsamples = 1").is_err());
        assert!(cfg("[problem]\npreset = \"problem1\"\n[spatial]\nkind = \"periodic\"").is_err());
        assert!(cfg("[problem]\npreset = \"problem1\"\n[integrator]\nrtol = -1.0").is_err());
        assert!(cfg("[problem]\npreset = \"problem1\"\n[output]\nformats = [\"png\"]").is_err());
        assert!(cfg("[problem]\npreset = \"nope\"").is_err());
        assert!(cfg("[problem]\npreset = \"problem1\"\n[stochastic]\npoint = [0.1, 0.2]").is_err());
        let c =
            cfg("[problem]\npreset = \"problem1\"\n[stochastic]\npoint = \"midpoint\"").unwrap();
        assert_eq!(c.resolved_point().unwrap(), vec![-0.75]);
        let c = cfg("[problem]\npreset = \"problem1\"\n[integrator]\noutput_count = 4").unwrap();
        assert_eq!(c.integrator.output_times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
