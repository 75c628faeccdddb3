//! The five subcommands. Each one computes everything first and then writes
//! its files from a single thread.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nfuq::param_space::DataField;
use nfuq::uq_engine::{kernel_samples_from_grid, moments, Reference};
use nfuq::{
    convergence_study, integrate, mean_field, monte_carlo_mean, solve_collocation,
    spectrum_diagnostic, Field, Linearization, SemiDiscreteSystem, SpatialDiscretization,
    TensorGrid,
};

use crate::config::{ConfigError, LinearizationState, RunConfig};
use crate::csv::{self, num};
use crate::svg::{self, Series};
use crate::CliError;

/// Files written by a command and the lines it reports.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

impl Outcome {
    fn write(&mut self, dir: &Path, name: &str, contents: String) -> Result<(), CliError> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }
}

fn discretization(cfg: &RunConfig) -> Result<Arc<SpatialDiscretization>, CliError> {
    SpatialDiscretization::for_domain(cfg.spatial_kind, cfg.n, cfg.problem.spec.domain())
        .map(Arc::new)
        .map_err(|e| {
            ConfigError::Invalid {
                field: "spatial.n".into(),
                message: e.to_string(),
            }
            .into()
        })
}

fn grid(cfg: &RunConfig, orders: &[usize], field: &str) -> Result<TensorGrid, CliError> {
    TensorGrid::new(cfg.problem.spec.params(), orders).map_err(|e| {
        ConfigError::Invalid {
            field: field.into(),
            message: e.to_string(),
        }
        .into()
    })
}

fn prepare_output(cfg: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|source| CliError::Io {
        path: cfg.output_dir.clone(),
        source,
    })
}

fn time_header(prefix: &str, times: &[f64]) -> Vec<String> {
    std::iter::once("x".to_string())
        .chain(times.iter().map(|t| format!("{prefix}(t={})", num(*t))))
        .collect()
}

/// Rows `x_i, columns[0][i], columns[1][i], ...`.
fn node_rows(xs: &[f64], columns: &[&Field]) -> Vec<Vec<String>> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            std::iter::once(num(*x))
                .chain(columns.iter().map(|c| num(c.values()[i])))
                .collect()
        })
        .collect()
}

fn field_plot(title: &str, ylabel: &str, xs: &[f64], times: &[f64], fields: &[&Field]) -> String {
    if times.len() > 1 {
        let values: Vec<Vec<f64>> = fields.iter().map(|f| f.values().to_vec()).collect();
        svg::heatmap(title, xs, times, &values)
    } else {
        let series = vec![Series {
            label: ylabel.to_string(),
            points: xs
                .iter()
                .copied()
                .zip(fields[0].values().iter().copied())
                .collect(),
        }];
        svg::line_plot(title, "x", ylabel, &series, false)
    }
}

fn fmt_point(y: &[f64]) -> String {
    let parts: Vec<String> = y.iter().map(|v| format!("{v}")).collect();
    format!("[{}]", parts.join(", "))
}

/// One deterministic realization at `stochastic.point`.
pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let y = cfg
        .resolved_point()
        .ok_or_else(|| ConfigError::Missing("stochastic.point".into()))?;
    let disc = discretization(cfg)?;
    let sys = SemiDiscreteSystem::new(&cfg.problem.spec, &disc, &y)?;
    let traj = integrate(&sys, &cfg.integrator)?;
    prepare_output(cfg)?;
    let mut out = Outcome::default();
    let states: Vec<&Field> = traj.states.iter().collect();
    if cfg.formats.csv {
        let text = csv::render(
            &time_header("u", &traj.times),
            &node_rows(disc.nodes(), &states),
        );
        out.write(&cfg.output_dir, "solution.csv", text)?;
    }
    if cfg.formats.svg {
        let title = format!("{} at y = {}", cfg.problem.spec.name(), fmt_point(&y));
        out.write(
            &cfg.output_dir,
            "solution.svg",
            field_plot(&title, "u", disc.nodes(), &traj.times, &states),
        )?;
    }
    out.summary.push(format!(
        "solved {} at y = {}: {} steps accepted, {} rejected, {} right-hand-side evaluations",
        cfg.problem.spec.name(),
        fmt_point(&y),
        traj.stats.steps_accepted,
        traj.stats.steps_rejected,
        traj.stats.rhs_evals
    ));
    Ok(out)
}

/// Collocation mean and variance fields.
pub fn cmd_uq(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let disc = discretization(cfg)?;
    let grid = grid(cfg, &cfg.orders, "stochastic.orders")?;
    let sol = solve_collocation(
        &cfg.problem.spec,
        &disc,
        &grid,
        &cfg.integrator,
        cfg.workers,
    )?;
    let moments = moments(&sol)?;
    let times = sol.output_times();
    let means: Vec<&Field> = moments.iter().map(|m| &m.mean).collect();
    let vars: Vec<&Field> = moments.iter().map(|m| &m.variance).collect();
    prepare_output(cfg)?;
    let mut out = Outcome::default();
    if cfg.formats.csv {
        out.write(
            &cfg.output_dir,
            "mean.csv",
            csv::render(
                &time_header("mean", times),
                &node_rows(disc.nodes(), &means),
            ),
        )?;
        out.write(
            &cfg.output_dir,
            "variance.csv",
            csv::render(
                &time_header("variance", times),
                &node_rows(disc.nodes(), &vars),
            ),
        )?;
    }
    if cfg.formats.svg {
        let name = cfg.problem.spec.name();
        out.write(
            &cfg.output_dir,
            "mean.svg",
            field_plot(
                &format!("{name}: mean"),
                "E[u]",
                disc.nodes(),
                times,
                &means,
            ),
        )?;
        out.write(
            &cfg.output_dir,
            "variance.svg",
            field_plot(
                &format!("{name}: variance"),
                "Var[u]",
                disc.nodes(),
                times,
                &vars,
            ),
        )?;
    }
    let last = moments.last().expect("at least one output time");
    out.summary.push(format!(
        "{} collocation nodes, n = {}: sup |mean| = {:.6e}, max variance = {:.6e} at t = {}",
        grid.total(),
        disc.len(),
        last.mean.sup_norm(),
        last.variance
            .values()
            .iter()
            .fold(0.0_f64, |a, v| a.max(*v)),
        last.time
    ));
    Ok(out)
}

/// Error sweep over spatial sizes and stochastic orders.
pub fn cmd_converge(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let points: Vec<(usize, Vec<usize>)> = cfg
        .converge_n
        .iter()
        .flat_map(|&n| cfg.converge_orders.iter().map(move |o| (n, o.clone())))
        .collect();
    for (_, o) in &points {
        grid(cfg, o, "converge.orders")?;
    }
    let exact = cfg.problem.exact_mean();
    let reference = match &exact {
        Some(f) => Reference::Exact(f),
        None => Reference::HighOrder(
            cfg.reference_orders
                .clone()
                .ok_or_else(|| ConfigError::Missing("stochastic.reference_orders".into()))?,
        ),
    };
    let record = convergence_study(
        &cfg.problem.spec,
        cfg.spatial_kind,
        &points,
        &reference,
        &cfg.integrator,
        cfg.workers,
    )?;
    prepare_output(cfg)?;
    let mut out = Outcome::default();
    let m = cfg.dims();
    if cfg.formats.csv {
        let header: Vec<String> = std::iter::once("n".to_string())
            .chain((1..=m).map(|i| format!("q_{i}")))
            .chain(["error".to_string(), "seconds".to_string()])
            .collect();
        let rows: Vec<Vec<String>> = record
            .rows
            .iter()
            .map(|r| {
                std::iter::once(r.n.to_string())
                    .chain(r.orders.iter().map(|q| q.to_string()))
                    .chain([num(r.error), num(r.seconds)])
                    .collect()
            })
            .collect();
        out.write(
            &cfg.output_dir,
            "convergence.csv",
            csv::render(&header, &rows),
        )?;
    }
    if cfg.formats.svg {
        let (series, xlabel) = if cfg.converge_orders.len() > 1 {
            let series = cfg
                .converge_n
                .iter()
                .map(|&n| Series {
                    label: format!("n = {n}"),
                    points: record
                        .rows
                        .iter()
                        .filter(|r| r.n == n)
                        .map(|r| (*r.orders.iter().max().unwrap_or(&0) as f64, r.error))
                        .collect(),
                })
                .collect();
            (series, "q")
        } else {
            let series = vec![Series {
                label: "error".into(),
                points: record.rows.iter().map(|r| (r.n as f64, r.error)).collect(),
            }];
            (series, "n")
        };
        let title = format!("{}: convergence", cfg.problem.spec.name());
        out.write(
            &cfg.output_dir,
            "convergence.svg",
            svg::line_plot(&title, xlabel, "error", &series, true),
        )?;
    }
    let kind = if exact.is_some() {
        "exact mean"
    } else {
        "reference solve"
    };
    out.summary.push(format!("errors against the {kind}:"));
    for r in &record.rows {
        out.summary.push(format!(
            "  n = {:>4}  q = {:<16}  error = {:.3e}  ({:.2} s)",
            r.n,
            format!("{:?}", r.orders),
            r.error,
            r.seconds
        ));
    }
    Ok(out)
}

/// One row of the Monte Carlo comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McRow {
    pub x: f64,
    pub collocation: f64,
    pub monte_carlo: f64,
    pub stderr: f64,
    pub z: f64,
}

/// `z = (MC − collocation) / √(stderr² + floor²)`; an exact match scores 0.
pub fn z_score(collocation: f64, monte_carlo: f64, stderr: f64, floor: f64) -> f64 {
    let diff = monte_carlo - collocation;
    if diff == 0.0 {
        return 0.0;
    }
    let scale = stderr.hypot(floor);
    if scale == 0.0 {
        f64::INFINITY.copysign(diff)
    } else {
        diff / scale
    }
}

/// Compares the collocation mean with a seeded Monte Carlo estimate.
/// Fails with a validation error when more than 1% of the nodes have
/// `|z| > 4`.
pub fn cmd_mc_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = &cfg.problem.spec;
    let disc = discretization(cfg)?;
    let grid = grid(cfg, &cfg.orders, "stochastic.orders")?;
    let sol = solve_collocation(spec, &disc, &grid, &cfg.integrator, cfg.workers)?;
    let colloc = mean_field(&sol);
    let mc = monte_carlo_mean(
        spec,
        &disc,
        &cfg.integrator,
        cfg.mc_samples,
        cfg.mc_seed,
        cfg.workers,
    )?;
    let floor = cfg.mc_noise_floor.unwrap_or(0.0);
    let rows: Vec<McRow> = disc
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let (c, m, s) = (
                colloc.values()[i],
                mc.mean.values()[i],
                mc.stderr.values()[i],
            );
            McRow {
                x,
                collocation: c,
                monte_carlo: m,
                stderr: s,
                z: z_score(c, m, s, floor),
            }
        })
        .collect();
    prepare_output(cfg)?;
    let mut out = Outcome::default();
    if cfg.formats.csv {
        let header: Vec<String> = ["x", "collocation_mean", "mc_mean", "stderr", "z"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    num(r.x),
                    num(r.collocation),
                    num(r.monte_carlo),
                    num(r.stderr),
                    num(r.z),
                ]
            })
            .collect();
        out.write(&cfg.output_dir, "mc_check.csv", csv::render(&header, &body))?;
    }
    if cfg.formats.svg {
        let series = vec![Series {
            label: "z".into(),
            points: rows.iter().map(|r| (r.x, r.z)).collect(),
        }];
        out.write(
            &cfg.output_dir,
            "mc_check.svg",
            svg::line_plot("Monte Carlo z-scores", "x", "z", &series, false),
        )?;
    }
    let outliers = rows.iter().filter(|r| !(r.z.abs() <= 4.0)).count();
    let verdict = format!(
        "{outliers} of {} nodes have |z| > 4 ({} samples, seed {}, max |z| = {:.3})",
        rows.len(),
        cfg.mc_samples,
        cfg.mc_seed,
        rows.iter().fold(0.0_f64, |a, r| a.max(r.z.abs()))
    );
    if outliers as f64 > 0.01 * rows.len() as f64 {
        return Err(CliError::Validation {
            message: format!("Monte Carlo check failed: {verdict}"),
            outcome: out,
        });
    }
    out.summary
        .push(format!("Monte Carlo check passed: {verdict}"));
    Ok(out)
}

/// Spectral abscissa of the linearized operator at each distinct kernel
/// sample of the collocation grid.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = &cfg.problem.spec;
    let disc = discretization(cfg)?;
    let grid = grid(cfg, &cfg.orders, "stochastic.orders")?;
    let samples = kernel_samples_from_grid(spec, &grid);
    let linearization = if spec.is_linear() {
        None
    } else {
        let y = cfg
            .resolved_point()
            .unwrap_or_else(|| spec.params().midpoint());
        let sys = SemiDiscreteSystem::new(spec, &disc, &y)?;
        let state = match cfg.linearization {
            LinearizationState::Initial => sys.initial_state()?,
            LinearizationState::Final => integrate(&sys, &cfg.integrator)?
                .states
                .pop()
                .expect("at least one output time"),
        };
        Some(Linearization {
            state,
            firing_params: spec.slice(DataField::Firing, &y).to_vec(),
        })
    };
    let report = spectrum_diagnostic(spec, &disc, &samples, linearization.as_ref())?;
    prepare_output(cfg)?;
    let mut out = Outcome::default();
    let w = spec.slices().kernel.len();
    if cfg.formats.csv {
        let header: Vec<String> = std::iter::once("sample".to_string())
            .chain((1..=w).map(|i| format!("y_w_{i}")))
            .chain(["max_real".to_string()])
            .collect();
        let rows: Vec<Vec<String>> = report
            .samples
            .iter()
            .enumerate()
            .map(|(k, s)| {
                std::iter::once((k + 1).to_string())
                    .chain(s.y_w.iter().map(|v| num(*v)))
                    .chain([num(s.max_real)])
                    .collect()
            })
            .collect();
        out.write(&cfg.output_dir, "spectrum.csv", csv::render(&header, &rows))?;
    }
    if cfg.formats.svg {
        let series = vec![Series {
            label: "max Re".into(),
            points: report
                .samples
                .iter()
                .enumerate()
                .map(|(k, s)| ((k + 1) as f64, s.max_real))
                .collect(),
        }];
        out.write(
            &cfg.output_dir,
            "spectrum.svg",
            svg::line_plot(
                "spectral abscissa per kernel sample",
                "sample",
                "max Re",
                &series,
                false,
            ),
        )?;
    }
    out.summary.push(format!(
        "contractive: {} (max Re λ = {})",
        if report.contractive() { "yes" } else { "no" },
        num(report.global_max)
    ));
    Ok(out)
}
