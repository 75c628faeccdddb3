//! Stochastic collocation on top of the spatial projection: node solves,
//! surrogate evaluation, moments, error metrics, a Monte Carlo cross-check
//! and the contractivity spectrum diagnostic.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig};
use crate::model::{ProblemSpec, SemiDiscreteSystem};
use crate::param_space::{DataField, Distribution, TensorGrid};
use crate::spatial::{Field, KernelOperator, SpatialDiscretization, SpatialKind};

/// Runs `f(0..count)` with `workers` threads (`0` = one per core, `1` =
/// sequential on the caller's thread). Results keep index order.
pub fn run_indexed<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if workers == 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

fn kernel_key(y_w: &[f64]) -> Vec<u64> {
    y_w.iter().map(|v| v.to_bits()).collect()
}

/// Kernel operators for each distinct kernel slice among `points`, assembled
/// once each. Returns the operator to use for every point.
fn kernel_operators(
    spec: &ProblemSpec,
    disc: &Arc<SpatialDiscretization>,
    points: &[Vec<f64>],
) -> Result<Vec<Arc<KernelOperator>>> {
    let mut cache: BTreeMap<Vec<u64>, Arc<KernelOperator>> = BTreeMap::new();
    points
        .iter()
        .map(|y| {
            let y_w = spec.slice(DataField::Kernel, y);
            let key = kernel_key(y_w);
            if let Some(op) = cache.get(&key) {
                return Ok(Arc::clone(op));
            }
            let op = Arc::new(spec.kernel_operator(disc, y_w)?);
            cache.insert(key, Arc::clone(&op));
            Ok(op)
        })
        .collect()
}

/// Semi-discrete solutions at every tensor-grid node, indexed by global
/// index minus one.
#[derive(Debug, Clone)]
pub struct CollocationSolution {
    grid: TensorGrid,
    disc: Arc<SpatialDiscretization>,
    output_times: Vec<f64>,
    // states[k][t]
    states: Vec<Vec<Field>>,
}

impl CollocationSolution {
    /// Wraps precomputed node states, `states[k][j]` being the state at node
    /// `k + 1` and output time `j`.
    pub fn from_states(
        grid: TensorGrid,
        disc: Arc<SpatialDiscretization>,
        output_times: Vec<f64>,
        states: Vec<Vec<Field>>,
    ) -> Result<Self> {
        if states.len() != grid.total() {
            return Err(Error::LengthMismatch {
                expected: grid.total(),
                got: states.len(),
            });
        }
        for node in &states {
            if node.len() != output_times.len() {
                return Err(Error::LengthMismatch {
                    expected: output_times.len(),
                    got: node.len(),
                });
            }
            if node.iter().any(|f| f.disc().as_ref() != disc.as_ref()) {
                return Err(Error::DiscretizationMismatch);
            }
        }
        if output_times.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one output time is required".into(),
            ));
        }
        Ok(Self {
            grid,
            disc,
            output_times,
            states,
        })
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn disc(&self) -> &Arc<SpatialDiscretization> {
        &self.disc
    }

    pub fn output_times(&self) -> &[f64] {
        &self.output_times
    }

    /// State at one-based node `k` and output-time index `time`.
    pub fn state(&self, k: usize, time: usize) -> &Field {
        &self.states[k - 1][time]
    }

    fn last_time(&self) -> usize {
        self.output_times.len() - 1
    }
}

/// Solves the projected problem at every node of `grid`.
///
/// Kernel operators are assembled once per distinct kernel slice. Node
/// results are placed by global index, so the output does not depend on
/// `workers`.
pub fn solve_collocation(
    spec: &ProblemSpec,
    disc: &Arc<SpatialDiscretization>,
    grid: &TensorGrid,
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<CollocationSolution> {
    if grid.dims() != spec.params().len() {
        return Err(Error::LengthMismatch {
            expected: spec.params().len(),
            got: grid.dims(),
        });
    }
    cfg.validate(spec.time_horizon())?;
    let nodes = crate::param_space::tensor_nodes(grid);
    let kernels = kernel_operators(spec, disc, &nodes)?;
    let states = run_indexed(workers, nodes.len(), |k| {
        let y = &nodes[k];
        let solve = || -> Result<Vec<Field>> {
            let sys = SemiDiscreteSystem::with_kernel(spec, Arc::clone(&kernels[k]), y)?;
            Ok(integrate(&sys, cfg)?.states)
        };
        solve().map_err(|e| Error::NodeSolve {
            node: k + 1,
            y: y.clone(),
            source: Box::new(e),
        })
    })?;
    CollocationSolution::from_states(
        grid.clone(),
        Arc::clone(disc),
        cfg.resolved_output_times(spec.time_horizon()),
        states,
    )
}

/// Mean and variance fields at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentField {
    pub mean: Field,
    pub variance: Field,
    pub time: f64,
}

fn weighted_mean(sol: &CollocationSolution, time: usize) -> Vec<f64> {
    let weights = sol.grid.weights();
    let mut mean = vec![0.0; sol.disc.len()];
    for (w, node) in weights.iter().zip(&sol.states) {
        for (m, u) in mean.iter_mut().zip(node[time].values()) {
            *m += w * u;
        }
    }
    mean
}

/// `Σ_k ω_k u_k` at output-time index `time`: the exact expectation of the
/// surrogate, since each Lagrange basis polynomial has degree `q_i` and the
/// `q_i + 1`-point Gauss rule integrates it exactly.
pub fn mean_field_at(sol: &CollocationSolution, time: usize) -> Result<Field> {
    if time >= sol.output_times.len() {
        return Err(Error::IndexOutOfRange {
            index: vec![time],
            orders: vec![sol.output_times.len()],
        });
    }
    Field::new(Arc::clone(&sol.disc), weighted_mean(sol, time))
}

/// Mean field at the final output time.
pub fn mean_field(sol: &CollocationSolution) -> Field {
    mean_field_at(sol, sol.last_time()).expect("final time index is valid")
}

/// `Σ_k ω_k (u_k − mean)²`, the Gauss quadrature of the surrogate's variance.
/// The centered form equals `Σ ω u² − mean²` and is nonnegative by
/// construction. Aliasing of the degree-`2q` content is not corrected.
pub fn variance_field_at(sol: &CollocationSolution, time: usize) -> Result<Field> {
    let mean = mean_field_at(sol, time)?;
    let weights = sol.grid.weights();
    let mut var = vec![0.0; sol.disc.len()];
    for (w, node) in weights.iter().zip(&sol.states) {
        for ((v, u), m) in var.iter_mut().zip(node[time].values()).zip(mean.values()) {
            let d = u - m;
            *v += w * d * d;
        }
    }
    Field::new(Arc::clone(&sol.disc), var)
}

pub fn variance_field(sol: &CollocationSolution) -> Field {
    variance_field_at(sol, sol.last_time()).expect("final time index is valid")
}

/// Mean and variance at every output time.
pub fn moments(sol: &CollocationSolution) -> Result<Vec<MomentField>> {
    (0..sol.output_times.len())
        .map(|j| {
            Ok(MomentField {
                mean: mean_field_at(sol, j)?,
                variance: variance_field_at(sol, j)?,
                time: sol.output_times[j],
            })
        })
        .collect()
}

/// Surrogate `u_{n,q}(x, T, y)`: tensor Lagrange interpolation in `y` of the
/// nodal states, then spatial interpolation at `x`.
pub fn surrogate_eval(sol: &CollocationSolution, x: f64, y: &[f64]) -> Result<f64> {
    surrogate_field(sol, y)?.evaluate(x)
}

/// The surrogate's nodal field at parameter `y` and the final time.
pub fn surrogate_field(sol: &CollocationSolution, y: &[f64]) -> Result<Field> {
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite parameter {bad}"
        )));
    }
    let basis = sol.grid.basis_weights(y)?;
    let time = sol.last_time();
    let mut values = vec![0.0; sol.disc.len()];
    for (l, node) in basis.iter().zip(&sol.states) {
        if *l == 0.0 {
            continue;
        }
        for (v, u) in values.iter_mut().zip(node[time].values()) {
            *v += l * u;
        }
    }
    Field::new(Arc::clone(&sol.disc), values)
}

/// Grid nodes plus `extra` equispaced points across the domain.
pub fn evaluation_mesh(disc: &SpatialDiscretization, extra: usize) -> Vec<f64> {
    let (a, b) = disc.domain().bounds();
    let mut mesh = disc.nodes().to_vec();
    if extra == 1 {
        mesh.push(0.5 * (a + b));
    } else if extra > 1 {
        let top = if disc.kind() == SpatialKind::PeriodicEquispaced {
            extra
        } else {
            extra - 1
        };
        mesh.extend((0..extra).map(|i| a + (b - a) * i as f64 / top as f64));
    }
    mesh
}

/// `E_{n,q} = max_x |E[u](x, T) − E[u_{n,q}](x, T)|` over the grid nodes and
/// 200 equispaced points.
pub fn error_vs_exact(sol: &CollocationSolution, exact_mean: impl Fn(f64) -> f64) -> Result<f64> {
    let mean = mean_field(sol);
    evaluation_mesh(&sol.disc, 200)
        .into_iter()
        .try_fold(0.0_f64, |acc, x| {
            Ok(acc.max((exact_mean(x) - mean.evaluate(x)?).abs()))
        })
}

/// `Ẽ_q`: sup distance between the final-time means of a solution and a
/// reference solution on the same spatial grid.
pub fn error_self(sol_q: &CollocationSolution, sol_ref: &CollocationSolution) -> Result<f64> {
    if sol_q.disc.as_ref() != sol_ref.disc.as_ref() {
        return Err(Error::DiscretizationMismatch);
    }
    mean_field(sol_q).sup_distance(&mean_field(sol_ref))
}

#[derive(Debug, Clone)]
pub struct MonteCarloEstimate {
    pub mean: Field,
    /// Nodewise sample standard deviation over `√samples`.
    pub stderr: Field,
    pub samples: usize,
}

/// Draws `samples` i.i.d. parameter points from the problem's density.
///
/// The generator is ChaCha8 seeded with `seed` via `seed_from_u64`; uniform
/// coordinates use `a + (b − a)·U[0, 1)` and normal ones `mu + sigma·Z`.
/// Draws happen sequentially in sample order.
pub fn draw_samples(spec: &ProblemSpec, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            spec.params()
                .dims()
                .iter()
                .map(|d| match d.distribution {
                    Distribution::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
                    Distribution::Normal { mu, sigma } => {
                        let z: f64 = rng.sample(StandardNormal);
                        mu + sigma * z
                    }
                })
                .collect()
        })
        .collect()
}

/// Plain Monte Carlo estimate of the final-time mean with its standard error.
pub fn monte_carlo_mean(
    spec: &ProblemSpec,
    disc: &Arc<SpatialDiscretization>,
    cfg: &IntegratorConfig,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<MonteCarloEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least two samples, got {samples}"
        )));
    }
    cfg.validate(spec.time_horizon())?;
    let points = draw_samples(spec, samples, seed);
    let kernels = kernel_operators(spec, disc, &points)?;
    let finals = run_indexed(workers, samples, |s| {
        let y = &points[s];
        let solve = || -> Result<Vec<f64>> {
            let sys = SemiDiscreteSystem::with_kernel(spec, Arc::clone(&kernels[s]), y)?;
            let traj = integrate(&sys, cfg)?;
            Ok(traj
                .states
                .last()
                .expect("at least one output")
                .values()
                .to_vec())
        };
        solve().map_err(|e| Error::SampleSolve {
            sample: s,
            y: y.clone(),
            source: Box::new(e),
        })
    })?;
    let s = disc.len();
    let nf = samples as f64;
    let mut mean = vec![0.0; s];
    for u in &finals {
        for (m, v) in mean.iter_mut().zip(u) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);
    let mut ss = vec![0.0; s];
    for u in &finals {
        for ((acc, v), m) in ss.iter_mut().zip(u).zip(&mean) {
            *acc += (v - m) * (v - m);
        }
    }
    let stderr = ss
        .iter()
        .map(|v| (v / (nf - 1.0)).sqrt() / nf.sqrt())
        .collect();
    Ok(MonteCarloEstimate {
        mean: Field::new(Arc::clone(disc), mean)?,
        stderr: Field::new(Arc::clone(disc), stderr)?,
        samples,
    })
}

/// State and firing parameters at which a nonlinear field is linearized.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub state: Field,
    pub firing_params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub y_w: Vec<f64>,
    pub max_real: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub samples: Vec<SpectrumSample>,
    pub global_max: f64,
}

impl SpectrumReport {
    /// Whether every sampled `A_n(y_w)` has its spectrum in the open left
    /// half plane.
    pub fn contractive(&self) -> bool {
        self.global_max < 0.0
    }
}

/// Distinct kernel slices of the grid nodes, in global-index order.
pub fn kernel_samples_from_grid(spec: &ProblemSpec, grid: &TensorGrid) -> Vec<Vec<f64>> {
    let mut seen = std::collections::BTreeSet::new();
    crate::param_space::tensor_nodes(grid)
        .into_iter()
        .map(|y| spec.slice(DataField::Kernel, &y).to_vec())
        .filter(|y_w| seen.insert(kernel_key(y_w)))
        .collect()
}

/// Largest real part among the eigenvalues of `m`.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    let rows: Vec<f64> = m.transpose().as_slice().to_vec();
    Ok(crate::linalg::real_eigenvalues(n, &rows)?
        .iter()
        .fold(f64::NEG_INFINITY, |acc, z| acc.max(z.0)))
}

/// Spectral abscissa of `A_n(y_w) = −I + W_n(y_w) · diag(f′(ū))` for each
/// kernel sample. Linear fields need no linearization state.
pub fn spectrum_diagnostic(
    spec: &ProblemSpec,
    disc: &Arc<SpatialDiscretization>,
    y_w_samples: &[Vec<f64>],
    linearization: Option<&Linearization>,
) -> Result<SpectrumReport> {
    let slope: Option<Vec<f64>> = if spec.is_linear() {
        None
    } else {
        let lin = linearization.ok_or_else(|| {
            Error::InvalidArgument("a nonlinear firing rate needs a linearization state".into())
        })?;
        if lin.state.len() != disc.len() {
            return Err(Error::LengthMismatch {
                expected: disc.len(),
                got: lin.state.len(),
            });
        }
        Some(
            lin.state
                .values()
                .iter()
                .map(|&u| spec.firing().derivative(u, &lin.firing_params))
                .collect(),
        )
    };
    let expected_w = spec.slices().kernel.len();
    let samples = y_w_samples
        .iter()
        .map(|y_w| {
            if y_w.len() != expected_w {
                return Err(Error::LengthMismatch {
                    expected: expected_w,
                    got: y_w.len(),
                });
            }
            let op = spec.kernel_operator(disc, y_w)?;
            let mut a = op.matrix().clone();
            if let Some(slope) = &slope {
                for (j, &d) in slope.iter().enumerate() {
                    a.column_mut(j).scale_mut(d);
                }
            }
            for i in 0..disc.len() {
                a[(i, i)] -= 1.0;
            }
            Ok(SpectrumSample {
                y_w: y_w.clone(),
                max_real: spectral_abscissa(&a)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let global_max = samples
        .iter()
        .fold(f64::NEG_INFINITY, |acc, s| acc.max(s.max_real));
    Ok(SpectrumReport {
        samples,
        global_max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub orders: Vec<usize>,
    pub error: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceRecord {
    pub rows: Vec<ConvergenceRow>,
}

/// What a convergence sweep measures against.
pub enum Reference<'a> {
    /// Closed-form mean at the final time, as a function of `x`.
    Exact(&'a (dyn Fn(f64) -> f64 + Sync)),
    /// A dedicated high-order collocation solve with these orders, on the
    /// same spatial grid as each row.
    HighOrder(Vec<usize>),
}

/// Runs one collocation solve per `(n, orders)` point and records the error
/// against `reference` with the wall time of the solve.
pub fn convergence_study(
    spec: &ProblemSpec,
    kind: SpatialKind,
    points: &[(usize, Vec<usize>)],
    reference: &Reference<'_>,
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<ConvergenceRecord> {
    let mut references: BTreeMap<usize, CollocationSolution> = BTreeMap::new();
    let mut rows = Vec::with_capacity(points.len());
    for (n, orders) in points {
        let disc = Arc::new(SpatialDiscretization::for_domain(kind, *n, spec.domain())?);
        let grid = TensorGrid::new(spec.params(), orders)?;
        let start = Instant::now();
        let sol = solve_collocation(spec, &disc, &grid, cfg, workers)?;
        let seconds = start.elapsed().as_secs_f64();
        let error = match reference {
            Reference::Exact(f) => error_vs_exact(&sol, f)?,
            Reference::HighOrder(ref_orders) => {
                if !references.contains_key(n) {
                    let ref_grid = TensorGrid::new(spec.params(), ref_orders)?;
                    let r = solve_collocation(spec, &disc, &ref_grid, cfg, workers)?;
                    references.insert(*n, r);
                }
                error_self(&sol, &references[n])?
            }
        };
        rows.push(ConvergenceRow {
            n: *n,
            orders: orders.clone(),
            error,
            seconds,
        });
    }
    Ok(ConvergenceRecord { rows })
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset_problem1, problem1, FiringRate, ParamSlices};
    use crate::param_space::{
        gauss_hermite, gauss_legendre, tensor_nodes, Dimension, ParameterSpace,
    };
    use crate::spatial::{chebyshev_grid, fem_grid, Domain};

    fn manufactured(
        rules: Vec<crate::param_space::QuadratureRule1D>,
        disc: &Arc<SpatialDiscretization>,
        f: impl Fn(f64, &[f64]) -> f64,
    ) -> CollocationSolution {
        let grid = TensorGrid::from_rules(rules).unwrap();
        let states = tensor_nodes(&grid)
            .iter()
            .map(|y| vec![crate::spatial::project(disc, |x| f(x, y)).unwrap()])
            .collect();
        CollocationSolution::from_states(grid, Arc::clone(disc), vec![1.0], states).unwrap()
    }

    #[test]
    fn constant_states_have_that_mean_and_zero_variance() {
        let disc = fem_grid(4, 0.0, 1.0).unwrap();
        let sol = manufactured(
            vec![
                gauss_legendre(5, -1.0, 1.0).unwrap(),
                gauss_hermite(4, 0.0, 2.0).unwrap(),
            ],
            &disc,
            |_, _| 2.75,
        );
        for v in mean_field(&sol).values() {
            assert!((v - 2.75).abs() < 1e-14);
        }
        assert!(variance_field(&sol)
            .values()
            .iter()
            .all(|&v| v.abs() < 1e-28));
    }

    #[test]
    fn manufactured_linear_and_quadratic_states() {
        let disc = fem_grid(2, 0.0, 1.0).unwrap();
        let sol = manufactured(
            vec![gauss_legendre(2, -1.0, 1.0).unwrap()],
            &disc,
            |_, y| y[0],
        );
        assert!(mean_field(&sol).values().iter().all(|v| v.abs() < 1e-15));
        assert!(variance_field(&sol)
            .values()
            .iter()
            .all(|v| (v - 1.0 / 3.0).abs() < 1e-13));

        // E[Y⁴] − E[Y²]² = 3 − 1 for N(0, 1), from the moment recurrence
        let m4 = 3.0 * 1.0;
        let sol = manufactured(vec![gauss_hermite(3, 0.0, 1.0).unwrap()], &disc, |_, y| {
            y[0] * y[0]
        });
        for v in variance_field(&sol).values() {
            assert!((v - (m4 - 1.0)).abs() < 1e-13, "{v}");
        }
    }

    #[test]
    fn mean_is_linear_and_variance_shift_invariant() {
        let disc = chebyshev_grid(6, -1.0, 1.0).unwrap();
        let rules = || {
            vec![
                gauss_legendre(4, 0.0, 2.0).unwrap(),
                gauss_legendre(3, -1.0, 1.0).unwrap(),
            ]
        };
        let f = |x: f64, y: &[f64]| (y[0] * x).exp() * y[1].cos();
        let g = |x: f64, y: &[f64]| x * y[0] - y[1] * y[1];
        let (alpha, beta) = (1.7, -0.4);
        let su = manufactured(rules(), &disc, f);
        let sv = manufactured(rules(), &disc, g);
        let sc = manufactured(rules(), &disc, |x, y| alpha * f(x, y) + beta * g(x, y));
        let (mu, mv, mc) = (mean_field(&su), mean_field(&sv), mean_field(&sc));
        for i in 0..disc.len() {
            let rhs = alpha * mu.values()[i] + beta * mv.values()[i];
            assert!((mc.values()[i] - rhs).abs() < 1e-13);
        }
        let shifted = manufactured(rules(), &disc, |x, y| f(x, y) + 123.0);
        let (v0, v1) = (variance_field(&su), variance_field(&shifted));
        for i in 0..disc.len() {
            assert!((v0.values()[i] - v1.values()[i]).abs() <= 1e-12);
            assert!(v0.values()[i] >= 0.0);
        }
    }

    #[test]
    fn surrogate_reproduces_nodes_bitwise() {
        let disc = chebyshev_grid(8, -1.0, 1.0).unwrap();
        let sol = manufactured(
            vec![
                gauss_legendre(4, 0.0, 2.0).unwrap(),
                gauss_hermite(3, 1.0, 0.5).unwrap(),
            ],
            &disc,
            |x, y| (x * y[0]).sin() + y[1].powi(3),
        );
        for k in 1..=sol.grid().total() {
            let y = sol.grid().node(k).unwrap();
            for (i, &x) in disc.nodes().iter().enumerate() {
                assert_eq!(
                    surrogate_eval(&sol, x, &y).unwrap(),
                    sol.state(k, 0).values()[i]
                );
            }
        }
        let c = manufactured(vec![gauss_legendre(5, 0.0, 2.0).unwrap()], &disc, |_, _| {
            -1.25
        });
        for y in [0.1, 1.7, 3.0] {
            assert!((surrogate_eval(&c, 0.3, &[y]).unwrap() + 1.25).abs() < 1e-14);
        }
    }

    #[test]
    fn mean_matches_fine_quadrature_of_surrogate() {
        let disc = chebyshev_grid(10, -1.0, 1.0).unwrap();
        let r1 = gauss_legendre(5, -0.5, 1.5).unwrap();
        let r2 = gauss_hermite(4, 0.3, 0.8).unwrap();
        let sol = manufactured(vec![r1.clone(), r2.clone()], &disc, |x, y| {
            (y[0] * x).exp() * (0.5 * y[1]).cos()
        });
        // independent rules with 4× the points
        let f1 = gauss_legendre(20, -0.5, 1.5).unwrap();
        let f2 = gauss_hermite(16, 0.3, 0.8).unwrap();
        let mut fine = vec![0.0; disc.len()];
        for (a, wa) in f1.nodes.iter().zip(&f1.weights) {
            for (b, wb) in f2.nodes.iter().zip(&f2.weights) {
                let s = surrogate_field(&sol, &[*a, *b]).unwrap();
                for (acc, v) in fine.iter_mut().zip(s.values()) {
                    *acc += wa * wb * v;
                }
            }
        }
        let mean = mean_field(&sol);
        for (m, f) in mean.values().iter().zip(&fine) {
            assert!((m - f).abs() <= 1e-10, "{m} vs {f}");
        }
    }

    #[test]
    fn single_node_grid_matches_direct_solve() {
        let spec = preset_problem1();
        let disc = chebyshev_grid(20, -1.0, 1.0).unwrap();
        let grid = TensorGrid::new(spec.params(), &[0]).unwrap();
        let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-12);
        let sol = solve_collocation(&spec, &disc, &grid, &cfg, 1).unwrap();
        let y = grid.node(1).unwrap();
        let sys = SemiDiscreteSystem::new(&spec, &disc, &y).unwrap();
        let direct = integrate(&sys, &cfg).unwrap();
        assert_eq!(mean_field(&sol), direct.states[0]);
    }

    #[test]
    fn problem1_collocation_accuracy() {
        let spec = preset_problem1();
        let disc = chebyshev_grid(40, -1.0, 1.0).unwrap();
        let grid = TensorGrid::new(spec.params(), &[20]).unwrap();
        let cfg = IntegratorConfig::default();
        let sol = solve_collocation(&spec, &disc, &grid, &cfg, 1).unwrap();
        for k in 1..=grid.total() {
            let y = grid.node(k).unwrap()[0];
            let exact =
                crate::spatial::project(&disc, |x| problem1::exact_solution(x, 1.0, y)).unwrap();
            assert!(sol.state(k, 0).sup_distance(&exact).unwrap() <= 1e-8);
        }
        let err = error_vs_exact(&sol, |x| problem1::exact_mean(x, 1.0, -2.0, 0.5)).unwrap();
        assert!(err <= 1e-8, "{err}");

        let surrogate_at_zero = surrogate_eval(&sol, 0.3, &[0.0]).unwrap();
        assert!((surrogate_at_zero - problem1::exact_solution(0.3, 1.0, 0.0)).abs() <= 1e-6);
        assert_eq!(error_self(&sol, &sol).unwrap(), 0.0);
    }

    #[test]
    fn problem1_error_drops_with_q() {
        let spec = preset_problem1();
        let disc = chebyshev_grid(40, -1.0, 1.0).unwrap();
        let cfg = IntegratorConfig::default();
        let exact = |x: f64| problem1::exact_mean(x, 1.0, -2.0, 0.5);
        let err = |q: usize| {
            let grid = TensorGrid::new(spec.params(), &[q]).unwrap();
            error_vs_exact(
                &solve_collocation(&spec, &disc, &grid, &cfg, 1).unwrap(),
                exact,
            )
            .unwrap()
        };
        let (e2, e6) = (err(2), err(6));
        assert!(e2 >= 10.0 * e6, "{e2} vs {e6}");
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let spec = preset_problem1();
        let disc = chebyshev_grid(12, -1.0, 1.0).unwrap();
        let grid = TensorGrid::new(spec.params(), &[6]).unwrap();
        let cfg = IntegratorConfig::with_tolerances(1e-9, 1e-11);
        let a = solve_collocation(&spec, &disc, &grid, &cfg, 1).unwrap();
        let b = solve_collocation(&spec, &disc, &grid, &cfg, 4).unwrap();
        for k in 1..=grid.total() {
            assert_eq!(a.state(k, 0), b.state(k, 0));
        }
    }

    #[test]
    fn node_failures_carry_context() {
        let params = ParameterSpace::new(vec![Dimension::new(
            Distribution::uniform(0.0, 1.0).unwrap(),
            DataField::Firing,
        )])
        .unwrap();
        let spec = ProblemSpec::builder("bad", Domain::Interval { a: 0.0, b: 1.0 })
            .initial(|_, _| 1.0)
            .kernel(|_, _, _| 1.0)
            .firing(FiringRate::Custom(Arc::new(|u, y| {
                if y[0] > 0.5 {
                    f64::NAN
                } else {
                    u
                }
            })))
            .build(
                params,
                ParamSlices {
                    firing: 0..1,
                    ..Default::default()
                },
            )
            .unwrap();
        let disc = fem_grid(2, 0.0, 1.0).unwrap();
        let grid = TensorGrid::new(spec.params(), &[1]).unwrap();
        let err =
            solve_collocation(&spec, &disc, &grid, &IntegratorConfig::default(), 1).unwrap_err();
        match err {
            Error::NodeSolve { node, y, .. } => {
                assert_eq!(node, 2);
                assert!(y[0] > 0.5);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn monte_carlo_basics() {
        let p = problem1::Problem1Params {
            alpha: 0.3,
            beta: 0.3 + 1e-15,
            ..Default::default()
        };
        let spec = problem1::spec(p).unwrap();
        let disc = chebyshev_grid(16, -1.0, 1.0).unwrap();
        let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-12);
        let mc = monte_carlo_mean(&spec, &disc, &cfg, 4, 7, 1).unwrap();
        let sys = SemiDiscreteSystem::new(&spec, &disc, &[0.3 + 0.5e-15]).unwrap();
        let direct = integrate(&sys, &cfg).unwrap();
        assert!(mc.mean.sup_distance(&direct.states[0]).unwrap() < 1e-12);

        let spec = preset_problem1();
        let a = monte_carlo_mean(&spec, &disc, &cfg, 8, 42, 1).unwrap();
        let b = monte_carlo_mean(&spec, &disc, &cfg, 8, 42, 3).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.stderr, b.stderr);
        assert!(monte_carlo_mean(&spec, &disc, &cfg, 1, 42, 1).is_err());
        assert_eq!(draw_samples(&spec, 5, 9), draw_samples(&spec, 5, 9));
        assert_ne!(draw_samples(&spec, 5, 9), draw_samples(&spec, 5, 10));
    }

    #[test]
    fn spectrum_of_zero_and_rank_one_kernels() {
        let disc = chebyshev_grid(40, -1.0, 1.0).unwrap();
        let zero = preset_problem1().with_kernel_scale(0.0);
        let r = spectrum_diagnostic(&zero, &disc, &[vec![]], None).unwrap();
        assert_eq!(r.global_max, -1.0);

        let p1 = preset_problem1();
        let lambda1 = disc.integrate(|x| x * x);
        let r = spectrum_diagnostic(&p1, &disc, &[vec![]], None).unwrap();
        assert!((r.global_max - (-1.0 + lambda1)).abs() <= 1e-10);
        assert!((r.global_max + 1.0 / 3.0).abs() < 1e-12);
        assert!(r.contractive());

        let scaled = preset_problem1().with_kernel_scale(3.0);
        let r = spectrum_diagnostic(&scaled, &disc, &[vec![]], None).unwrap();
        assert!((r.global_max - 1.0).abs() < 1e-10);
        assert!(!r.contractive());
    }

    #[test]
    fn spectrum_needs_linearization_for_sigmoid() {
        let spec = crate::model::preset_problem3();
        let disc = chebyshev_grid(12, -10.0, 10.0).unwrap();
        let grid = TensorGrid::new(spec.params(), &[0, 0, 2, 0]).unwrap();
        let samples = kernel_samples_from_grid(&spec, &grid);
        assert_eq!(samples.len(), 3);
        assert!(spectrum_diagnostic(&spec, &disc, &samples, None).is_err());
        let lin = Linearization {
            state: Field::zeros(Arc::clone(&disc)),
            firing_params: vec![1.0],
        };
        let r = spectrum_diagnostic(&spec, &disc, &samples, Some(&lin)).unwrap();
        assert_eq!(r.samples.len(), 3);
        assert!(r.global_max.is_finite());
    }

    #[test]
    fn slope_fit() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        assert!((least_squares_slope(&xs, &ys).unwrap() + 0.5).abs() < 1e-15);
        assert!(least_squares_slope(&[1.0], &[2.0]).is_none());
    }

    #[test]
    fn evaluation_mesh_covers_domain() {
        let disc = chebyshev_grid(4, -1.0, 1.0).unwrap();
        let mesh = evaluation_mesh(&disc, 200);
        assert_eq!(mesh.len(), 205);
        assert!(mesh.contains(&-1.0) && mesh.contains(&1.0));
    }
}
