//! Python bindings: quadrature rules, spatial grids, the preset problems and
//! collocation, Monte Carlo and spectrum runs on them.

use std::cell::RefCell;
use std::sync::Arc;

use nfuq::model::{problem1, problem2, ring};
use nfuq::uq_engine::kernel_samples_from_grid;
use nfuq::{
    integrate, DataField, Domain, IntegratorConfig, Linearization, ProblemSpec, SemiDiscreteSystem,
    SpatialDiscretization, SpatialKind, TensorGrid,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

/// Per-sample `(y_w, max_real)` pairs and their maximum.
type SpectrumResult = (Vec<(Vec<f64>, f64)>, f64);

create_exception!(
    nfuq,
    NfuqError,
    PyException,
    "Raised when a solve or setup step fails."
);

fn to_py(e: nfuq::Error) -> PyErr {
    NfuqError::new_err(e.to_string())
}

fn kind_for(name: Option<&str>, domain: Domain) -> PyResult<SpatialKind> {
    match name {
        None => Ok(match domain {
            Domain::Interval { .. } => SpatialKind::Chebyshev,
            Domain::Ring { .. } => SpatialKind::PeriodicEquispaced,
        }),
        Some("chebyshev") => Ok(SpatialKind::Chebyshev),
        Some("fem") => Ok(SpatialKind::FemP1),
        Some("periodic") => Ok(SpatialKind::PeriodicEquispaced),
        Some(other) => Err(PyValueError::new_err(format!(
            "unknown spatial kind {other:?} (expected chebyshev, fem or periodic)"
        ))),
    }
}

/// Gauss-Legendre rule for the uniform law on `[a, b]`; weights sum to one.
#[pyfunction]
#[pyo3(signature = (points, a = -1.0, b = 1.0))]
fn gauss_legendre(points: usize, a: f64, b: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let r = nfuq::gauss_legendre(points, a, b).map_err(to_py)?;
    Ok((r.nodes, r.weights))
}

/// Gauss-Hermite rule for `N(mu, sigma^2)`; weights sum to one.
#[pyfunction]
#[pyo3(signature = (points, mu = 0.0, sigma = 1.0))]
fn gauss_hermite(points: usize, mu: f64, sigma: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let r = nfuq::gauss_hermite(points, mu, sigma).map_err(to_py)?;
    Ok((r.nodes, r.weights))
}

/// Nodes and quadrature weights of a spatial grid on `[a, b]`. For
/// `periodic` the grid covers `[a, b)` with `b - a` the ring length.
#[pyfunction]
#[pyo3(signature = (kind, n, a = -1.0, b = 1.0))]
fn spatial_grid(kind: &str, n: usize, a: f64, b: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let disc = match kind_for(Some(kind), Domain::Interval { a, b })? {
        SpatialKind::Chebyshev => SpatialDiscretization::chebyshev(n, a, b),
        SpatialKind::FemP1 => SpatialDiscretization::fem(n, a, b),
        SpatialKind::PeriodicEquispaced => SpatialDiscretization::periodic_from(n, a, b - a),
    }
    .map_err(to_py)?;
    Ok((disc.nodes().to_vec(), disc.quad_weights().to_vec()))
}

/// Closed-form mean of the linear test problem over `U[alpha, beta]`.
#[pyfunction]
#[pyo3(signature = (x, t = 1.0, alpha = -2.0, beta = 0.5))]
fn problem1_exact_mean(x: f64, t: f64, alpha: f64, beta: f64) -> f64 {
    problem1::exact_mean(x, t, alpha, beta)
}

/// A neural field problem with random data.
#[pyclass(module = "nfuq", frozen)]
struct Problem {
    spec: ProblemSpec,
}

impl Problem {
    fn disc(&self, n: usize, kind: Option<&str>) -> PyResult<Arc<SpatialDiscretization>> {
        let domain = self.spec.domain();
        let disc =
            SpatialDiscretization::for_domain(kind_for(kind, domain)?, n, domain).map_err(to_py)?;
        Ok(Arc::new(disc))
    }
}

#[pymethods]
impl Problem {
    /// Linear field with kernel `x x'` and forcing rate `y ~ U[alpha, beta]`.
    #[staticmethod]
    #[pyo3(signature = (alpha = -2.0, beta = 0.5, t = 1.0))]
    fn problem1(alpha: f64, beta: f64, t: f64) -> PyResult<Self> {
        let spec = problem1::spec(problem1::Problem1Params {
            alpha,
            beta,
            time_horizon: t,
        })
        .map_err(to_py)?;
        Ok(Self { spec })
    }

    /// Sigmoidal field with two random dimensions, `"uniform"` or `"normal"`.
    #[staticmethod]
    #[pyo3(signature = (distribution = "uniform"))]
    fn problem2(distribution: &str) -> PyResult<Self> {
        let d = match distribution {
            "uniform" => problem2::Problem2Distribution::default_uniform(),
            "normal" => problem2::Problem2Distribution::default_normal(),
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown distribution {other:?} (expected uniform or normal)"
                )))
            }
        };
        Ok(Self {
            spec: nfuq::preset_problem2(d).map_err(to_py)?,
        })
    }

    /// Four-dimensional variant with random kernel and forcing amplitudes.
    #[staticmethod]
    fn problem3() -> Self {
        Self {
            spec: nfuq::preset_problem3(),
        }
    }

    /// Six-dimensional ring model.
    #[staticmethod]
    #[pyo3(signature = (t = None))]
    fn ring(t: Option<f64>) -> PyResult<Self> {
        let mut p = ring::RingParams::default();
        if let Some(t) = t {
            p.time_horizon = t;
        }
        Ok(Self {
            spec: ring::spec(p).map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.spec.name().to_string()
    }

    #[getter]
    fn dims(&self) -> usize {
        self.spec.params().len()
    }

    #[getter]
    fn time_horizon(&self) -> f64 {
        self.spec.time_horizon()
    }

    #[getter]
    fn is_linear(&self) -> bool {
        self.spec.is_linear()
    }

    /// Mean of each random dimension.
    fn midpoint(&self) -> Vec<f64> {
        self.spec.params().midpoint()
    }

    fn with_kernel_scale(&self, scale: f64) -> Self {
        Self {
            spec: self.spec.clone().with_kernel_scale(scale),
        }
    }

    /// Solves one realization; returns `(nodes, u(T))`.
    #[pyo3(signature = (point, n = 40, kind = None, rtol = 1e-12, atol = 1e-13))]
    fn solve(
        &self,
        py: Python<'_>,
        point: Vec<f64>,
        n: usize,
        kind: Option<&str>,
        rtol: f64,
        atol: f64,
    ) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let disc = self.disc(n, kind)?;
        let cfg = IntegratorConfig::with_tolerances(rtol, atol);
        let u = py
            .detach(|| -> nfuq::Result<Vec<f64>> {
                let sys = SemiDiscreteSystem::new(&self.spec, &disc, &point)?;
                let mut traj = integrate(&sys, &cfg)?;
                Ok(traj.states.pop().expect("final state").into_values())
            })
            .map_err(to_py)?;
        Ok((disc.nodes().to_vec(), u))
    }

    /// Solves at every node of the tensor grid with the given orders.
    #[pyo3(signature = (orders, n = 40, kind = None, rtol = 1e-12, atol = 1e-13, workers = 1))]
    #[allow(clippy::too_many_arguments)]
    fn collocate(
        &self,
        py: Python<'_>,
        orders: Vec<usize>,
        n: usize,
        kind: Option<&str>,
        rtol: f64,
        atol: f64,
        workers: usize,
    ) -> PyResult<Collocation> {
        let disc = self.disc(n, kind)?;
        let grid = TensorGrid::new(self.spec.params(), &orders).map_err(to_py)?;
        let cfg = IntegratorConfig::with_tolerances(rtol, atol);
        let sol = py
            .detach(|| nfuq::solve_collocation(&self.spec, &disc, &grid, &cfg, workers))
            .map_err(to_py)?;
        Ok(Collocation { sol })
    }

    /// Seeded Monte Carlo estimate; returns `(nodes, mean, stderr)`.
    #[pyo3(signature = (samples, seed = 12345, n = 40, kind = None, rtol = 1e-12, atol = 1e-13, workers = 1))]
    #[allow(clippy::too_many_arguments)]
    fn monte_carlo(
        &self,
        py: Python<'_>,
        samples: usize,
        seed: u64,
        n: usize,
        kind: Option<&str>,
        rtol: f64,
        atol: f64,
        workers: usize,
    ) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let disc = self.disc(n, kind)?;
        let cfg = IntegratorConfig::with_tolerances(rtol, atol);
        let est = py
            .detach(|| nfuq::monte_carlo_mean(&self.spec, &disc, &cfg, samples, seed, workers))
            .map_err(to_py)?;
        Ok((
            disc.nodes().to_vec(),
            est.mean.into_values(),
            est.stderr.into_values(),
        ))
    }

    /// Largest real eigenvalue of the linearized operator for each kernel
    /// sample of the grid with these orders. Nonlinear problems are
    /// linearized about the final state of the midpoint solve.
    /// Returns `(samples, global_max)` with `samples` a list of `(y_w, max_real)`.
    #[pyo3(signature = (orders, n = 40, kind = None))]
    fn spectrum(
        &self,
        py: Python<'_>,
        orders: Vec<usize>,
        n: usize,
        kind: Option<&str>,
    ) -> PyResult<SpectrumResult> {
        let disc = self.disc(n, kind)?;
        let grid = TensorGrid::new(self.spec.params(), &orders).map_err(to_py)?;
        let spec = &self.spec;
        let report = py
            .detach(|| -> nfuq::Result<_> {
                let lin = if spec.is_linear() {
                    None
                } else {
                    let y = spec.params().midpoint();
                    let sys = SemiDiscreteSystem::new(spec, &disc, &y)?;
                    let state = integrate(&sys, &IntegratorConfig::default())?
                        .states
                        .pop()
                        .expect("final state");
                    Some(Linearization {
                        state,
                        firing_params: spec.slice(DataField::Firing, &y).to_vec(),
                    })
                };
                let samples = kernel_samples_from_grid(spec, &grid);
                nfuq::spectrum_diagnostic(spec, &disc, &samples, lin.as_ref())
            })
            .map_err(to_py)?;
        let samples = report
            .samples
            .into_iter()
            .map(|s| (s.y_w, s.max_real))
            .collect();
        Ok((samples, report.global_max))
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem({:?}, dims={})",
            self.spec.name(),
            self.spec.params().len()
        )
    }
}

/// Node solutions of a collocation run and the statistics derived from them.
#[pyclass(module = "nfuq", frozen)]
struct Collocation {
    sol: nfuq::CollocationSolution,
}

#[pymethods]
impl Collocation {
    /// Spatial nodes.
    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.sol.disc().nodes().to_vec()
    }

    #[getter]
    fn orders(&self) -> Vec<usize> {
        self.sol.grid().orders().to_vec()
    }

    /// Number of parameter nodes.
    #[getter]
    fn size(&self) -> usize {
        self.sol.grid().total()
    }

    /// Mean at the final time.
    #[getter]
    fn mean(&self) -> Vec<f64> {
        nfuq::mean_field(&self.sol).into_values()
    }

    /// Variance at the final time.
    #[getter]
    fn variance(&self) -> Vec<f64> {
        nfuq::variance_field(&self.sol).into_values()
    }

    /// Surrogate field at parameter `y`, final time.
    fn surrogate(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(nfuq::uq_engine::surrogate_field(&self.sol, &y)
            .map_err(to_py)?
            .into_values())
    }

    /// Sup-norm distance of the mean from `reference`'s mean.
    fn error_vs(&self, reference: &Collocation) -> PyResult<f64> {
        nfuq::error_self(&self.sol, &reference.sol).map_err(to_py)
    }

    /// Sup-norm distance of the mean from `exact(x)`.
    fn error_vs_exact(&self, exact: &Bound<'_, PyAny>) -> PyResult<f64> {
        let failure: RefCell<Option<PyErr>> = RefCell::new(None);
        let err = nfuq::error_vs_exact(&self.sol, |x| {
            match exact.call1((x,)).and_then(|v| v.extract::<f64>()) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        });
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        err.map_err(to_py)
    }
}

#[pymodule]
#[pyo3(name = "nfuq")]
fn nfuq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NfuqError", m.py().get_type::<NfuqError>())?;
    m.add_function(wrap_pyfunction!(gauss_legendre, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_hermite, m)?)?;
    m.add_function(wrap_pyfunction!(spatial_grid, m)?)?;
    m.add_function(wrap_pyfunction!(problem1_exact_mean, m)?)?;
    m.add_class::<Problem>()?;
    m.add_class::<Collocation>()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spatial_kind_defaults_follow_the_domain() {
        let interval = Domain::Interval { a: 0.0, b: 1.0 };
        let ring = Domain::Ring {
            start: 0.0,
            length: 1.0,
        };
        assert_eq!(kind_for(None, interval).unwrap(), SpatialKind::Chebyshev);
        assert_eq!(
            kind_for(None, ring).unwrap(),
            SpatialKind::PeriodicEquispaced
        );
        assert_eq!(kind_for(Some("fem"), ring).unwrap(), SpatialKind::FemP1);
    }
}
