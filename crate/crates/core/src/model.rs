//! Neural field problems with random data and their semi-discrete form.
//!
//! A problem `∂_t u = −u + ∫ w(x, x′, y_w) f(u(x′), y_f) dx′ + g(x, t, y_g)`,
//! `u(x, 0) = v(x, y_v)` declares which contiguous block of the parameter
//! vector `y` feeds each data field. All data-field closures must be pure and
//! safe to call from several threads at once.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::param_space::{DataField, Dimension, Distribution, ParameterSpace};
use crate::spatial::{
    assemble_kernel_operator, Domain, Field, KernelOperator, SpatialDiscretization,
};

pub type KernelFn = Arc<dyn Fn(f64, f64, &[f64]) -> f64 + Send + Sync>;
pub type ForcingFn = Arc<dyn Fn(f64, f64, &[f64]) -> f64 + Send + Sync>;
pub type InitialFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
pub type FiringFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Source of the sigmoid's saturation level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Fixed(f64),
    /// Index into the firing-rate parameter slice.
    Param(usize),
}

#[derive(Clone)]
pub enum FiringRate {
    Linear,
    Sigmoid {
        amplitude: Amplitude,
        slope: f64,
        threshold: f64,
    },
    Custom(FiringFn),
}

impl fmt::Debug for FiringRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiringRate::Linear => write!(f, "Linear"),
            FiringRate::Sigmoid {
                amplitude,
                slope,
                threshold,
            } => f
                .debug_struct("Sigmoid")
                .field("amplitude", amplitude)
                .field("slope", slope)
                .field("threshold", threshold)
                .finish(),
            FiringRate::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// `F0 / (1 + exp(−mu (u − h)))` with the exponent clamped to ±700.
pub fn sigmoid(u: f64, f0: f64, mu: f64, h: f64) -> f64 {
    let arg = (-mu * (u - h)).clamp(-700.0, 700.0);
    f0 / (1.0 + arg.exp())
}

fn sigmoid_derivative(u: f64, f0: f64, mu: f64, h: f64) -> f64 {
    let s = sigmoid(u, 1.0, mu, h);
    f0 * mu * s * (1.0 - s)
}

impl FiringRate {
    pub fn is_linear(&self) -> bool {
        matches!(self, FiringRate::Linear)
    }

    fn amplitude(amplitude: Amplitude, y_f: &[f64]) -> f64 {
        match amplitude {
            Amplitude::Fixed(a) => a,
            Amplitude::Param(i) => y_f[i],
        }
    }

    pub fn eval(&self, u: f64, y_f: &[f64]) -> f64 {
        match self {
            FiringRate::Linear => u,
            FiringRate::Sigmoid {
                amplitude,
                slope,
                threshold,
            } => sigmoid(u, Self::amplitude(*amplitude, y_f), *slope, *threshold),
            FiringRate::Custom(f) => f(u, y_f),
        }
    }

    /// `∂f/∂u`; custom rates use a central difference.
    pub fn derivative(&self, u: f64, y_f: &[f64]) -> f64 {
        match self {
            FiringRate::Linear => 1.0,
            FiringRate::Sigmoid {
                amplitude,
                slope,
                threshold,
            } => sigmoid_derivative(u, Self::amplitude(*amplitude, y_f), *slope, *threshold),
            FiringRate::Custom(f) => {
                let h = 1e-6 * (1.0 + u.abs());
                (f(u + h, y_f) - f(u - h, y_f)) / (2.0 * h)
            }
        }
    }
}

/// Index ranges of `y` feeding each data field. Empty means deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParamSlices {
    pub kernel: Range<usize>,
    pub firing: Range<usize>,
    pub forcing: Range<usize>,
    pub initial: Range<usize>,
}

impl ParamSlices {
    pub fn get(&self, field: DataField) -> Range<usize> {
        match field {
            DataField::Kernel => self.kernel.clone(),
            DataField::Firing => self.firing.clone(),
            DataField::Forcing => self.forcing.clone(),
            DataField::Initial => self.initial.clone(),
        }
    }

    /// Checks that the slices are disjoint and cover `0..m` exactly.
    pub fn validate(&self, m: usize) -> Result<()> {
        let mut owner: Vec<Option<DataField>> = vec![None; m];
        for field in [
            DataField::Kernel,
            DataField::Firing,
            DataField::Forcing,
            DataField::Initial,
        ] {
            for i in self.get(field) {
                if i >= m {
                    return Err(Error::InvalidArgument(format!(
                        "{} slice reaches index {i} but the parameter space has {m} dimensions",
                        field.as_str()
                    )));
                }
                if let Some(prev) = owner[i] {
                    return Err(Error::InvalidArgument(format!(
                        "parameter {i} claimed by both {} and {}",
                        prev.as_str(),
                        field.as_str()
                    )));
                }
                owner[i] = Some(field);
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidArgument(format!(
                "parameter {i} does not feed any data field"
            )));
        }
        Ok(())
    }
}

/// A neural field problem with finite-dimensional random data.
#[derive(Clone)]
pub struct ProblemSpec {
    name: String,
    domain: Domain,
    kernel: KernelFn,
    firing: FiringRate,
    forcing: ForcingFn,
    initial: InitialFn,
    time_horizon: f64,
    params: ParameterSpace,
    slices: ParamSlices,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("firing", &self.firing)
            .field("time_horizon", &self.time_horizon)
            .field("params", &self.params)
            .field("slices", &self.slices)
            .finish_non_exhaustive()
    }
}

/// Builder for [`ProblemSpec`]; unset fields default to zero data and a
/// linear firing rate.
pub struct ProblemBuilder {
    name: String,
    domain: Domain,
    kernel: KernelFn,
    firing: FiringRate,
    forcing: ForcingFn,
    initial: InitialFn,
    time_horizon: f64,
}

impl ProblemBuilder {
    pub fn kernel(mut self, w: impl Fn(f64, f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.kernel = Arc::new(w);
        self
    }

    pub fn firing(mut self, firing: FiringRate) -> Self {
        self.firing = firing;
        self
    }

    pub fn forcing(mut self, g: impl Fn(f64, f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.forcing = Arc::new(g);
        self
    }

    pub fn initial(mut self, v: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.initial = Arc::new(v);
        self
    }

    pub fn time_horizon(mut self, t: f64) -> Self {
        self.time_horizon = t;
        self
    }

    pub fn build(self, params: ParameterSpace, slices: ParamSlices) -> Result<ProblemSpec> {
        if !(self.time_horizon.is_finite() && self.time_horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time horizon must be positive, got {}",
                self.time_horizon
            )));
        }
        slices.validate(params.len())?;
        for (i, dim) in params.dims().iter().enumerate() {
            if !slices.get(dim.label).contains(&i) {
                return Err(Error::InvalidArgument(format!(
                    "parameter {i} is labelled {} but sits outside that slice",
                    dim.label.as_str()
                )));
            }
        }
        if let FiringRate::Sigmoid {
            amplitude: Amplitude::Param(i),
            ..
        } = self.firing
        {
            if i >= slices.firing.len() {
                return Err(Error::InvalidArgument(format!(
                    "sigmoid amplitude refers to firing parameter {i}, slice has {}",
                    slices.firing.len()
                )));
            }
        }
        Ok(ProblemSpec {
            name: self.name,
            domain: self.domain,
            kernel: self.kernel,
            firing: self.firing,
            forcing: self.forcing,
            initial: self.initial,
            time_horizon: self.time_horizon,
            params,
            slices,
        })
    }
}

impl ProblemSpec {
    pub fn builder(name: impl Into<String>, domain: Domain) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            domain,
            kernel: Arc::new(|_, _, _| 0.0),
            firing: FiringRate::Linear,
            forcing: Arc::new(|_, _, _| 0.0),
            initial: Arc::new(|_, _| 0.0),
            time_horizon: 1.0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The spatial domain the problem is posed on.
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn time_horizon(&self) -> f64 {
        self.time_horizon
    }

    pub fn params(&self) -> &ParameterSpace {
        &self.params
    }

    pub fn slices(&self) -> &ParamSlices {
        &self.slices
    }

    pub fn firing(&self) -> &FiringRate {
        &self.firing
    }

    pub fn is_linear(&self) -> bool {
        self.firing.is_linear()
    }

    pub fn kernel(&self, x: f64, xp: f64, y_w: &[f64]) -> f64 {
        (self.kernel)(x, xp, y_w)
    }

    pub fn forcing(&self, x: f64, t: f64, y_g: &[f64]) -> f64 {
        (self.forcing)(x, t, y_g)
    }

    pub fn initial(&self, x: f64, y_v: &[f64]) -> f64 {
        (self.initial)(x, y_v)
    }

    /// The block of `y` feeding `field`.
    pub fn slice<'a>(&self, field: DataField, y: &'a [f64]) -> &'a [f64] {
        &y[self.slices.get(field)]
    }

    pub fn with_time_horizon(mut self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time horizon must be positive, got {t}"
            )));
        }
        self.time_horizon = t;
        Ok(self)
    }

    /// Multiplies the synaptic kernel by a constant.
    pub fn with_kernel_scale(mut self, scale: f64) -> Self {
        let inner = Arc::clone(&self.kernel);
        self.kernel = Arc::new(move |x, xp, y| scale * inner(x, xp, y));
        self
    }

    pub fn kernel_operator(
        &self,
        disc: &Arc<SpatialDiscretization>,
        y_w: &[f64],
    ) -> Result<KernelOperator> {
        assemble_kernel_operator(|x, xp, y| (self.kernel)(x, xp, y), disc, y_w)
    }
}

/// The projected problem `u_n′ = P_n N(t, u_n, y)` at a fixed parameter point,
/// with the kernel operator for `y_w` already assembled.
#[derive(Debug, Clone)]
pub struct SemiDiscreteSystem<'a> {
    spec: &'a ProblemSpec,
    disc: Arc<SpatialDiscretization>,
    kernel: Arc<KernelOperator>,
    y: Vec<f64>,
}

impl<'a> SemiDiscreteSystem<'a> {
    pub fn new(
        spec: &'a ProblemSpec,
        disc: &Arc<SpatialDiscretization>,
        y: &[f64],
    ) -> Result<Self> {
        Self::check_point(spec, y)?;
        let kernel = spec.kernel_operator(disc, spec.slice(DataField::Kernel, y))?;
        Ok(Self {
            spec,
            disc: Arc::clone(disc),
            kernel: Arc::new(kernel),
            y: y.to_vec(),
        })
    }

    /// Reuses a kernel operator assembled for the same kernel slice of `y`.
    pub fn with_kernel(
        spec: &'a ProblemSpec,
        kernel: Arc<KernelOperator>,
        y: &[f64],
    ) -> Result<Self> {
        Self::check_point(spec, y)?;
        Ok(Self {
            spec,
            disc: Arc::clone(kernel.disc()),
            kernel,
            y: y.to_vec(),
        })
    }

    fn check_point(spec: &ProblemSpec, y: &[f64]) -> Result<()> {
        if y.len() != spec.params().len() {
            return Err(Error::LengthMismatch {
                expected: spec.params().len(),
                got: y.len(),
            });
        }
        Ok(())
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    pub fn disc(&self) -> &Arc<SpatialDiscretization> {
        &self.disc
    }

    pub fn kernel(&self) -> &KernelOperator {
        &self.kernel
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn dim(&self) -> usize {
        self.disc.len()
    }

    /// `P_n v(·, y_v)`.
    pub fn initial_state(&self) -> Result<Field> {
        let y_v = self.spec.slice(DataField::Initial, &self.y);
        crate::spatial::project(&self.disc, |x| self.spec.initial(x, y_v))
    }

    /// `out = −u + W_n F(u) + g(t)` nodewise. `scratch` must have the grid
    /// length; it receives `F(u)` for nonlinear rates.
    pub fn eval_rhs_into(
        &self,
        t: f64,
        u: &[f64],
        scratch: &mut [f64],
        out: &mut [f64],
    ) -> Result<()> {
        let y_f = self.spec.slice(DataField::Firing, &self.y);
        let y_g = self.spec.slice(DataField::Forcing, &self.y);
        if self.spec.firing.is_linear() {
            self.kernel.apply_into(u, out);
        } else {
            for (i, (s, &ui)) in scratch.iter_mut().zip(u).enumerate() {
                *s = self.spec.firing.eval(ui, y_f);
                if !s.is_finite() {
                    return Err(Error::NonFinite {
                        what: "firing rate",
                        node: i,
                    });
                }
            }
            self.kernel.apply_into(scratch, out);
        }
        for (i, ((o, &ui), &x)) in out.iter_mut().zip(u).zip(self.disc.nodes()).enumerate() {
            let g = self.spec.forcing(x, t, y_g);
            if !g.is_finite() {
                return Err(Error::NonFinite {
                    what: "forcing",
                    node: i,
                });
            }
            *o += g - ui;
        }
        Ok(())
    }

    pub fn eval_rhs(&self, t: f64, u: &Field) -> Result<Field> {
        if u.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        let mut scratch = vec![0.0; self.dim()];
        let mut out = vec![0.0; self.dim()];
        self.eval_rhs_into(t, u.values(), &mut scratch, &mut out)?;
        Field::new(Arc::clone(&self.disc), out)
    }

    /// Forcing sampled at the nodes at time `t`.
    pub fn forcing_samples(&self, t: f64) -> Vec<f64> {
        let y_g = self.spec.slice(DataField::Forcing, &self.y);
        self.disc
            .nodes()
            .iter()
            .map(|&x| self.spec.forcing(x, t, y_g))
            .collect()
    }
}

/// Problem with a linear field, rank-one kernel `x x′` and a known solution.
pub mod problem1 {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Problem1Params {
        pub alpha: f64,
        pub beta: f64,
        pub time_horizon: f64,
    }

    impl Default for Problem1Params {
        fn default() -> Self {
            Self {
                alpha: -2.0,
                beta: 0.5,
                time_horizon: 1.0,
            }
        }
    }

    /// `u(x, t, y) = e^{yt} sin(4πx)`.
    pub fn exact_solution(x: f64, t: f64, y: f64) -> f64 {
        (y * t).exp() * (4.0 * PI * x).sin()
    }

    /// `(e^{βt} − e^{αt}) / (t(β − α)) · sin(4πx)`, the mean over `U[α, β]`.
    pub fn exact_mean(x: f64, t: f64, alpha: f64, beta: f64) -> f64 {
        let z = (beta - alpha) * t;
        let factor = if z == 0.0 {
            (alpha * t).exp()
        } else {
            (alpha * t).exp() * z.exp_m1() / z
        };
        factor * (4.0 * PI * x).sin()
    }

    pub fn spec(p: Problem1Params) -> Result<ProblemSpec> {
        let params = ParameterSpace::new(vec![Dimension::new(
            Distribution::uniform(p.alpha, p.beta)?,
            DataField::Forcing,
        )])?;
        ProblemSpec::builder("problem1", Domain::Interval { a: -1.0, b: 1.0 })
            .kernel(|x, xp, _| x * xp)
            .firing(FiringRate::Linear)
            .initial(|x, _| (4.0 * PI * x).sin())
            .forcing(|x, t, y| {
                let y = y[0];
                (t * y).exp() * ((y + 1.0) * (4.0 * PI * x).sin() + x / (2.0 * PI))
            })
            .time_horizon(p.time_horizon)
            .build(
                params,
                ParamSlices {
                    forcing: 0..1,
                    ..Default::default()
                },
            )
    }
}

/// Nonlinear field with a heterogeneous kernel and random initial pulse and
/// forcing amplitude.
pub mod problem2 {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub enum Problem2Distribution {
        /// `y_1 ∼ U[a_1, b_1]`, `y_2 ∼ U[a_2, b_2]`.
        Uniform { y1: (f64, f64), y2: (f64, f64) },
        /// `y_i ∼ N(mu_i, sigma_i²)`, given as `(mu, sigma)` pairs.
        Normal { y1: (f64, f64), y2: (f64, f64) },
    }

    impl Problem2Distribution {
        pub fn default_uniform() -> Self {
            Problem2Distribution::Uniform {
                y1: (1.25, 1.75),
                y2: (0.5, 1.5),
            }
        }

        /// Normal laws with the means and standard deviations of the default
        /// uniform ones.
        pub fn default_normal() -> Self {
            Problem2Distribution::Normal {
                y1: (1.5, 0.5 / 12f64.sqrt()),
                y2: (1.0, 1.0 / 12f64.sqrt()),
            }
        }

        pub(crate) fn dims(&self) -> Result<(Distribution, Distribution)> {
            Ok(match *self {
                Problem2Distribution::Uniform { y1, y2 } => (
                    Distribution::uniform(y1.0, y1.1)?,
                    Distribution::uniform(y2.0, y2.1)?,
                ),
                Problem2Distribution::Normal { y1, y2 } => (
                    Distribution::normal(y1.0, y1.1)?,
                    Distribution::normal(y2.0, y2.1)?,
                ),
            })
        }
    }

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Problem2Params {
        pub sigma_w: f64,
        pub a0: f64,
        pub a1: f64,
        pub omega_a: f64,
        pub f0: f64,
        pub mu: f64,
        pub h: f64,
        pub omega_g: f64,
        pub sigma_g: f64,
        pub half_width: f64,
        pub time_horizon: f64,
        pub distribution: Problem2Distribution,
    }

    impl Default for Problem2Params {
        fn default() -> Self {
            Self {
                sigma_w: 1.0,
                a0: 1.0,
                a1: 1.0,
                omega_a: 1.0,
                f0: 1.0,
                mu: 10.0,
                h: 0.3,
                omega_g: 1.0,
                sigma_g: 0.4,
                half_width: 10.0,
                time_horizon: 1.0,
                distribution: Problem2Distribution::default_uniform(),
            }
        }
    }

    /// `(1 − σ|x − x′|) e^{−σ|x − x′|} [A_0 + A_1 sin(ω_A x′)]`.
    pub fn kernel(x: f64, xp: f64, sigma_w: f64, a0: f64, a1: f64, omega_a: f64) -> f64 {
        let r = sigma_w * (x - xp).abs();
        (1.0 - r) * (-r).exp() * (a0 + a1 * (omega_a * xp).sin())
    }

    pub fn spec(p: Problem2Params) -> Result<ProblemSpec> {
        if !(p.half_width > 0.0) || !(p.sigma_g > 0.0) {
            return Err(Error::InvalidArgument(
                "half_width and sigma_g must be positive".into(),
            ));
        }
        let (d1, d2) = p.distribution.dims()?;
        let params = ParameterSpace::new(vec![
            Dimension::new(d1, DataField::Initial),
            Dimension::new(d2, DataField::Forcing),
        ])?;
        let Problem2Params {
            sigma_w,
            a0,
            a1,
            omega_a,
            omega_g,
            sigma_g,
            ..
        } = p;
        ProblemSpec::builder(
            "problem2",
            Domain::Interval {
                a: -p.half_width,
                b: p.half_width,
            },
        )
        .kernel(move |x, xp, _| kernel(x, xp, sigma_w, a0, a1, omega_a))
        .firing(FiringRate::Sigmoid {
            amplitude: Amplitude::Fixed(p.f0),
            slope: p.mu,
            threshold: p.h,
        })
        .initial(|x, y| y[0] * (-x * x).exp())
        .forcing(move |x, t, y| y[0] * (omega_g * t).sin() * (-x * x / (sigma_g * sigma_g)).exp())
        .time_horizon(p.time_horizon)
        .build(
            params,
            ParamSlices {
                initial: 0..1,
                forcing: 1..2,
                ..Default::default()
            },
        )
    }
}

/// Problem 2 with the kernel level `A_0` and the firing amplitude `F_0` random
/// as well. Parameter order: `(y_1, y_2, A_0, F_0)`.
pub mod problem3 {
    use super::problem2::{kernel, Problem2Params};
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Problem3Params {
        pub base: Problem2Params,
        pub y1: (f64, f64),
        pub y2: (f64, f64),
        pub a0: (f64, f64),
        pub f0: (f64, f64),
    }

    impl Default for Problem3Params {
        fn default() -> Self {
            Self {
                base: Problem2Params::default(),
                y1: (1.25, 1.75),
                y2: (0.5, 1.5),
                a0: (0.75, 1.25),
                f0: (0.75, 1.25),
            }
        }
    }

    pub fn spec(p: Problem3Params) -> Result<ProblemSpec> {
        let b = p.base;
        if !(b.half_width > 0.0) || !(b.sigma_g > 0.0) {
            return Err(Error::InvalidArgument(
                "half_width and sigma_g must be positive".into(),
            ));
        }
        let params = ParameterSpace::new(vec![
            Dimension::new(Distribution::uniform(p.y1.0, p.y1.1)?, DataField::Initial),
            Dimension::new(Distribution::uniform(p.y2.0, p.y2.1)?, DataField::Forcing),
            Dimension::new(Distribution::uniform(p.a0.0, p.a0.1)?, DataField::Kernel),
            Dimension::new(Distribution::uniform(p.f0.0, p.f0.1)?, DataField::Firing),
        ])?;
        let Problem2Params {
            sigma_w,
            a1,
            omega_a,
            omega_g,
            sigma_g,
            ..
        } = b;
        ProblemSpec::builder(
            "problem3",
            Domain::Interval {
                a: -b.half_width,
                b: b.half_width,
            },
        )
        .kernel(move |x, xp, y| kernel(x, xp, sigma_w, y[0], a1, omega_a))
        .firing(FiringRate::Sigmoid {
            amplitude: Amplitude::Param(0),
            slope: b.mu,
            threshold: b.h,
        })
        .initial(|x, y| y[0] * (-x * x).exp())
        .forcing(move |x, t, y| y[0] * (omega_g * t).sin() * (-x * x / (sigma_g * sigma_g)).exp())
        .time_horizon(b.time_horizon)
        .build(
            params,
            ParamSlices {
                initial: 0..1,
                forcing: 1..2,
                kernel: 2..3,
                firing: 3..4,
            },
        )
    }
}

/// Ring model with a Mexican-hat kernel driven by an oscillating pulse whose
/// position depends on six uniform parameters `(c_1, c_2, c_3, f_1, f_2, f_3)`.
pub mod ring {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct RingParams {
        pub length: f64,
        pub time_horizon: f64,
        pub pulse_amplitude: f64,
        pub slope: f64,
        pub threshold: f64,
        pub ranges: [(f64, f64); 6],
    }

    impl Default for RingParams {
        fn default() -> Self {
            Self {
                length: 22.0,
                time_horizon: 20.0,
                pulse_amplitude: 1.4,
                slope: 20.0,
                threshold: 10.0,
                ranges: [
                    (0.0, 4.0),
                    (1.0 / 6.0, 2.0 / 3.0),
                    (0.1, 0.8),
                    (40.0, 60.0),
                    (10.0, 50.0 / 3.0),
                    (100.0, 200.0),
                ],
            }
        }
    }

    /// Minimal-image representative of `d` on a ring of length `length`.
    pub fn wrap(d: f64, length: f64) -> f64 {
        d - length * (d / length).round()
    }

    /// `W(z) = (2 − z²) e^{−z²}`.
    pub fn connectivity(z: f64) -> f64 {
        (2.0 - z * z) * (-z * z).exp()
    }

    /// Pulse centre `c(t, y) = Σ_k c_k sin(2πt / f_k)`.
    pub fn pulse_centre(t: f64, y: &[f64]) -> f64 {
        (0..3).map(|k| y[k] * (2.0 * PI * t / y[3 + k]).sin()).sum()
    }

    pub fn initial(x: f64, length: f64) -> f64 {
        let c = (0.5 * wrap(x, length)).cosh();
        2.5 + 0.5 / (c * c)
    }

    pub fn spec(p: RingParams) -> Result<ProblemSpec> {
        let dims = p
            .ranges
            .iter()
            .map(|&(a, b)| {
                Ok(Dimension::new(
                    Distribution::uniform(a, b)?,
                    DataField::Forcing,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let params = ParameterSpace::new(dims)?;
        let length = p.length;
        let amp = p.pulse_amplitude;
        ProblemSpec::builder(
            "ring",
            Domain::Ring {
                start: -0.5 * length,
                length,
            },
        )
        .kernel(move |x, xp, _| connectivity(wrap(x - xp, length)))
        .firing(FiringRate::Sigmoid {
            amplitude: Amplitude::Fixed(1.0),
            slope: p.slope,
            threshold: p.threshold,
        })
        .initial(move |x, _| initial(x, length))
        .forcing(move |x, t, y| {
            let d = wrap(x - pulse_centre(t, y), length);
            amp * (-d * d).exp()
        })
        .time_horizon(p.time_horizon)
        .build(
            params,
            ParamSlices {
                forcing: 0..6,
                ..Default::default()
            },
        )
    }
}

pub fn preset_problem1() -> ProblemSpec {
    problem1::spec(problem1::Problem1Params::default()).expect("default parameters are valid")
}

pub fn preset_problem2(distribution: problem2::Problem2Distribution) -> Result<ProblemSpec> {
    problem2::spec(problem2::Problem2Params {
        distribution,
        ..Default::default()
    })
}

pub fn preset_problem3() -> ProblemSpec {
    problem3::spec(problem3::Problem3Params::default()).expect("default parameters are valid")
}

pub fn preset_ring() -> ProblemSpec {
    ring::spec(ring::RingParams::default()).expect("default parameters are valid")
}
