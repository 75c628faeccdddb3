//! Spatial grids, interpolatory projectors and Nyström kernel operators.
//!
//! Every discretization is nodal: a [`Field`] holds the values of a function
//! at the grid nodes, and [`SpatialDiscretization::interpolate`] realises the
//! projector as a function of `x`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpatialKind {
    /// Chebyshev–Lobatto collocation with Clenshaw–Curtis weights.
    Chebyshev,
    /// Piecewise-linear finite elements on a uniform mesh, trapezoid weights.
    FemP1,
    /// Equispaced nodes on a ring, uniform weights.
    PeriodicEquispaced,
}

impl SpatialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpatialKind::Chebyshev => "chebyshev",
            SpatialKind::FemP1 => "fem",
            SpatialKind::PeriodicEquispaced => "periodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval {
        a: f64,
        b: f64,
    },
    /// The ring `[start, start + length)` with its endpoints identified.
    Ring {
        start: f64,
        length: f64,
    },
}

impl Domain {
    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Ring { length, .. } => length,
        }
    }

    /// Lower and upper end of the domain (the ring's fundamental interval).
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Domain::Interval { a, b } => (a, b),
            Domain::Ring { start, length } => (start, start + length),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDiscretization {
    kind: SpatialKind,
    domain: Domain,
    nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    // barycentric weights, Chebyshev only
    bary: Vec<f64>,
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "domain needs a < b, got [{a}, {b}]"
        )))
    }
}

/// Clenshaw–Curtis weights on `[-1, 1]` for the points `cos(jπ/n)`, by the
/// direct cosine sum.
fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..=n)
        .map(|j| {
            let c = if j == 0 || j == n { 1.0 } else { 2.0 };
            let mut s = 1.0;
            for k in 1..=n / 2 {
                let b = if 2 * k == n { 1.0 } else { 2.0 };
                let kf = k as f64;
                s -= b / (4.0 * kf * kf - 1.0) * (2.0 * kf * j as f64 * PI / nf).cos();
            }
            c / nf * s
        })
        .collect()
}

impl SpatialDiscretization {
    /// Chebyshev–Lobatto grid with `n + 1` points on `[a, b]`, stored in
    /// ascending order: `x_j = (a+b)/2 − (b−a)/2 · cos(jπ/n)`.
    pub fn chebyshev(n: usize, a: f64, b: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "Chebyshev grid needs n ≥ 2, got {n}"
            )));
        }
        check_interval(a, b)?;
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let nf = n as f64;
        // cos(jπ/n) = sin(π(n − 2j)/(2n)) keeps the grid exactly symmetric
        let mut nodes: Vec<f64> = (0..=n)
            .map(|j| {
                let c = (PI * (nf - 2.0 * j as f64) / (2.0 * nf)).sin();
                mid - half * c
            })
            .collect();
        nodes[0] = a;
        nodes[n] = b;
        let quad_weights = clenshaw_curtis_weights(n)
            .iter()
            .map(|w| w * half)
            .collect();
        let bary = (0..=n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect();
        Ok(Self {
            kind: SpatialKind::Chebyshev,
            domain: Domain::Interval { a, b },
            nodes,
            quad_weights,
            bary,
        })
    }

    /// Uniform P1 mesh with `n` cells (`n + 1` nodes) on `[a, b]`.
    pub fn fem(n: usize, a: f64, b: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("FEM grid needs n ≥ 1".into()));
        }
        check_interval(a, b)?;
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|j| a + j as f64 * h).collect();
        nodes[n] = b;
        let quad_weights = (0..=n)
            .map(|j| if j == 0 || j == n { 0.5 * h } else { h })
            .collect();
        Ok(Self {
            kind: SpatialKind::FemP1,
            domain: Domain::Interval { a, b },
            nodes,
            quad_weights,
            bary: Vec::new(),
        })
    }

    /// `n` equispaced nodes `j·L/n` on the ring `[0, L)`.
    pub fn periodic(n: usize, length: f64) -> Result<Self> {
        Self::periodic_from(n, 0.0, length)
    }

    /// `n` equispaced nodes on the ring `[−L/2, L/2)`.
    pub fn periodic_centered(n: usize, length: f64) -> Result<Self> {
        Self::periodic_from(n, -0.5 * length, length)
    }

    /// `n` equispaced nodes on the ring `[start, start + length)`.
    pub fn periodic_from(n: usize, start: f64, length: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidArgument(format!(
                "periodic grid needs n ≥ 4, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ring length must be positive, got {length}"
            )));
        }
        let h = length / n as f64;
        Ok(Self {
            kind: SpatialKind::PeriodicEquispaced,
            domain: Domain::Ring { start, length },
            nodes: (0..n).map(|j| start + j as f64 * h).collect(),
            quad_weights: vec![h; n],
            bary: Vec::new(),
        })
    }

    /// Grid of the given kind with parameter `n` on `domain`. Chebyshev and
    /// FEM grids need an interval, periodic grids a ring.
    pub fn for_domain(kind: SpatialKind, n: usize, domain: Domain) -> Result<Self> {
        match (kind, domain) {
            (SpatialKind::Chebyshev, Domain::Interval { a, b }) => Self::chebyshev(n, a, b),
            (SpatialKind::FemP1, Domain::Interval { a, b }) => Self::fem(n, a, b),
            (SpatialKind::PeriodicEquispaced, Domain::Ring { start, length }) => {
                Self::periodic_from(n, start, length)
            }
            (kind, domain) => Err(Error::InvalidArgument(format!(
                "a {} grid cannot discretize {domain:?}",
                kind.as_str()
            ))),
        }
    }

    pub fn kind(&self) -> SpatialKind {
        self.kind
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Number of nodes `s(n)`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ_j w_j f(x_j)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.quad_weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Evaluates the interpolant of nodal `values` at `x`.
    ///
    /// Chebyshev grids use barycentric polynomial interpolation, FEM grids
    /// piecewise-linear interpolation, and rings linear interpolation with
    /// wraparound (a known accuracy limitation off the nodes).
    pub fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        match self.domain {
            Domain::Interval { a, b } => {
                if !(x >= a && x <= b) {
                    return Err(Error::OutsideDomain { x, a, b });
                }
            }
            Domain::Ring { .. } if !x.is_finite() => {
                return Err(Error::InvalidArgument(format!("non-finite point {x}")));
            }
            Domain::Ring { .. } => {}
        }
        if let Some(i) = self.nodes.iter().position(|&n| n == x) {
            return Ok(values[i]);
        }
        Ok(match self.kind {
            SpatialKind::Chebyshev => {
                let (mut num, mut den) = (0.0, 0.0);
                for ((&xj, &wj), &vj) in self.nodes.iter().zip(&self.bary).zip(values) {
                    let t = wj / (x - xj);
                    num += t * vj;
                    den += t;
                }
                num / den
            }
            SpatialKind::FemP1 => {
                let n = self.len() - 1;
                let (a, b) = self.domain.bounds();
                let h = (b - a) / n as f64;
                let i = (((x - a) / h).floor() as usize).min(n - 1);
                let t = (x - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
                (1.0 - t) * values[i] + t * values[i + 1]
            }
            SpatialKind::PeriodicEquispaced => {
                let (start, length) = match self.domain {
                    Domain::Ring { start, length } => (start, length),
                    Domain::Interval { .. } => unreachable!(),
                };
                let n = self.len();
                let pos = ((x - start).rem_euclid(length)) / length * n as f64;
                let i = (pos.floor() as usize).min(n - 1);
                let t = pos - i as f64;
                (1.0 - t) * values[i] + t * values[(i + 1) % n]
            }
        })
    }
}

/// Chebyshev grid with `n + 1` points; see [`SpatialDiscretization::chebyshev`].
pub fn chebyshev_grid(n: usize, a: f64, b: f64) -> Result<Arc<SpatialDiscretization>> {
    SpatialDiscretization::chebyshev(n, a, b).map(Arc::new)
}

pub fn fem_grid(n: usize, a: f64, b: f64) -> Result<Arc<SpatialDiscretization>> {
    SpatialDiscretization::fem(n, a, b).map(Arc::new)
}

pub fn periodic_grid(n: usize, length: f64) -> Result<Arc<SpatialDiscretization>> {
    SpatialDiscretization::periodic(n, length).map(Arc::new)
}

/// Nodal values of a function on a discretization.
#[derive(Debug, Clone)]
pub struct Field {
    values: Vec<f64>,
    disc: Arc<SpatialDiscretization>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && same_disc(&self.disc, &other.disc)
    }
}

fn same_disc(a: &Arc<SpatialDiscretization>, b: &Arc<SpatialDiscretization>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Field {
    pub fn new(disc: Arc<SpatialDiscretization>, values: Vec<f64>) -> Result<Self> {
        if values.len() != disc.len() {
            return Err(Error::LengthMismatch {
                expected: disc.len(),
                got: values.len(),
            });
        }
        Ok(Self { values, disc })
    }

    pub fn zeros(disc: Arc<SpatialDiscretization>) -> Self {
        let values = vec![0.0; disc.len()];
        Self { values, disc }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn disc(&self) -> &Arc<SpatialDiscretization> {
        &self.disc
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.disc.interpolate(&self.values, x)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        if !same_disc(&self.disc, &other.disc) {
            return Err(Error::DiscretizationMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Interpolatory projection: samples `f` at the grid nodes.
pub fn project(disc: &Arc<SpatialDiscretization>, f: impl Fn(f64) -> f64) -> Result<Field> {
    let values = disc
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite {
                    what: "projected sample",
                    node: i,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Field {
        values,
        disc: Arc::clone(disc),
    })
}

pub fn evaluate_offgrid(field: &Field, x: f64) -> Result<f64> {
    field.evaluate(x)
}

pub fn sup_norm(field: &Field) -> f64 {
    field.sup_norm()
}

pub fn sup_distance(f1: &Field, f2: &Field) -> Result<f64> {
    f1.sup_distance(f2)
}

/// Nyström discretization of `v ↦ ∫ w(·, x′) v(x′) dx′`: entry `(i, j)` is
/// `w(x_i, x_j) · ω_j`.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    matrix: DMatrix<f64>,
    disc: Arc<SpatialDiscretization>,
}

impl KernelOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn disc(&self) -> &Arc<SpatialDiscretization> {
        &self.disc
    }

    /// `out = W v`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let s = self.disc.len();
        debug_assert_eq!(v.len(), s);
        debug_assert_eq!(out.len(), s);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (col, &vj) in self.matrix.as_slice().chunks_exact(s).zip(v) {
            if vj == 0.0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(col) {
                *o += m * vj;
            }
        }
    }

    pub fn apply(&self, v: &Field) -> Result<Field> {
        if !same_disc(&self.disc, v.disc()) {
            return Err(Error::DiscretizationMismatch);
        }
        let mut out = vec![0.0; self.disc.len()];
        self.apply_into(v.values(), &mut out);
        Ok(Field {
            values: out,
            disc: Arc::clone(&self.disc),
        })
    }
}

pub fn assemble_kernel_operator(
    w: impl Fn(f64, f64, &[f64]) -> f64,
    disc: &Arc<SpatialDiscretization>,
    y_w: &[f64],
) -> Result<KernelOperator> {
    let s = disc.len();
    let nodes = disc.nodes();
    let weights = disc.quad_weights();
    let mut matrix = DMatrix::zeros(s, s);
    for j in 0..s {
        for i in 0..s {
            let value = w(nodes[i], nodes[j], y_w);
            if !value.is_finite() {
                return Err(Error::NonFiniteKernel { i, j, value });
            }
            matrix[(i, j)] = value * weights[j];
        }
    }
    Ok(KernelOperator {
        matrix,
        disc: Arc::clone(disc),
    })
}
