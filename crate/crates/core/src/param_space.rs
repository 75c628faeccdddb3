//! Random parameter domains, Gauss rules and tensor-product collocation grids.
//!
//! Quadrature weights are stored already multiplied by the density of their
//! dimension, so they always sum to one and an expectation is a plain weighted
//! sum over the nodes.

use crate::error::{Error, Result};
use crate::linalg::symmetric_tridiagonal_eigenvalues;

/// Which data field of a neural field problem a random parameter feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataField {
    Kernel,
    Firing,
    Forcing,
    Initial,
}

impl DataField {
    pub fn as_str(self) -> &'static str {
        match self {
            DataField::Kernel => "kernel",
            DataField::Firing => "firing",
            DataField::Forcing => "forcing",
            DataField::Initial => "initial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    /// Uniform density on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// Normal density with mean `mu` and standard deviation `sigma`.
    Normal { mu: f64, sigma: f64 },
}

impl Distribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!(
                "uniform dimension needs a < b, got [{a}, {b}]"
            )));
        }
        Ok(Distribution::Uniform { a, b })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "normal dimension needs sigma > 0, got N({mu}, {sigma})"
            )));
        }
        Ok(Distribution::Normal { mu, sigma })
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Distribution::Uniform { .. })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Uniform { a, b } => 0.5 * (a + b),
            Distribution::Normal { mu, .. } => mu,
        }
    }

    /// Gauss rule with `points` nodes for this density.
    pub fn gauss_rule(&self, points: usize) -> Result<QuadratureRule1D> {
        match *self {
            Distribution::Uniform { a, b } => gauss_legendre(points, a, b),
            Distribution::Normal { mu, sigma } => gauss_hermite(points, mu, sigma),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dimension {
    pub distribution: Distribution,
    pub label: DataField,
}

impl Dimension {
    pub fn new(distribution: Distribution, label: DataField) -> Self {
        Self {
            distribution,
            label,
        }
    }
}

/// The parameter domain `Γ = Γ_1 × … × Γ_m` with product density.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace {
    dims: Vec<Dimension>,
}

impl ParameterSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument(
                "a parameter space needs at least one dimension".into(),
            ));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Parameter point with every coordinate at its distribution mean.
    pub fn midpoint(&self) -> Vec<f64> {
        self.dims.iter().map(|d| d.distribution.mean()).collect()
    }
}

/// A one-dimensional Gauss rule for a probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub dim_index: usize,
}

impl QuadratureRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ_j w_j f(y_j)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }
}

/// Nodes and Christoffel weights of the probability measure whose Jacobi
/// matrix has the given recurrence coefficients.
fn golub_welsch(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = diag.len();
    let mut nodes = symmetric_tridiagonal_eigenvalues(diag, offdiag)?;

    // One Newton correction on the monic orthogonal polynomial of degree p.
    for x in nodes.iter_mut() {
        let (mut prev, mut cur) = (0.0, 1.0);
        let (mut dprev, mut dcur) = (0.0, 0.0);
        for k in 0..p {
            let b2 = if k == 0 {
                0.0
            } else {
                offdiag[k - 1] * offdiag[k - 1]
            };
            let next = (*x - diag[k]) * cur - b2 * prev;
            let dnext = cur + (*x - diag[k]) * dcur - b2 * dprev;
            prev = cur;
            cur = next;
            dprev = dcur;
            dcur = dnext;
        }
        if dcur != 0.0 && dcur.is_finite() && cur.is_finite() {
            let delta = cur / dcur;
            if delta.abs() < 1e-8 * (1.0 + x.abs()) {
                *x -= delta;
            }
        }
    }

    // The normalized eigenvector of the Jacobi matrix at a node is the vector of
    // orthonormal polynomial values there, so the squared first component is
    // 1 / Σ_k p̂_k(x)².
    let weights = nodes
        .iter()
        .map(|&x| {
            let (mut prev, mut cur) = (0.0, 1.0);
            let mut sum = 1.0;
            for k in 0..p - 1 {
                let b_prev = if k == 0 { 0.0 } else { offdiag[k - 1] };
                let next = ((x - diag[k]) * cur - b_prev * prev) / offdiag[k];
                prev = cur;
                cur = next;
                sum += cur * cur;
            }
            1.0 / sum
        })
        .collect();
    Ok((nodes, weights))
}

/// Makes a rule for a symmetric density exactly symmetric about zero.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let p = nodes.len();
    for j in 0..p / 2 {
        let r = p - 1 - j;
        let x = 0.5 * (nodes[r] - nodes[j]);
        let w = 0.5 * (weights[r] + weights[j]);
        nodes[j] = -x;
        nodes[r] = x;
        weights[j] = w;
        weights[r] = w;
    }
    if p % 2 == 1 {
        nodes[p / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
}

/// Gauss–Legendre rule on `[a, b]` for the uniform density `1/(b − a)`.
pub fn gauss_legendre(points: usize, a: f64, b: f64) -> Result<QuadratureRule1D> {
    if points < 1 {
        return Err(Error::InvalidArgument(
            "Gauss–Legendre needs at least one point".into(),
        ));
    }
    Distribution::uniform(a, b)?;
    let diag = vec![0.0; points];
    let offdiag: Vec<f64> = (1..points)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let (mut z, mut weights) = golub_welsch(&diag, &offdiag)?;
    symmetrize(&mut z, &mut weights);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let nodes = z.iter().map(|&z| mid + half * z).collect();
    Ok(QuadratureRule1D {
        nodes,
        weights,
        dim_index: 0,
    })
}

/// Probabilists' Gauss–Hermite rule for `N(mu, sigma²)`.
///
/// The Jacobi matrix of the standard normal has zero diagonal and
/// off-diagonal `√k`; its eigenvalues are the roots of `He_p`, which equal
/// `√2` times the physicists' Hermite roots.
pub fn gauss_hermite(points: usize, mu: f64, sigma: f64) -> Result<QuadratureRule1D> {
    if points < 1 {
        return Err(Error::InvalidArgument(
            "Gauss–Hermite needs at least one point".into(),
        ));
    }
    Distribution::normal(mu, sigma)?;
    let diag = vec![0.0; points];
    let offdiag: Vec<f64> = (1..points).map(|k| (k as f64).sqrt()).collect();
    let (mut z, mut weights) = golub_welsch(&diag, &offdiag)?;
    symmetrize(&mut z, &mut weights);
    let nodes = z.iter().map(|&z| mu + sigma * z).collect();
    Ok(QuadratureRule1D {
        nodes,
        weights,
        dim_index: 0,
    })
}

/// Barycentric weights `1 / ∏_{r≠j}(y_j − y_r)`, rescaled so the largest has
/// magnitude one.
pub fn lagrange_weights_1d(nodes: &[f64]) -> Result<Vec<f64>> {
    for (i, &a) in nodes.iter().enumerate() {
        if let Some(off) = nodes[i + 1..].iter().position(|&b| b == a) {
            return Err(Error::DuplicateNode {
                value: a,
                first: i,
                second: i + 1 + off,
            });
        }
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(j, &yj)| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != j)
                .map(|(_, &yr)| yj - yr)
                .product();
            1.0 / prod
        })
        .collect();
    let scale = weights.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
    if scale > 0.0 && scale.is_finite() {
        weights.iter_mut().for_each(|w| *w /= scale);
    }
    Ok(weights)
}

/// Values of all Lagrange basis polynomials of `nodes` at `y`, in the
/// barycentric second form. Exact Kronecker delta when `y` is a node.
pub(crate) fn lagrange_basis_at(nodes: &[f64], bary: &[f64], y: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&n| n == y) {
        let mut out = vec![0.0; nodes.len()];
        out[j] = 1.0;
        return out;
    }
    let mut terms: Vec<f64> = nodes.iter().zip(bary).map(|(&n, &w)| w / (y - n)).collect();
    let sum: f64 = terms.iter().sum();
    terms.iter_mut().for_each(|t| *t /= sum);
    terms
}

/// Tensor-product grid of Gauss nodes with `q_i + 1` points per dimension.
///
/// Nodes are enumerated with the first dimension varying fastest: the global
/// index of `(k_1, …, k_m)` is `1 + Σ_i k_i ∏_{j<i} (q_j + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    orders: Vec<usize>,
    rules: Vec<QuadratureRule1D>,
    bounded: Vec<bool>,
    bary: Vec<Vec<f64>>,
    strides: Vec<usize>,
    total: usize,
}

impl TensorGrid {
    /// Grid on `space` with `orders[i] + 1` Gauss points in dimension `i`.
    pub fn new(space: &ParameterSpace, orders: &[usize]) -> Result<Self> {
        if orders.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: orders.len(),
            });
        }
        let rules = space
            .dims()
            .iter()
            .zip(orders)
            .map(|(dim, &q)| dim.distribution.gauss_rule(q + 1))
            .collect::<Result<Vec<_>>>()?;
        let bounded = space
            .dims()
            .iter()
            .map(|d| d.distribution.is_bounded())
            .collect();
        Self::assemble(rules, bounded)
    }

    /// Grid from explicit per-dimension rules, all treated as bounded.
    pub fn from_rules(rules: Vec<QuadratureRule1D>) -> Result<Self> {
        let bounded = vec![true; rules.len()];
        Self::assemble(rules, bounded)
    }

    fn assemble(mut rules: Vec<QuadratureRule1D>, bounded: Vec<bool>) -> Result<Self> {
        if rules.is_empty() || rules.iter().any(|r| r.is_empty()) {
            return Err(Error::InvalidArgument(
                "tensor grid needs non-empty rules".into(),
            ));
        }
        for (i, r) in rules.iter_mut().enumerate() {
            r.dim_index = i;
        }
        let orders: Vec<usize> = rules.iter().map(|r| r.len() - 1).collect();
        let bary = rules
            .iter()
            .map(|r| lagrange_weights_1d(&r.nodes))
            .collect::<Result<Vec<_>>>()?;
        let mut strides = Vec::with_capacity(orders.len());
        let mut total = 1usize;
        for &q in &orders {
            strides.push(total);
            total = total
                .checked_mul(q + 1)
                .ok_or_else(|| Error::InvalidArgument("tensor grid too large".into()))?;
        }
        Ok(Self {
            orders,
            rules,
            bounded,
            bary,
            strides,
            total,
        })
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn rules(&self) -> &[QuadratureRule1D] {
        &self.rules
    }

    pub fn dims(&self) -> usize {
        self.orders.len()
    }

    /// `d(q) = ∏ (q_i + 1)`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// One-based global index of a multi-index.
    pub fn global_index(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.orders.len() || multi.iter().zip(&self.orders).any(|(&k, &q)| k > q)
        {
            return Err(Error::IndexOutOfRange {
                index: multi.to_vec(),
                orders: self.orders.clone(),
            });
        }
        Ok(1 + multi
            .iter()
            .zip(&self.strides)
            .map(|(k, s)| k * s)
            .sum::<usize>())
    }

    /// Inverse of [`global_index`](Self::global_index).
    pub fn multi_index(&self, k: usize) -> Result<Vec<usize>> {
        if k < 1 || k > self.total {
            return Err(Error::IndexOutOfRange {
                index: vec![k],
                orders: self.orders.clone(),
            });
        }
        let mut rest = k - 1;
        Ok(self
            .orders
            .iter()
            .map(|&q| {
                let ki = rest % (q + 1);
                rest /= q + 1;
                ki
            })
            .collect())
    }

    /// The parameter point with one-based global index `k`.
    pub fn node(&self, k: usize) -> Result<Vec<f64>> {
        let multi = self.multi_index(k)?;
        Ok(multi
            .iter()
            .zip(&self.rules)
            .map(|(&ki, r)| r.nodes[ki])
            .collect())
    }

    /// Product weight `ω_k = ∏_i w_{i,k_i}`.
    pub fn weight(&self, k: usize) -> Result<f64> {
        let multi = self.multi_index(k)?;
        Ok(multi
            .iter()
            .zip(&self.rules)
            .map(|(&ki, r)| r.weights[ki])
            .product())
    }

    /// All product weights in global-index order.
    pub fn weights(&self) -> Vec<f64> {
        (1..=self.total).map(|k| self.weight(k).unwrap()).collect()
    }

    /// Dimensions that are unbounded and where `y` lies outside the hull of
    /// the Gauss nodes, i.e. where an interpolant would extrapolate.
    pub fn extrapolated_dims(&self, y: &[f64]) -> Vec<usize> {
        y.iter()
            .zip(&self.rules)
            .zip(&self.bounded)
            .enumerate()
            .filter(|(_, ((&yi, r), &bounded))| {
                !bounded && (yi < r.nodes[0] || yi > r.nodes[r.len() - 1])
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Values `l_k(y)` of all tensor Lagrange basis polynomials, in
    /// global-index order.
    pub fn basis_weights(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dims() {
            return Err(Error::LengthMismatch {
                expected: self.dims(),
                got: y.len(),
            });
        }
        let mut out = vec![1.0];
        for (i, rule) in self.rules.iter().enumerate() {
            let basis = lagrange_basis_at(&rule.nodes, &self.bary[i], y[i]);
            // the new dimension has the larger stride
            out = basis
                .iter()
                .flat_map(|&l| out.iter().map(move |&o| o * l))
                .collect();
        }
        Ok(out)
    }

    /// Tensor Lagrange interpolation of `values` (indexed by global index) at
    /// `y`, contracting one dimension at a time.
    pub fn lagrange_eval(&self, values: &[f64], y: &[f64]) -> Result<f64> {
        if values.len() != self.total {
            return Err(Error::LengthMismatch {
                expected: self.total,
                got: values.len(),
            });
        }
        if y.len() != self.dims() {
            return Err(Error::LengthMismatch {
                expected: self.dims(),
                got: y.len(),
            });
        }
        if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite parameter {bad}"
            )));
        }
        let mut current = values.to_vec();
        for (i, rule) in self.rules.iter().enumerate() {
            let basis = lagrange_basis_at(&rule.nodes, &self.bary[i], y[i]);
            let p = basis.len();
            current = current
                .chunks_exact(p)
                .map(|block| block.iter().zip(&basis).map(|(v, l)| v * l).sum())
                .collect();
        }
        Ok(current[0])
    }
}

/// All grid points `y_k` in global-index order.
pub fn tensor_nodes(grid: &TensorGrid) -> Vec<Vec<f64>> {
    (1..=grid.total()).map(|k| grid.node(k).unwrap()).collect()
}

/// Free-function form of [`TensorGrid::lagrange_eval`].
pub fn tensor_lagrange_eval(grid: &TensorGrid, values: &[f64], y: &[f64]) -> Result<f64> {
    grid.lagrange_eval(values, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;

    /// Independent Golub–Welsch: dense symmetric eigensolver, weights from the
    /// first eigenvector component.
    fn golub_welsch_oracle(offdiag: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = offdiag.len() + 1;
        let jac = DMatrix::from_fn(p, p, |i, j| {
            if i + 1 == j {
                offdiag[i]
            } else if j + 1 == i {
                offdiag[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..p)
            .map(|c| (eig.eigenvalues[c], eig.eigenvectors[(0, c)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.into_iter().unzip()
    }

    fn uniform_moment(d: i32, a: f64, b: f64) -> f64 {
        (b.powi(d + 1) - a.powi(d + 1)) / ((d + 1) as f64 * (b - a))
    }

    fn normal_moments(max: usize, mu: f64, sigma: f64) -> Vec<f64> {
        let mut m = vec![1.0, mu];
        for d in 2..=max {
            m.push(mu * m[d - 1] + (d - 1) as f64 * sigma * sigma * m[d - 2]);
        }
        m
    }

    #[test]
    fn gauss_legendre_one_point_is_midpoint() {
        let r = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_eq!(r.weights, vec![1.0]);
    }

    #[test]
    fn gauss_legendre_two_points_match_oracle() {
        let (on, ow) = golub_welsch_oracle(&[1.0 / 3f64.sqrt()]);
        assert!((on[0] + 0.5773502691896258).abs() < 1e-15);
        assert!((on[1] - 0.5773502691896258).abs() < 1e-15);
        assert!((ow[0] - 0.5).abs() < 1e-15 && (ow[1] - 0.5).abs() < 1e-15);

        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        for j in 0..2 {
            assert!((r.nodes[j] - on[j]).abs() < 1e-15);
            assert!((r.weights[j] - ow[j]).abs() < 1e-15);
        }
        assert!((r.integrate(|y| y * y) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_hermite_small_rules() {
        let r = gauss_hermite(1, 0.0, 1.0).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_eq!(r.weights, vec![1.0]);

        let (on, ow) = golub_welsch_oracle(&[1.0]);
        let r = gauss_hermite(2, 0.0, 1.0).unwrap();
        assert!((r.nodes[0] + 1.0).abs() < 1e-15 && (r.nodes[1] - 1.0).abs() < 1e-15);
        for j in 0..2 {
            assert!((r.nodes[j] - on[j]).abs() < 1e-15);
            assert!((r.weights[j] - ow[j]).abs() < 1e-15);
        }
        assert!((r.integrate(|y| y * y) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rules_agree_with_dense_oracle_for_larger_orders() {
        for p in [3usize, 8, 17, 33] {
            let off: Vec<f64> = (1..p)
                .map(|k| {
                    let k = k as f64;
                    k / (4.0 * k * k - 1.0).sqrt()
                })
                .collect();
            let (on, ow) = golub_welsch_oracle(&off);
            let r = gauss_legendre(p, -1.0, 1.0).unwrap();
            for j in 0..p {
                assert!((r.nodes[j] - on[j]).abs() < 1e-13);
                assert!((r.weights[j] - ow[j]).abs() < 1e-13 * (1.0 + ow[j]));
            }
        }
    }

    #[test]
    fn invalid_rule_arguments() {
        assert!(gauss_legendre(0, -1.0, 1.0).is_err());
        assert!(gauss_legendre(3, 1.0, 1.0).is_err());
        assert!(gauss_hermite(0, 0.0, 1.0).is_err());
        assert!(gauss_hermite(3, 0.0, 0.0).is_err());
        assert!(gauss_hermite(3, 0.0, -1.0).is_err());
    }

    #[test]
    fn quadrature_exactness_uniform() {
        for &(a, b) in &[(-1.0, 1.0), (-2.0, 0.5), (1.25, 1.75), (0.0, 4.0)] {
            for p in 1..=20usize {
                let r = gauss_legendre(p, a, b).unwrap();
                for d in 0..=(2 * p - 1) as i32 {
                    let exact = uniform_moment(d, a, b);
                    let got = r.integrate(|y| y.powi(d));
                    assert!(
                        (got - exact).abs() <= 1e-12 * (1.0 + exact.abs()),
                        "p={p} d={d} [{a},{b}]: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn quadrature_exactness_normal() {
        for &(mu, sigma) in &[(0.0, 1.0), (1.5, 0.144), (1.0, 0.25), (-0.3, 0.7)] {
            for p in 1..=12usize {
                let r = gauss_hermite(p, mu, sigma).unwrap();
                let m = normal_moments(2 * p - 1, mu, sigma);
                for d in 0..=2 * p - 1 {
                    let got = r.integrate(|y| y.powi(d as i32));
                    // odd moments cancel, so measure against E|Y|^d
                    let scale = r.integrate(|y| y.abs().powi(d as i32));
                    assert!(
                        (got - m[d]).abs() <= 1e-12 * (1.0 + scale),
                        "p={p} d={d} N({mu},{sigma}): {got} vs {}",
                        m[d]
                    );
                }
            }
        }
    }

    #[test]
    fn rules_are_ordered_positive_and_normalized() {
        for p in 1..=64usize {
            for r in [
                gauss_legendre(p, -3.0, 5.0).unwrap(),
                gauss_hermite(p, 0.5, 2.0).unwrap(),
            ] {
                assert!(r.nodes.windows(2).all(|w| w[0] < w[1]), "p={p}");
                assert!(r.weights.iter().all(|&w| w > 0.0), "p={p}");
                let s: f64 = r.weights.iter().sum();
                assert!((s - 1.0).abs() <= 1e-13, "p={p}: {s}");
            }
        }
    }

    #[test]
    fn global_index_examples() {
        let rule = |p| gauss_legendre(p, -1.0, 1.0).unwrap();
        let g = TensorGrid::from_rules(vec![rule(2), rule(2)]).unwrap();
        assert_eq!(g.global_index(&[0, 0]).unwrap(), 1);
        assert_eq!(g.global_index(&[1, 1]).unwrap(), 4);
        assert!(g.global_index(&[2, 0]).is_err());
        assert!(g.global_index(&[0]).is_err());

        let g = TensorGrid::from_rules(vec![rule(2), rule(3), rule(3)]).unwrap();
        assert_eq!(g.global_index(&[1, 0, 2]).unwrap(), 14);
        assert_eq!(g.total(), 18);
    }

    fn grid_with_orders(orders: &[usize]) -> TensorGrid {
        TensorGrid::from_rules(
            orders
                .iter()
                .map(|&q| gauss_legendre(q + 1, -1.0, 1.0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    /// Every order vector with `d(q) ≤ 256`, up to three dimensions.
    fn small_order_vectors() -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for a in 0..256usize {
            out.push(vec![a]);
            for b in 0..256usize {
                if (a + 1) * (b + 1) > 256 {
                    break;
                }
                out.push(vec![a, b]);
                for c in 0..256usize {
                    if (a + 1) * (b + 1) * (c + 1) > 256 {
                        break;
                    }
                    out.push(vec![a, b, c]);
                }
            }
        }
        out
    }

    #[test]
    fn global_index_is_a_bijection_for_small_grids() {
        for orders in small_order_vectors() {
            let g = grid_with_orders(&orders);
            let mut seen = vec![false; g.total()];
            // enumerate multi-indices independently of the stride formula
            let mut multi = vec![0usize; orders.len()];
            loop {
                let k = g.global_index(&multi).unwrap();
                assert!(k >= 1 && k <= g.total());
                assert!(!seen[k - 1], "collision at {multi:?} for {orders:?}");
                seen[k - 1] = true;
                assert_eq!(g.multi_index(k).unwrap(), multi);
                let mut i = 0;
                while i < multi.len() {
                    multi[i] += 1;
                    if multi[i] <= orders[i] {
                        break;
                    }
                    multi[i] = 0;
                    i += 1;
                }
                if i == multi.len() {
                    break;
                }
            }
            assert!(seen.iter().all(|&s| s));
            for k in 1..=g.total() {
                assert_eq!(g.global_index(&g.multi_index(k).unwrap()).unwrap(), k);
            }
        }
    }

    #[test]
    fn tensor_nodes_examples() {
        let s = 1.0 / 3f64.sqrt();
        let g = grid_with_orders(&[1]);
        let n = tensor_nodes(&g);
        assert!((n[0][0] + s).abs() < 1e-15 && (n[1][0] - s).abs() < 1e-15);

        let g = TensorGrid::from_rules(vec![
            gauss_legendre(1, 0.0, 2.0).unwrap(),
            gauss_hermite(1, 3.0, 1.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(tensor_nodes(&g), vec![vec![1.0, 3.0]]);

        let g = grid_with_orders(&[1, 1]);
        let n = tensor_nodes(&g);
        let expected = [[-s, -s], [s, -s], [-s, s], [s, s]];
        for (got, want) in n.iter().zip(&expected) {
            assert!((got[0] - want[0]).abs() < 1e-15 && (got[1] - want[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn barycentric_weight_examples() {
        let w = lagrange_weights_1d(&[-1.0, 1.0]).unwrap();
        assert!((w[0] / w[1] + 1.0).abs() < 1e-15);
        assert_eq!(lagrange_weights_1d(&[0.0]).unwrap(), vec![1.0]);
        let w = lagrange_weights_1d(&[-1.0, 0.0, 1.0]).unwrap();
        // direct product formula: 1/2, -1, 1/2
        let direct = [0.5, -1.0, 0.5];
        let ratio = w[1] / direct[1];
        for j in 0..3 {
            assert!((w[j] - ratio * direct[j]).abs() < 1e-15);
        }
        assert!(matches!(
            lagrange_weights_1d(&[0.0, 1.0, 0.0]),
            Err(Error::DuplicateNode {
                first: 0,
                second: 2,
                ..
            })
        ));
    }

    #[test]
    fn lagrange_eval_examples() {
        let g = grid_with_orders(&[1, 1]);
        let c = vec![2.5; 4];
        assert!(
            (g.lagrange_eval(&c, &[0.3, -0.9]).unwrap() - 2.5).abs() <= 4.0 * f64::EPSILON * 2.5
        );

        let nodes = tensor_nodes(&g);
        let vals: Vec<f64> = nodes.iter().map(|y| y[0] * y[1]).collect();
        for y in [[0.2, 0.7], [-3.0, 4.0], [0.0, 0.0]] {
            let got = g.lagrange_eval(&vals, &y).unwrap();
            assert!((got - y[0] * y[1]).abs() < 1e-14);
        }
        for (k, y) in nodes.iter().enumerate() {
            assert_eq!(g.lagrange_eval(&vals, y).unwrap(), vals[k]);
        }
        assert!(matches!(
            g.lagrange_eval(&vals[..3], &[0.0, 0.0]),
            Err(Error::LengthMismatch {
                expected: 4,
                got: 3
            })
        ));
    }

    #[test]
    fn extrapolation_flags_only_unbounded_dims() {
        let space = ParameterSpace::new(vec![
            Dimension::new(Distribution::uniform(0.0, 1.0).unwrap(), DataField::Forcing),
            Dimension::new(Distribution::normal(0.0, 1.0).unwrap(), DataField::Initial),
        ])
        .unwrap();
        let g = TensorGrid::new(&space, &[2, 2]).unwrap();
        assert!(g.extrapolated_dims(&[0.5, 0.0]).is_empty());
        assert_eq!(g.extrapolated_dims(&[5.0, 9.0]), vec![1]);
    }

    proptest! {
        #[test]
        fn lagrange_reproduces_tensor_polynomials(
            q1 in 0usize..6, q2 in 0usize..5, q3 in 0usize..4,
            seed in proptest::collection::vec(-1.0f64..1.0, 120),
            pts in proptest::collection::vec(-1.5f64..1.5, 300),
        ) {
            let orders = [q1, q2, q3];
            let space = ParameterSpace::new(vec![
                Dimension::new(Distribution::uniform(-1.0, 1.0).unwrap(), DataField::Kernel),
                Dimension::new(Distribution::uniform(0.5, 2.0).unwrap(), DataField::Forcing),
                Dimension::new(Distribution::normal(0.2, 0.5).unwrap(), DataField::Initial),
            ]).unwrap();
            let g = TensorGrid::new(&space, &orders).unwrap();
            // p(y) = Σ c_{abc} y1^a y2^b y3^c with a ≤ q1, b ≤ q2, c ≤ q3
            let poly = |y: &[f64]| {
                let mut s = 0.0;
                let mut idx = 0;
                for a in 0..=q1 { for b in 0..=q2 { for c in 0..=q3 {
                    s += seed[idx % seed.len()] * y[0].powi(a as i32) * y[1].powi(b as i32) * y[2].powi(c as i32);
                    idx += 1;
                }}}
                s
            };
            let vals: Vec<f64> = tensor_nodes(&g).iter().map(|y| poly(y)).collect();
            for chunk in pts.chunks_exact(3).take(100) {
                let y = [chunk[0], 1.25 + 0.5 * chunk[1], 0.2 + 0.5 * chunk[2]];
                let exact = poly(&y);
                let got = g.lagrange_eval(&vals, &y).unwrap();
                let scale = 1.0 + exact.abs();
                prop_assert!((got - exact).abs() <= 1e-10 * scale, "{got} vs {exact}");
            }
        }
    }
}
