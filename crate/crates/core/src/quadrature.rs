//! Gauss–Legendre panel quadrature.
//!
//! Three layers are provided:
//!
//! - [`PanelRule`]: an `n`-point Gauss–Legendre rule on `[-1, 1]`, together
//!   with a spectral integration matrix for running integrals inside a panel;
//! - [`CompositeGrid`]: a panelled interval whose panel edges always include
//!   the caller's breakpoints (jumps of the potential, the sign change at 0);
//! - [`integrate`] / [`integrate_with_breaks`]: adaptive bisection driven by
//!   the discrepancy between a panel and its two halves.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::{Error, Result};

/// Largest supported rule order.
pub const MAX_ORDER: usize = 64;

/// Values that can be integrated: `f64` and `Complex64`.
pub trait Integrand: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Row-major `n × n`: entry `(i, j)` is `∫_{-1}^{t_i} ℓ_j(t) dt` for the
    /// Lagrange basis `ℓ_j` on the nodes.
    integration: Vec<f64>,
}

/// Builds the `n`-point Gauss–Legendre rule, `1 ≤ n ≤ 64`.
///
/// Nodes are Newton-refined roots of the Legendre polynomial `P_n`, then
/// symmetrized so that `t_i = -t_{n-1-i}` holds bit-for-bit.
pub fn gauss_legendre(n: usize) -> Result<PanelRule> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidInput(format!(
            "Gauss-Legendre order {n} outside 1..={MAX_ORDER}"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Descending guess for the i-th largest root.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, t);
            derivative = dp;
            let step = p / dp;
            t -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, t);
        if dp.is_finite() {
            derivative = dp;
        }
        let w = 2.0 / ((1.0 - t * t) * derivative * derivative);
        nodes[n - 1 - i] = t;
        nodes[i] = -t;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let integration = integration_matrix(&nodes, &weights);
    Ok(PanelRule {
        nodes,
        weights,
        integration,
    })
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * t * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (t * p - p_prev) / (t * t - 1.0);
    (p, dp)
}

/// Barycentric weights for Lagrange interpolation on `nodes`.
fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &xk)| xj - xk)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Values of every Lagrange basis polynomial at `t`.
pub(crate) fn lagrange_basis(nodes: &[f64], bary: &[f64], t: f64) -> Vec<f64> {
    if let Some(hit) = nodes.iter().position(|&x| x == t) {
        let mut out = vec![0.0; nodes.len()];
        out[hit] = 1.0;
        return out;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(&x, &b)| b / (t - x)).collect();
    let denom: f64 = terms.iter().sum();
    terms.into_iter().map(|v| v / denom).collect()
}

fn integration_matrix(nodes: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let bary = barycentric_weights(nodes);
    let mut matrix = vec![0.0; n * n];
    for (i, &ti) in nodes.iter().enumerate() {
        let half = 0.5 * (ti + 1.0);
        for (&s, &w) in nodes.iter().zip(weights) {
            let tau = -1.0 + half * (s + 1.0);
            for (j, l) in lagrange_basis(nodes, &bary, tau).into_iter().enumerate() {
                matrix[i * n + j] += half * w * l;
            }
        }
    }
    matrix
}

impl PanelRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_{-1}^{t_i} ℓ_j` as a row-major `n × n` slice.
    pub fn integration_matrix(&self) -> &[f64] {
        &self.integration
    }

    pub fn barycentric_weights(&self) -> Vec<f64> {
        barycentric_weights(&self.nodes)
    }

    /// Applies the rule to `f` on `[a, b]`.
    pub fn apply<T: Integrand, F: Fn(f64) -> T>(&self, f: &F, a: f64, b: f64) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * t) * w;
        }
        acc * half
    }
}

/// A panelled interval with flattened nodes and weights.
#[derive(Debug, Clone)]
pub struct CompositeGrid {
    edges: Vec<f64>,
    rule: Arc<PanelRule>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeGrid {
    /// Grid with the given panel edges (strictly increasing, at least two).
    pub fn from_edges(edges: Vec<f64>, rule: Arc<PanelRule>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidInput("a grid needs at least one panel".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "panel edges must be finite and strictly increasing".into(),
            ));
        }
        let n = rule.order();
        let mut nodes = Vec::with_capacity(n * (edges.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in edges.windows(2) {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[1] + w[0]);
            for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(mid + half * t);
                weights.push(half * wt);
            }
        }
        Ok(Self {
            edges,
            rule,
            nodes,
            weights,
        })
    }

    /// `panels` equal panels on `[a, b]`.
    pub fn uniform(a: f64, b: f64, panels: usize, rule: Arc<PanelRule>) -> Result<Self> {
        if panels == 0 || a.partial_cmp(&b) != Some(Ordering::Less) {
            return Err(Error::InvalidInput(format!(
                "uniform grid needs a < b and at least one panel (got [{a}, {b}], {panels})"
            )));
        }
        let edges = (0..=panels)
            .map(|i| {
                if i == panels {
                    b
                } else {
                    a + (b - a) * (i as f64 / panels as f64)
                }
            })
            .collect();
        Self::from_edges(edges, rule)
    }

    /// Grid on `[a, b]` whose edges include every breakpoint inside the
    /// interval; each segment between breakpoints is split into equal panels
    /// no wider than `max_panel_width`.
    pub fn with_breakpoints(
        a: f64,
        b: f64,
        breakpoints: &[f64],
        max_panel_width: f64,
        rule: Arc<PanelRule>,
    ) -> Result<Self> {
        if !(max_panel_width > 0.0) {
            return Err(Error::InvalidInput("panel width must be positive".into()));
        }
        let mut cuts: Vec<f64> = std::iter::once(a)
            .chain(breakpoints.iter().copied().filter(|&x| x > a && x < b))
            .chain(std::iter::once(b))
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![cuts[0]];
        for w in cuts.windows(2) {
            let panels = ((w[1] - w[0]) / max_panel_width).ceil().max(1.0) as usize;
            for i in 1..panels {
                edges.push(w[0] + (w[1] - w[0]) * (i as f64 / panels as f64));
            }
            edges.push(w[1]);
        }
        Self::from_edges(edges, rule)
    }

    pub fn start(&self) -> f64 {
        self.edges[0]
    }

    pub fn end(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn rule(&self) -> &PanelRule {
        &self.rule
    }

    pub fn panel_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Whether `x` is one of the panel edges.
    pub fn has_edge(&self, x: f64) -> bool {
        self.edges.contains(&x)
    }

    /// Index range of the nodes in panel `p`.
    pub fn panel_nodes(&self, p: usize) -> std::ops::Range<usize> {
        let n = self.rule.order();
        p * n..(p + 1) * n
    }

    pub fn panel_bounds(&self, p: usize) -> (f64, f64) {
        (self.edges[p], self.edges[p + 1])
    }

    pub fn integrate_samples<T: Integrand>(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.nodes.len());
        values
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&v, &w)| acc + v * w)
    }

    /// Running integrals `∫_{start}^{x_j}` of the interpolated samples.
    ///
    /// Inside each panel the samples are integrated through the rule's
    /// spectral integration matrix, so the result has the full accuracy of
    /// the panel rule rather than that of a Riemann sum.
    pub fn cumulative_from_left<T: Integrand>(&self, values: &[T]) -> Vec<T> {
        debug_assert_eq!(values.len(), self.nodes.len());
        let n = self.rule.order();
        let s = &self.rule.integration;
        let mut out = Vec::with_capacity(values.len());
        let mut running = T::zero();
        for p in 0..self.panel_count() {
            let (a, b) = self.panel_bounds(p);
            let half = 0.5 * (b - a);
            let local = &values[self.panel_nodes(p)];
            for i in 0..n {
                let row = &s[i * n..(i + 1) * n];
                let partial = local.iter().zip(row).fold(T::zero(), |acc, (&v, &c)| acc + v * c);
                out.push(running + partial * half);
            }
            let total = local
                .iter()
                .zip(&self.weights[self.panel_nodes(p)])
                .fold(T::zero(), |acc, (&v, &w)| acc + v * w);
            running = running + total;
        }
        out
    }

    /// Running integrals `∫_{x_j}^{end}` of the interpolated samples.
    pub fn cumulative_from_right<T: Integrand>(&self, values: &[T]) -> Vec<T> {
        let n = self.rule.order();
        let s = &self.rule.integration;
        let mut out = vec![T::zero(); values.len()];
        let mut running = T::zero();
        for p in (0..self.panel_count()).rev() {
            let (a, b) = self.panel_bounds(p);
            let half = 0.5 * (b - a);
            let range = self.panel_nodes(p);
            let local = &values[range.clone()];
            let total = local
                .iter()
                .zip(&self.weights[range.clone()])
                .fold(T::zero(), |acc, (&v, &w)| acc + v * w);
            for i in 0..n {
                let row = &s[i * n..(i + 1) * n];
                let partial = local.iter().zip(row).fold(T::zero(), |acc, (&v, &c)| acc + v * c);
                out[range.start + i] = running + (total - partial * half);
            }
            running = running + total;
        }
        out
    }
}

/// Result of adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error_estimate: f64,
    /// False when the panel budget ran out before the estimate met `tol`.
    pub converged: bool,
    pub panels: usize,
}

/// Default panel cap for adaptive integration.
pub const MAX_ADAPTIVE_PANELS: usize = 20_000;

const ADAPTIVE_ORDER: usize = 10;

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<T: Integrand, F: Fn(f64) -> T>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral<T>> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Adaptive integral over `[breaks[0], breaks[last]]` with every entry of
/// `breaks` kept as a panel edge, so integrands may jump there.
///
/// The panel with the largest discrepancy between its one-panel and
/// two-half-panel Gauss–Legendre values is bisected until the summed
/// discrepancy drops below `tol`.
pub fn integrate_with_breaks<T: Integrand, F: Fn(f64) -> T>(f: F, breaks: &[f64], tol: f64) -> Result<Integral<T>> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(
            "integration limits must be strictly increasing (a < b)".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let rule = gauss_legendre(ADAPTIVE_ORDER)?;
    let estimate = |a: f64, b: f64| -> Panel<T> {
        let m = 0.5 * (a + b);
        let coarse = rule.apply(&f, a, b);
        let fine = rule.apply(&f, a, m) + rule.apply(&f, m, b);
        Panel {
            a,
            b,
            value: fine,
            error: (fine - coarse).magnitude(),
        }
    };
    let mut heap: BinaryHeap<Panel<T>> = breaks.windows(2).map(|w| estimate(w[0], w[1])).collect();
    let mut total_error: f64 = heap.iter().map(|p| p.error).sum();
    while total_error > tol && heap.len() < MAX_ADAPTIVE_PANELS {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let left = estimate(worst.a, mid);
        let right = estimate(mid, worst.b);
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally to stop drift in the running total.
        if heap.len().is_multiple_of(256) {
            total_error = heap.iter().map(|p| p.error).sum();
        }
    }
    total_error = heap.iter().map(|p| p.error).sum();
    if !total_error.is_finite() {
        return Err(Error::Quadrature {
            error_estimate: total_error,
            tolerance: tol,
        });
    }
    let mut panels: Vec<Panel<T>> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
    Ok(Integral {
        value,
        error_estimate: total_error,
        converged: total_error <= tol,
        panels: panels.len(),
    })
}
