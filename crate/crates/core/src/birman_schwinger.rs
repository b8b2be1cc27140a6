//! Nyström discretization of `φ ↦ q · T_λ(sgn · φ)`.
//!
//! If `f` is an eigenfunction for `λ ∈ ℂ⁺` then `φ = q f` solves
//! `φ + q T_λ(sgn φ) = 0`, so zeros of `det(I + M(λ))` with
//! `M_jk ≈ q(x_j) K_λ(x_j, x_k) sgn(x_k) w_k` are eigenvalue candidates.
//!
//! The kernel has a derivative jump on the diagonal `y = x`, which limits
//! the plain Nyström rule to algebraic convergence. [`NystromRule::Corrected`]
//! fixes this in two steps.
//!
//! 1. Entries coupling a node to its own panel become exact moments
//!    `∫_panel K_λ(x_j, y) ℓ_k(y) dy` of the panel's Lagrange basis, computed
//!    by Gauss–Legendre on either side of the kink. The matrix `W` then acts
//!    on smooth functions to full panel accuracy.
//! 2. Each diagonal moment still carries an `O(h²)` kink error, and summed
//!    over `O(1/h)` nodes they shift `tr W` by `O(h)`. The determinant is
//!    therefore taken through the regularized determinant
//!    `det₃(I + A) = det(I + A) e^{-tr A + tr A²/2}`, which is insensitive to
//!    those errors. It is evaluated on `W` and recombined with accurate
//!    quadratures of `tr A = ∫ q K(x, x) sgn` and
//!    `tr A² = ∬ q(x) K(x, y) sgn(y) q(y) K(y, x) sgn(x)`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{LogDet, Lu, Matrix};
use crate::potential::Potential;
use crate::quadrature::{gauss_legendre, lagrange_basis, CompositeGrid, PanelRule};
use crate::resolvent::SpectralParameter;
use crate::{Error, Result};

/// Order of the sub-rule used on either side of the diagonal kink.
const CORRECTION_ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NystromRule {
    /// `q(x_j) K(x_j, x_k) sgn(x_k) w_k` everywhere.
    Plain,
    /// Exact Lagrange moments on the diagonal panel block and a
    /// trace-corrected determinant; see the module docs.
    #[default]
    Corrected,
}

/// Resolution of the Nyström grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOptions {
    /// Gauss–Legendre nodes per panel.
    pub panel_order: usize,
    /// Divides the node spacing; 2 roughly doubles the node count.
    pub density_factor: f64,
    pub rule: NystromRule,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            panel_order: 10,
            density_factor: 1.0,
            rule: NystromRule::Corrected,
        }
    }
}

/// Per target node of the reference panel: sub-rule weights on `[-1, t_j]`
/// and `[t_j, 1]` times the Lagrange basis at the sub-nodes.
#[derive(Debug)]
struct CorrectionTable {
    order: usize,
    /// `points[j]`: the `2m` sub-nodes for target `j`, on `[-1, 1]`.
    points: Vec<Vec<f64>>,
    /// `moments[j][i * n + k] = ω_i ℓ_k(points[j][i])`.
    moments: Vec<Vec<f64>>,
    /// `weights[j][i] = ω_i`.
    weights: Vec<Vec<f64>>,
}

impl CorrectionTable {
    fn new(rule: &PanelRule) -> Result<Self> {
        let sub = gauss_legendre(CORRECTION_ORDER)?;
        let bary = rule.barycentric_weights();
        let n = rule.order();
        let mut points = Vec::with_capacity(n);
        let mut moments = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &t in rule.nodes() {
            let mut pts = Vec::with_capacity(2 * CORRECTION_ORDER);
            let mut mom = Vec::with_capacity(2 * CORRECTION_ORDER * n);
            let mut wts = Vec::with_capacity(2 * CORRECTION_ORDER);
            for (lo, hi) in [(-1.0, t), (t, 1.0)] {
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                for (&s, &w) in sub.nodes().iter().zip(sub.weights()) {
                    let p = mid + half * s;
                    pts.push(p);
                    wts.push(w * half);
                    mom.extend(lagrange_basis(rule.nodes(), &bary, p).into_iter().map(|l| l * w * half));
                }
            }
            points.push(pts);
            moments.push(mom);
            weights.push(wts);
        }
        Ok(Self {
            order: n,
            points,
            moments,
            weights,
        })
    }
}

/// A Nyström grid with the potential and signs sampled on it.
#[derive(Debug, Clone)]
pub struct NystromSystem {
    grid: CompositeGrid,
    q_values: Vec<f64>,
    sign_values: Vec<f64>,
    rule: NystromRule,
    correction: Option<Arc<CorrectionTable>>,
    /// `q` at every target's sub-nodes, `2m` per grid node (corrected rule).
    q_sub: Vec<f64>,
}

/// `det(I + M(λ))` with a conditioning witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicValue {
    pub lambda: SpectralParameter,
    pub det_value: Complex64,
    /// `ln |det|`, finite even where `det_value` under- or overflows.
    pub log_abs_det: f64,
    pub smallest_singular_value: f64,
}

/// One point of a [`candidate_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub lambda: Complex64,
    pub det: Complex64,
    pub abs_det: f64,
}

/// Closed rectangle `[re_min, re_max] × [im_min, im_max]` in the upper
/// half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Self {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        if [re_min, re_max, im_min, im_max].iter().any(|v| !v.is_finite())
            || !(re_min < re_max && 0.0 < im_min && im_min < im_max)
        {
            return Err(Error::Domain(format!(
                "rectangle [{re_min}, {re_max}] × [{im_min}, {im_max}] is not a proper box in the upper half-plane"
            )));
        }
        Ok(r)
    }

    /// Largest `|λ|` over the rectangle.
    pub fn max_modulus(&self) -> f64 {
        self.re_min.abs().max(self.re_max.abs()).hypot(self.im_max)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

/// Sampled Nyström entries for the plain rule; rows where `q` vanishes are zero.
pub fn assemble(sp: &SpectralParameter, q: &Potential, grid: &CompositeGrid) -> Result<Matrix> {
    let sys = NystromSystem::new(q, grid.clone(), NystromRule::Plain)?;
    Ok(sys.assemble(sp))
}

/// `det(I + M(λ))` and the smallest singular value of `I + M(λ)`.
pub fn char_det(sp: &SpectralParameter, sys: &NystromSystem) -> Result<CharacteristicValue> {
    sys.char_det(sp)
}

/// `det(I + M)` on a `density × density` lattice over `region`, rows of
/// constant `Im λ` from bottom to top, each left to right.
pub fn candidate_scan(sys: &NystromSystem, region: &Rectangle, density: usize) -> Result<Vec<ScanSample>> {
    let points = lattice(region, density, density)?;
    points
        .par_iter()
        .map(|&lambda| {
            let det = sys.determinant(&SpectralParameter::new(lambda)?).value();
            Ok(ScanSample {
                lambda,
                det,
                abs_det: det.norm(),
            })
        })
        .collect()
}

/// Regular `nx × ny` lattice including the rectangle's corners.
pub fn lattice(region: &Rectangle, nx: usize, ny: usize) -> Result<Vec<Complex64>> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput("scan density must be at least 2".into()));
    }
    let at = |lo: f64, hi: f64, i: usize, n: usize| {
        if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * (i as f64 / (n - 1) as f64)
        }
    };
    Ok((0..ny)
        .flat_map(|j| {
            (0..nx).map(move |i| {
                Complex64::new(
                    at(region.re_min, region.re_max, i, nx),
                    at(region.im_min, region.im_max, j, ny),
                )
            })
        })
        .collect())
}

impl NystromSystem {
    /// Samples `q` on `grid` after checking the grid has an edge at 0 and
    /// covers the support.
    pub fn new(q: &Potential, grid: CompositeGrid, rule: NystromRule) -> Result<Self> {
        if !grid.has_edge(0.0) {
            return Err(Error::Domain("Nyström grid needs a panel edge at x = 0".into()));
        }
        if let Some((lo, hi)) = q.support_hull() {
            if grid.start() > lo || grid.end() < hi {
                return Err(Error::Domain(format!(
                    "grid [{}, {}] does not cover the support [{lo}, {hi}]",
                    grid.start(),
                    grid.end()
                )));
            }
        }
        if grid.len() < 2 {
            return Err(Error::Domain("Nyström system needs at least two nodes".into()));
        }
        // Samples at interior Gauss nodes never hit a jump of q, but a panel
        // straddling one would be inaccurate; require q's breakpoints as edges.
        for b in q.breakpoints() {
            if b > grid.start() && b < grid.end() && !grid.has_edge(b) {
                return Err(Error::Domain(format!("potential breakpoint {b} is not a panel edge")));
            }
        }
        let q_values: Vec<f64> = grid.nodes().iter().map(|&x| q.eval(x)).collect();
        if q_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("potential is not finite on the grid".into()));
        }
        let sign_values = grid
            .nodes()
            .iter()
            .map(|&x| if x >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        let correction = match rule {
            NystromRule::Plain => None,
            NystromRule::Corrected => Some(Arc::new(CorrectionTable::new(grid.rule())?)),
        };
        let mut q_sub = Vec::new();
        if let Some(table) = &correction {
            let order = table.order;
            q_sub.reserve(grid.len() * 2 * CORRECTION_ORDER);
            for j in 0..grid.len() {
                let (a, b) = grid.panel_bounds(j / order);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                // Sub-nodes are interior to the panel, so q is sampled on
                // the correct side of any jump at the panel edges.
                q_sub.extend(table.points[j % order].iter().map(|&t| q.eval(mid + half * t)));
            }
        }
        Ok(Self {
            grid,
            q_values,
            sign_values,
            rule,
            correction,
            q_sub,
        })
    }

    /// Grid resolving the kernel's oscillation for every `|λ| ≤ lambda_max`.
    ///
    /// The grid spans the support together with 0. Stretches where `q`
    /// vanishes get a single panel, since their rows are zero anyway.
    pub fn for_spectral_radius(q: &Potential, lambda_max: f64, opts: &GridOptions) -> Result<Self> {
        if !(opts.density_factor > 0.0 && opts.density_factor.is_finite()) {
            return Err(Error::InvalidInput("density factor must be positive".into()));
        }
        let rule = Arc::new(gauss_legendre(opts.panel_order)?);
        let (lo, hi) = q.support_hull().unwrap_or((-1.0, 1.0));
        let (lo, hi) = (lo.min(0.0), hi.max(0.0));
        let spacing = 0.1f64.min(0.25 / lambda_max.max(0.0).sqrt()) / opts.density_factor;
        let width = spacing * opts.panel_order as f64;
        let mut cuts: Vec<f64> = q
            .breakpoints()
            .into_iter()
            .filter(|&b| b > lo && b < hi)
            .chain([lo, 0.0, hi])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![cuts[0]];
        for w in cuts.windows(2) {
            let panels = if q.is_zero_on(w[0], w[1]) {
                1
            } else {
                ((w[1] - w[0]) / width).ceil().max(1.0) as usize
            };
            for i in 1..panels {
                edges.push(w[0] + (w[1] - w[0]) * (i as f64 / panels as f64));
            }
            edges.push(w[1]);
        }
        let grid = CompositeGrid::from_edges(edges, rule)?;
        Self::new(q, grid, opts.rule)
    }

    pub fn grid(&self) -> &CompositeGrid {
        &self.grid
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn sign_values(&self) -> &[f64] {
        &self.sign_values
    }

    pub fn matrix_dim(&self) -> usize {
        self.grid.len()
    }

    pub fn rule(&self) -> NystromRule {
        self.rule
    }

    /// `M(λ)`: the plain Nyström matrix, or its corrected counterpart `W`.
    pub fn assemble(&self, sp: &SpectralParameter) -> Matrix {
        self.assemble_with_traces(sp).0
    }

    /// The matrix together with, per row, the plain diagonal entry and the
    /// own-panel part of `tr A²` (both zero for the plain rule).
    fn assemble_with_traces(&self, sp: &SpectralParameter) -> (Matrix, Vec<(Complex64, Complex64)>) {
        let n = self.grid.len();
        let order = self.grid.rule().order();
        let nodes = self.grid.nodes();
        let weights = self.grid.weights();
        let zero = Complex64::new(0.0, 0.0);
        let mut data = vec![zero; n * n];
        let mut traces = vec![(zero, zero); n];
        data.par_chunks_mut(n)
            .zip(traces.par_iter_mut())
            .enumerate()
            .for_each(|(j, (row, trace))| {
                let qj = self.q_values[j];
                if qj == 0.0 {
                    return;
                }
                let xj = nodes[j];
                for (k, entry) in row.iter_mut().enumerate() {
                    *entry = sp.kernel(xj, nodes[k]).total * (qj * self.sign_values[k] * weights[k]);
                }
                let Some(table) = &self.correction else {
                    return;
                };
                let panel = j / order;
                let local = j % order;
                let (a, b) = self.grid.panel_bounds(panel);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                let base = panel * order;
                let moments = &table.moments[local];
                let q_sub = &self.q_sub[j * 2 * CORRECTION_ORDER..(j + 1) * 2 * CORRECTION_ORDER];
                let mut block = vec![zero; order];
                let mut own_square = zero;
                for (i, &t) in table.points[local].iter().enumerate() {
                    let y = mid + half * t;
                    let kv = sp.kernel(xj, y).total;
                    for (acc, &m) in block.iter_mut().zip(&moments[i * order..(i + 1) * order]) {
                        *acc += kv * m;
                    }
                    own_square += kv * sp.kernel(y, xj).total * (q_sub[i] * table.weights[local][i]);
                }
                let sign = self.sign_values[j];
                // sgn(y) = sgn(x_j) on the own panel, so sgn² = 1 in tr A².
                *trace = (row[j], own_square * (qj * half * weights[j]));
                for (k, v) in block.into_iter().enumerate() {
                    row[base + k] = v * (qj * sign * half);
                }
            });
        (Matrix::from_rows(n, data), traces)
    }

    /// `ln det(I + M)` correction for the corrected rule: accurate traces of
    /// `A` and `A²` in place of those of `W`.
    fn trace_correction(&self, m: &Matrix, traces: &[(Complex64, Complex64)]) -> Complex64 {
        if self.correction.is_none() {
            return Complex64::new(0.0, 0.0);
        }
        let order = self.grid.rule().order();
        let mut first = Complex64::new(0.0, 0.0);
        let mut second = Complex64::new(0.0, 0.0);
        for (j, &(plain_diag, own_square)) in traces.iter().enumerate() {
            if self.q_values[j] == 0.0 {
                continue;
            }
            first += plain_diag - m[(j, j)];
            let base = (j / order) * order;
            let discrete: Complex64 = (base..base + order).map(|k| m[(j, k)] * m[(k, j)]).sum();
            second += own_square - discrete;
        }
        first - 0.5 * second
    }

    fn factor(&self, sp: &SpectralParameter) -> (Lu, Complex64) {
        let (mut m, traces) = self.assemble_with_traces(sp);
        let correction = self.trace_correction(&m, &traces);
        for i in 0..m.dim() {
            m[(i, i)] += 1.0;
        }
        (Lu::factor(m), correction)
    }

    /// `det(I + M(λ))` alone, the quantity the zero search needs.
    pub fn determinant(&self, sp: &SpectralParameter) -> LogDet {
        let (lu, correction) = self.factor(sp);
        let mut d = lu.log_det();
        if !d.is_singular() {
            d.log_abs += correction.re;
            d.phase *= Complex64::from_polar(1.0, correction.im);
        }
        d
    }

    pub fn char_det(&self, sp: &SpectralParameter) -> Result<CharacteristicValue> {
        let (lu, correction) = self.factor(sp);
        let mut d = lu.log_det();
        if !d.is_singular() {
            d.log_abs += correction.re;
            d.phase *= Complex64::from_polar(1.0, correction.im);
        }
        let value = d.value();
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Domain(format!(
                "det(I + M) overflows at λ = {} (ln|det| = {})",
                sp.lambda(),
                d.log_abs
            )));
        }
        Ok(CharacteristicValue {
            lambda: *sp,
            det_value: value,
            log_abs_det: d.log_abs,
            smallest_singular_value: lu.smallest_singular_value(),
        })
    }
}
