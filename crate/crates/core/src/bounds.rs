//! A-priori eigenvalue bounds and eigenfunction diagnostics.
//!
//! Every non-real eigenvalue satisfies
//!
//! ```text
//! |λ| ≤ ‖q‖₁²,   |Im λ| ≤ 24√3 ‖q₋‖₁²,   |λ| ≤ (24√3 + 18) ‖q₋‖₁²,
//! ```
//!
//! and a normalized eigenfunction `f` satisfies, with
//! `U(x) = ∫_x^∞ sgn |f|²` and `V(x) = ∫_x^∞ |f'|² + q |f|²`,
//!
//! ```text
//! (a) λ U(x) = f'(x) conj(f(x)) + V(x)
//! (b) U(x), V(x) → 0 as x → -∞
//! (c) ‖f'‖₂ ≤ 2 ‖q₋‖₁ ‖f‖₂
//! (d) ‖f‖_∞ ≤ 2 √‖q₋‖₁ ‖f‖₂
//! (e) ‖q f²‖₁ ≤ 8 ‖q₋‖₁² ‖f‖₂²
//! ```
//!
//! [`evaluate_bounds`] and [`lemma_diagnostics`] measure the margins of all of
//! these for computed eigenpairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensearch::Method;
use crate::potential::{L1Norms, Potential};
use crate::quadrature::lagrange_basis;
use crate::shooting::Eigenpair;
use crate::{Error, Result};

/// `24√3`.
pub const IM_CONSTANT: f64 = 41.569_219_381_653_05;
/// `24√3 + 18`.
pub const ABS_CONSTANT: f64 = IM_CONSTANT + 18.0;

/// Relative slack on bound margins.
pub const BOUND_SLACK: f64 = 1e-9;
/// Relative slack on the eigenfunction inequalities and the energy identity.
pub const LEMMA_SLACK: f64 = 1e-6;
/// Scaled tolerance for the pointwise identity (a).
pub const IDENTITY_TOL: f64 = 1e-4;
/// Absolute tolerance for the limits (b), with `‖f‖₂ = 1`.
pub const LIMIT_TOL: f64 = 1e-6;

/// `value ≤ bound`, with `margin = bound - value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub bound: f64,
    pub value: f64,
    pub margin: f64,
    /// Margins down to `-slack` still pass.
    pub slack: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(bound: f64, value: f64, slack: f64) -> Self {
        let margin = bound - value;
        Self {
            bound,
            value,
            margin,
            slack,
            pass: margin >= -slack,
        }
    }

    /// `value / bound`; how close the bound is to being attained.
    pub fn tightness(&self) -> f64 {
        self.value / self.bound
    }
}

/// The three eigenvalue bounds at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueBounds {
    /// `|λ| ≤ ‖q‖₁²`.
    pub abs_q: BoundCheck,
    /// `|Im λ| ≤ 24√3 ‖q₋‖₁²`.
    pub im_qminus: BoundCheck,
    /// `|λ| ≤ (24√3 + 18) ‖q₋‖₁²`.
    pub abs_qminus: BoundCheck,
}

impl EigenvalueBounds {
    pub fn pass(&self) -> bool {
        self.abs_q.pass && self.im_qminus.pass && self.abs_qminus.pass
    }
}

/// Checks all three bounds. Slack is `10⁻⁹ (1 + bound)` widened by the
/// propagated quadrature error of the norms.
pub fn evaluate_bounds(lambda: Complex64, norms: &L1Norms) -> EigenvalueBounds {
    let err = norms.error_estimate;
    let slack = |bound: f64, norm: f64, c: f64| BOUND_SLACK * (1.0 + bound) + c * (2.0 * norm * err + err * err);
    let abs = lambda.norm();
    let q2 = norms.total * norms.total;
    let m2 = norms.negative * norms.negative;
    EigenvalueBounds {
        abs_q: BoundCheck::new(q2, abs, slack(q2, norms.total, 1.0)),
        im_qminus: BoundCheck::new(
            IM_CONSTANT * m2,
            lambda.im.abs(),
            slack(IM_CONSTANT * m2, norms.negative, IM_CONSTANT),
        ),
        abs_qminus: BoundCheck::new(
            ABS_CONSTANT * m2,
            abs,
            slack(ABS_CONSTANT * m2, norms.negative, ABS_CONSTANT),
        ),
    }
}

/// Norms of an eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionNorms {
    pub l2: f64,
    pub l2_derivative: f64,
    pub sup: f64,
    /// `‖q f²‖₁`.
    pub q_f2: f64,
}

/// `U` and `V` on the eigenpair's grid, with the norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionDiagnostics {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub norms: EigenfunctionNorms,
}

/// Residuals and slacks of (a)–(e) plus the full-line energy identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaChecks {
    /// `max_x |λU - f' conj f - V|`.
    pub identity_residual: f64,
    /// `|λ| ‖f‖₂² + ‖f'‖₂ ‖f‖_∞`, the scale the residual is measured against.
    pub identity_scale: f64,
    pub identity_pass: bool,
    pub limit_u: f64,
    pub limit_v: f64,
    pub limits_pass: bool,
    pub derivative_bound: BoundCheck,
    pub sup_bound: BoundCheck,
    pub weighted_bound: BoundCheck,
    /// `|λ ∫ sgn |f|² - ∫ |f'|² + q |f|²|` relative to
    /// `|λ| ‖f‖₂² + ‖f'‖₂² + ‖q f²‖₁`.
    pub energy_relative: f64,
    pub energy_pass: bool,
}

impl LemmaChecks {
    pub fn pass(&self) -> bool {
        self.identity_pass
            && self.limits_pass
            && self.derivative_bound.pass
            && self.sup_bound.pass
            && self.weighted_bound.pass
            && self.energy_pass
    }
}

/// Supremum of `|f|` from the panel interpolants, oversampled four times,
/// together with the exterior end values.
fn sup_norm(pair: &Eigenpair) -> f64 {
    let grid = &pair.grid;
    let rule = grid.rule();
    let bary = rule.barycentric_weights();
    let n = rule.order();
    let mut best = pair.left_end.0.norm().max(pair.right_end.0.norm());
    best = best.max(pair.at_zero[0].0.norm()).max(pair.at_zero[1].0.norm());
    for p in 0..grid.panel_count() {
        let vals = &pair.f[grid.panel_nodes(p)];
        best = vals.iter().fold(best, |m, v| m.max(v.norm()));
        for i in 0..=4 * n {
            let t = -1.0 + 2.0 * i as f64 / (4 * n) as f64;
            let basis = lagrange_basis(rule.nodes(), &bary, t);
            let z: Complex64 = vals.iter().zip(&basis).map(|(v, l)| v * l).sum();
            best = best.max(z.norm());
        }
    }
    best
}

/// Evaluates (a)–(e) and the energy identity for an eigenpair of `q`.
pub fn lemma_diagnostics(pair: &Eigenpair, q: &Potential) -> Result<(EigenfunctionDiagnostics, LemmaChecks)> {
    let grid = &pair.grid;
    if let Some((lo, hi)) = q.support_hull() {
        if grid.start() > lo || grid.end() < hi {
            return Err(Error::Domain(
                "eigenpair grid does not reach the exterior region where its tails are exact".into(),
            ));
        }
    }
    let tails = [pair.left_tail_l2(), pair.right_tail_l2()];
    if tails.iter().any(|t| !t.is_finite()) || pair.f.len() != grid.len() {
        return Err(Error::Domain("eigenpair lacks usable tail data".into()));
    }
    let lambda = pair.lambda.lambda();
    let k2 = pair.lambda.sqrt_lambda().norm_sqr();
    let x = grid.nodes().to_vec();
    let qx: Vec<f64> = x.iter().map(|&t| q.eval(t)).collect();
    let f2: Vec<f64> = pair.f.iter().map(|v| v.norm_sqr()).collect();
    let df2: Vec<f64> = pair.f_prime.iter().map(|v| v.norm_sqr()).collect();
    let sgn_f2: Vec<f64> = x
        .iter()
        .zip(&f2)
        .map(|(&t, &a)| if t >= 0.0 { a } else { -a })
        .collect();
    let energy: Vec<f64> = df2.iter().zip(&qx).zip(&f2).map(|((&d, &qv), &a)| d + qv * a).collect();
    let abs_qf2: Vec<f64> = qx.iter().zip(&f2).map(|(&qv, &a)| qv.abs() * a).collect();

    // Right exterior lies in x > 0 with q = 0 there.
    let right_u = tails[1];
    let right_v = k2 * tails[1];
    let u: Vec<f64> = grid
        .cumulative_from_right(&sgn_f2)
        .into_iter()
        .map(|v| v + right_u)
        .collect();
    let v: Vec<f64> = grid
        .cumulative_from_right(&energy)
        .into_iter()
        .map(|e| e + right_v)
        .collect();

    let l2_sq = grid.integrate_samples(&f2) + tails[0] + tails[1];
    let d2_sq = grid.integrate_samples(&df2) + k2 * (tails[0] + tails[1]);
    let norms = EigenfunctionNorms {
        l2: l2_sq.sqrt(),
        l2_derivative: d2_sq.sqrt(),
        sup: sup_norm(pair),
        q_f2: grid.integrate_samples(&abs_qf2),
    };

    let identity_residual = (0..x.len())
        .map(|j| (lambda * u[j] - pair.f_prime[j] * pair.f[j].conj() - v[j]).norm())
        .fold(0.0, f64::max);
    let identity_scale = lambda.norm() * l2_sq + norms.l2_derivative * norms.sup;

    // Left exterior: x < 0, so sgn = -1 there.
    let u_total = grid.integrate_samples(&sgn_f2) + right_u - tails[0];
    let v_total = grid.integrate_samples(&energy) + right_v + k2 * tails[0];

    let qm = q.l1_norms().negative;
    let qm_err = q.l1_norms().error_estimate;
    let derivative_rhs = 2.0 * qm * norms.l2;
    let sup_rhs = 2.0 * qm.sqrt() * norms.l2;
    let weighted_rhs = 8.0 * qm * qm * l2_sq;
    let checks = LemmaChecks {
        identity_residual,
        identity_scale,
        identity_pass: identity_residual <= IDENTITY_TOL * identity_scale,
        limit_u: u_total.abs(),
        limit_v: v_total.abs(),
        limits_pass: u_total.abs() <= LIMIT_TOL && v_total.abs() <= LIMIT_TOL,
        derivative_bound: BoundCheck::new(
            derivative_rhs,
            norms.l2_derivative,
            LEMMA_SLACK * derivative_rhs + 2.0 * qm_err * norms.l2,
        ),
        sup_bound: BoundCheck::new(
            sup_rhs,
            norms.sup,
            LEMMA_SLACK * sup_rhs + qm_err.sqrt() * 2.0 * norms.l2,
        ),
        weighted_bound: BoundCheck::new(
            weighted_rhs,
            norms.q_f2,
            LEMMA_SLACK * weighted_rhs + 8.0 * (2.0 * qm * qm_err + qm_err * qm_err) * l2_sq,
        ),
        energy_relative: (lambda * u_total - v_total).norm() / (lambda.norm() * l2_sq + d2_sq + norms.q_f2),
        energy_pass: false,
    };
    let checks = LemmaChecks {
        energy_pass: checks.energy_relative <= LEMMA_SLACK,
        ..checks
    };
    Ok((EigenfunctionDiagnostics { x, u, v, norms }, checks))
}

/// Bounds and, for shooting-confirmed eigenpairs, the eigenfunction checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub eigenvalue: Complex64,
    pub method: Method,
    pub bounds: EigenvalueBounds,
    pub lemma: Option<LemmaChecks>,
    pub verdict: bool,
}

impl BoundReport {
    pub fn new(eigenvalue: Complex64, method: Method, norms: &L1Norms, lemma: Option<LemmaChecks>) -> Self {
        let bounds = evaluate_bounds(eigenvalue, norms);
        let verdict = bounds.pass() && lemma.as_ref().is_none_or(LemmaChecks::pass);
        Self {
            eigenvalue,
            method,
            bounds,
            lemma,
            verdict,
        }
    }
}
