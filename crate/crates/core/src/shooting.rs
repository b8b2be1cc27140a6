//! Two-sided shooting for `f'' = (q(x) - λ sgn(x)) f`.
//!
//! The solution recessive at `+∞` behaves like `e^{i√λ x}` and the one
//! recessive at `-∞` like `e^{√λ x}`. Outside the support of `q` these
//! exponentials are exact, so each side starts at the edge of the support in
//! closed form and is integrated numerically only across the potential. `λ`
//! is an eigenvalue exactly when the two solutions are proportional, that is
//! when their Wronskian `D(λ)` at 0 vanishes. For `q ≡ 0`, `D = 2α√λ`.
//!
//! Because the exterior is handled exactly, `D` does not depend on the
//! truncation length `L` as long as `L` covers the support.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ode::{Dp54, ScaledState, DEFAULT_TOLERANCE};
use crate::potential::Potential;
use crate::quadrature::{gauss_legendre, CompositeGrid};
use crate::resolvent::SpectralParameter;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Panel order of the grid eigenfunctions are sampled on.
const EIGENFUNCTION_ORDER: usize = 16;

/// Solver knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Local error tolerance of the Runge–Kutta integrator.
    pub ode_tolerance: f64,
    /// Largest relative Wronskian accepted when gluing an eigenfunction.
    pub glue_tolerance: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            ode_tolerance: DEFAULT_TOLERANCE,
            glue_tolerance: 1e-6,
        }
    }
}

/// `(f, f')` at `x`, stored as `e^{log_scale} · (f, f_prime)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingState {
    pub x: f64,
    pub f: Complex64,
    pub f_prime: Complex64,
    pub log_scale: Complex64,
}

impl ShootingState {
    fn from_scaled(x: f64, s: &ScaledState) -> Self {
        Self {
            x,
            f: s.y[0],
            f_prime: s.y[1],
            log_scale: s.log_scale,
        }
    }

    /// Absolute `(f(x), f'(x))`.
    pub fn value(&self) -> (Complex64, Complex64) {
        let s = self.log_scale.exp();
        (s * self.f, s * self.f_prime)
    }
}

/// `D(λ)` with the two states it was formed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchValue {
    pub lambda: SpectralParameter,
    pub d: Complex64,
    pub left: ShootingState,
    pub right: ShootingState,
}

impl MatchValue {
    /// `|W| / (|f₊ f₋'| + |f₋ f₊'|)`: zero for proportional solutions and
    /// independent of how either side is scaled.
    pub fn relative_mismatch(&self) -> f64 {
        let (l, r) = (&self.left, &self.right);
        let w = r.f * l.f_prime - l.f * r.f_prime;
        let scale = (r.f * l.f_prime).norm() + (l.f * r.f_prime).norm();
        if scale == 0.0 {
            0.0
        } else {
            w.norm() / scale
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

impl Side {
    /// Where the closed-form exterior solution hands over to the integrator.
    fn edge(self, q: &Potential) -> f64 {
        match (self, q.support_hull()) {
            (_, None) => 0.0,
            (Side::Right, Some((_, hi))) => hi.max(0.0),
            (Side::Left, Some((lo, _))) => lo.min(0.0),
        }
    }

    fn exterior(self, sp: &SpectralParameter, x: f64) -> ScaledState {
        let k = sp.sqrt_lambda();
        match self {
            Side::Right => ScaledState::new(Complex64::new(1.0, 0.0), I * k, I * k * x),
            Side::Left => ScaledState::new(Complex64::new(1.0, 0.0), k, k * x),
        }
    }
}

/// Carries the recessive solution of `side` from the support edge to 0,
/// recording the state at every point of `outputs` on that side.
fn sweep(
    sp: &SpectralParameter,
    q: &Potential,
    side: Side,
    outputs: &[f64],
    opts: &ShootingOptions,
) -> Result<(ScaledState, Vec<ScaledState>)> {
    let dp = Dp54::new(opts.ode_tolerance)?;
    let edge = side.edge(q);
    let lambda = sp.lambda();
    let shift = match side {
        Side::Right => -lambda,
        Side::Left => lambda,
    };
    let inside = |x: f64| match side {
        Side::Right => x > 0.0 && x < edge,
        Side::Left => x < 0.0 && x > edge,
    };
    // Visit order: from the edge toward 0.
    let mut stops: Vec<f64> = q
        .breakpoints()
        .into_iter()
        .chain(outputs.iter().copied())
        .filter(|&x| inside(x))
        .chain([0.0])
        .collect();
    stops.sort_by(|a, b| match side {
        Side::Right => b.total_cmp(a),
        Side::Left => a.total_cmp(b),
    });
    stops.dedup();

    let mut recorded: Vec<(f64, ScaledState)> = Vec::with_capacity(stops.len());
    let mut state = side.exterior(sp, edge);
    let mut x = edge;
    let mut h = f64::NAN;
    for &next in &stops {
        if next != x {
            // No breakpoint lies strictly between consecutive stops, so
            // sampling q just inside [lo, hi] picks the correct one-sided
            // value at jumps.
            let (lo, hi) = if x < next { (x, next) } else { (next, x) };
            let pad = 1e-13 * (hi - lo);
            let coeff = |t: f64| Complex64::new(q.eval(t.clamp(lo + pad, hi - pad)), 0.0) + shift;
            dp.propagate(&mut state, x, next, coeff, &mut h)?;
            x = next;
        }
        recorded.push((x, state));
    }
    let at_zero = recorded.last().expect("0 is always a stop").1;
    let samples = outputs
        .iter()
        .map(|&t| {
            let beyond = match side {
                Side::Right => t >= edge,
                Side::Left => t <= edge,
            };
            if beyond {
                side.exterior(sp, t)
            } else {
                recorded
                    .iter()
                    .find(|(s, _)| *s == t)
                    .map(|(_, st)| *st)
                    .unwrap_or(at_zero)
            }
        })
        .collect();
    Ok((at_zero, samples))
}

fn check_length(q: &Potential, l: f64) -> Result<()> {
    if !(l.is_finite() && l >= q.support_radius()) {
        return Err(Error::Domain(format!(
            "truncation length {l} does not cover the support radius {}",
            q.support_radius()
        )));
    }
    Ok(())
}

/// State at 0 of the solution equal to `e^{i√λ x}` for `x ≥ L`.
pub fn integrate_from_right(
    sp: &SpectralParameter,
    q: &Potential,
    l: f64,
    opts: &ShootingOptions,
) -> Result<ShootingState> {
    check_length(q, l)?;
    let (s, _) = sweep(sp, q, Side::Right, &[], opts)?;
    Ok(ShootingState::from_scaled(0.0, &s))
}

/// State at 0 of the solution equal to `e^{√λ x}` for `x ≤ -L`.
pub fn integrate_from_left(
    sp: &SpectralParameter,
    q: &Potential,
    l: f64,
    opts: &ShootingOptions,
) -> Result<ShootingState> {
    check_length(q, l)?;
    let (s, _) = sweep(sp, q, Side::Left, &[], opts)?;
    Ok(ShootingState::from_scaled(0.0, &s))
}

/// `D(λ) = f₊(0) f₋'(0) - f₋(0) f₊'(0)`.
pub fn matching_det(sp: &SpectralParameter, q: &Potential, l: f64, opts: &ShootingOptions) -> Result<MatchValue> {
    let right = integrate_from_right(sp, q, l, opts)?;
    let left = integrate_from_left(sp, q, l, opts)?;
    let w = right.f * left.f_prime - left.f * right.f_prime;
    let d = (right.log_scale + left.log_scale).exp() * w;
    if !(d.re.is_finite() && d.im.is_finite()) {
        return Err(Error::Integration {
            position: 0.0,
            reason: "matching Wronskian overflows".into(),
        });
    }
    Ok(MatchValue {
        lambda: *sp,
        d,
        left,
        right,
    })
}

/// `λ ↦ D(λ)` for a fixed potential, shareable across threads.
#[derive(Debug, Clone)]
pub struct Shooter {
    potential: Arc<Potential>,
    length: f64,
    options: ShootingOptions,
}

impl Shooter {
    pub fn new(potential: Arc<Potential>, options: ShootingOptions) -> Self {
        let length = potential.support_radius();
        Self {
            potential,
            length,
            options,
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn options(&self) -> &ShootingOptions {
        &self.options
    }

    pub fn evaluate(&self, lambda: Complex64) -> Result<Complex64> {
        let sp = SpectralParameter::new(lambda)?;
        Ok(matching_det(&sp, &self.potential, self.length, &self.options)?.d)
    }

    pub fn eigenfunction(&self, lambda: Complex64) -> Result<Eigenpair> {
        let sp = SpectralParameter::new(lambda)?;
        eigenfunction_samples(&sp, &self.potential, self.length, &self.options)
    }
}

/// A normalized eigenfunction sampled on a panel grid, with the exact
/// exponential exteriors `f(x) = f(b) e^{i√λ (x-b)}` for `x > b` and
/// `f(x) = f(a) e^{√λ (x-a)}` for `x < a`, where `[a, b]` is the grid span.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: SpectralParameter,
    pub grid: CompositeGrid,
    pub f: Vec<Complex64>,
    pub f_prime: Vec<Complex64>,
    /// `(f, f')` at the left end of the grid.
    pub left_end: (Complex64, Complex64),
    /// `(f, f')` at the right end of the grid.
    pub right_end: (Complex64, Complex64),
    /// `(f, f')` at `0⁻` and `0⁺` after gluing.
    pub at_zero: [(Complex64, Complex64); 2],
    /// Relative Wronskian of the two halves at 0.
    pub glue_mismatch: f64,
}

impl Eigenpair {
    /// Decay rate `√λ` of the left exterior, `f' = √λ f`.
    pub fn left_rate(&self) -> Complex64 {
        self.lambda.sqrt_lambda()
    }

    /// `i√λ`, with `f' = i√λ f` on the right exterior.
    pub fn right_rate(&self) -> Complex64 {
        I * self.lambda.sqrt_lambda()
    }

    /// `∫_{-∞}^{a} |f|²`.
    pub fn left_tail_l2(&self) -> f64 {
        self.left_end.0.norm_sqr() / (2.0 * self.lambda.sqrt_lambda().re)
    }

    /// `∫_{b}^{∞} |f|²`.
    pub fn right_tail_l2(&self) -> f64 {
        self.right_end.0.norm_sqr() / (2.0 * self.lambda.sqrt_lambda().im)
    }

    /// `‖f‖₂²` from the grid plus both exterior tails.
    pub fn norm_sqr(&self) -> f64 {
        let inner: f64 = self
            .grid
            .integrate_samples(&self.f.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
        inner + self.left_tail_l2() + self.right_tail_l2()
    }

    /// `f(x)` anywhere outside the grid span.
    pub fn exterior_value(&self, x: f64) -> Option<Complex64> {
        if x >= self.grid.end() {
            Some(self.right_end.0 * (self.right_rate() * (x - self.grid.end())).exp())
        } else if x <= self.grid.start() {
            Some(self.left_end.0 * (self.left_rate() * (x - self.grid.start())).exp())
        } else {
            None
        }
    }
}

/// Largest `|q|` seen on a fine sampling of the support, for resolution only.
fn potential_scale(q: &Potential) -> f64 {
    let Some((lo, hi)) = q.support_hull() else {
        return 0.0;
    };
    (0..=2000)
        .map(|i| q.eval(lo + (hi - lo) * (i as f64 / 2000.0)).abs())
        .fold(0.0, f64::max)
}

/// Glues both recessive solutions into one normalized eigenfunction.
///
/// Fails with [`Error::SpuriousZero`] when the two halves are not
/// proportional to within `opts.glue_tolerance`, i.e. `λ` is not an
/// eigenvalue after all.
pub fn eigenfunction_samples(
    sp: &SpectralParameter,
    q: &Potential,
    l: f64,
    opts: &ShootingOptions,
) -> Result<Eigenpair> {
    check_length(q, l)?;
    let k = sp.sqrt_lambda();
    let pad = (2.0 / k.re.min(k.im)).clamp(1.0, 40.0);
    let span = l + pad;
    let wavenumber = (sp.lambda().norm() + potential_scale(q)).sqrt();
    let width = (2.0 / wavenumber.max(1e-12)).min(1.0);
    let mut breaks = q.breakpoints();
    breaks.push(0.0);
    let rule = Arc::new(gauss_legendre(EIGENFUNCTION_ORDER)?);
    let grid = CompositeGrid::with_breakpoints(-span, span, &breaks, width, rule)?;

    let mut right_out: Vec<f64> = grid.nodes().iter().copied().filter(|&x| x > 0.0).collect();
    right_out.push(span);
    let mut left_out: Vec<f64> = grid.nodes().iter().copied().filter(|&x| x < 0.0).collect();
    left_out.push(-span);
    let (r0, mut right) = sweep(sp, q, Side::Right, &right_out, opts)?;
    let (l0, mut left) = sweep(sp, q, Side::Left, &left_out, opts)?;

    let mv = MatchValue {
        lambda: *sp,
        d: Complex64::new(0.0, 0.0),
        left: ShootingState::from_scaled(0.0, &l0),
        right: ShootingState::from_scaled(0.0, &r0),
    };
    let mismatch = mv.relative_mismatch();
    if !(mismatch <= opts.glue_tolerance) {
        return Err(Error::SpuriousZero(mismatch));
    }
    // Match values at 0 unless f vanishes there, in which case match slopes.
    let use_values = l0.y[0].norm() * k.norm() >= l0.y[1].norm();
    let ratio = if use_values {
        r0.y[0] / l0.y[0]
    } else {
        r0.y[1] / l0.y[1]
    };
    let shift = r0.log_scale - l0.log_scale + ratio.ln();
    for s in left.iter_mut() {
        s.log_scale += shift;
    }
    let mut l0 = l0;
    l0.log_scale += shift;

    // Common real scale so every sample is representable.
    let log_mag = |s: &ScaledState| s.log_scale.re + s.y[0].norm().max(s.y[1].norm() / k.norm().max(1.0)).ln();
    let peak = left
        .iter()
        .chain(right.iter())
        .chain([&l0, &r0])
        .filter(|s| s.y[0].norm() > 0.0 || s.y[1].norm() > 0.0)
        .map(log_mag)
        .fold(f64::NEG_INFINITY, f64::max);
    let absolute = |s: &ScaledState| {
        let e = (s.log_scale - peak).exp();
        (e * s.y[0], e * s.y[1])
    };
    let left_end = absolute(&left.pop().expect("edge sample"));
    let right_end = absolute(&right.pop().expect("edge sample"));
    let mut f = Vec::with_capacity(grid.len());
    let mut f_prime = Vec::with_capacity(grid.len());
    for (v, dv) in left.iter().chain(right.iter()).map(absolute) {
        f.push(v);
        f_prime.push(dv);
    }
    let mut pair = Eigenpair {
        lambda: *sp,
        grid,
        f,
        f_prime,
        left_end,
        right_end,
        at_zero: [absolute(&l0), absolute(&r0)],
        glue_mismatch: mismatch,
    };
    let norm = pair.norm_sqr().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Integration {
            position: 0.0,
            reason: "eigenfunction has no finite nonzero norm".into(),
        });
    }
    let scale = |(a, b): (Complex64, Complex64)| (a / norm, b / norm);
    for v in pair.f.iter_mut().chain(pair.f_prime.iter_mut()) {
        *v /= norm;
    }
    pair.left_end = scale(pair.left_end);
    pair.right_end = scale(pair.right_end);
    pair.at_zero = [scale(pair.at_zero[0]), scale(pair.at_zero[1])];
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sp(re: f64, im: f64) -> SpectralParameter {
        SpectralParameter::new(c(re, im)).unwrap()
    }

    #[test]
    fn free_right_solution_at_zero() {
        let s = sp(0.0, 1.0);
        let st = integrate_from_right(&s, &Potential::zero(), 10.0, &ShootingOptions::default()).unwrap();
        let (f, df) = st.value();
        assert!((f - 1.0).norm() < 1e-9);
        assert!((df - I * s.sqrt_lambda()).norm() < 1e-9);
    }

    #[test]
    fn free_left_solution_at_zero() {
        let s = sp(0.0, 2.0);
        let st = integrate_from_left(&s, &Potential::zero(), 3.0, &ShootingOptions::default()).unwrap();
        let (f, df) = st.value();
        assert!((f - 1.0).norm() < 1e-12);
        assert!((df - c(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn free_wronskian() {
        let s = sp(0.0, 1.0);
        let m = matching_det(&s, &Potential::zero(), 1.0, &ShootingOptions::default()).unwrap();
        assert!((m.d - s.free_wronskian()).norm() < 1e-14);
        assert!((m.d.norm() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn short_truncation_is_rejected() {
        let q = Potential::square_well(1.0, -1.0, 2.0).unwrap();
        let err = matching_det(&sp(0.0, 1.0), &q, 1.5, &ShootingOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn constant_step_matches_closed_form() {
        // q = -1 on [0, 1): f'' = (-1 - λ) f there, e^{i√λ x} beyond 1.
        let s = sp(0.3, 0.8);
        let q = Potential::step_sum(&[(0.0, 1.0, -1.0)]).unwrap();
        let st = integrate_from_right(&s, &q, 1.0, &ShootingOptions::default()).unwrap();
        let k = s.sqrt_lambda();
        let mu = (c(-1.0, 0.0) - s.lambda()).sqrt();
        let (f1, df1) = ((I * k).exp(), I * k * (I * k).exp());
        // Propagate back by -1 with cosh/sinh of mu.
        let f0 = f1 * mu.cosh() - df1 * mu.sinh() / mu;
        let df0 = -f1 * mu * mu.sinh() + df1 * mu.cosh();
        let (f, df) = st.value();
        assert!((f - f0).norm() < 1e-9 * f0.norm());
        assert!((df - df0).norm() < 1e-9 * df0.norm());
    }

    #[test]
    fn truncation_length_does_not_change_d() {
        let q = Potential::square_well(2.0, -1.0, 1.0).unwrap();
        let s = sp(0.4, 0.9);
        let o = ShootingOptions::default();
        let a = matching_det(&s, &q, 1.0, &o).unwrap().d;
        let b = matching_det(&s, &q, 7.0, &o).unwrap().d;
        assert_eq!(a, b);
    }

    #[test]
    fn spurious_zero_is_flagged() {
        let q = Potential::square_well(2.0, -1.0, 1.0).unwrap();
        let err = eigenfunction_samples(&sp(1.0, 1.0), &q, 1.0, &ShootingOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SpuriousZero(m) if m > 1e-3));
    }
}
