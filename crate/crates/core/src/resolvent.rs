//! The free indefinite operator `B₀ f = sgn(x)(-f'')` and its resolvent.
//!
//! For `λ` in the open upper half-plane, `(B₀ - λ)⁻¹` is an integral operator
//! with kernel `K_λ = C_λ + D_λ`, built from the two solutions
//!
//! ```text
//! u(x) = e^{i√λ x}                      (x ≥ 0)     ᾱ e^{√λ x} + α e^{-√λ x}   (x < 0)
//! v(x) = α e^{i√λ x} + ᾱ e^{-i√λ x}     (x ≥ 0)     e^{√λ x}                   (x < 0)
//! ```
//!
//! of `sgn(x)(-f'') = λ f`, with `α = (1 - i)/2` and `√λ` the root with
//! positive real and imaginary parts. Their Wronskian is the constant
//! `2α√λ`, and `|K_λ(x, y)| ≤ |λ|^{-1/2}` everywhere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::CompositeGrid;
use crate::{Error, Result};

/// `α = (1 - i)/2`.
pub const ALPHA: Complex64 = Complex64::new(0.5, -0.5);

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Exponents beyond this magnitude overflow `f64`.
const MAX_EXPONENT: f64 = 700.0;

/// The principal root of `λ`, `Im λ > 0`, with `Re √λ > 0` and `Im √λ > 0`.
///
/// Built from modulus and half-argument rather than a generic complex power,
/// so the branch holds even when `λ` hugs the negative real axis.
pub fn principal_sqrt(lambda: Complex64) -> Result<Complex64> {
    if !(lambda.im > 0.0) || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::Domain(format!(
            "spectral parameter {lambda} is not in the open upper half-plane"
        )));
    }
    let r = lambda.norm().sqrt();
    let half_arg = 0.5 * lambda.im.atan2(lambda.re);
    let (s, c) = half_arg.sin_cos();
    Ok(Complex64::new(r * c, r * s))
}

/// `λ ∈ ℂ⁺` with its principal square root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParameter {
    lambda: Complex64,
    sqrt_lambda: Complex64,
}

/// A kernel value split into its `C_λ` and `D_λ` parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub c_part: Complex64,
    pub d_part: Complex64,
    pub total: Complex64,
}

impl SpectralParameter {
    pub fn new(lambda: Complex64) -> Result<Self> {
        Ok(Self {
            lambda,
            sqrt_lambda: principal_sqrt(lambda)?,
        })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn sqrt_lambda(&self) -> Complex64 {
        self.sqrt_lambda
    }

    pub fn alpha(&self) -> Complex64 {
        ALPHA
    }

    /// `2α√λ`, the Wronskian of `u` and `v`.
    pub fn free_wronskian(&self) -> Complex64 {
        2.0 * ALPHA * self.sqrt_lambda
    }

    /// `K_λ(x, y)` from the four sign branches.
    ///
    /// Every exponent evaluated here has non-positive real part, so no
    /// branch can overflow.
    pub fn kernel(&self, x: f64, y: f64) -> KernelValue {
        let k = self.sqrt_lambda;
        let alpha_bar = ALPHA.conj();
        let (c, d) = match (x >= 0.0, y >= 0.0) {
            (true, true) => (
                ALPHA * (I * k * (x + y)).exp(),
                alpha_bar * (I * k * (x - y).abs()).exp(),
            ),
            (true, false) => (-(k * Complex64::new(y, x)).exp(), Complex64::new(0.0, 0.0)),
            (false, true) => ((k * Complex64::new(x, y)).exp(), Complex64::new(0.0, 0.0)),
            (false, false) => (-alpha_bar * (k * (x + y)).exp(), -ALPHA * (-k * (x - y).abs()).exp()),
        };
        let scale = 1.0 / self.free_wronskian();
        let (c_part, d_part) = (c * scale, d * scale);
        KernelValue {
            c_part,
            d_part,
            total: c_part + d_part,
        }
    }

    /// `(u(x), u'(x))`.
    pub fn solution_u(&self, x: f64) -> (Complex64, Complex64) {
        let k = self.sqrt_lambda;
        if x >= 0.0 {
            let e = (I * k * x).exp();
            (e, I * k * e)
        } else {
            let grow = (-k * x).exp();
            let decay = (k * x).exp();
            (
                ALPHA.conj() * decay + ALPHA * grow,
                k * (ALPHA.conj() * decay - ALPHA * grow),
            )
        }
    }

    /// `(v(x), v'(x))`.
    pub fn solution_v(&self, x: f64) -> (Complex64, Complex64) {
        let k = self.sqrt_lambda;
        if x >= 0.0 {
            let decay = (I * k * x).exp();
            let grow = (-I * k * x).exp();
            (
                ALPHA * decay + ALPHA.conj() * grow,
                I * k * (ALPHA * decay - ALPHA.conj() * grow),
            )
        } else {
            let e = (k * x).exp();
            (e, k * e)
        }
    }

    /// `u(x) v'(x) - u'(x) v(x)`.
    pub fn wronskian(&self, x: f64) -> Complex64 {
        let (u, du) = self.solution_u(x);
        let (v, dv) = self.solution_v(x);
        u * dv - du * v
    }

    /// `T_λ g` at the nodes of `grid`, for `g` sampled there and zero outside.
    ///
    /// Uses the split form
    /// `T_λ g(x) = (u(x) ∫_{-∞}^x v sgn g + v(x) ∫_x^∞ u sgn g) / (2α√λ)`
    /// with one left and one right running integral, so the cost is linear
    /// in the node count.
    pub fn apply_resolvent(&self, grid: &CompositeGrid, g: &[Complex64]) -> Result<Vec<Complex64>> {
        if g.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples for a grid of {} nodes",
                g.len(),
                grid.len()
            )));
        }
        if !grid.has_edge(0.0) {
            return Err(Error::Domain("resolvent grids need a panel edge at x = 0".into()));
        }
        let reach = grid.start().abs().max(grid.end().abs()) * self.sqrt_lambda.norm();
        if reach > MAX_EXPONENT {
            return Err(Error::Domain(format!(
                "grid extent times |√λ| = {reach:.1} overflows the split form"
            )));
        }
        let nodes = grid.nodes();
        let uv: Vec<_> = nodes
            .iter()
            .map(|&x| (self.solution_u(x).0, self.solution_v(x).0))
            .collect();
        let signed: Vec<Complex64> = nodes
            .iter()
            .zip(g)
            .map(|(&x, &gx)| if x >= 0.0 { gx } else { -gx })
            .collect();
        let left_integrand: Vec<Complex64> = uv.iter().zip(&signed).map(|(&(_, v), &s)| v * s).collect();
        let right_integrand: Vec<Complex64> = uv.iter().zip(&signed).map(|(&(u, _), &s)| u * s).collect();
        let left = grid.cumulative_from_left(&left_integrand);
        let right = grid.cumulative_from_right(&right_integrand);
        let scale = 1.0 / self.free_wronskian();
        Ok(uv
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(&(u, v), (&l, &r))| (u * l + v * r) * scale)
            .collect())
    }
}
