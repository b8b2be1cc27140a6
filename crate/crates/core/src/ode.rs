//! Adaptive Dormand–Prince 5(4) for `f'' = c(x) f` with complex `c`.
//!
//! The state is stored as `e^{s} · (f, f')` with a complex log-scale `s`.
//! Whenever the stored pair grows past [`RENORMALIZE_ABOVE`] (or shrinks
//! below its reciprocal) it is rescaled by a real factor whose logarithm is
//! added to `s`, so deep wells and long decaying stretches neither overflow
//! nor underflow, and the represented solution is unchanged.

use num_complex::Complex64;

use crate::{Error, Result};

/// Stored magnitudes beyond this trigger a renormalization.
pub const RENORMALIZE_ABOVE: f64 = 1e10;

/// Local error tolerance used by the shooting solver unless overridden.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// `e^{log_scale} · (y[0], y[1])` represents `(f, f')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledState {
    pub y: [Complex64; 2],
    pub log_scale: Complex64,
}

impl ScaledState {
    pub fn new(f: Complex64, f_prime: Complex64, log_scale: Complex64) -> Self {
        Self {
            y: [f, f_prime],
            log_scale,
        }
    }

    /// `(f, f')` in absolute terms. Overflows to infinity if the solution
    /// itself does not fit in `f64`.
    pub fn value(&self) -> (Complex64, Complex64) {
        let s = self.log_scale.exp();
        (s * self.y[0], s * self.y[1])
    }

    fn magnitude(&self) -> f64 {
        self.y[0].norm().max(self.y[1].norm())
    }

    /// Rescales `y` to unit magnitude if it has drifted out of range.
    /// Returns the real factor that was divided out, if any.
    pub fn renormalize(&mut self) -> Option<f64> {
        let m = self.magnitude();
        if m > RENORMALIZE_ABOVE || (m > 0.0 && m < 1.0 / RENORMALIZE_ABOVE) {
            self.y[0] /= m;
            self.y[1] /= m;
            self.log_scale += m.ln();
            Some(m)
        } else {
            None
        }
    }
}

/// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order weights minus the embedded fourth-order ones.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Pair = [Complex64; 2];

fn axpy(y: &Pair, terms: &[(f64, &Pair)], h: f64) -> Pair {
    let mut out = *y;
    for (a, k) in terms {
        out[0] += k[0] * (a * h);
        out[1] += k[1] * (a * h);
    }
    out
}

/// Adaptive integrator for `f'' = c(x) f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dp54 {
    tolerance: f64,
    max_steps: usize,
}

impl Default for Dp54 {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_steps: 1_000_000,
        }
    }
}

/// Bookkeeping returned by [`Dp54::propagate`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub renormalizations: usize,
}

impl Dp54 {
    pub fn new(tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(Error::InvalidInput(format!(
                "ODE tolerance must lie in (0, 1), got {tolerance}"
            )));
        }
        Ok(Self {
            tolerance,
            ..Self::default()
        })
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Carries `state` from `a` to `b` (either direction).
    ///
    /// `c` must be smooth on the open interval between `a` and `b`; callers
    /// split at discontinuities. `h_hint` supplies the first trial step and
    /// receives the last accepted one.
    pub fn propagate<C: Fn(f64) -> Complex64>(
        &self,
        state: &mut ScaledState,
        a: f64,
        b: f64,
        c: C,
        h_hint: &mut f64,
    ) -> Result<StepStats> {
        let mut stats = StepStats::default();
        if a == b {
            return Ok(stats);
        }
        let dir = (b - a).signum();
        let span = (b - a).abs();
        let rhs = |x: f64, y: &Pair| -> Pair { [y[1], c(x) * y[0]] };

        let mut x = a;
        let mut y = state.y;
        let mut h = if h_hint.is_finite() && *h_hint > 0.0 {
            h_hint.min(span)
        } else {
            let freq = c(a + 0.5 * (b - a)).norm().sqrt().max(1.0);
            (0.1 / freq).min(span)
        };
        let mut k1 = rhs(x, &y);
        let mut last_accepted = h;
        while dir * (b - x) > 0.0 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::Integration {
                    position: x,
                    reason: format!("step budget of {} exhausted", self.max_steps),
                });
            }
            let remaining = (b - x).abs();
            let min_step = 1e-14 * x.abs().max(1.0);
            // A sliver left over from rounding is finished in one step
            // rather than reported as underflow.
            let last = h >= remaining || remaining - h < min_step;
            if last {
                h = remaining;
            } else if h < min_step {
                return Err(Error::Integration {
                    position: x,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            let hs = dir * h;
            let k2 = rhs(x + C2 * hs, &axpy(&y, &[(A21, &k1)], hs));
            let k3 = rhs(x + C3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
            let k4 = rhs(x + C4 * hs, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs));
            let k5 = rhs(
                x + C5 * hs,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs),
            );
            let x_new = if last { b } else { x + hs };
            let k6 = rhs(
                x_new,
                &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hs),
            );
            let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hs);
            let k7 = rhs(x_new, &y_new);
            let err = axpy(
                &[Complex64::new(0.0, 0.0); 2],
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                hs,
            );
            // Weight f' by the local wavelength so both components are
            // measured on the same scale.
            let freq = c(x_new).norm().sqrt().max(1.0);
            let size = |p: &Pair| (p[0].norm_sqr() + p[1].norm_sqr() / (freq * freq)).sqrt();
            let scale = size(&y).max(size(&y_new));
            let ratio = if scale > 0.0 {
                size(&err) / (self.tolerance * scale)
            } else {
                0.0
            };
            if !ratio.is_finite() {
                return Err(Error::Integration {
                    position: x,
                    reason: "non-finite state".into(),
                });
            }
            if ratio <= 1.0 {
                stats.accepted += 1;
                x = x_new;
                y = y_new;
                k1 = k7;
                last_accepted = h;
                let mut scaled = ScaledState {
                    y,
                    log_scale: state.log_scale,
                };
                if let Some(m) = scaled.renormalize() {
                    stats.renormalizations += 1;
                    y = scaled.y;
                    state.log_scale = scaled.log_scale;
                    k1 = [k1[0] / m, k1[1] / m];
                }
                let grow = if ratio == 0.0 {
                    5.0
                } else {
                    (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= grow;
            } else {
                stats.rejected += 1;
                h *= (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        state.y = y;
        *h_hint = last_accepted;
        Ok(stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_solution_is_reproduced() {
        // f'' = k² f has f = e^{kx}.
        let k = c(0.7, 1.3);
        let mut s = ScaledState::new(c(1.0, 0.0), k, c(0.0, 0.0));
        let mut h = f64::NAN;
        Dp54::default().propagate(&mut s, 0.0, 3.0, |_| k * k, &mut h).unwrap();
        let (f, df) = s.value();
        let exact = (k * 3.0).exp();
        assert!((f - exact).norm() < 1e-9 * exact.norm());
        assert!((df - k * exact).norm() < 1e-9 * (k * exact).norm());
    }

    #[test]
    fn backward_integration_matches() {
        let k = c(0.2, 2.0);
        let mut s = ScaledState::new(c(1.0, 0.0), k, k * 2.0);
        let mut h = f64::NAN;
        Dp54::default().propagate(&mut s, 2.0, -1.0, |_| k * k, &mut h).unwrap();
        let exact = (-k).exp();
        assert!((s.value().0 - exact).norm() < 1e-9 * exact.norm());
    }

    #[test]
    fn renormalization_preserves_the_solution() {
        // Grows like e^{60}; several renormalizations must happen.
        let k = c(6.0, 0.0);
        let mut s = ScaledState::new(c(1.0, 0.0), k, c(0.0, 0.0));
        let mut h = f64::NAN;
        let stats = Dp54::default().propagate(&mut s, 0.0, 10.0, |_| k * k, &mut h).unwrap();
        assert!(stats.renormalizations >= 2);
        let log_f = s.log_scale + s.y[0].ln();
        assert!((log_f - c(60.0, 0.0)).norm() < 1e-8);
        assert!(s.y[0].norm() <= RENORMALIZE_ABOVE);
    }

    #[test]
    fn variable_coefficient_airy_like() {
        // f = e^{x²/2} solves f'' = (1 + x²) f.
        let mut s = ScaledState::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let mut h = f64::NAN;
        Dp54::new(1e-12)
            .unwrap()
            .propagate(&mut s, 0.0, 2.0, |x| c(1.0 + x * x, 0.0), &mut h)
            .unwrap();
        let exact = 2f64.exp();
        assert!((s.value().0.re - exact).abs() < 1e-9 * exact);
        assert!((s.value().1.re - 2.0 * exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn zero_length_is_a_no_op() {
        let mut s = ScaledState::new(c(1.0, 2.0), c(3.0, 4.0), c(0.5, 0.0));
        let before = s;
        let mut h = 0.1;
        let stats = Dp54::default()
            .propagate(&mut s, 1.0, 1.0, |_| c(1.0, 0.0), &mut h)
            .unwrap();
        assert_eq!(s, before);
        assert_eq!(stats, StepStats::default());
    }

    #[test]
    fn step_underflow_reports_position() {
        // A coefficient blowing up at x = 1 forces ever smaller steps.
        let mut s = ScaledState::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let mut h = f64::NAN;
        let err = Dp54::default()
            .propagate(&mut s, 0.0, 1.0, |x| c(1.0 / (1.0 - x).powi(4), 0.0), &mut h)
            .unwrap_err();
        match err {
            Error::Integration { position, .. } => assert!(position > 0.5 && position <= 1.0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rounding_sliver_is_not_underflow() {
        let mut s = ScaledState::new(c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0));
        let mut h = f64::NAN;
        let b = 1.0 + f64::EPSILON;
        Dp54::default()
            .propagate(&mut s, 1.0, b, |_| c(-1.0, 0.0), &mut h)
            .unwrap();
        assert!((s.value().0 - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(Dp54::new(0.0).is_err());
        assert!(Dp54::new(1.5).is_err());
        assert!(Dp54::new(f64::NAN).is_err());
    }
}
