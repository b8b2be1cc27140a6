//! Real integrable potentials and their L¹ norms.
//!
//! Three families are supported:
//!
//! - step sums: constant values on disjoint intervals;
//! - piecewise polynomials on disjoint intervals, with coefficients in
//!   powers of `x - start` for each piece;
//! - truncated analytic sums (Gaussian, `sech²` and two-sided exponential
//!   terms), cut off at a radius `R` chosen so that the discarded tail mass
//!   is certified below a tolerance by a closed-form bound per formula.
//!
//! Values at jump points follow the right-limit convention: a piece covers
//! `[start, end)`, and a truncated sum covers `[-R, R)`.

use serde::{Deserialize, Serialize};

use crate::quadrature::integrate_with_breaks;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    StepSum,
    PiecewisePolynomial,
    TruncatedAnalytic,
}

/// Polynomial `Σ c_k (x - start)^k` on `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub coefficients: Vec<f64>,
}

impl Piece {
    pub fn constant(start: f64, end: f64, value: f64) -> Self {
        Self {
            start,
            end,
            coefficients: vec![value],
        }
    }

    fn eval_local(&self, t: f64) -> f64 {
        horner(&self.coefficients, t)
    }

    fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }
}

/// One term of a truncated analytic potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "kebab-case")]
pub enum AnalyticTerm {
    /// `a · exp(-((x - c)/w)²)`
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// `a · sech²((x - c)/w)`
    Sech2 { amplitude: f64, center: f64, width: f64 },
    /// `a · exp(-|x - c|/w)`
    Exponential { amplitude: f64, center: f64, width: f64 },
}

impl AnalyticTerm {
    fn parts(&self) -> (f64, f64, f64) {
        match *self {
            AnalyticTerm::Gaussian {
                amplitude,
                center,
                width,
            }
            | AnalyticTerm::Sech2 {
                amplitude,
                center,
                width,
            }
            | AnalyticTerm::Exponential {
                amplitude,
                center,
                width,
            } => (amplitude, center, width),
        }
    }

    fn with_amplitude(&self, a: f64) -> Self {
        let (_, center, width) = self.parts();
        match self {
            AnalyticTerm::Gaussian { .. } => AnalyticTerm::Gaussian {
                amplitude: a,
                center,
                width,
            },
            AnalyticTerm::Sech2 { .. } => AnalyticTerm::Sech2 {
                amplitude: a,
                center,
                width,
            },
            AnalyticTerm::Exponential { .. } => AnalyticTerm::Exponential {
                amplitude: a,
                center,
                width,
            },
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (a, c, w) = self.parts();
        let s = (x - c) / w;
        match self {
            AnalyticTerm::Gaussian { .. } => a * (-s * s).exp(),
            AnalyticTerm::Sech2 { .. } => {
                let sech = 1.0 / s.cosh();
                a * sech * sech
            }
            AnalyticTerm::Exponential { .. } => a * (-s.abs()).exp(),
        }
    }

    /// Closed-form `∫_{|x| > r} |term| dx`.
    pub fn tail_mass(&self, r: f64) -> f64 {
        let (a, c, _) = self.parts();
        // Every profile is even about its center, so the left tail beyond -r
        // equals the right tail of the profile beyond r + c.
        a.abs() * (self.profile_mass_beyond(r - c) + self.profile_mass_beyond(r + c))
    }

    /// `∫_d^∞` of the unit-amplitude profile centered at 0.
    fn profile_mass_beyond(&self, d: f64) -> f64 {
        let (_, _, w) = self.parts();
        let s = d / w;
        match self {
            AnalyticTerm::Gaussian { .. } => 0.5 * w * std::f64::consts::PI.sqrt() * libm::erfc(s),
            // 1 - tanh(s) = 2 / (1 + e^{2s})
            AnalyticTerm::Sech2 { .. } => w * 2.0 / (1.0 + (2.0 * s).exp()),
            AnalyticTerm::Exponential { .. } => {
                if s >= 0.0 {
                    w * (-s).exp()
                } else {
                    w * (2.0 - s.exp())
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, c, w) = self.parts();
        if !(a.is_finite() && c.is_finite() && w.is_finite() && w > 0.0) {
            return Err(Error::InvalidInput(format!(
                "analytic term needs finite amplitude/center and positive width: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `‖q‖₁`, `‖q₊‖₁`, `‖q₋‖₁`, plus an absolute error estimate (zero for
/// closed-form kinds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Norms {
    pub total: f64,
    pub positive: f64,
    pub negative: f64,
    pub error_estimate: f64,
}

impl L1Norms {
    fn from_parts(positive: f64, negative: f64, error_estimate: f64) -> Self {
        Self {
            total: positive + negative,
            positive,
            negative,
            error_estimate,
        }
    }

    const ZERO: L1Norms = L1Norms {
        total: 0.0,
        positive: 0.0,
        negative: 0.0,
        error_estimate: 0.0,
    };
}

/// Absolute accuracy of quadrature-derived norms.
pub const NORM_QUADRATURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Pieces {
        kind: PotentialKind,
        pieces: Vec<Piece>,
    },
    Analytic {
        terms: Vec<AnalyticTerm>,
        radius: f64,
        tail_tolerance: f64,
        tail_bound: f64,
    },
}

/// A real potential `q ∈ L¹(ℝ)`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    repr: Repr,
    norms: L1Norms,
}

impl Potential {
    /// `q ≡ 0`.
    pub fn zero() -> Self {
        Self {
            repr: Repr::Pieces {
                kind: PotentialKind::StepSum,
                pieces: Vec::new(),
            },
            norms: L1Norms::ZERO,
        }
    }

    /// Constant `value` on each `[start, end)`.
    pub fn step_sum(pieces: &[(f64, f64, f64)]) -> Result<Self> {
        let pieces = pieces.iter().map(|&(a, b, v)| Piece::constant(a, b, v)).collect();
        Self::from_pieces(PotentialKind::StepSum, pieces)
    }

    /// Well `q = -depth` on `[start, end)`.
    pub fn square_well(depth: f64, start: f64, end: f64) -> Result<Self> {
        Self::step_sum(&[(start, end, -depth)])
    }

    pub fn piecewise_polynomial(pieces: Vec<Piece>) -> Result<Self> {
        Self::from_pieces(PotentialKind::PiecewisePolynomial, pieces)
    }

    fn from_pieces(kind: PotentialKind, mut pieces: Vec<Piece>) -> Result<Self> {
        for p in &pieces {
            if !(p.start.is_finite() && p.end.is_finite() && p.start < p.end) {
                return Err(Error::InvalidInput(format!(
                    "piece interval [{}, {}) must be finite and nonempty",
                    p.start, p.end
                )));
            }
            if p.coefficients.is_empty() || p.coefficients.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(
                    "piece coefficients must be finite and nonempty".into(),
                ));
            }
            if kind == PotentialKind::StepSum && p.coefficients.len() != 1 {
                return Err(Error::InvalidInput("step pieces carry one value".into()));
            }
        }
        pieces.sort_by(|a, b| a.start.total_cmp(&b.start));
        if let Some(w) = pieces.windows(2).find(|w| w[0].end > w[1].start) {
            return Err(Error::InvalidInput(format!(
                "pieces [{}, {}) and [{}, {}) overlap",
                w[0].start, w[0].end, w[1].start, w[1].end
            )));
        }
        let (mut positive, mut negative) = (0.0, 0.0);
        for p in &pieces {
            let (pos, neg) = piece_norms(p);
            positive += pos;
            negative += neg;
        }
        Ok(Self {
            repr: Repr::Pieces { kind, pieces },
            norms: L1Norms::from_parts(positive, negative, 0.0),
        })
    }

    /// Sum of analytic terms, truncated to `[-R, R)`.
    ///
    /// With `radius = None` the smallest radius whose certified tail mass is
    /// at most `tail_tolerance` is used; an explicit radius must meet the
    /// tolerance or construction fails.
    pub fn truncated_analytic(terms: Vec<AnalyticTerm>, radius: Option<f64>, tail_tolerance: f64) -> Result<Self> {
        Self::truncated_analytic_with(terms, radius, tail_tolerance, NORM_QUADRATURE_TOL)
    }

    /// [`Potential::truncated_analytic`] with the norms integrated to
    /// `quadrature_tolerance` instead of the default.
    pub fn truncated_analytic_with(
        terms: Vec<AnalyticTerm>,
        radius: Option<f64>,
        tail_tolerance: f64,
        quadrature_tolerance: f64,
    ) -> Result<Self> {
        if !(quadrature_tolerance > 0.0 && quadrature_tolerance.is_finite()) {
            return Err(Error::InvalidInput("quadrature tolerance must be positive".into()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidInput("analytic potential needs a term".into()));
        }
        for t in &terms {
            t.validate()?;
        }
        if !(tail_tolerance > 0.0) {
            return Err(Error::InvalidInput("tail tolerance must be positive".into()));
        }
        let tail = |r: f64| terms.iter().map(|t| t.tail_mass(r)).sum::<f64>();
        let radius = match radius {
            Some(r) => {
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::InvalidInput("radius must be positive".into()));
                }
                if tail(r) > tail_tolerance {
                    return Err(Error::InvalidInput(format!(
                        "tail mass {:e} beyond R = {r} exceeds tolerance {tail_tolerance:e}",
                        tail(r)
                    )));
                }
                r
            }
            None => {
                let mut hi = 1.0;
                while tail(hi) > tail_tolerance {
                    hi *= 2.0;
                    if hi > 1e6 {
                        return Err(Error::InvalidInput(
                            "no truncation radius below 1e6 meets the tail tolerance".into(),
                        ));
                    }
                }
                let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if tail(mid) > tail_tolerance {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        };
        let tail_bound = tail(radius);
        let mut breaks = vec![-radius];
        breaks.extend(
            terms
                .iter()
                .filter(|t| matches!(t, AnalyticTerm::Exponential { .. }))
                .map(|t| t.parts().1)
                .filter(|&c| c > -radius && c < radius),
        );
        breaks.push(radius);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let q = |x: f64| terms.iter().map(|t| t.eval(x)).sum::<f64>();
        let tol = 0.5 * quadrature_tolerance;
        let pos = integrate_with_breaks(|x| q(x).max(0.0), &breaks, tol)?;
        let neg = integrate_with_breaks(|x| (-q(x)).max(0.0), &breaks, tol)?;
        if !pos.converged || !neg.converged {
            return Err(Error::Quadrature {
                error_estimate: pos.error_estimate + neg.error_estimate,
                tolerance: quadrature_tolerance,
            });
        }
        Ok(Self {
            repr: Repr::Analytic {
                terms,
                radius,
                tail_tolerance,
                tail_bound,
            },
            norms: L1Norms::from_parts(pos.value, neg.value, pos.error_estimate + neg.error_estimate),
        })
    }

    pub fn kind(&self) -> PotentialKind {
        match &self.repr {
            Repr::Pieces { kind, .. } => *kind,
            Repr::Analytic { .. } => PotentialKind::TruncatedAnalytic,
        }
    }

    /// `q(x)`; zero outside every piece and beyond the truncation radius.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Pieces { pieces, .. } => {
                // Last piece with start <= x.
                let idx = pieces.partition_point(|p| p.start <= x);
                if idx == 0 {
                    return 0.0;
                }
                let p = &pieces[idx - 1];
                if x < p.end {
                    p.eval_local(x - p.start)
                } else {
                    0.0
                }
            }
            Repr::Analytic { terms, radius, .. } => {
                if x >= -radius && x < *radius {
                    terms.iter().map(|t| t.eval(x)).sum()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn l1_norms(&self) -> L1Norms {
        self.norms
    }

    /// Smallest `L` with `q = 0` outside `[-L, L]` (for truncated kinds, the
    /// truncation radius).
    pub fn support_radius(&self) -> f64 {
        match &self.repr {
            Repr::Pieces { pieces, .. } => pieces
                .iter()
                .filter(|p| !p.is_zero())
                .map(|p| p.start.abs().max(p.end.abs()))
                .fold(0.0, f64::max),
            Repr::Analytic { radius, .. } => *radius,
        }
    }

    /// Smallest interval containing the support, if `q` is not identically zero.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        match &self.repr {
            Repr::Pieces { pieces, .. } => {
                let mut nonzero = pieces.iter().filter(|p| !p.is_zero());
                let first = nonzero.next()?;
                let last = nonzero.next_back().unwrap_or(first);
                Some((first.start, last.end))
            }
            Repr::Analytic { radius, .. } => Some((-radius, *radius)),
        }
    }

    /// Points where `q` may fail to be smooth, sorted ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.repr {
            Repr::Pieces { pieces, .. } => pieces
                .iter()
                .filter(|p| !p.is_zero())
                .flat_map(|p| [p.start, p.end])
                .collect::<Vec<_>>(),
            Repr::Analytic { terms, radius, .. } => {
                let mut v = vec![-radius, *radius];
                v.extend(
                    terms
                        .iter()
                        .filter(|t| matches!(t, AnalyticTerm::Exponential { .. }))
                        .map(|t| t.parts().1)
                        .filter(|c| c.abs() < *radius),
                );
                v
            }
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Intervals on which `q` vanishes identically between two breakpoints.
    pub fn is_zero_on(&self, a: f64, b: f64) -> bool {
        match &self.repr {
            Repr::Pieces { pieces, .. } => !pieces.iter().any(|p| !p.is_zero() && p.start < b && p.end > a),
            Repr::Analytic { radius, .. } => b <= -radius || a >= *radius,
        }
    }

    /// Certified `∫_{|x|>R} |q_untruncated|`; zero for compactly supported kinds.
    pub fn tail_bound(&self) -> f64 {
        match &self.repr {
            Repr::Pieces { .. } => 0.0,
            Repr::Analytic { tail_bound, .. } => *tail_bound,
        }
    }

    pub fn tail_tolerance(&self) -> f64 {
        match &self.repr {
            Repr::Pieces { .. } => 0.0,
            Repr::Analytic { tail_tolerance, .. } => *tail_tolerance,
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        match &self.repr {
            Repr::Pieces { pieces, .. } => pieces,
            Repr::Analytic { .. } => &[],
        }
    }

    pub fn terms(&self) -> &[AnalyticTerm] {
        match &self.repr {
            Repr::Pieces { .. } => &[],
            Repr::Analytic { terms, .. } => terms,
        }
    }

    /// `c · q`. Norms scale exactly (with `q₊`/`q₋` exchanged for `c < 0`).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidInput("scale factor must be finite".into()));
        }
        if c == 0.0 {
            return Ok(Self::zero());
        }
        let repr = match &self.repr {
            Repr::Pieces { kind, pieces } => Repr::Pieces {
                kind: *kind,
                pieces: pieces
                    .iter()
                    .map(|p| Piece {
                        start: p.start,
                        end: p.end,
                        coefficients: p.coefficients.iter().map(|v| c * v).collect(),
                    })
                    .collect(),
            },
            Repr::Analytic {
                terms,
                radius,
                tail_tolerance,
                tail_bound,
            } => Repr::Analytic {
                terms: terms.iter().map(|t| t.with_amplitude(c * t.parts().0)).collect(),
                radius: *radius,
                tail_tolerance: tail_tolerance * c.abs(),
                tail_bound: tail_bound * c.abs(),
            },
        };
        let n = self.norms;
        let (positive, negative) = if c > 0.0 {
            (c * n.positive, c * n.negative)
        } else {
            (-c * n.negative, -c * n.positive)
        };
        Ok(Self {
            repr,
            norms: L1Norms {
                total: c.abs() * n.total,
                positive,
                negative,
                error_estimate: c.abs() * n.error_estimate,
            },
        })
    }

    /// `q + other`, for two piecewise potentials or two analytic sums.
    pub fn sum(&self, other: &Potential) -> Result<Self> {
        match (&self.repr, &other.repr) {
            (Repr::Pieces { kind: k1, pieces: p1 }, Repr::Pieces { kind: k2, pieces: p2 }) => {
                let kind = if *k1 == PotentialKind::StepSum && *k2 == PotentialKind::StepSum {
                    PotentialKind::StepSum
                } else {
                    PotentialKind::PiecewisePolynomial
                };
                let mut edges: Vec<f64> = p1.iter().chain(p2).flat_map(|p| [p.start, p.end]).collect();
                edges.sort_by(f64::total_cmp);
                edges.dedup();
                let mut pieces = Vec::new();
                for w in edges.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let mut coeffs: Vec<f64> = Vec::new();
                    let mut covered = false;
                    for p in p1.iter().chain(p2) {
                        if p.start <= a && p.end >= b {
                            covered = true;
                            let shifted = taylor_shift(&p.coefficients, a - p.start);
                            if shifted.len() > coeffs.len() {
                                coeffs.resize(shifted.len(), 0.0);
                            }
                            for (acc, v) in coeffs.iter_mut().zip(shifted) {
                                *acc += v;
                            }
                        }
                    }
                    if covered {
                        pieces.push(Piece {
                            start: a,
                            end: b,
                            coefficients: coeffs,
                        });
                    }
                }
                Self::from_pieces(kind, pieces)
            }
            (
                Repr::Analytic {
                    terms: t1,
                    radius: r1,
                    tail_tolerance: e1,
                    ..
                },
                Repr::Analytic {
                    terms: t2,
                    radius: r2,
                    tail_tolerance: e2,
                    ..
                },
            ) => {
                let terms = t1.iter().chain(t2).copied().collect();
                Self::truncated_analytic(terms, Some(r1.max(*r2)), e1 + e2)
            }
            _ => Err(Error::InvalidInput(
                "sums of piecewise and analytic potentials are not supported".into(),
            )),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.norms.total == 0.0
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Coefficients of `p(t + s)` given those of `p(t)`.
fn taylor_shift(coeffs: &[f64], s: f64) -> Vec<f64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    // Repeated synthetic division by (t - (-s)).
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += s * out[j + 1];
        }
    }
    out
}

fn trimmed(coeffs: &[f64]) -> &[f64] {
    let len = coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    &coeffs[..len]
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

fn antiderivative(coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (k, &c)| acc * t + c / (k as f64 + 1.0))
        * t
}

/// Real roots of the polynomial inside `(lo, hi)`, ascending.
///
/// Roots of the derivative split the interval into monotone stretches, each
/// holding at most one root, which bisection then pins to full precision.
fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = trimmed(coeffs);
    match c.len() {
        0 | 1 => Vec::new(),
        2 => {
            let r = -c[0] / c[1];
            if r > lo && r < hi {
                vec![r]
            } else {
                Vec::new()
            }
        }
        _ => {
            let mut points = vec![lo];
            points.extend(real_roots_in(&derivative(c), lo, hi));
            points.push(hi);
            let mut roots: Vec<f64> = Vec::new();
            for w in points.windows(2) {
                let (mut a, mut b) = (w[0], w[1]);
                let (fa, fb) = (horner(c, a), horner(c, b));
                if fb == 0.0 && b < hi {
                    roots.push(b);
                    continue;
                }
                if fa * fb >= 0.0 {
                    continue;
                }
                let neg_at_a = fa < 0.0;
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if (horner(c, m) < 0.0) == neg_at_a {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            roots.dedup();
            roots
        }
    }
}

/// Closed-form `(∫ p₊, ∫ p₋)` over one piece.
fn piece_norms(p: &Piece) -> (f64, f64) {
    let len = p.end - p.start;
    let c = trimmed(&p.coefficients);
    if c.is_empty() {
        return (0.0, 0.0);
    }
    let mut cuts = vec![0.0];
    cuts.extend(real_roots_in(c, 0.0, len));
    cuts.push(len);
    let (mut pos, mut neg) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let signed = antiderivative(c, w[1]) - antiderivative(c, w[0]);
        if signed >= 0.0 {
            pos += signed;
        } else {
            neg -= signed;
        }
    }
    (pos, neg)
}
