//! Zeros of an analytic function in a rectangle of the upper half-plane.
//!
//! The count inside a box is the winding number of `F` along its boundary.
//! Boxes are split into quadrants until each holds one zero, which Newton's
//! method then polishes. Boxes that still hold several zeros at the minimum
//! size are reported as clusters with their multiplicity.
//!
//! Contour samples are taken on a lattice shared between neighbouring boxes
//! and cached, so a side common to two boxes is evaluated once.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::birman_schwinger::Rectangle;
use crate::bounds::{ABS_CONSTANT, IM_CONSTANT};
use crate::potential::L1Norms;
use crate::{Error, Result};

/// Which characteristic function produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Shooting,
    BirmanSchwinger,
}

/// The bound-derived search rectangle `[-B_abs, B_abs] × [ε, B_im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    /// `min(‖q‖₁², (24√3 + 18)‖q₋‖₁²)`.
    pub abs_bound: f64,
    /// `min(B_abs, 24√3 ‖q₋‖₁²)`.
    pub im_bound: f64,
}

impl SearchRegion {
    /// `None` when no non-real eigenvalue can exist above the floor.
    pub fn rectangle(&self) -> Option<Rectangle> {
        Rectangle::new(self.re_min, self.re_max, self.im_min, self.im_max).ok()
    }

    pub fn is_empty(&self) -> bool {
        self.rectangle().is_none()
    }
}

/// Default floor `10⁻³ · max(1, B_im)` below which eigenvalues are not sought.
pub fn default_eps_floor(im_bound: f64) -> f64 {
    1e-3 * im_bound.max(1.0)
}

/// Search rectangle from the a-priori bounds. With `q₋ = 0` it is empty.
pub fn region_from_bounds(norms: &L1Norms, eps_floor: Option<f64>) -> Result<SearchRegion> {
    let total = norms.total * norms.total;
    let negative = norms.negative * norms.negative;
    let abs_bound = total.min(ABS_CONSTANT * negative);
    let im_bound = abs_bound.min(IM_CONSTANT * negative);
    let eps = match eps_floor {
        Some(e) if !(e > 0.0 && e.is_finite()) => {
            return Err(Error::InvalidInput(format!("eps floor must be positive, got {e}")))
        }
        Some(e) => e,
        None => default_eps_floor(im_bound),
    };
    Ok(SearchRegion {
        // Written as a difference so an empty region reports 0, not -0.
        re_min: 0.0 - abs_bound,
        re_max: abs_bound,
        im_min: eps,
        im_max: im_bound,
        abs_bound,
        im_bound,
    })
}

/// A located zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCertificate {
    pub lambda: Complex64,
    /// `|F(λ)|` over the median of `|F|` on the enclosing contour.
    pub residual: f64,
    /// Zeros counted inside the final box; above 1 marks a cluster.
    pub winding_count: i64,
    pub method: Method,
    pub refinement_iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    /// Newton stops once `|Δλ| ≤ newton_tol · (1 + |λ|)`.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Initial samples per side of a box; refined adaptively.
    pub samples_per_side: usize,
    pub max_boxes: usize,
    /// Largest accepted certificate residual.
    pub residual_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-12,
            max_newton_iters: 60,
            samples_per_side: 16,
            max_boxes: 4000,
            residual_tol: 1e-6,
        }
    }
}

/// Everything [`locate_zeros`] learned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Sorted by `(Re λ, Im λ)`.
    pub certificates: Vec<ZeroCertificate>,
    /// Zero count of the (possibly dilated) top-level box.
    pub top_winding: i64,
    /// The box whose count `top_winding` is.
    pub searched: Option<Rectangle>,
    /// False if a budget ran out or a count could not be resolved.
    pub complete: bool,
    pub issues: Vec<String>,
    pub evaluations: usize,
}

impl SearchOutcome {
    pub fn empty() -> Self {
        Self {
            certificates: Vec::new(),
            top_winding: 0,
            searched: None,
            complete: true,
            issues: Vec::new(),
            evaluations: 0,
        }
    }

    /// `Σ winding_count`, equal to `top_winding` when complete.
    pub fn counted_zeros(&self) -> i64 {
        self.certificates.iter().map(|c| c.winding_count).sum()
    }
}

/// Memoized, thread-safe `F`.
struct Evaluator<'a, F> {
    f: &'a F,
    cache: Mutex<HashMap<(u64, u64), Complex64>>,
}

impl<'a, F> Evaluator<'a, F>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    fn new(f: &'a F) -> Self {
        Self {
            f,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn key(z: Complex64) -> (u64, u64) {
        // Normalize -0.0 so both zeros hit the same entry.
        ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits())
    }

    fn evaluations(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }

    fn batch(&self, points: &[Complex64]) -> Result<Vec<Complex64>> {
        let missing: Vec<Complex64> = {
            let cache = self.cache.lock().expect("cache poisoned");
            let mut seen = std::collections::HashSet::new();
            points
                .iter()
                .copied()
                .filter(|&z| !cache.contains_key(&Self::key(z)) && seen.insert(Self::key(z)))
                .collect()
        };
        let fresh: Vec<(Complex64, Complex64)> = missing
            .par_iter()
            .map(|&z| {
                let v = (self.f)(z)?;
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::Domain(format!("characteristic function is not finite at {z}")));
                }
                Ok((z, v))
            })
            .collect::<Result<_>>()?;
        let mut cache = self.cache.lock().expect("cache poisoned");
        for (z, v) in fresh {
            cache.insert(Self::key(z), v);
        }
        Ok(points.iter().map(|&z| cache[&Self::key(z)]).collect())
    }

    fn one(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.batch(&[z])?[0])
    }
}

/// Contour data for one box.
struct Contour {
    winding: i64,
    median_abs: f64,
}

/// Samples `lo..=hi` on one side, always generated from the smaller end so
/// neighbours share points exactly.
fn side_points(a: Complex64, b: Complex64, n: usize) -> Vec<Complex64> {
    let (lo, hi, flip) = if (a.re, a.im) <= (b.re, b.im) {
        (a, b, false)
    } else {
        (b, a, true)
    };
    let mut pts: Vec<Complex64> = (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                let t = i as f64 / n as f64;
                Complex64::new(lo.re + (hi.re - lo.re) * t, lo.im + (hi.im - lo.im) * t)
            }
        })
        .collect();
    if flip {
        pts.reverse();
    }
    pts
}

const MAX_BISECTIONS: usize = 30;

/// Argument change along the polyline `pts`.
///
/// Every step is checked at its midpoint: the two half steps of `log F` must
/// each move the phase by at most `π/2` and differ from each other by at most
/// `π/4`, otherwise the step is bisected. The curvature test catches phase
/// that wraps a full turn between samples, which a jump test alone cannot.
fn phase_change<F>(ev: &Evaluator<F>, pts: &[Complex64], vals: &[Complex64], abs_samples: &mut Vec<f64>) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let mids: Vec<Complex64> = pts.windows(2).map(|w| midpoint(w[0], w[1])).collect();
    let fm = ev.batch(&mids)?;
    abs_samples.extend(fm.iter().map(|v| v.norm()));
    let mut total = 0.0;
    for i in 0..pts.len() - 1 {
        total += segment_phase(
            ev,
            [pts[i], mids[i], pts[i + 1]],
            [vals[i], fm[i], vals[i + 1]],
            0,
            abs_samples,
        )?;
    }
    Ok(total)
}

/// Midpoint in the canonical orientation, so reversed traversals agree.
fn midpoint(a: Complex64, b: Complex64) -> Complex64 {
    if (a.re, a.im) <= (b.re, b.im) {
        a + (b - a) * 0.5
    } else {
        b + (a - b) * 0.5
    }
}

fn log_ratio(num: Complex64, den: Complex64) -> Complex64 {
    let r = num / den;
    Complex64::new(r.norm().ln(), r.arg())
}

fn segment_phase<F>(
    ev: &Evaluator<F>,
    z: [Complex64; 3],
    fz: [Complex64; 3],
    depth: usize,
    abs_samples: &mut Vec<f64>,
) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if fz.iter().any(|v| *v == Complex64::new(0.0, 0.0)) {
        return Err(Error::NearContourZero(format!(
            "F vanishes on the contour near {}",
            z[1]
        )));
    }
    let d1 = log_ratio(fz[1], fz[0]);
    let d2 = log_ratio(fz[2], fz[1]);
    if d1.im.abs() <= FRAC_PI_2 && d2.im.abs() <= FRAC_PI_2 && (d1 - d2).norm() <= FRAC_PI_4 {
        return Ok(d1.im + d2.im);
    }
    if depth >= MAX_BISECTIONS {
        return Err(Error::NearContourZero(format!(
            "phase of F is unresolved between {} and {}",
            z[0], z[2]
        )));
    }
    let quarter = [midpoint(z[0], z[1]), midpoint(z[1], z[2])];
    let fq = ev.batch(&quarter)?;
    abs_samples.extend(fq.iter().map(|v| v.norm()));
    Ok(segment_phase(
        ev,
        [z[0], quarter[0], z[1]],
        [fz[0], fq[0], fz[1]],
        depth + 1,
        abs_samples,
    )? + segment_phase(
        ev,
        [z[1], quarter[1], z[2]],
        [fz[1], fq[1], fz[2]],
        depth + 1,
        abs_samples,
    )?)
}

fn contour<F>(ev: &Evaluator<F>, r: &Rectangle, n: usize) -> Result<Contour>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let corners = [
        Complex64::new(r.re_min, r.im_min),
        Complex64::new(r.re_max, r.im_min),
        Complex64::new(r.re_max, r.im_max),
        Complex64::new(r.re_min, r.im_max),
    ];
    let sides: Vec<Vec<Complex64>> = (0..4)
        .map(|i| side_points(corners[i], corners[(i + 1) % 4], n))
        .collect();
    let all: Vec<Complex64> = sides.iter().flatten().copied().collect();
    let vals = ev.batch(&all)?;
    let mut abs_samples: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
    let mut total = 0.0;
    for (s, side) in sides.iter().enumerate() {
        let v = &vals[s * (n + 1)..(s + 1) * (n + 1)];
        total += phase_change(ev, side, v, &mut abs_samples)?;
    }
    abs_samples.sort_by(f64::total_cmp);
    let median_abs = abs_samples[abs_samples.len() / 2];
    let min_abs = abs_samples[0];
    if !(min_abs >= 1e-8 * median_abs) {
        return Err(Error::NearContourZero(format!(
            "min |F| = {min_abs:e} against median {median_abs:e} on box {r:?}"
        )));
    }
    let turns = total / TAU;
    let winding = turns.round();
    if (turns - winding).abs() > 1e-6 {
        return Err(Error::NearContourZero(format!("non-integral winding {turns}")));
    }
    Ok(Contour {
        winding: winding as i64,
        median_abs,
    })
}

/// Number of zeros of `F` inside `r`, counted with multiplicity.
pub fn winding_number<F>(f: &F, r: &Rectangle, samples_per_side: usize) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if samples_per_side < 2 {
        return Err(Error::InvalidInput("need at least two samples per side".into()));
    }
    contour(&Evaluator::new(f), r, samples_per_side).map(|c| c.winding)
}

/// Newton with a central-difference derivative. Returns the iterate, the
/// number of iterations, and whether the step criterion was met.
fn newton<F>(ev: &Evaluator<F>, start: Complex64, opts: &SearchOptions) -> Result<(Complex64, usize, bool)>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let mut z = start;
    let mut fz = ev.one(z)?;
    for it in 1..=opts.max_newton_iters {
        let h = 1e-6 * (1.0 + z.norm());
        let fd = ev.batch(&[z + h, z - h])?;
        let deriv = (fd[0] - fd[1]) / (2.0 * h);
        if deriv == Complex64::new(0.0, 0.0) || !deriv.re.is_finite() || !deriv.im.is_finite() {
            return Ok((z, it, false));
        }
        let mut step = fz / deriv;
        // Backtrack while the step leaves the half-plane or increases |F|.
        let mut accepted = None;
        for _ in 0..30 {
            let cand = z - step;
            if cand.im > 0.0 {
                let fc = ev.one(cand)?;
                if fc.norm() <= fz.norm() || step.norm() <= 1e-7 * (1.0 + z.norm()) {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            return Ok((z, it, false));
        };
        let moved = (next - z).norm();
        z = next;
        fz = fnext;
        if moved <= opts.newton_tol * (1.0 + z.norm()) || fz == Complex64::new(0.0, 0.0) {
            return Ok((z, it, true));
        }
    }
    Ok((z, opts.max_newton_iters, false))
}

fn split(r: &Rectangle, fx: f64, fy: f64) -> [Rectangle; 4] {
    let xm = r.re_min + fx * (r.re_max - r.re_min);
    let ym = r.im_min + fy * (r.im_max - r.im_min);
    let b = |a: f64, b: f64, c: f64, d: f64| Rectangle {
        re_min: a,
        re_max: b,
        im_min: c,
        im_max: d,
    };
    [
        b(r.re_min, xm, r.im_min, ym),
        b(xm, r.re_max, r.im_min, ym),
        b(r.re_min, xm, ym, r.im_max),
        b(xm, r.re_max, ym, r.im_max),
    ]
}

/// Split fractions tried in turn when a child contour passes too close to
/// a zero or the child counts do not add up.
const SPLITS: [(f64, f64); 5] = [(0.5, 0.5), (0.45, 0.55), (0.55, 0.45), (0.4, 0.6), (0.6, 0.4)];

/// All zeros of `f` in `region`, to `opts.newton_tol`.
///
/// The top-level box is dilated by 10% (keeping it in the upper half-plane)
/// up to three times if a zero sits on its boundary.
pub fn locate_zeros<F>(f: &F, region: &Rectangle, method: Method, opts: &SearchOptions) -> Result<SearchOutcome>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if opts.samples_per_side < 2 || !(opts.newton_tol > 0.0) {
        return Err(Error::InvalidInput("invalid search options".into()));
    }
    let ev = Evaluator::new(f);
    let n = opts.samples_per_side;
    let mut outcome = SearchOutcome::empty();

    let mut top = *region;
    let mut top_contour = None;
    for attempt in 0..=3 {
        match contour(&ev, &top, n) {
            Ok(c) => {
                top_contour = Some(c);
                break;
            }
            Err(Error::NearContourZero(msg)) if attempt < 3 => {
                outcome.issues.push(format!("dilating search box: {msg}"));
                let dx = 0.05 * (top.re_max - top.re_min);
                let dy = 0.05 * (top.im_max - top.im_min);
                top = Rectangle {
                    re_min: top.re_min - dx,
                    re_max: top.re_max + dx,
                    im_min: (top.im_min - dy).max(0.5 * top.im_min),
                    im_max: top.im_max + dy,
                };
            }
            Err(e) => return Err(e),
        }
    }
    let top_contour = top_contour.expect("loop either sets the contour or returns");
    outcome.searched = Some(top);
    outcome.top_winding = top_contour.winding;
    if top_contour.winding < 0 {
        return Err(Error::Domain("negative winding number: F is not analytic here".into()));
    }
    let diam = (top.re_max - top.re_min).hypot(top.im_max - top.im_min);
    let min_size = 1e-7 * (1.0 + diam);

    let mut queue = std::collections::VecDeque::new();
    if top_contour.winding > 0 {
        queue.push_back((top, top_contour.winding, top_contour.median_abs));
    }
    let mut boxes = 1usize;
    while let Some((r, count, median)) = queue.pop_front() {
        let size = (r.re_max - r.re_min).max(r.im_max - r.im_min);
        if count == 1 {
            let start = Complex64::new(0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max));
            let (z, iters, converged) = newton(&ev, start, opts)?;
            let margin = 1e-9 * (1.0 + z.norm());
            let inside = z.re >= r.re_min - margin
                && z.re <= r.re_max + margin
                && z.im >= r.im_min - margin
                && z.im <= r.im_max + margin;
            if converged && inside {
                let residual = ev.one(z)?.norm() / median;
                outcome.certificates.push(ZeroCertificate {
                    lambda: z,
                    residual,
                    winding_count: 1,
                    method,
                    refinement_iters: iters,
                    converged: residual <= opts.residual_tol,
                });
                continue;
            }
            if size <= min_size {
                outcome.complete = false;
                outcome
                    .issues
                    .push(format!("Newton failed in minimal box around {start}"));
                outcome.certificates.push(ZeroCertificate {
                    lambda: start,
                    residual: ev.one(start)?.norm() / median,
                    winding_count: 1,
                    method,
                    refinement_iters: iters,
                    converged: false,
                });
                continue;
            }
        } else if size <= min_size {
            let start = Complex64::new(0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max));
            let (z, iters, _) = newton(&ev, start, opts)?;
            let z = if r.contains(z) { z } else { start };
            outcome.certificates.push(ZeroCertificate {
                lambda: z,
                residual: ev.one(z)?.norm() / median,
                winding_count: count,
                method,
                refinement_iters: iters,
                converged: true,
            });
            outcome.issues.push(format!("cluster of {count} zeros near {z}"));
            continue;
        }
        if boxes >= opts.max_boxes {
            outcome.complete = false;
            outcome.issues.push(format!("box budget {} exhausted", opts.max_boxes));
            break;
        }
        let mut resolved = false;
        for &(fx, fy) in &SPLITS {
            let children = split(&r, fx, fy);
            let counted: Result<Vec<Contour>> = children.iter().map(|c| contour(&ev, c, n)).collect();
            match counted {
                Ok(cs) if cs.iter().map(|c| c.winding).sum::<i64>() == count && cs.iter().all(|c| c.winding >= 0) => {
                    boxes += 4;
                    for (child, c) in children.into_iter().zip(cs) {
                        if c.winding > 0 {
                            queue.push_back((child, c.winding, c.median_abs));
                        }
                    }
                    resolved = true;
                    break;
                }
                Ok(_) | Err(Error::NearContourZero(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        if !resolved {
            outcome.complete = false;
            outcome
                .issues
                .push(format!("could not subdivide box {r:?} holding {count} zeros"));
            let start = Complex64::new(0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max));
            outcome.certificates.push(ZeroCertificate {
                lambda: start,
                residual: ev.one(start)?.norm() / median,
                winding_count: count,
                method,
                refinement_iters: 0,
                converged: false,
            });
        }
    }
    if outcome.certificates.iter().any(|c| !c.converged) {
        outcome.complete = false;
    }
    outcome.certificates.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    outcome.evaluations = ev.evaluations();
    debug_assert!(!outcome.complete || outcome.counted_zeros() == outcome.top_winding);
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rect(a: f64, b: f64, c: f64, d: f64) -> Rectangle {
        Rectangle::new(a, b, c, d).unwrap()
    }

    #[test]
    fn region_examples() {
        let n = L1Norms {
            total: 2.0,
            positive: 0.0,
            negative: 2.0,
            error_estimate: 0.0,
        };
        let r = region_from_bounds(&n, None).unwrap();
        assert_eq!((r.abs_bound, r.im_bound), (4.0, 4.0));
        assert_eq!((r.re_min, r.re_max, r.im_max), (-4.0, 4.0, 4.0));
        assert!((r.im_min - 4e-3).abs() < 1e-18);

        let n = L1Norms {
            total: 10.0,
            positive: 9.9,
            negative: 0.1,
            error_estimate: 0.0,
        };
        let r = region_from_bounds(&n, None).unwrap();
        assert!((r.abs_bound - (24.0 * 3f64.sqrt() + 18.0) * 0.01).abs() < 1e-15);
        assert!((r.im_bound - 24.0 * 3f64.sqrt() * 0.01).abs() < 1e-15);

        let n = L1Norms {
            total: 3.0,
            positive: 3.0,
            negative: 0.0,
            error_estimate: 0.0,
        };
        assert!(region_from_bounds(&n, None).unwrap().is_empty());
        assert!(region_from_bounds(&n, Some(-1.0)).is_err());
    }

    #[test]
    fn winding_of_simple_functions() {
        let r = rect(-1.0, 1.0, 0.5, 2.0);
        let z0 = c(0.2, 1.1);
        assert_eq!(winding_number(&|z: Complex64| Ok(z - z0), &r, 8).unwrap(), 1);
        assert_eq!(
            winding_number(&|z: Complex64| Ok((z - z0) * (z - z0) * z.exp()), &r, 8).unwrap(),
            2
        );
        assert_eq!(winding_number(&|z: Complex64| Ok(z - c(5.0, 1.0)), &r, 8).unwrap(), 0);
    }

    #[test]
    fn zero_on_contour_is_detected() {
        let r = rect(-1.0, 1.0, 0.5, 2.0);
        let err = winding_number(&|z: Complex64| Ok(z - c(0.0, 0.5)), &r, 8).unwrap_err();
        assert!(matches!(err, Error::NearContourZero(_)));
    }

    #[test]
    fn two_roots_found() {
        let f = |z: Complex64| Ok((z - c(1.0, 2.0)) * (z - c(-3.0, 1.0)));
        let out = locate_zeros(
            &f,
            &rect(-5.0, 5.0, 0.1, 4.0),
            Method::Shooting,
            &SearchOptions::default(),
        )
        .unwrap();
        assert!(out.complete);
        assert_eq!(out.top_winding, 2);
        assert_eq!(out.certificates.len(), 2);
        assert!((out.certificates[0].lambda - c(-3.0, 1.0)).norm() < 1e-10);
        assert!((out.certificates[1].lambda - c(1.0, 2.0)).norm() < 1e-10);
    }

    #[test]
    fn double_root_is_a_cluster() {
        let z0 = c(0.3, 0.7);
        let f = |z: Complex64| Ok((z - z0) * (z - z0));
        let out = locate_zeros(
            &f,
            &rect(-1.0, 1.0, 0.1, 1.0),
            Method::Shooting,
            &SearchOptions::default(),
        )
        .unwrap();
        assert_eq!(out.counted_zeros(), 2);
        assert_eq!(out.certificates.len(), 1);
        assert_eq!(out.certificates[0].winding_count, 2);
        assert!((out.certificates[0].lambda - z0).norm() < 1e-6);
    }

    #[test]
    fn boundary_zero_triggers_dilation() {
        let f = |z: Complex64| Ok(z - c(1.0, 0.5));
        let out = locate_zeros(
            &f,
            &rect(-1.0, 1.0, 0.1, 1.0),
            Method::Shooting,
            &SearchOptions::default(),
        )
        .unwrap();
        assert!(!out.issues.is_empty());
        assert_eq!(out.top_winding, 1);
        assert!((out.certificates[0].lambda - c(1.0, 0.5)).norm() < 1e-10);
    }

    #[test]
    fn zero_free_function_gives_nothing() {
        let f = |z: Complex64| Ok(z.exp());
        let out = locate_zeros(
            &f,
            &rect(-3.0, 3.0, 0.1, 3.0),
            Method::BirmanSchwinger,
            &SearchOptions::default(),
        )
        .unwrap();
        assert!(out.complete && out.certificates.is_empty() && out.top_winding == 0);
    }

    #[test]
    fn results_are_deterministic() {
        let f = |z: Complex64| Ok((z - c(0.5, 0.5)) * (z - c(-0.5, 1.5)) * (z - c(2.0, 0.3)));
        let r = rect(-3.0, 3.0, 0.1, 2.0);
        let a = locate_zeros(&f, &r, Method::Shooting, &SearchOptions::default()).unwrap();
        let b = locate_zeros(&f, &r, Method::Shooting, &SearchOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
