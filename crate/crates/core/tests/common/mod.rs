//! Independent oracles shared by the integration tests and the acceptance
//! harness. Nothing here calls into the solver paths it is used to check.
#![allow(dead_code)]

use std::f64::consts::PI;

use indefinite_sl::birman_schwinger::Rectangle;
use indefinite_sl::config::RunConfig;
use indefinite_sl::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_lambda(rng: &mut ChaCha8Rng, re: (f64, f64), im: (f64, f64)) -> Complex64 {
    c(rng.gen_range(re.0..re.1), rng.gen_range(im.0..im.1))
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Principal root for `Im λ > 0` from `std`'s complex sqrt, whose branch
/// already has `Re > 0`; used only to cross-check the crate's own root.
pub fn reference_sqrt(lambda: Complex64) -> Complex64 {
    lambda.sqrt()
}

/// Exact propagation of `(f, f')` through `f'' = c f` over a signed length `t`.
pub fn propagate_constant(state: (Complex64, Complex64), coef: Complex64, t: f64) -> (Complex64, Complex64) {
    let s = coef.sqrt();
    let (ch, sh) = ((s * t).cosh(), (s * t).sinh());
    // sinh(st)/s → t as s → 0.
    let sinc = if s.norm() * t.abs() < 1e-8 { c(t, 0.0) } else { sh / s };
    (ch * state.0 + sinc * state.1, s * sh * state.0 + ch * state.1)
}

/// Piecewise-constant potential as sorted `(start, end, value)` triples.
pub type Steps = Vec<(f64, f64, f64)>;

fn value_on(steps: &Steps, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    steps.iter().find(|&&(s, e, _)| s <= m && m < e).map_or(0.0, |s| s.2)
}

fn cuts(steps: &Steps, from: f64, to: f64) -> Vec<f64> {
    let (lo, hi) = (from.min(to), from.max(to));
    let mut v: Vec<f64> = steps
        .iter()
        .flat_map(|&(s, e, _)| [s, e])
        .filter(|&x| x > lo && x < hi)
        .chain([from, to])
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if from > to {
        v.reverse();
    }
    v
}

/// `(f, f')(0)` of the solution equal to `e^{i√λ x}` beyond the support,
/// by a product of closed-form interval propagators.
pub fn transfer_right(steps: &Steps, lambda: Complex64) -> (Complex64, Complex64) {
    let k = reference_sqrt(lambda);
    let edge = steps.iter().map(|s| s.1).fold(0.0, f64::max);
    let e = (c(0.0, 1.0) * k * edge).exp();
    let mut state = (e, c(0.0, 1.0) * k * e);
    let pts = cuts(steps, edge, 0.0);
    for w in pts.windows(2) {
        let q = value_on(steps, w[1], w[0]);
        state = propagate_constant(state, c(q, 0.0) - lambda, w[1] - w[0]);
    }
    state
}

/// `(f, f')(0)` of the solution equal to `e^{√λ x}` beyond the support.
pub fn transfer_left(steps: &Steps, lambda: Complex64) -> (Complex64, Complex64) {
    let k = reference_sqrt(lambda);
    let edge = steps.iter().map(|s| s.0).fold(0.0, f64::min);
    let e = (k * edge).exp();
    let mut state = (e, k * e);
    let pts = cuts(steps, edge, 0.0);
    for w in pts.windows(2) {
        let q = value_on(steps, w[0], w[1]);
        state = propagate_constant(state, c(q, 0.0) + lambda, w[1] - w[0]);
    }
    state
}

/// Fornberg's finite-difference weights at `x0` for derivatives `0..=m`
/// on arbitrary stencil `xs`.
pub fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut d = vec![vec![0.0; n]; m + 1];
    d[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    d[k][i] = c1 * (k as f64 * d[k - 1][i - 1] - c5 * d[k][i - 1]) / c2;
                }
                d[0][i] = -c1 * c5 * d[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                d[k][j] = (c4 * d[k][j] - k as f64 * d[k - 1][j]) / c3;
            }
            d[0][j] = c4 * d[0][j] / c3;
        }
        c1 = c2;
    }
    d
}

/// Points along the boundary of `r`, counter-clockwise, clustered toward
/// the bottom side and toward `Re λ = 0` where the characteristic
/// functions vary fastest.
pub fn clustered_contour(r: &Rectangle, n: usize) -> Vec<Complex64> {
    let a = 8.0;
    let horiz = |t: f64| {
        // t ∈ [-1, 1] → [re_min, re_max], dense near 0 when 0 is inside.
        let center = 0.0f64.clamp(r.re_min, r.re_max);
        let half = if t < 0.0 { center - r.re_min } else { r.re_max - center };
        center + half * (a * t).sinh() / a.sinh()
    };
    let vert = |t: f64| r.im_min + (r.im_max - r.im_min) * ((a * t).exp() - 1.0) / (a.exp() - 1.0);
    let mut pts = Vec::with_capacity(4 * n);
    for i in 0..n {
        pts.push(c(horiz(-1.0 + 2.0 * i as f64 / n as f64), r.im_min));
    }
    for i in 0..n {
        pts.push(c(r.re_max, vert(i as f64 / n as f64)));
    }
    for i in 0..n {
        pts.push(c(horiz(1.0 - 2.0 * i as f64 / n as f64), r.im_max));
    }
    for i in 0..n {
        pts.push(c(r.re_min, vert(1.0 - i as f64 / n as f64)));
    }
    pts
}

/// Winding number by brute-force phase unwrapping over fixed samples,
/// with the largest single phase step so callers can check resolution.
pub fn dense_winding(values: &[Complex64]) -> (f64, f64) {
    let mut total = 0.0;
    let mut worst: f64 = 0.0;
    for i in 0..values.len() {
        let d = (values[(i + 1) % values.len()] / values[i]).arg();
        worst = worst.max(d.abs());
        total += d;
    }
    (total / (2.0 * PI), worst)
}

pub fn polynomial(roots: &[Complex64]) -> impl Fn(Complex64) -> indefinite_sl::Result<Complex64> + Sync + '_ {
    move |z| Ok(roots.iter().fold(c(1.0, 0.0), |acc, &r| acc * (z - r)))
}

pub fn step_config(pieces: &[(f64, f64, f64)]) -> RunConfig {
    let list: Vec<String> = pieces
        .iter()
        .map(|(a, b, v)| format!("{{ start = {a:?}, end = {b:?}, value = {v:?} }}"))
        .collect();
    RunConfig::from_toml_str(&format!(
        "[potential]\nkind = \"step-sum\"\npieces = [{}]\n",
        list.join(", ")
    ))
    .unwrap()
}

pub fn square_well(depth: f64) -> RunConfig {
    step_config(&[(-1.0, 1.0, -depth)])
}

pub fn sgn_step() -> RunConfig {
    step_config(&[(-1.0, 0.0, -1.0), (0.0, 1.0, 1.0)])
}

pub fn two_bump() -> RunConfig {
    step_config(&[(-2.0, -1.0, -4.0), (0.5, 1.5, -2.0)])
}

pub fn gaussian_well() -> RunConfig {
    RunConfig::from_toml_str(
        "[potential]\nkind = \"truncated-analytic\"\nterms = [{ formula = \"gaussian\", amplitude = -3.0, center = 0.0, width = 1.0 }]\n",
    )
    .unwrap()
}

/// The oracle-equivalence suite; deep wells last since they cost the most.
pub fn suite(max_depth: f64) -> Vec<(String, RunConfig)> {
    let mut v: Vec<(String, RunConfig)> = [1.0, 2.0, 5.0, 10.0, 20.0]
        .into_iter()
        .filter(|&d| d <= max_depth)
        .map(|d| (format!("square well depth {d}"), square_well(d)))
        .collect();
    v.insert(1, ("sgn-step".into(), sgn_step()));
    v.insert(2, ("two-bump".into(), two_bump()));
    v.insert(3, ("truncated Gaussian well".into(), gaussian_well()));
    v
}

pub fn nonnegative_configs() -> Vec<(String, RunConfig)> {
    vec![
        ("barrier".into(), step_config(&[(-1.0, 1.0, 3.0)])),
        ("two barriers".into(), step_config(&[(-3.0, -2.0, 1.0), (0.0, 2.0, 0.5)])),
        (
            "Gaussian bump".into(),
            RunConfig::from_toml_str(
                "[potential]\nkind = \"truncated-analytic\"\nterms = [{ formula = \"gaussian\", amplitude = 2.0, center = 0.5, width = 1.0 }]\n",
            )
            .unwrap(),
        ),
    ]
}
