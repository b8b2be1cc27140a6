//! Runs every acceptance criterion and prints one line per criterion.
//! Exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use common::{
    c, clustered_contour, dense_winding, fornberg, nonnegative_configs, polynomial, random_lambda, rng, suite,
    transfer_left, transfer_right, Steps,
};
use indefinite_sl::birman_schwinger::Rectangle;
use indefinite_sl::bounds::BoundCheck;
use indefinite_sl::eigensearch::{locate_zeros, winding_number, Method, SearchOptions};
use indefinite_sl::pipeline::{cmd_solve, ExitStatus, RunReport};
use indefinite_sl::potential::Potential;
use indefinite_sl::quadrature::{gauss_legendre, integrate_with_breaks, CompositeGrid};
use indefinite_sl::resolvent::{SpectralParameter, ALPHA};
use indefinite_sl::shooting::{integrate_from_left, integrate_from_right, matching_det, Shooter, ShootingOptions};
use indefinite_sl::Complex64;
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kernel_bound() -> Outcome {
    let mut r = rng(101);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let sp =
            SpectralParameter::new(random_lambda(&mut r, (-10.0, 10.0), (0.01, 10.0))).map_err(|e| e.to_string())?;
        let (x, y) = (r.gen_range(-20.0..20.0), r.gen_range(-20.0..20.0));
        let ratio = sp.kernel(x, y).total.norm() * sp.lambda().norm().sqrt();
        worst = worst.max(ratio);
        if sp.kernel(x, y).total.norm() > sp.lambda().norm().powf(-0.5) + 1e-12 {
            violations += 1;
        }
    }
    check(
        violations == 0,
        format!("{violations} violations in 10⁴ samples, max |K|·|λ|^½ = {worst:.6}"),
    )
}

fn kernel_identity() -> Outcome {
    let mut r = rng(102);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let sp =
            SpectralParameter::new(random_lambda(&mut r, (-10.0, 10.0), (0.01, 10.0))).map_err(|e| e.to_string())?;
        let (x, y): (f64, f64) = (r.gen_range(-20.0..20.0), r.gen_range(-20.0..20.0));
        let sgn_y = if y >= 0.0 { 1.0 } else { -1.0 };
        let want = if y < x {
            sp.solution_u(x).0 * sp.solution_v(y).0 * sgn_y
        } else {
            sp.solution_v(x).0 * sp.solution_u(y).0 * sgn_y
        };
        let got = sp.kernel(x, y).total * 2.0 * ALPHA * sp.sqrt_lambda();
        worst = worst.max((got - want).norm() / want.norm());
    }
    check(
        worst <= 1e-12,
        format!("max relative error {worst:.2e} over 10³ samples"),
    )
}

fn row_integral(f: impl Fn(f64) -> f64, y: f64, a: f64, b: f64) -> Result<f64, String> {
    let mut breaks: Vec<f64> = [a, b, 0.0, y].into_iter().filter(|&p| p >= a && p <= b).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let r = integrate_with_breaks(f, &breaks, 1e-11).map_err(|e| e.to_string())?;
    if !r.converged {
        return Err(format!(
            "quadrature did not converge (estimate {:.1e})",
            r.error_estimate
        ));
    }
    Ok(r.value)
}

fn row_integrals() -> Outcome {
    let mut r = rng(103);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let sp =
            SpectralParameter::new(random_lambda(&mut r, (-10.0, 10.0), (0.1, 10.0))).map_err(|e| e.to_string())?;
        let k = sp.sqrt_lambda();
        let m = sp.lambda().norm().sqrt();
        let far = 42.0 / k.re.min(k.im);
        let yp = r.gen_range(0.0..3.0);
        let yn = -r.gen_range(0.0..3.0);
        let s2 = 2f64.sqrt();
        let cases = [
            (
                row_integral(|x| sp.kernel(x, yp).c_part.norm(), yp, -far, far)?,
                (-k.im * yp).exp() / (2.0 * m) * (1.0 / k.im + s2 / k.re),
            ),
            (
                row_integral(|x| sp.kernel(x, yn).c_part.norm(), yn, -far, far)?,
                (k.re * yn).exp() / (2.0 * m) * (s2 / k.im + 1.0 / k.re),
            ),
            (
                row_integral(|x| sp.kernel(x, yp).d_part.norm(), yp, 0.0, far)?,
                (2.0 - (-k.im * yp).exp()) / (2.0 * m * k.im),
            ),
            (
                row_integral(|x| sp.kernel(x, yn).d_part.norm(), yn, -far, 0.0)?,
                (2.0 - (k.re * yn).exp()) / (2.0 * m * k.re),
            ),
        ];
        for (got, want) in cases {
            worst = worst.max((got - want).abs());
        }
    }
    check(
        worst <= 1e-8,
        format!("max absolute error {worst:.2e} over 4 identities × 20 λ"),
    )
}

fn resolvent_residual() -> Outcome {
    let bumps: [(f64, f64, f64); 5] = [
        (-1.0, 1.0, 0.0),
        (0.5, 2.5, 0.0),
        (-2.0, -0.5, 0.0),
        (-0.7, 1.3, 3.0),
        (-1.5, 0.8, -2.0),
    ];
    let rule = Arc::new(gauss_legendre(12).map_err(|e| e.to_string())?);
    let mut r = rng(104);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let sp =
            SpectralParameter::new(random_lambda(&mut r, (-10.0, 10.0), (0.5, 10.0))).map_err(|e| e.to_string())?;
        for &(a, b, freq) in &bumps {
            let g = |x: f64| {
                if x <= a || x >= b {
                    return c(0.0, 0.0);
                }
                let t = (2.0 * x - a - b) / (b - a);
                (-1.0 / (1.0 - t * t)).exp() * c(0.0, freq * x).exp()
            };
            let grid = CompositeGrid::with_breakpoints(-6.0, 6.0, &[a, 0.0, b], 0.05, rule.clone())
                .map_err(|e| e.to_string())?;
            let gs: Vec<Complex64> = grid.nodes().iter().map(|&x| g(x)).collect();
            let h = sp.apply_resolvent(&grid, &gs).map_err(|e| e.to_string())?;
            let g_max = gs.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let n = rule.order();
            for p in 0..grid.panel_count() {
                let idx = grid.panel_nodes(p);
                let xs = &grid.nodes()[idx.clone()];
                for j in 3..n - 3 {
                    let w = &fornberg(xs[j], &xs[j - 3..=j + 3], 2)[2];
                    let h2: Complex64 = h[idx.start + j - 3..=idx.start + j + 3]
                        .iter()
                        .zip(w)
                        .map(|(v, wi)| v * wi)
                        .sum();
                    let sgn = if xs[j] >= 0.0 { 1.0 } else { -1.0 };
                    let res = -sgn * h2 - sp.lambda() * h[idx.start + j] - gs[idx.start + j];
                    worst = worst.max(res.norm() / g_max);
                }
            }
        }
    }
    check(
        worst <= 1e-6,
        format!("max relative residual {worst:.2e} over 10 λ × 5 g"),
    )
}

fn wronskian() -> Outcome {
    let mut r = rng(105);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let sp =
            SpectralParameter::new(random_lambda(&mut r, (-10.0, 10.0), (0.01, 10.0))).map_err(|e| e.to_string())?;
        let w0 = 2.0 * ALPHA * sp.sqrt_lambda();
        for _ in 0..10 {
            let x = r.gen_range(-10.0..10.0);
            worst = worst.max((sp.wronskian(x) - w0).norm() / w0.norm());
        }
    }
    check(
        worst <= 1e-10,
        format!("max relative deviation {worst:.2e} at 10 x × 10 λ"),
    )
}

fn free_emptiness() -> Outcome {
    let shooter = Shooter::new(Arc::new(Potential::zero()), ShootingOptions::default());
    let f = |z: Complex64| shooter.evaluate(z);
    let rects = [
        (-10.0, 10.0, 1e-3, 10.0),
        (-1.0, 1.0, 1e-6, 1.0),
        (-100.0, 100.0, 0.5, 100.0),
        (2.0, 3.0, 0.1, 0.2),
    ];
    let mut windings = Vec::new();
    for (a, b, lo, hi) in rects {
        let rect = Rectangle::new(a, b, lo, hi).map_err(|e| e.to_string())?;
        windings.push(winding_number(&f, &rect, 16).map_err(|e| e.to_string())?);
        let out = locate_zeros(&f, &rect, Method::Shooting, &SearchOptions::default()).map_err(|e| e.to_string())?;
        windings.push(out.certificates.len() as i64);
    }
    let mut r = rng(106);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let lambda = random_lambda(&mut r, (-100.0, 100.0), (1e-4, 100.0));
        let d = f(lambda).map_err(|e| e.to_string())?;
        let want = 2f64.sqrt() * lambda.norm().sqrt();
        worst = worst.max((d.norm() - want).abs() / want);
    }
    check(
        windings.iter().all(|&w| w == 0) && worst <= 1e-9,
        format!("windings/zero counts {windings:?}, max |D| relative error {worst:.2e}"),
    )
}

/// Solves the full suite once; criteria 7, 8 and 10 read the reports.
fn solve_suite() -> Result<Vec<(String, RunReport, f64)>, String> {
    suite(20.0)
        .into_iter()
        .map(|(name, config)| {
            let t = Instant::now();
            let report = cmd_solve(&config).map_err(|e| format!("{name}: {e}"))?;
            Ok((name, report, t.elapsed().as_secs_f64()))
        })
        .collect()
}

fn oracle_equivalence(reports: &[(String, RunReport, f64)]) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, r, secs) in reports {
        let worst = r
            .pairs
            .iter()
            .map(|p| p.distance / (1.0 + p.shooting.norm()))
            .fold(0.0, f64::max);
        let good = r.verdict.complete
            && r.unmatched.is_empty()
            && r.pairs
                .iter()
                .all(|p| p.multiplicities_agree && p.distance <= 1e-6 * (1.0 + p.shooting.norm()));
        ok &= good;
        lines.push(format!(
            "{name}: {} pairs, {} unmatched, max scaled distance {worst:.1e}, {secs:.0}s{}",
            r.pairs.len(),
            r.unmatched.len(),
            if good { "" } else { " FAIL" }
        ));
    }
    check(ok, lines.join("; "))
}

fn bound_compliance(reports: &[(String, RunReport, f64)]) -> Outcome {
    let strict = |b: &BoundCheck| b.margin >= -1e-9 * (1.0 + b.bound);
    let mut count = 0;
    let mut tightest: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, r, _) in reports {
        for ch in &r.checks {
            let b = &ch.report.bounds;
            count += 1;
            tightest = tightest
                .max(b.abs_q.tightness())
                .max(b.im_qminus.tightness())
                .max(b.abs_qminus.tightness());
            if !(strict(&b.abs_q) && strict(&b.im_qminus) && strict(&b.abs_qminus)) {
                failures.push(format!("{name}: {}", ch.report.eigenvalue));
            }
        }
    }
    check(
        failures.is_empty() && count > 0,
        format!("{count} certified eigenvalues, largest value/bound {tightest:.3}, violations {failures:?}"),
    )
}

fn positive_emptiness() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, config) in nonnegative_configs() {
        let r = cmd_solve(&config).map_err(|e| format!("{name}: {e}"))?;
        let good = r.region.is_empty() && r.eigenvalues.is_empty() && r.exit_status() == ExitStatus::Success;
        ok &= good;
        lines.push(format!(
            "{name}: region empty {}, {} eigenvalues, exit {}",
            r.region.is_empty(),
            r.eigenvalues.len(),
            r.exit_status().code()
        ));
    }
    check(ok, lines.join("; "))
}

fn lemma_diagnostics(reports: &[(String, RunReport, f64)]) -> Outcome {
    let mut count = 0;
    let (mut ident, mut lim, mut energy, mut slack): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, f64::INFINITY);
    let mut failures = Vec::new();
    for (name, r, _) in reports {
        for ch in &r.checks {
            let Some(l) = &ch.report.lemma else { continue };
            count += 1;
            ident = ident.max(l.identity_residual / l.identity_scale);
            lim = lim.max(l.limit_u).max(l.limit_v);
            energy = energy.max(l.energy_relative);
            for b in [&l.derivative_bound, &l.sup_bound, &l.weighted_bound] {
                slack = slack.min(b.margin / b.bound);
            }
            if !l.pass() {
                failures.push(format!("{name}: {}", ch.report.eigenvalue));
            }
        }
    }
    check(
        failures.is_empty() && count > 0,
        format!(
            "{count} eigenpairs: identity {ident:.1e}, limits {lim:.1e}, energy {energy:.1e}, min relative slack (c)-(e) {slack:.3}, failures {failures:?}"
        ),
    )
}

fn transfer_matrix() -> Outcome {
    let mut r = rng(111);
    let opts = ShootingOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let lambda = random_lambda(&mut r, (-20.0, 20.0), (0.05, 20.0));
        let depth = r.gen_range(0.5..20.0);
        let steps: Steps = vec![(-1.0, 1.0, -depth)];
        let q = Potential::step_sum(&steps).map_err(|e| e.to_string())?;
        let sp = SpectralParameter::new(lambda).map_err(|e| e.to_string())?;
        let right = integrate_from_right(&sp, &q, 1.0, &opts)
            .map_err(|e| e.to_string())?
            .value();
        let left = integrate_from_left(&sp, &q, 1.0, &opts)
            .map_err(|e| e.to_string())?
            .value();
        let (tr, tl) = (transfer_right(&steps, lambda), transfer_left(&steps, lambda));
        let er = ((right.0 - tr.0).norm() + (right.1 - tr.1).norm()) / (tr.0.norm() + tr.1.norm());
        let el = ((left.0 - tl.0).norm() + (left.1 - tl.1).norm()) / (tl.0.norm() + tl.1.norm());
        let d = matching_det(&sp, &q, 1.0, &opts).map_err(|e| e.to_string())?.d;
        let dt = tr.0 * tl.1 - tl.0 * tr.1;
        worst = worst.max(er).max(el).max((d - dt).norm() / dt.norm());
    }
    check(
        worst <= 1e-8,
        format!("max relative error {worst:.2e} over 20 (λ, depth)"),
    )
}

fn root_battery() -> Outcome {
    let region = Rectangle::new(-5.0, 5.0, 0.25, 5.0).map_err(|e| e.to_string())?;
    let mut r = rng(112);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut total_roots = 0;
    for trial in 0..50 {
        let degree = r.gen_range(1..=6);
        let roots: Vec<Complex64> = (0..degree)
            .map(|_| random_lambda(&mut r, (-6.0, 6.0), (-1.0, 6.0)))
            .collect();
        let f = polynomial(&roots);
        let out = locate_zeros(&f, &region, Method::Shooting, &SearchOptions::default()).map_err(|e| e.to_string())?;
        let inside: Vec<&Complex64> = roots.iter().filter(|z| region.contains(**z)).collect();
        total_roots += inside.len();
        for z in &inside {
            let d = out
                .certificates
                .iter()
                .map(|cert| (cert.lambda - **z).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
        let values: Vec<Complex64> = clustered_contour(&region, 2000)
            .iter()
            .map(|&z| f(z).unwrap())
            .collect();
        let dense = dense_winding(&values).0.round() as i64;
        if out.counted_zeros() != out.top_winding
            || out.top_winding != inside.len() as i64
            || dense != out.top_winding
            || !out.complete
        {
            failures.push(trial);
        }
    }
    check(
        worst <= 1e-9 && failures.is_empty(),
        format!("{total_roots} roots in region, max error {worst:.1e}, count mismatches in trials {failures:?}"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let reports = solve_suite();
    let suite_result = |f: fn(&[(String, RunReport, f64)]) -> Outcome| match &reports {
        Ok(r) => f(r),
        Err(e) => Err(e.clone()),
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("kernel bound", kernel_bound()),
        ("kernel-solution identity", kernel_identity()),
        ("row-integral identities", row_integrals()),
        ("resolvent residual", resolvent_residual()),
        ("Wronskian constancy", wronskian()),
        ("free-operator emptiness", free_emptiness()),
        ("oracle equivalence", suite_result(oracle_equivalence)),
        ("bound compliance", suite_result(bound_compliance)),
        ("positive-potential emptiness", positive_emptiness()),
        ("eigenfunction diagnostics", suite_result(lemma_diagnostics)),
        ("transfer-matrix oracle", transfer_matrix()),
        ("root-finder battery", root_battery()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail}", i + 1);
    }
    println!(
        "acceptance: {}/{} passed in {:.0}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
