//! End-to-end runs: potential → region → search → cross-validation →
//! bound report, plus the scan, bounds and kernel commands.
//!
//! Every command returns a serializable report; [`RunReport::exit_status`]
//! maps a solve to the process exit code.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::birman_schwinger::{lattice, GridOptions, NystromSystem, Rectangle};
use crate::bounds::{evaluate_bounds, lemma_diagnostics, BoundReport, EigenvalueBounds, LemmaChecks};
use crate::config::{Format, RunConfig};
use crate::eigensearch::{locate_zeros, region_from_bounds, Method, SearchOutcome, SearchRegion, ZeroCertificate};
use crate::potential::{L1Norms, Potential};
use crate::resolvent::SpectralParameter;
use crate::shooting::Shooter;
use crate::{Error, Result};

pub const NO_EIGENVALUES_NOTE: &str = "no non-real eigenvalues possible";

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Success,
    ConfigError,
    Incomplete,
    Violation,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::ConfigError => 2,
            Self::Incomplete => 3,
            Self::Violation => 4,
        }
    }

    /// Violations outrank incompleteness.
    pub fn for_run(bounds_pass: bool, complete: bool, all_matched: bool) -> Self {
        if !bounds_pass {
            Self::Violation
        } else if !complete || !all_matched {
            Self::Incomplete
        } else {
            Self::Success
        }
    }

    /// Status for a command that failed outright.
    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidInput(_) => Self::ConfigError,
            _ => Self::Incomplete,
        }
    }
}

/// CSV number format: 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Potential, norms and search region shared by all commands.
pub struct Setup {
    pub potential: Arc<Potential>,
    pub norms: L1Norms,
    pub region: SearchRegion,
}

impl Setup {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let potential = Arc::new(config.potential()?);
        let norms = potential.l1_norms();
        let mut region = region_from_bounds(&norms, config.eps_floor).map_err(|e| Error::Config(e.to_string()))?;
        if let (Some(o), false) = (config.region, region.is_empty()) {
            region.re_min = region.re_min.max(o.re_min);
            region.re_max = region.re_max.min(o.re_max);
            region.im_min = region.im_min.max(o.im_min);
            region.im_max = region.im_max.min(o.im_max);
        }
        Ok(Self {
            potential,
            norms,
            region,
        })
    }

    /// The search rectangle, or `None` when no search is needed.
    pub fn rectangle(&self) -> Option<Rectangle> {
        if self.region.re_min < self.region.re_max {
            self.region.rectangle()
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub norms: L1Norms,
    /// `‖q‖₁²`.
    pub bound_abs_q: f64,
    /// `24√3 ‖q₋‖₁²`.
    pub bound_im_qminus: f64,
    /// `(24√3 + 18) ‖q₋‖₁²`.
    pub bound_abs_qminus: f64,
    pub region: SearchRegion,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundsSummary {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut s = String::from("quantity,value\n");
                let r = &self.region;
                for (k, v) in [
                    ("l1_total", self.norms.total),
                    ("l1_positive", self.norms.positive),
                    ("l1_negative", self.norms.negative),
                    ("bound_abs_q", self.bound_abs_q),
                    ("bound_im_qminus", self.bound_im_qminus),
                    ("bound_abs_qminus", self.bound_abs_qminus),
                    ("effective_abs_bound", r.abs_bound),
                    ("effective_im_bound", r.im_bound),
                    ("re_min", r.re_min),
                    ("re_max", r.re_max),
                    ("im_min", r.im_min),
                    ("im_max", r.im_max),
                ] {
                    let _ = writeln!(s, "{k},{}", num(v));
                }
                if let Some(n) = &self.note {
                    let _ = writeln!(s, "note,{n}");
                }
                Ok(s)
            }
        }
    }
}

/// Norms, bounds and region, without solving.
pub fn cmd_bounds(config: &RunConfig) -> Result<BoundsSummary> {
    let setup = Setup::new(config)?;
    let n = setup.norms;
    let q2 = n.total * n.total;
    let m2 = n.negative * n.negative;
    Ok(BoundsSummary {
        norms: n,
        bound_abs_q: q2,
        bound_im_qminus: crate::bounds::IM_CONSTANT * m2,
        bound_abs_qminus: crate::bounds::ABS_CONSTANT * m2,
        region: setup.region,
        note: setup.region.is_empty().then(|| NO_EIGENVALUES_NOTE.to_string()),
    })
}

/// A shooting zero and the Birman–Schwinger zero paired with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossPair {
    pub shooting: Complex64,
    pub birman_schwinger: Complex64,
    pub distance: f64,
    pub tolerance: f64,
    pub multiplicities_agree: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Unmatched {
    pub lambda: Complex64,
    pub method: Method,
}

/// Greedy nearest-neighbour pairing within `cross · (1 + |λ|)`.
pub fn cross_validate(
    shooting: &[ZeroCertificate],
    bs: &[ZeroCertificate],
    cross: f64,
) -> (Vec<CrossPair>, Vec<Unmatched>) {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in shooting.iter().enumerate() {
        for (j, b) in bs.iter().enumerate() {
            let d = (a.lambda - b.lambda).norm();
            if d <= cross * (1.0 + a.lambda.norm()) {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_s = vec![false; shooting.len()];
    let mut used_b = vec![false; bs.len()];
    let mut pairs = Vec::new();
    for (d, i, j) in candidates {
        if used_s[i] || used_b[j] {
            continue;
        }
        used_s[i] = true;
        used_b[j] = true;
        pairs.push(CrossPair {
            shooting: shooting[i].lambda,
            birman_schwinger: bs[j].lambda,
            distance: d,
            tolerance: cross * (1.0 + shooting[i].lambda.norm()),
            multiplicities_agree: shooting[i].winding_count == bs[j].winding_count,
        });
    }
    pairs.sort_by(|a, b| {
        (a.shooting.re, a.shooting.im)
            .partial_cmp(&(b.shooting.re, b.shooting.im))
            .unwrap()
    });
    let unmatched = shooting
        .iter()
        .zip(&used_s)
        .chain(bs.iter().zip(&used_b))
        .filter(|(_, &u)| !u)
        .map(|(c, _)| Unmatched {
            lambda: c.lambda,
            method: c.method,
        })
        .collect();
    (pairs, unmatched)
}

/// A reported eigenvalue with its mirror image in the lower half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportedEigenvalue {
    pub lambda: Complex64,
    pub conjugate: Complex64,
    pub multiplicity: i64,
    pub method: Method,
    /// Both methods found it.
    pub confirmed: bool,
}

/// Bounds re-evaluated after refining a violating eigenvalue on a doubled
/// grid with tighter tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recheck {
    pub lambda: Complex64,
    pub bounds: EigenvalueBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckedEigenvalue {
    #[serde(flatten)]
    pub report: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recheck: Option<Recheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Searches {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shooting: Option<SearchOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub birman_schwinger: Option<SearchOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub bounds_pass: bool,
    pub complete: bool,
    pub all_matched: bool,
    pub status: ExitStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub config: RunConfig,
    pub norms: L1Norms,
    pub region: SearchRegion,
    pub scope: String,
    pub searches: Searches,
    pub pairs: Vec<CrossPair>,
    pub unmatched: Vec<Unmatched>,
    pub eigenvalues: Vec<ReportedEigenvalue>,
    pub checks: Vec<CheckedEigenvalue>,
    pub issues: Vec<String>,
    pub evaluations: usize,
    pub verdict: Verdict,
    pub timing: Timing,
}

impl RunReport {
    pub fn exit_status(&self) -> ExitStatus {
        self.verdict.status
    }

    /// The report with timing zeroed, for byte-level comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            timing: Timing { wall_seconds: 0.0 },
            ..self.clone()
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut s =
                    String::from("method,re,im,abs_q_margin,im_qminus_margin,abs_qminus_margin,lemma_pass,verdict\n");
                for c in &self.checks {
                    let r = &c.report;
                    let method = match r.method {
                        Method::Shooting => "shooting",
                        Method::BirmanSchwinger => "birman_schwinger",
                    };
                    let lemma = r.lemma.map_or("", |l| if l.pass() { "true" } else { "false" });
                    let _ = writeln!(
                        s,
                        "{method},{},{},{},{},{},{lemma},{}",
                        num(r.eigenvalue.re),
                        num(r.eigenvalue.im),
                        num(r.bounds.abs_q.margin),
                        num(r.bounds.im_qminus.margin),
                        num(r.bounds.abs_qminus.margin),
                        r.verdict
                    );
                }
                Ok(s)
            }
        }
    }
}

fn bs_function(sys: &NystromSystem) -> impl Fn(Complex64) -> Result<Complex64> + Sync + '_ {
    move |l| Ok(sys.determinant(&SpectralParameter::new(l)?).value())
}

fn run_search<F>(f: &F, rect: &Rectangle, method: Method, config: &RunConfig) -> SearchOutcome
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    locate_zeros(f, rect, method, &config.search_options()).unwrap_or_else(|e| SearchOutcome {
        searched: Some(*rect),
        complete: false,
        issues: vec![e.to_string()],
        ..SearchOutcome::empty()
    })
}

/// Newton-refines `lambda` with the shooting function on tightened
/// tolerances and re-evaluates the bounds there.
fn recheck(lambda: Complex64, q: &Arc<Potential>, config: &RunConfig, norms: &L1Norms) -> Option<Recheck> {
    let mut opts = config.shooting_options();
    opts.ode_tolerance = (opts.ode_tolerance * 1e-2).max(1e-14);
    let shooter = Shooter::new(q.clone(), opts);
    let h = 1e-3 * (1.0 + lambda.norm());
    let rect = Rectangle::new(
        lambda.re - h,
        lambda.re + h,
        (lambda.im - h).max(0.5 * lambda.im),
        lambda.im + h,
    )
    .ok()?;
    let mut search = config.search_options();
    search.newton_tol = (search.newton_tol * 1e-2).max(1e-15);
    let out = locate_zeros(&|l| shooter.evaluate(l), &rect, Method::Shooting, &search).ok()?;
    let refined = out.certificates.first()?.lambda;
    Some(Recheck {
        lambda: refined,
        bounds: evaluate_bounds(refined, norms),
    })
}

/// Full pipeline.
pub fn cmd_solve(config: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let setup = Setup::new(config)?;
    let q = &setup.potential;
    let mut issues = Vec::new();
    let mut searches = Searches {
        shooting: None,
        birman_schwinger: None,
    };
    let scope = match setup.rectangle() {
        None => NO_EIGENVALUES_NOTE.to_string(),
        Some(_) => format!(
            "eigenvalues with Im λ below {} are outside the certified scope",
            setup.region.im_min
        ),
    };

    let shooter = Shooter::new(q.clone(), config.shooting_options());
    if let Some(rect) = setup.rectangle() {
        if config.method.shooting() {
            searches.shooting = Some(run_search(&|l| shooter.evaluate(l), &rect, Method::Shooting, config));
        }
        if config.method.birman_schwinger() {
            let grid: GridOptions = config.grid;
            let outcome = match NystromSystem::for_spectral_radius(q, rect.max_modulus(), &grid) {
                Ok(sys) => run_search(&bs_function(&sys), &rect, Method::BirmanSchwinger, config),
                Err(e) => SearchOutcome {
                    complete: false,
                    issues: vec![e.to_string()],
                    ..SearchOutcome::empty()
                },
            };
            searches.birman_schwinger = Some(outcome);
        }
    }

    let empty: Vec<ZeroCertificate> = Vec::new();
    let s_certs = searches.shooting.as_ref().map_or(&empty, |o| &o.certificates);
    let b_certs = searches.birman_schwinger.as_ref().map_or(&empty, |o| &o.certificates);
    let (pairs, unmatched) = if searches.shooting.is_some() && searches.birman_schwinger.is_some() {
        cross_validate(s_certs, b_certs, config.tolerances.cross)
    } else {
        (Vec::new(), Vec::new())
    };
    for u in &unmatched {
        issues.push(format!("{:?} zero at {} has no partner", u.method, u.lambda));
    }
    for p in pairs.iter().filter(|p| !p.multiplicities_agree) {
        issues.push(format!("multiplicities differ at {}", p.shooting));
    }
    for (name, o) in [
        ("shooting", &searches.shooting),
        ("birman_schwinger", &searches.birman_schwinger),
    ] {
        if let Some(o) = o {
            issues.extend(o.issues.iter().map(|i| format!("{name}: {i}")));
            issues.extend(
                o.certificates
                    .iter()
                    .filter(|c| !c.converged)
                    .map(|c| format!("{name}: Newton did not converge near {}", c.lambda)),
            );
        }
    }

    let primary = if searches.shooting.is_some() { s_certs } else { b_certs };
    let eigenvalues = primary
        .iter()
        .map(|c| ReportedEigenvalue {
            lambda: c.lambda,
            conjugate: c.lambda.conj(),
            multiplicity: c.winding_count,
            method: c.method,
            confirmed: pairs
                .iter()
                .any(|p| p.shooting == c.lambda || p.birman_schwinger == c.lambda),
        })
        .collect();

    // Eigenfunction checks need a genuine eigenfunction, so only shooting zeros get them.
    let lemma_for = |c: &ZeroCertificate| -> Result<LemmaChecks> {
        let pair = shooter.eigenfunction(c.lambda)?;
        Ok(lemma_diagnostics(&pair, q)?.1)
    };
    let shooting_lemmas: Vec<Result<LemmaChecks>> = s_certs.par_iter().map(lemma_for).collect();
    let mut checks = Vec::new();
    for (c, lemma) in s_certs.iter().zip(shooting_lemmas) {
        let lemma = match lemma {
            Ok(l) => Some(l),
            Err(e) => {
                issues.push(format!("no eigenfunction diagnostics at {}: {e}", c.lambda));
                None
            }
        };
        checks.push(BoundReport::new(c.lambda, c.method, &setup.norms, lemma));
    }
    checks.extend(
        b_certs
            .iter()
            .map(|c| BoundReport::new(c.lambda, c.method, &setup.norms, None)),
    );
    let checks: Vec<CheckedEigenvalue> = checks
        .into_iter()
        .map(|report| {
            let recheck = (!report.bounds.pass())
                .then(|| recheck(report.eigenvalue, q, config, &setup.norms))
                .flatten();
            CheckedEigenvalue { report, recheck }
        })
        .collect();

    let bounds_pass = checks.iter().all(|c| c.report.verdict);
    let complete = [&searches.shooting, &searches.birman_schwinger].iter().all(|o| {
        o.as_ref()
            .is_none_or(|o| o.complete && o.certificates.iter().all(|c| c.converged))
    }) && checks
        .iter()
        .all(|c| c.report.method != Method::Shooting || c.report.lemma.is_some());
    let all_matched = unmatched.is_empty() && pairs.iter().all(|p| p.multiplicities_agree);
    let status = ExitStatus::for_run(bounds_pass, complete, all_matched);
    let evaluations = [&searches.shooting, &searches.birman_schwinger]
        .iter()
        .filter_map(|o| o.as_ref().map(|o| o.evaluations))
        .sum();

    Ok(RunReport {
        tool: format!("indefinite-sl {}", env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        norms: setup.norms,
        region: setup.region,
        scope,
        searches,
        pairs,
        unmatched,
        eigenvalues,
        checks,
        issues,
        evaluations,
        verdict: Verdict {
            bounds_pass,
            complete,
            all_matched,
            status,
        },
        timing: Timing {
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub lambda: Complex64,
    /// Matching Wronskian.
    pub d: Complex64,
    /// `det(I + M(λ))`.
    pub det: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub rectangle: Rectangle,
    pub density_re: usize,
    pub density_im: usize,
    pub rows: Vec<ScanRow>,
}

impl ScanReport {
    pub const COLUMNS: &'static str = "re,im,abs_D,arg_D,abs_det,arg_det";

    /// Grid point with the smallest `|D|`.
    pub fn min_abs_d(&self) -> Option<&ScanRow> {
        self.rows.iter().min_by(|a, b| a.d.norm().total_cmp(&b.d.norm()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut s = format!("{}\n", Self::COLUMNS);
                for r in &self.rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{}",
                        num(r.lambda.re),
                        num(r.lambda.im),
                        num(r.d.norm()),
                        num(r.d.arg()),
                        num(r.det.norm()),
                        num(r.det.arg())
                    );
                }
                Ok(s)
            }
        }
    }
}

/// Both characteristic functions on a `density_re × density_im` lattice,
/// rows ordered by `Im λ` then `Re λ`.
pub fn cmd_scan(config: &RunConfig) -> Result<ScanReport> {
    let setup = Setup::new(config)?;
    let rect = match (config.scan.rectangle, setup.rectangle()) {
        (Some(r), _) => r.rectangle().map_err(|e| Error::Config(e.to_string()))?,
        (None, Some(r)) => r,
        (None, None) => {
            return Err(Error::Config(format!(
                "{NO_EIGENVALUES_NOTE}; set scan.rectangle to scan anyway"
            )))
        }
    };
    let (nx, ny) = (config.scan.density_re, config.scan.density_im);
    let shooter = Shooter::new(setup.potential.clone(), config.shooting_options());
    let sys = NystromSystem::for_spectral_radius(&setup.potential, rect.max_modulus(), &config.grid)?;
    let rows = lattice(&rect, nx, ny)?
        .into_par_iter()
        .map(|lambda| {
            Ok(ScanRow {
                lambda,
                d: shooter.evaluate(lambda)?,
                det: sys.determinant(&SpectralParameter::new(lambda)?).value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        rectangle: rect,
        density_re: nx,
        density_im: ny,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub x: f64,
    pub y: f64,
    pub k: Complex64,
    pub abs_c: f64,
    pub abs_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub lambda: Complex64,
    /// `|λ|^{-1/2}`, the uniform bound on `|K_λ|`.
    pub bound: f64,
    pub rows: Vec<KernelRow>,
}

impl KernelReport {
    pub const COLUMNS: &'static str = "x,y,re_K,im_K,abs_K,abs_C,abs_D,bound";

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut s = format!("{}\n", Self::COLUMNS);
                for r in &self.rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{}",
                        num(r.x),
                        num(r.y),
                        num(r.k.re),
                        num(r.k.im),
                        num(r.k.norm()),
                        num(r.abs_c),
                        num(r.abs_d),
                        num(self.bound)
                    );
                }
                Ok(s)
            }
        }
    }
}

fn axis(range: [f64; 2], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (range[0] + range[1])];
    }
    (0..n)
        .map(|i| range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64)
        .collect()
}

/// The free resolvent kernel on an `nx × ny` grid.
pub fn cmd_kernel(config: &RunConfig) -> Result<KernelReport> {
    let k = &config.kernel;
    let sp = SpectralParameter::new(k.lambda).map_err(|e| Error::Config(e.to_string()))?;
    let ys = axis(k.y, k.ny);
    let rows = axis(k.x, k.nx)
        .into_iter()
        .flat_map(|x| ys.iter().map(move |&y| (x, y)))
        .map(|(x, y)| {
            let v = sp.kernel(x, y);
            KernelRow {
                x,
                y,
                k: v.total,
                abs_c: v.c_part.norm(),
                abs_d: v.d_part.norm(),
            }
        })
        .collect();
    Ok(KernelReport {
        lambda: k.lambda,
        bound: k.lambda.norm().powf(-0.5),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PotentialSpec;

    fn well(depth: f64) -> RunConfig {
        RunConfig::from_toml_str(&format!(
            "[potential]\nkind = \"step-sum\"\npieces = [{{ start = -1.0, end = 1.0, value = {} }}]\n",
            -depth
        ))
        .unwrap()
    }

    fn cert(re: f64, im: f64, method: Method) -> ZeroCertificate {
        ZeroCertificate {
            lambda: Complex64::new(re, im),
            residual: 0.0,
            winding_count: 1,
            method,
            refinement_iters: 0,
            converged: true,
        }
    }

    #[test]
    fn violation_outranks_incompleteness() {
        assert_eq!(ExitStatus::for_run(false, false, false).code(), 4);
        assert_eq!(ExitStatus::for_run(true, false, true).code(), 3);
        assert_eq!(ExitStatus::for_run(true, true, false).code(), 3);
        assert_eq!(ExitStatus::for_run(true, true, true).code(), 0);
        assert_eq!(ExitStatus::from_error(&Error::Config("x".into())).code(), 2);
    }

    #[test]
    fn pairing_is_nearest_first() {
        let s = [
            cert(0.0, 1.0, Method::Shooting),
            cert(0.0, 1.0 + 1e-7, Method::Shooting),
        ];
        let b = [
            cert(0.0, 1.0 + 0.9e-7, Method::BirmanSchwinger),
            cert(3.0, 1.0, Method::BirmanSchwinger),
        ];
        let (pairs, unmatched) = cross_validate(&s, &b, 1e-6);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].shooting, s[1].lambda);
        assert_eq!(unmatched.len(), 2);
    }

    #[test]
    fn bounds_summary_for_well() {
        let b = cmd_bounds(&well(2.0)).unwrap();
        assert_eq!(b.norms.total, 4.0);
        assert_eq!(b.bound_abs_q, 16.0);
        assert!((b.bound_im_qminus - 665.107_510_106_449).abs() < 1e-9);
        assert_eq!(b.region.im_bound, 16.0);
        assert!(b.note.is_none());
    }

    #[test]
    fn nonnegative_potential_needs_no_search() {
        let mut c = well(-3.0);
        let b = cmd_bounds(&c).unwrap();
        assert_eq!(b.note.as_deref(), Some(NO_EIGENVALUES_NOTE));
        c.region = Some(crate::config::RegionSpec {
            re_min: -1.0,
            re_max: 1.0,
            im_min: 0.1,
            im_max: 1.0,
        });
        let r = cmd_solve(&c).unwrap();
        assert!(r.eigenvalues.is_empty());
        assert_eq!(r.evaluations, 0);
        assert_eq!(r.exit_status(), ExitStatus::Success);
    }

    #[test]
    fn shallow_well_solves_cleanly() {
        let r = cmd_solve(&well(1.0)).unwrap();
        assert_eq!(r.exit_status(), ExitStatus::Success, "{:?}", r.issues);
        assert_eq!(r.pairs.len(), 1);
        assert_eq!(r.eigenvalues[0].conjugate, r.eigenvalues[0].lambda.conj());
        assert!(r.checks.iter().all(|c| c.report.verdict));
    }

    #[test]
    fn scan_of_free_operator_has_unit_determinant() {
        let mut c = RunConfig::new(PotentialSpec::Zero);
        c.scan.rectangle = Some(crate::config::RegionSpec {
            re_min: -2.0,
            re_max: 2.0,
            im_min: 0.5,
            im_max: 2.0,
        });
        c.scan.density_re = 5;
        c.scan.density_im = 3;
        let s = cmd_scan(&c).unwrap();
        assert_eq!(s.rows.len(), 15);
        assert!(s.rows.iter().all(|r| (r.det - 1.0).norm() < 1e-15));
        let csv = s.render(Format::Csv).unwrap();
        assert_eq!(csv.lines().count(), 16);
        assert!(csv.starts_with(ScanReport::COLUMNS));
    }

    #[test]
    fn scan_without_region_is_a_config_error() {
        let c = RunConfig::new(PotentialSpec::Zero);
        assert!(matches!(cmd_scan(&c), Err(Error::Config(_))));
    }

    #[test]
    fn kernel_grid_respects_bound() {
        let mut c = RunConfig::new(PotentialSpec::Zero);
        c.kernel.nx = 7;
        c.kernel.ny = 5;
        let k = cmd_kernel(&c).unwrap();
        assert_eq!(k.rows.len(), 35);
        assert!(k.rows.iter().all(|r| r.k.norm() <= k.bound + 1e-12));
    }
}
