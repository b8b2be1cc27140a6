//! Run configuration: one TOML document, optionally patched by dotted
//! `key=value` overrides.
//!
//! ```toml
//! method = "both"                 # shooting | birman_schwinger | both
//! # eps_floor = 0.01              # default 1e-3 · max(1, B_im)
//!
//! [potential]
//! kind = "step-sum"               # zero | step-sum | piecewise-polynomial | truncated-analytic
//! pieces = [{ start = -1.0, end = 1.0, value = -5.0 }]
//!
//! [tolerances]
//! match = 1e-6                    # gluing mismatch for eigenfunctions
//! ode = 1e-10
//! newton = 1e-12
//! residual = 1e-6
//! cross = 1e-6                    # agreement between methods, times (1 + |λ|)
//! quadrature = 1e-10              # norms of truncated analytic potentials
//!
//! [grid]
//! panel_order = 10
//! density_factor = 1.0
//! rule = "corrected"              # corrected | plain
//!
//! [search]
//! samples_per_side = 16
//! max_boxes = 4000
//! max_newton_iters = 60
//!
//! [scan]
//! density_re = 40
//! density_im = 20
//! # rectangle = { re_min = -5.0, re_max = 5.0, im_min = 0.1, im_max = 5.0 }
//!
//! [kernel]
//! lambda = [0.0, 1.0]
//! x = [-2.0, 2.0]
//! y = [-2.0, 2.0]
//! nx = 41
//! ny = 41
//!
//! [output]
//! # path = "report.json"
//! # format = "json"
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::birman_schwinger::{GridOptions, Rectangle};
use crate::eigensearch::SearchOptions;
use crate::potential::{AnalyticTerm, Piece, Potential, NORM_QUADRATURE_TOL};
use crate::shooting::ShootingOptions;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSelection {
    Shooting,
    BirmanSchwinger,
    #[default]
    Both,
}

impl MethodSelection {
    pub fn shooting(self) -> bool {
        matches!(self, Self::Shooting | Self::Both)
    }

    pub fn birman_schwinger(self) -> bool {
        matches!(self, Self::BirmanSchwinger | Self::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepPiece {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

fn default_tail_tolerance() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    StepSum {
        pieces: Vec<StepPiece>,
    },
    PiecewisePolynomial {
        pieces: Vec<Piece>,
    },
    TruncatedAnalytic {
        terms: Vec<AnalyticTerm>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
        #[serde(default = "default_tail_tolerance")]
        tail_tolerance: f64,
    },
}

impl PotentialSpec {
    pub fn build(&self, quadrature_tolerance: f64) -> Result<Potential> {
        match self {
            Self::Zero => Ok(Potential::zero()),
            Self::StepSum { pieces } => {
                let triples: Vec<_> = pieces.iter().map(|p| (p.start, p.end, p.value)).collect();
                Potential::step_sum(&triples)
            }
            Self::PiecewisePolynomial { pieces } => Potential::piecewise_polynomial(pieces.clone()),
            Self::TruncatedAnalytic {
                terms,
                radius,
                tail_tolerance,
            } => Potential::truncated_analytic_with(terms.clone(), *radius, *tail_tolerance, quadrature_tolerance),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    #[serde(rename = "match")]
    pub matching: f64,
    pub ode: f64,
    pub newton: f64,
    pub residual: f64,
    pub cross: f64,
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let shooting = ShootingOptions::default();
        let search = SearchOptions::default();
        Self {
            matching: shooting.glue_tolerance,
            ode: shooting.ode_tolerance,
            newton: search.newton_tol,
            residual: search.residual_tol,
            cross: 1e-6,
            quadrature: NORM_QUADRATURE_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl RegionSpec {
    pub fn rectangle(&self) -> Result<Rectangle> {
        Rectangle::new(self.re_min, self.re_max, self.im_min, self.im_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub samples_per_side: usize,
    pub max_boxes: usize,
    pub max_newton_iters: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        let o = SearchOptions::default();
        Self {
            samples_per_side: o.samples_per_side,
            max_boxes: o.max_boxes,
            max_newton_iters: o.max_newton_iters,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rectangle: Option<RegionSpec>,
    pub density_re: usize,
    pub density_im: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            rectangle: None,
            density_re: 40,
            density_im: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSettings {
    pub lambda: Complex64,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Default for KernelSettings {
    fn default() -> Self {
        Self {
            lambda: Complex64::new(0.0, 1.0),
            x: [-2.0, 2.0],
            y: [-2.0, 2.0],
            nx: 41,
            ny: 41,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub method: MethodSelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_floor: Option<f64>,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: GridOptions,
    /// Narrows the search; it is intersected with the bound region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
    #[serde(default)]
    pub search: SearchSettings,
    #[serde(default)]
    pub scan: ScanSettings,
    #[serde(default)]
    pub kernel: KernelSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Config with the given potential and every other key at its default.
    pub fn new(potential: PotentialSpec) -> Self {
        Self {
            method: MethodSelection::default(),
            eps_floor: None,
            potential,
            tolerances: Tolerances::default(),
            grid: GridOptions::default(),
            region: None,
            search: SearchSettings::default(),
            scan: ScanSettings::default(),
            kernel: KernelSettings::default(),
            output: OutputSettings::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::with_overrides(text, &[])
    }

    /// Parses `text`, applies each `key=value` in order, then validates.
    pub fn with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Self = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::with_overrides(&text, overrides)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.match", t.matching),
            ("tolerances.ode", t.ode),
            ("tolerances.newton", t.newton),
            ("tolerances.residual", t.residual),
            ("tolerances.cross", t.cross),
            ("tolerances.quadrature", t.quadrature),
            ("grid.density_factor", self.grid.density_factor),
        ] {
            positive(name, v)?;
        }
        if t.ode >= 1.0 {
            return Err(Error::Config("tolerances.ode must be below 1".into()));
        }
        if let Some(e) = self.eps_floor {
            positive("eps_floor", e)?;
        }
        if !(1..=64).contains(&self.grid.panel_order) {
            return Err(Error::Config("grid.panel_order must lie in 1..=64".into()));
        }
        if self.search.samples_per_side < 2 || self.search.max_boxes == 0 || self.search.max_newton_iters == 0 {
            return Err(Error::Config(
                "search needs samples_per_side ≥ 2 and positive box and iteration caps".into(),
            ));
        }
        for r in self.region.iter().chain(self.scan.rectangle.iter()) {
            r.rectangle().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.scan.density_re == 0 || self.scan.density_im == 0 {
            return Err(Error::Config("scan densities must be positive".into()));
        }
        let k = &self.kernel;
        if !(k.lambda.im > 0.0 && k.lambda.re.is_finite() && k.lambda.im.is_finite()) {
            return Err(Error::Config(
                "kernel.lambda must lie in the open upper half-plane".into(),
            ));
        }
        if k.nx == 0 || k.ny == 0 || !(k.x[0] <= k.x[1]) || !(k.y[0] <= k.y[1]) {
            return Err(Error::Config(
                "kernel grid needs ordered ranges and positive counts".into(),
            ));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<Potential> {
        self.potential
            .build(self.tolerances.quadrature)
            .map_err(|e| Error::Config(format!("potential: {e}")))
    }

    pub fn shooting_options(&self) -> ShootingOptions {
        ShootingOptions {
            ode_tolerance: self.tolerances.ode,
            glue_tolerance: self.tolerances.matching,
        }
    }

    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            newton_tol: self.tolerances.newton,
            max_newton_iters: self.search.max_newton_iters,
            samples_per_side: self.search.samples_per_side,
            max_boxes: self.search.max_boxes,
            residual_tol: self.tolerances.residual,
        }
    }
}

/// Applies `a.b.c=value` to `doc`. The value is read as a TOML value when it
/// parses as one and as a bare string otherwise; numeric segments index
/// arrays.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not KEY=VALUE")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|s| s.is_empty()) {
        return Err(Error::Config(format!("override key `{key}` is malformed")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let (last, parents) = path.split_last().expect("nonempty path");
    let mut node = doc
        .entry(parents.first().copied().unwrap_or(last).to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    if parents.is_empty() {
        *node = value;
        return Ok(());
    }
    for seg in parents[1..].iter().chain([last]) {
        let child = match node {
            toml::Value::Table(t) => t
                .entry(seg.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(a) => {
                let i: usize = seg
                    .parse()
                    .map_err(|_| Error::Config(format!("`{seg}` in `{key}` must index an array")))?;
                let len = a.len();
                a.get_mut(i)
                    .ok_or_else(|| Error::Config(format!("index {i} in `{key}` is out of range ({len} entries)")))?
            }
            _ => return Err(Error::Config(format!("`{key}` descends into a scalar"))),
        };
        node = child;
    }
    *node = value;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const WELL: &str = r#"
[potential]
kind = "step-sum"
pieces = [{ start = -1.0, end = 1.0, value = -2.0 }]
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = RunConfig::from_toml_str(WELL).unwrap();
        assert_eq!(c.method, MethodSelection::Both);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.potential().unwrap().l1_norms().total, 4.0);
    }

    #[test]
    fn round_trip_is_identical() {
        let mut c = RunConfig::from_toml_str(WELL).unwrap();
        c.eps_floor = Some(0.05);
        c.region = Some(RegionSpec {
            re_min: -3.0,
            re_max: 3.0,
            im_min: 0.1,
            im_max: 2.0,
        });
        c.output.format = Some(Format::Csv);
        let text = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);

        let analytic = RunConfig::new(PotentialSpec::TruncatedAnalytic {
            terms: vec![AnalyticTerm::Gaussian {
                amplitude: -1.0,
                center: 0.0,
                width: 1.0,
            }],
            radius: Some(8.0),
            tail_tolerance: 1e-12,
        });
        let text = analytic.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), analytic);
    }

    #[test]
    fn overrides_reach_nested_and_array_keys() {
        let sets = [
            "method=shooting".to_string(),
            "grid.density_factor=2".to_string(),
            "potential.pieces.0.value=-5.5".to_string(),
            "scan.rectangle={ re_min = -1.0, re_max = 1.0, im_min = 0.5, im_max = 1.0 }".to_string(),
        ];
        let c = RunConfig::with_overrides(WELL, &sets).unwrap();
        assert_eq!(c.method, MethodSelection::Shooting);
        assert_eq!(c.grid.density_factor, 2.0);
        assert_eq!(c.potential().unwrap().eval(0.0), -5.5);
        assert_eq!(c.scan.rectangle.unwrap().im_min, 0.5);
    }

    #[test]
    fn bad_configs_are_config_errors() {
        let cases = [
            ("", vec![]),
            (WELL, vec!["tolerances.newton=-1".to_string()]),
            (WELL, vec!["potential.pieces.3.value=1".to_string()]),
            (WELL, vec!["no_equals_sign".to_string()]),
            (WELL, vec!["unknown_key=1".to_string()]),
            (WELL, vec!["method=sideways".to_string()]),
            (WELL, vec!["kernel.lambda=[1.0, -1.0]".to_string()]),
        ];
        for (text, sets) in cases {
            let e = RunConfig::with_overrides(text, &sets).unwrap_err();
            assert!(matches!(e, Error::Config(_)), "{e:?}");
        }
    }

    #[test]
    fn overlapping_pieces_fail_when_built() {
        let c = RunConfig::with_overrides(
            WELL,
            &["potential.pieces=[{start=0.0,end=2.0,value=1.0},{start=1.0,end=3.0,value=1.0}]".to_string()],
        )
        .unwrap();
        assert!(matches!(c.potential(), Err(Error::Config(_))));
    }
}
