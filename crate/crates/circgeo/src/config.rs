//! Run configuration shared by every subcommand.

use std::collections::BTreeMap;
use std::path::PathBuf;

use circgeo_core::{tolerance, FieldPair, GradMode, Stencil, DEFAULT_CURVATURE_STEP, DEFAULT_GRADIENT_STEP};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GradModeSpec {
    Analytic,
    Fd,
}

/// Central-difference stencil for curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StencilSpec {
    Three,
    Five,
}

impl From<StencilSpec> for Stencil {
    fn from(s: StencilSpec) -> Self {
        match s {
            StencilSpec::Three => Stencil::ThreePoint,
            StencilSpec::Five => Stencil::FivePoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisRange {
    fn nodes(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: [AxisRange; 3],
}

impl GridSpec {
    /// `min,max,steps` for a cube, or nine comma-separated values for
    /// `min1,max1,steps1,min2,max2,steps2,min3,max3,steps3`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let axis = |chunk: &[&str]| -> Result<AxisRange, CliError> {
            let num = |s: &str| s.parse::<f64>().map_err(|_| CliError::Config(format!("bad grid value `{s}`")));
            let steps = chunk[2]
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("bad grid step count `{}`", chunk[2])))?;
            Ok(AxisRange { min: num(chunk[0])?, max: num(chunk[1])?, steps })
        };
        match parts.len() {
            3 => {
                let a = axis(&parts)?;
                Ok(Self { axes: [a; 3] })
            }
            9 => Ok(Self { axes: [axis(&parts[0..3])?, axis(&parts[3..6])?, axis(&parts[6..9])?] }),
            _ => Err(CliError::Config(format!("grid expects 3 or 9 comma-separated values, got `{text}`"))),
        }
    }

    pub fn expand(&self) -> Result<Vec<[f64; 3]>, CliError> {
        if self.axes.iter().any(|a| a.steps == 0) {
            return Err(CliError::Config("grid has an axis with zero steps".into()));
        }
        if self.axes.iter().any(|a| !a.min.is_finite() || !a.max.is_finite()) {
            return Err(CliError::Config("grid bounds must be finite".into()));
        }
        let [x, y, z] = self.axes.map(|a| a.nodes());
        let mut out = Vec::with_capacity(x.len() * y.len() * z.len());
        for &a in &x {
            for &b in &y {
                for &c in &z {
                    out.push([a, b, c]);
                }
            }
        }
        Ok(out)
    }
}

pub fn parse_vec3(text: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!("expected x,y,z, got `{text}`")));
    }
    let mut out = [0.0f64; 3];
    for (slot, s) in out.iter_mut().zip(parts) {
        *slot = s.parse().map_err(|_| CliError::Config(format!("bad coordinate `{s}`")))?;
        if !slot.is_finite() {
            return Err(CliError::Config(format!("coordinate `{s}` is not finite")));
        }
    }
    Ok(out)
}

/// Named tolerances; every key can be overridden with `--tol KEY=VAL`.
/// Keys missing from a config file keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "BTreeMap<String, f64>")]
pub struct Tolerances(pub BTreeMap<String, f64>);

impl From<BTreeMap<String, f64>> for Tolerances {
    fn from(overrides: BTreeMap<String, f64>) -> Self {
        let mut t = Self::default();
        t.0.extend(overrides);
        t
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        let entries = [
            ("christoffel_dual_path", tolerance::CHRISTOFFEL_DUAL_PATH),
            ("christoffel_dual_path_fd", tolerance::CHRISTOFFEL_DUAL_PATH_FD),
            ("converse_defect_min", tolerance::CONVERSE_DEFECT_MIN),
            ("curvature_identity", tolerance::CURVATURE_IDENTITY_REL),
            ("curvature_symmetry", tolerance::CURVATURE_SYMMETRY),
            ("fd_half_step", tolerance::FD_HALF_STEP),
            ("flat_christoffel", tolerance::FLAT_CHRISTOFFEL),
            ("flat_curvature", tolerance::FLAT_CURVATURE),
            ("metric_compatibility", tolerance::METRIC_COMPATIBILITY),
            ("metric_inverse", tolerance::METRIC_INVERSE),
            ("orbit_independence_min", 0.1),
            ("orbit_spread_abs", tolerance::ORBIT_SPREAD_ABS),
            ("orbit_spread_rel", tolerance::ORBIT_SPREAD_REL),
            ("parallel_converse", tolerance::PARALLEL_CONVERSE),
            ("parallel_forward", tolerance::PARALLEL_FORWARD),
            ("q_isometry_ulps", tolerance::Q_ISOMETRY_ULPS as f64),
        ];
        Self(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, key: &str) -> f64 {
        *self.0.get(key).unwrap_or_else(|| panic!("tolerance `{key}` has no default"))
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), CliError> {
        if !self.0.contains_key(key) {
            return Err(CliError::Config(format!("unknown tolerance `{key}`")));
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::Config(format!("tolerance `{key}` must be positive, got {value}")));
        }
        self.0.insert(key.to_string(), value);
        Ok(())
    }

    pub fn parse_assignment(&mut self, text: &str) -> Result<(), CliError> {
        let (key, value) =
            text.split_once('=').ok_or_else(|| CliError::Config(format!("expected KEY=VAL, got `{text}`")))?;
        let value =
            value.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad tolerance value in `{text}`")))?;
        self.set(key.trim(), value)
    }
}

fn default_grad_step() -> f64 {
    DEFAULT_GRADIENT_STEP
}

fn default_fd_step() -> f64 {
    DEFAULT_CURVATURE_STEP
}

fn default_samples() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Field-spec text or built-in name.
    pub fields: String,
    #[serde(default)]
    pub points: Vec<[f64; 3]>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_grad")]
    pub grad_mode: GradModeSpec,
    #[serde(default = "default_grad_step")]
    pub grad_step: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_stencil")]
    pub stencil: StencilSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Seed vectors `x` for orbit sections.
    #[serde(default)]
    pub vectors: Vec<[f64; 3]>,
    /// Random vectors (or vector tuples) drawn per point by `verify`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: Format,
}

fn default_stencil() -> StencilSpec {
    StencilSpec::Five
}

fn default_grad() -> GradModeSpec {
    GradModeSpec::Analytic
}

fn default_format() -> Format {
    Format::Json
}

impl RunConfig {
    pub fn new(fields: impl Into<String>) -> Self {
        Self {
            fields: fields.into(),
            points: Vec::new(),
            grid: None,
            grad_mode: GradModeSpec::Analytic,
            grad_step: DEFAULT_GRADIENT_STEP,
            fd_step: DEFAULT_CURVATURE_STEP,
            stencil: StencilSpec::Five,
            tolerances: Tolerances::default(),
            seed: 0,
            vectors: Vec::new(),
            samples: default_samples(),
            output: None,
            format: Format::Json,
        }
    }

    pub fn field_pair(&self) -> Result<FieldPair, CliError> {
        let pair = FieldPair::parse(&self.fields).map_err(|e| CliError::Config(format!("field spec: {e}")))?;
        let mode = match self.grad_mode {
            GradModeSpec::Analytic => GradMode::Analytic,
            GradModeSpec::Fd => GradMode::CentralDifference { base_step: self.grad_step },
        };
        Ok(pair.with_grad_mode(mode))
    }

    /// Explicit points followed by grid nodes.
    pub fn all_points(&self) -> Result<Vec<[f64; 3]>, CliError> {
        let mut pts = self.points.clone();
        if let Some(grid) = &self.grid {
            pts.extend(grid.expand()?);
        }
        Ok(pts)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, step) in [("grad_step", self.grad_step), ("fd_step", self.fd_step)] {
            if !(step > 0.0 && step.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        for (key, value) in &self.tolerances.0 {
            if !(*value > 0.0 && value.is_finite()) {
                return Err(CliError::Config(format!("tolerance `{key}` must be positive")));
            }
        }
        let defaults = Tolerances::default();
        if let Some(key) = self.tolerances.0.keys().find(|k| !defaults.0.contains_key(*k)) {
            return Err(CliError::Config(format!("unknown tolerance `{key}`")));
        }
        if let Some(grid) = &self.grid {
            grid.expand()?;
        }
        self.field_pair()?;
        Ok(())
    }
}
