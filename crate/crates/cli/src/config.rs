//! Experiment configuration files (TOML, one experiment per file).

use std::path::{Path, PathBuf};

use imcf_lab::mass::ProfileFamily;
use imcf_lab::{FlowSpec, ShapeSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Subdirectory of the output root; defaults to the config file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub n: usize,
    /// Grid size: number of polar cells.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub shape: Option<ShapeSpec>,
    #[serde(default)]
    pub flow: Option<FlowSpec>,
    #[serde(default)]
    pub penrose: Option<PenroseSpec>,
    #[serde(default)]
    pub convergence: Option<ConvergenceSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenroseSpec {
    pub family: ProfileFamily,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_node_count")]
    pub node_count: usize,
}

fn default_r_max() -> f64 {
    40.0
}

fn default_node_count() -> usize {
    1201
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderKind {
    Statics,
    Flow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub experiment: LadderKind,
    /// Grid sizes `[m, 2m, 4m]`.
    pub resolutions: Vec<usize>,
}

impl ConvergenceSpec {
    pub fn base(&self) -> Result<usize, CliError> {
        match self.resolutions[..] {
            [a, b, c] if a > 0 && b == 2 * a && c == 2 * b => Ok(a),
            [_] => Err(CliError::Invalid("convergence needs three resolutions, got a single one".into())),
            _ => Err(CliError::Invalid(format!(
                "convergence resolutions must be [m, 2m, 4m], got {:?}",
                self.resolutions
            ))),
        }
    }
}

/// Pass/fail thresholds. Relative unless noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Integrated Minkowski residuals, relative to `A` and `A max H`.
    pub identity: f64,
    /// Heintze-Karcher deficit lower bound, relative to `A`.
    pub hk: f64,
    /// Alexandrov-Fenchel, `L` and `M` bounds.
    pub inequality: f64,
    /// Sphere functionals against their closed forms.
    pub closed_form: f64,
    /// `A(t)/(A(0) e^t) - 1` along the inverse mean curvature flow.
    pub area_law: f64,
    /// Absolute error of the sphere extinction time under the Brendle flow.
    pub extinction: f64,
    /// Penrose equality band.
    pub equality: f64,
    /// Gap between the two mass computations.
    pub cross_oracle: f64,
    pub min_order_statics: f64,
    pub min_order_flow: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-7,
            hk: 1e-7,
            inequality: 1e-9,
            closed_form: 1e-8,
            area_law: 1e-6,
            extinction: 1e-4,
            equality: 1e-6,
            cross_oracle: 1e-3,
            min_order_statics: 3.5,
            min_order_flow: 1.9,
        }
    }
}

impl Tolerances {
    /// Every tolerance times `factor`; order thresholds are left alone.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            identity: self.identity * factor,
            hk: self.hk * factor,
            inequality: self.inequality * factor,
            closed_form: self.closed_form * factor,
            area_law: self.area_law * factor,
            extinction: self.extinction * factor,
            equality: self.equality * factor,
            cross_oracle: self.cross_oracle * factor,
            ..self
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let all = [
            self.identity,
            self.hk,
            self.inequality,
            self.closed_form,
            self.area_law,
            self.extinction,
            self.equality,
            self.cross_oracle,
            self.min_order_statics,
            self.min_order_flow,
        ];
        if all.iter().all(|t| *t >= 0.0 && t.is_finite()) {
            Ok(())
        } else {
            Err(CliError::Invalid("tolerances must be finite and nonnegative".into()))
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| CliError::Invalid(format!("{}: {}", path.display(), e.message())))?;
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < 3 {
            return Err(CliError::Invalid(format!("dimension n must be >= 3, got {}", self.n)));
        }
        if let Some(m) = self.m {
            if m < 8 {
                return Err(CliError::Invalid(format!("grid size m must be >= 8, got {m}")));
            }
        }
        if let Some(shape) = &self.shape {
            shape.validate()?;
        }
        if let Some(flow) = &self.flow {
            flow.validate()?;
        }
        if let Some(p) = &self.penrose {
            p.family.validate(self.n)?;
        }
        if let Some(c) = &self.convergence {
            c.base()?;
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
                return Err(CliError::Invalid(format!("experiment name {name:?} is not a plain directory name")));
            }
        }
        self.tolerances.validate()
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("experiment")
    }

    pub fn grid_size(&self) -> Result<usize, CliError> {
        self.m.ok_or_else(|| CliError::Invalid("config needs a grid size `m`".into()))
    }

    pub fn shape(&self) -> Result<&ShapeSpec, CliError> {
        self.shape.as_ref().ok_or_else(|| CliError::Invalid("config needs a [shape] table".into()))
    }

    pub fn flow(&self) -> Result<&FlowSpec, CliError> {
        self.flow.as_ref().ok_or_else(|| CliError::Invalid("config needs a [flow] table".into()))
    }

    pub fn penrose(&self) -> Result<&PenroseSpec, CliError> {
        self.penrose.as_ref().ok_or_else(|| CliError::Invalid("config needs a [penrose] table".into()))
    }

    pub fn convergence(&self) -> Result<&ConvergenceSpec, CliError> {
        self.convergence
            .as_ref()
            .ok_or_else(|| CliError::Invalid("config needs a [convergence] table".into()))
    }
}
