//! JSON experiment configuration.
//!
//! A config describes one run: a problem, a method, a schedule, and the
//! diagnostics to compute from the trajectory. A sweep is a named list of
//! configs sharing one output directory.

use std::path::{Path, PathBuf};

use mfw_core::problems::{self, LowRankParams, SensingParams};
use mfw_core::{DVector, Method, Problem, StepSchedule, Tableau};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Radius used for logistic regression on synthetic sensing data.
pub const LOGISTIC_RADIUS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Triangle(TriangleSpec),
    ScalarBox,
    ScalarHuber(HuberSpec),
    Sensing(SensingSpec),
    Logistic(LogisticSpec),
    Lowrank(LowRankSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriangleSpec {
    pub target: Vec<f64>,
    pub x0: Vec<f64>,
}

impl Default for TriangleSpec {
    fn default() -> Self {
        Self { target: problems::TRIANGLE_TARGET.to_vec(), x0: problems::TRIANGLE_START.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HuberSpec {
    pub eps: f64,
}

impl Default for HuberSpec {
    fn default() -> Self {
        Self { eps: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingSpec {
    pub samples: usize,
    pub features: usize,
    pub sparsity: f64,
    pub noise_sd: f64,
    pub radius: f64,
}

impl Default for SensingSpec {
    fn default() -> Self {
        let p = SensingParams::default();
        Self { samples: p.samples, features: p.features, sparsity: p.sparsity, noise_sd: p.noise_sd, radius: p.radius }
    }
}

impl SensingSpec {
    fn params(&self, seed: u64) -> SensingParams {
        SensingParams {
            samples: self.samples,
            features: self.features,
            sparsity: self.sparsity,
            noise_sd: self.noise_sd,
            seed,
            radius: self.radius,
        }
    }
}

/// Logistic regression on an svmlight file, or on sign labels of synthetic
/// sensing data when `file` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    pub samples: usize,
    pub features: usize,
    pub sparsity: f64,
    pub noise_sd: f64,
    pub radius: f64,
}

impl Default for LogisticSpec {
    fn default() -> Self {
        let s = SensingSpec::default();
        Self {
            file: None,
            samples: s.samples,
            features: s.features,
            sparsity: s.sparsity,
            noise_sd: s.noise_sd,
            radius: LOGISTIC_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowRankSpec {
    pub users: usize,
    pub items: usize,
    pub rank: usize,
    pub observed_fraction: f64,
    pub noise_sd: f64,
    pub radius: f64,
    pub delta: f64,
}

impl Default for LowRankSpec {
    fn default() -> Self {
        let p = LowRankParams::default();
        Self {
            users: p.users,
            items: p.items,
            rank: p.rank,
            observed_fraction: p.observed_fraction,
            noise_sd: p.noise_sd,
            radius: p.radius,
            delta: p.delta,
        }
    }
}

impl ProblemSpec {
    /// Problem dimension, when known without reading data.
    fn dim(&self) -> Option<usize> {
        match self {
            ProblemSpec::Triangle(_) => Some(2),
            ProblemSpec::ScalarBox | ProblemSpec::ScalarHuber(_) => Some(1),
            ProblemSpec::Sensing(s) => Some(s.features),
            ProblemSpec::Logistic(l) if l.file.is_none() => Some(l.features),
            ProblemSpec::Logistic(_) => None,
            ProblemSpec::Lowrank(r) => Some(r.users * r.items),
        }
    }

    fn has_optimum(&self) -> bool {
        matches!(self, ProblemSpec::Triangle(_) | ProblemSpec::ScalarBox | ProblemSpec::ScalarHuber(_))
    }

    /// Builds the problem; data generators use `seed`.
    pub fn build(&self, seed: u64) -> Result<Problem, CliError> {
        let p = match self {
            ProblemSpec::Triangle(t) => {
                problems::triangle(DVector::from_vec(t.target.clone()), DVector::from_vec(t.x0.clone()))
                    .map_err(CliError::config)?
            }
            ProblemSpec::ScalarBox => problems::scalar_box(),
            ProblemSpec::ScalarHuber(h) => problems::scalar_huber(h.eps).map_err(CliError::config)?,
            ProblemSpec::Sensing(s) => problems::sensing(&s.params(seed)).map_err(CliError::config)?,
            ProblemSpec::Logistic(l) => match &l.file {
                Some(path) => {
                    let data = mfw_core::data::parse_svmlight_path(path)?;
                    problems::logistic(&data, l.radius).map_err(CliError::config)?
                }
                None => {
                    let s = SensingSpec {
                        samples: l.samples,
                        features: l.features,
                        sparsity: l.sparsity,
                        noise_sd: l.noise_sd,
                        radius: l.radius,
                    };
                    problems::logistic_synthetic(&s.params(seed)).map_err(CliError::config)?
                }
            },
            ProblemSpec::Lowrank(r) => problems::lowrank(&LowRankParams {
                users: r.users,
                items: r.items,
                rank: r.rank,
                observed_fraction: r.observed_fraction,
                noise_sd: r.noise_sd,
                seed,
                radius: r.radius,
                delta: r.delta,
            })
            .map_err(CliError::config)?,
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodName {
    #[serde(rename = "fw")]
    Fw,
    #[serde(rename = "flow")]
    Flow,
    #[serde(rename = "rk")]
    Rk,
    #[serde(rename = "rk+linesearch")]
    RkLineSearch,
    #[serde(rename = "fw+momentum")]
    FwMomentum,
    #[serde(rename = "fw+linesearch")]
    FwLineSearch,
}

impl std::str::FromStr for MethodName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown method {s:?} (fw, flow, rk, rk+linesearch, fw+momentum, fw+linesearch)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZigzagSpec {
    pub windows: Vec<usize>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

fn default_horizon() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeSpec {
    pub k_min: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundSpec {
    pub anchors: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zigzag: Option<ZigzagSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<SlopeSpec>,
    pub bound_compare: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<LowerBoundSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// File stem for every output of this run.
    pub name: String,
    pub problem: ProblemSpec,
    pub method: MethodName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tableau: Option<String>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub stop_gap: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    /// Also write every iterate to `<name>_points.csv`.
    #[serde(default)]
    pub save_points: bool,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_c() -> f64 {
    2.0
}

fn default_delta() -> f64 {
    1.0
}

fn default_max_iter() -> usize {
    1000
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, problem: ProblemSpec, method: MethodName) -> Self {
        Self {
            name: name.into(),
            problem,
            method,
            tableau: None,
            c: default_c(),
            delta: default_delta(),
            max_iter: default_max_iter(),
            stop_gap: 0.0,
            seed: 0,
            diagnostics: Diagnostics::default(),
            save_points: false,
            output: default_output(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        Self::from_json_str(&read(path)?)
    }

    pub fn schedule(&self) -> Result<StepSchedule, CliError> {
        StepSchedule::new(self.c, self.delta).map_err(CliError::config)
    }

    /// Resolves the method, loading the tableau by name or path.
    pub fn resolve_method(&self) -> Result<Method, CliError> {
        let tableau = || -> Result<Tableau, CliError> {
            let name = self
                .tableau
                .as_deref()
                .ok_or_else(|| CliError::Config(format!("{}: method needs a tableau", self.name)))?;
            Tableau::resolve(name).map_err(|e| CliError::Config(format!("{}: tableau {name:?}: {e}", self.name)))
        };
        let method = match self.method {
            MethodName::Fw => Method::Fw,
            MethodName::Flow => Method::Flow,
            MethodName::Rk => Method::Rk(tableau()?),
            MethodName::RkLineSearch => Method::RkLineSearch(tableau()?),
            MethodName::FwMomentum => Method::FwMomentum,
            MethodName::FwLineSearch => Method::FwLineSearch,
        };
        if self.tableau.is_some() && !matches!(self.method, MethodName::Rk | MethodName::RkLineSearch) {
            return Err(CliError::Config(format!("{}: tableau given for a method without stages", self.name)));
        }
        Ok(method)
    }

    /// Label used in zig-zag tables: the tableau name for Runge-Kutta runs.
    pub fn method_label(&self) -> String {
        let tab = || {
            let t = self.tableau.as_deref().unwrap_or("?");
            Path::new(t).file_stem().and_then(|s| s.to_str()).unwrap_or(t).to_string()
        };
        match self.method {
            MethodName::Fw => "fw".into(),
            MethodName::Flow => "flow".into(),
            MethodName::Rk => tab(),
            MethodName::RkLineSearch => format!("{}+linesearch", tab()),
            MethodName::FwMomentum => "fw+momentum".into(),
            MethodName::FwLineSearch => "fw+linesearch".into(),
        }
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(format!("{}: {msg}", self.name)));
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            return Err(CliError::Config(format!("invalid run name {:?}", self.name)));
        }
        self.resolve_method()?;
        self.schedule().map_err(|e| CliError::Config(format!("{}: {e}", self.name)))?;
        if self.delta != 1.0 && self.method != MethodName::Flow {
            return bad(format!("delta = {} only applies to the flow method", self.delta));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1".into());
        }
        if !(self.stop_gap >= 0.0) {
            return bad(format!("stop_gap = {} must be >= 0", self.stop_gap));
        }
        if let ProblemSpec::Triangle(t) = &self.problem {
            if t.target.len() != 2 || t.x0.len() != 2 {
                return bad("triangle target and x0 must have 2 coordinates".into());
            }
            let x0 = DVector::from_vec(t.x0.clone());
            if !problems::triangle_set().contains(&x0, mfw_core::solvers::FEASIBILITY_TOL).map_err(CliError::config)? {
                return bad(format!("x0 {:?} is outside the triangle", t.x0));
            }
        }
        let d = &self.diagnostics;
        if let Some(z) = &d.zigzag {
            if z.windows.is_empty() || z.windows.iter().any(|&w| w < 2) {
                return bad("zig-zag windows must be non-empty and >= 2".into());
            }
            if !(z.horizon > 0.0 && z.horizon.is_finite()) {
                return bad(format!("zig-zag horizon {} must be positive", z.horizon));
            }
        }
        if (d.slope.is_some() || d.bound_compare) && !self.problem.has_optimum() {
            return bad("slope and bound comparison need a problem with known optimum".into());
        }
        if let Some(lb) = &d.lower_bound {
            if self.problem.dim() != Some(1) {
                return bad("lower-bound probe needs a scalar problem".into());
            }
            if let Some(&a) = lb.anchors.iter().find(|&&a| a > self.max_iter) {
                return bad(format!("anchor {a} beyond max_iter {}", self.max_iter));
            }
        }
        Ok(())
    }
}

/// A named list of configs written to one directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub configs: Vec<ExperimentConfig>,
}

impl Sweep {
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("sweep: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        Self::from_json_str(&read(path)?)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.configs.is_empty() {
            return Err(CliError::Config(format!("sweep {} has no configs", self.name)));
        }
        let mut names = std::collections::HashSet::new();
        for c in &self.configs {
            c.validate()?;
            if !names.insert(c.name.as_str()) {
                return Err(CliError::Config(format!("duplicate run name {:?}", c.name)));
            }
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
