//! Run configuration: flat dotted keys in a TOML file, e.g.
//!
//! ```toml
//! problem.name = "solitary"
//! problem.A = 0.375
//! method.kind = "hbvm"
//! method.k = 3
//! method.s = 2
//! grid.N = 300
//! time.n = 1600
//! output.dir = "out/solitary-hbvm32"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::shbvm_k;
use crate::problems::{default_problem, ProblemKind, ProblemSpec};

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "BOUSSINESQ_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Gauss,
    Hbvm,
    Shbvm,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Gauss => "gauss",
            MethodKind::Hbvm => "hbvm",
            MethodKind::Shbvm => "shbvm",
        }
    }
}

impl std::str::FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss" => Ok(MethodKind::Gauss),
            "hbvm" => Ok(MethodKind::Hbvm),
            "shbvm" => Ok(MethodKind::Shbvm),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: ProblemKind,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Final time override.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    pub kind: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    /// SHBVM selection tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iter_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n_modes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Store a field snapshot every this many steps (0 disables).
    #[serde(default = "default_field_stride")]
    pub field_stride: usize,
    /// Measure the solution error every this many steps.
    #[serde(default = "one")]
    pub metric_stride: usize,
    #[serde(default = "default_eval_points")]
    pub eval_points: usize,
    /// Write wall times; disable for byte-identical reports.
    #[serde(default = "yes")]
    pub timing: bool,
}

fn default_field_stride() -> usize {
    50
}
fn one() -> usize {
    1
}
fn default_eval_points() -> usize {
    crate::problems::EVAL_POINTS
}
fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            field_stride: default_field_stride(),
            metric_stride: 1,
            eval_points: default_eval_points(),
            timing: true,
        }
    }
}

/// Reference run for problems without a closed-form solution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    /// Steps of the reference SHBVM run; defaults to twice the SHBVM mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub method: MethodSection,
    #[serde(default)]
    pub grid: GridSection,
    pub time: TimeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub reference: ReferenceSection,
}

/// Method after defaults are applied. For SHBVM, `s`/`k` are chosen at run
/// time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedMethod {
    Fixed { kind: MethodKind, k: usize, s: usize },
    Spectral { tol: f64, s_max: usize },
}

pub const DEFAULT_SHBVM_TOL: f64 = 1e-11;
pub const DEFAULT_S_MAX: usize = 20;

impl RunConfig {
    pub fn new(problem: ProblemKind, method: MethodKind, n: usize) -> Self {
        Self {
            problem: ProblemSection { name: problem, amplitude: None, t_final: None },
            method: MethodSection {
                kind: method,
                k: None,
                s: None,
                tol: None,
                s_max: None,
                iter_tol: None,
                max_iters: None,
            },
            grid: GridSection::default(),
            time: TimeSection { n },
            output: OutputSection::default(),
            reference: ReferenceSection::default(),
        }
    }

    pub fn gauss(problem: ProblemKind, s: usize, n: usize) -> Self {
        let mut c = Self::new(problem, MethodKind::Gauss, n);
        c.method.s = Some(s);
        c
    }

    pub fn hbvm(problem: ProblemKind, k: usize, s: usize, n: usize) -> Self {
        let mut c = Self::new(problem, MethodKind::Hbvm, n);
        c.method.k = Some(k);
        c.method.s = Some(s);
        c
    }

    pub fn shbvm(problem: ProblemKind, tol: f64, n: usize) -> Self {
        let mut c = Self::new(problem, MethodKind::Shbvm, n);
        c.method.tol = Some(tol);
        c
    }

    pub fn with_modes(mut self, n_modes: usize) -> Self {
        self.grid.n_modes = Some(n_modes);
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Output directory, honouring [`OUTPUT_DIR_ENV`].
    pub fn output_dir(&self) -> Option<PathBuf> {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .or_else(|| self.output.dir.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.time.n == 0 {
            return Err(Error::Config("time.n must be at least 1".into()));
        }
        if let Some(t) = self.problem.t_final {
            if !(t > 0.0) {
                return Err(Error::Config("problem.T must be positive".into()));
            }
        }
        if self.grid.n_modes == Some(0) {
            return Err(Error::Config("grid.N must be at least 1".into()));
        }
        if self.output.metric_stride == 0 {
            return Err(Error::Config("output.metric_stride must be at least 1".into()));
        }
        if self.output.eval_points <= 2 * self.grid.n_modes.unwrap_or(300) {
            return Err(Error::Config("output.eval_points must exceed 2N".into()));
        }
        self.resolved_method().map(|_| ())
    }

    pub fn resolved_method(&self) -> Result<ResolvedMethod> {
        let m = &self.method;
        match m.kind {
            MethodKind::Gauss => {
                let s = m.s.or(m.k).unwrap_or(1);
                if let (Some(k), Some(s)) = (m.k, m.s) {
                    if k != s {
                        return Err(Error::Config(format!("gauss needs k = s (got k={k}, s={s})")));
                    }
                }
                if s == 0 {
                    return Err(Error::Config("method.s must be at least 1".into()));
                }
                Ok(ResolvedMethod::Fixed { kind: MethodKind::Gauss, k: s, s })
            }
            MethodKind::Hbvm => {
                let s = m.s.unwrap_or(1);
                let k = m.k.unwrap_or_else(|| shbvm_k(s));
                if s == 0 || k < s {
                    return Err(Error::Config(format!("hbvm needs k >= s >= 1 (got k={k}, s={s})")));
                }
                Ok(ResolvedMethod::Fixed { kind: MethodKind::Hbvm, k, s })
            }
            MethodKind::Shbvm => {
                let tol = m.tol.unwrap_or(DEFAULT_SHBVM_TOL);
                if !(tol > 0.0 && tol < 1.0) {
                    return Err(Error::Config(format!("shbvm tol {tol} must lie in (0, 1)")));
                }
                let s_max = m.s_max.unwrap_or(DEFAULT_S_MAX);
                if s_max < 2 {
                    return Err(Error::Config("method.s_max must be at least 2".into()));
                }
                Ok(ResolvedMethod::Spectral { tol, s_max })
            }
        }
    }

    /// The problem with grid and time overrides applied.
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let mut spec = default_problem(self.problem.name, self.problem.amplitude)?;
        if let Some(n) = self.grid.n_modes {
            spec = spec.with_modes(n);
        }
        if let Some(t) = self.problem.t_final {
            spec = spec.with_final_time(t);
        }
        Ok(spec)
    }

    /// Steps of the reference run: twice the SHBVM mesh used for each
    /// benchmark unless overridden.
    pub fn reference_steps(&self) -> usize {
        self.reference.n.unwrap_or(match self.problem.name {
            ProblemKind::Solitary => 160,
            ProblemKind::Spread => 100,
            ProblemKind::Collision => 120,
        })
    }
}
