use std::path::{Path, PathBuf};

use fredholm::QuadRule;
use serde::{Deserialize, Serialize};

use crate::error::BenchError;

/// One benchmark experiment: a problem, a grid, the methods to compare and the
/// noise levels to try each method at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub grid: GridSpec,
    pub methods: Vec<MethodSpec>,
    /// Empty means a single noise-free run per method.
    #[serde(default)]
    pub noise: Vec<NoiseLevel>,
    #[serde(default)]
    pub seed: u64,
    /// Constant of the discrepancy stopping rule `‖ψₙ₊₁ − ψₙ‖ ≤ c₁δ`.
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fill the `wall_ms` column. Off by default so that output is byte-stable.
    #[serde(default)]
    pub record_wall_time: bool,
    /// Also write one `x,value` profile per run.
    #[serde(default)]
    pub profiles: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// Triangular kernel with `f = sin(mπx)/(mπ)²`, exact solution `sin(mπx)`.
    EigenTest { m: usize },
    /// A library kernel with exact solution `ψ ≡ 1` and closed-form data.
    Kernel { kernel: KernelName },
    /// Two-point problem `u″ − u = f`, `u′(0) = 0`, `u(1) = 0`, exact `u = cos(πx/2)`.
    OdeCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    /// `exp(−|x − ξ|)`.
    Exponential,
    /// `exp(xξ)`.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rule: RuleName,
    pub n: usize,
    /// Points per panel for Gauss–Legendre.
    #[serde(default)]
    pub order: Option<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            rule: RuleName::Simpson,
            n: 129,
            order: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    Trapezoid,
    Simpson,
    GaussLegendre,
}

impl GridSpec {
    pub fn rule(&self) -> QuadRule {
        match self.rule {
            RuleName::Trapezoid => QuadRule::Trapezoid,
            RuleName::Simpson => QuadRule::Simpson,
            RuleName::GaussLegendre => QuadRule::GaussLegendre {
                order: self.order.unwrap_or(5),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Lavrentiev {
        alpha: f64,
    },
    Quasisolution {
        radius: f64,
        #[serde(default = "default_terms")]
        n_terms: usize,
    },
    Fridman {
        step: f64,
        #[serde(default)]
        lambda1: Option<f64>,
        #[serde(default = "default_iters")]
        max_iters: usize,
    },
    Landweber {
        /// Defaults to `1/‖A*A‖`.
        #[serde(default)]
        step: Option<f64>,
        #[serde(default = "default_iters")]
        max_iters: usize,
    },
    Averaged {
        step: f64,
        #[serde(default = "default_iters")]
        max_iters: usize,
    },
    Implicit {
        alpha: f64,
        #[serde(default = "default_iters")]
        max_iters: usize,
    },
    SteepestDescent {
        #[serde(default = "default_iters")]
        max_iters: usize,
    },
    Transform {
        #[serde(default = "default_r")]
        r: f64,
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(default = "default_terms")]
        n_terms: usize,
        #[serde(default)]
        form: TransformForm,
    },
    /// Dense solve of the second-kind equation with the end conditions
    /// absorbed into the kernel.
    KernelAbsorbed,
    /// Volterra forward substitution, end conditions imposed afterwards.
    ConstantsFirst,
}

fn default_terms() -> usize {
    60
}

fn default_iters() -> usize {
    10_000
}

fn default_r() -> f64 {
    0.5
}

fn default_mu() -> f64 {
    0.3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformForm {
    #[default]
    Block,
    Body,
    Conclusions,
}

impl MethodSpec {
    pub fn id(&self) -> &'static str {
        match self {
            MethodSpec::Lavrentiev { .. } => "lavrentiev",
            MethodSpec::Quasisolution { .. } => "quasisolution",
            MethodSpec::Fridman { .. } => "fridman",
            MethodSpec::Landweber { .. } => "landweber",
            MethodSpec::Averaged { .. } => "averaged",
            MethodSpec::Implicit { .. } => "implicit",
            MethodSpec::SteepestDescent { .. } => "steepest_descent",
            MethodSpec::Transform { .. } => "transform",
            MethodSpec::KernelAbsorbed => "kernel_absorbed",
            MethodSpec::ConstantsFirst => "constants_first",
        }
    }

    fn for_ode(&self) -> bool {
        matches!(self, MethodSpec::KernelAbsorbed | MethodSpec::ConstantsFirst)
    }
}

/// Data error `δ`, either absolute or relative to `‖f‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseLevel {
    #[serde(default)]
    pub absolute: Option<f64>,
    #[serde(default)]
    pub relative: Option<f64>,
    /// Number of sine modes carrying the perturbation.
    #[serde(default = "default_modes")]
    pub modes: usize,
}

fn default_modes() -> usize {
    20
}

impl NoiseLevel {
    pub fn none() -> Self {
        Self {
            absolute: Some(0.0),
            relative: None,
            modes: default_modes(),
        }
    }

    pub fn delta(&self, f_norm: f64) -> f64 {
        match (self.absolute, self.relative) {
            (Some(a), _) => a,
            (None, Some(r)) => r * f_norm,
            (None, None) => 0.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| BenchError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.methods.is_empty() {
            return Err(BenchError::Invalid("at least one method is required".into()));
        }
        fredholm::Grid::<f64>::new(0.0, 1.0, self.grid.rule(), self.grid.n)
            .map_err(|e| BenchError::Invalid(format!("grid: {e}")))?;
        let ode = matches!(self.problem, ProblemSpec::OdeCosine);
        for m in &self.methods {
            if m.for_ode() != ode {
                return Err(BenchError::UnknownMethod {
                    method: m.id().into(),
                    problem: self.problem.name(),
                });
            }
        }
        if let ProblemSpec::EigenTest { m: 0 } = self.problem {
            return Err(BenchError::Invalid("eigen_test needs m >= 1".into()));
        }
        for n in &self.noise {
            let d = n.absolute.or(n.relative).unwrap_or(0.0);
            if !(d >= 0.0) || !d.is_finite() || n.modes == 0 {
                return Err(BenchError::Invalid(format!("bad noise level {n:?}")));
            }
        }
        if !(self.c1 > 0.0) {
            return Err(BenchError::Invalid("c1 must be positive".into()));
        }
        Ok(())
    }

    /// Noise levels to run, with the empty list meaning one noise-free run.
    pub fn noise_levels(&self) -> Vec<NoiseLevel> {
        if self.noise.is_empty() {
            vec![NoiseLevel::none()]
        } else {
            self.noise.clone()
        }
    }
}

impl ProblemSpec {
    pub fn name(&self) -> String {
        match self {
            ProblemSpec::EigenTest { m } => format!("eigen_test(m={m})"),
            ProblemSpec::Kernel { kernel } => format!("kernel({kernel:?})").to_lowercase(),
            ProblemSpec::OdeCosine => "ode_cosine".into(),
        }
    }
}
