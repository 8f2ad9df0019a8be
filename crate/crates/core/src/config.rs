//! Declarative experiment configuration: a single JSON document describing
//! the model, the checks to run with their parameters, and the output
//! destination. The seed is mandatory; campaigns have no nondeterministic
//! default randomness.

use serde::{Deserialize, Serialize};

use crate::hermitian::MatrixLiteral;
use crate::verify::mc::TailStatistic;

pub const CONFIG_VERSION: u32 = 1;

fn default_version() -> u32 {
    CONFIG_VERSION
}

fn default_v_scale() -> f64 {
    1.0
}

fn default_grid_points() -> usize {
    20
}

fn default_statistic() -> TailStatistic {
    TailStatistic::LambdaMax
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub v: u32,
    /// Campaign seed; every check derives its streams from it.
    pub seed: u64,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub experiment: Option<TailExperimentSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

/// Model description. The finite-product kind feeds the exact checks; the
/// continuous kinds feed the Monte Carlo and structure checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    FiniteProduct {
        /// Weight lists per factor; labels are implicit indices.
        factors: Vec<Vec<f64>>,
        /// Matrix dimension of the random probe fields.
        #[serde(default = "default_probe_dim")]
        d: usize,
    },
    GaussianSeries {
        coefficients: Vec<MatrixLiteral>,
    },
    SphereLinear {
        coefficients: Vec<MatrixLiteral>,
    },
    SphereQuadratic {
        coefficients: Vec<MatrixLiteral>,
    },
    SoConjugation {
        /// Real symmetric coefficients (imaginary parts must be absent).
        coefficients: Vec<MatrixLiteral>,
    },
    Langevin {
        n: usize,
        eta: f64,
    },
}

fn default_probe_dim() -> usize {
    2
}

/// The matrix-valued function the checks probe. Defaults to seeded random
/// fields on the finite arena; an explicit field literal pins the probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    RandomFields {
        count: usize,
    },
    /// Explicit finite field: `{"space": {"factors": [[...]]}, "d": n,
    /// "values": [matrix literals]}` in mixed-radix order.
    Field {
        field: serde_json::Value,
    },
}

/// One check invocation: the registry name plus optional parameters; absent
/// parameters take the check's documented defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: String,
    /// Count of random probe fields (exact checks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<usize>,
    /// Count of fuzz trials (trace-inequality checks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Count of Monte Carlo samples (dominance checks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_points: Option<usize>,
    /// Matrix dimension for fuzz checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Dimension cycle for the skew-basis fuzz.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    /// Sample points for the model-oracle checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Finite-difference step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<TailStatistic>,
    /// Shrinks the variance proxy fed to a dominance bound; < 1 is the
    /// negative-control knob.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_scale: Option<f64>,
    /// Perturbs the measure in identity checks; ≠ 0 is the negative-control
    /// knob.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_skew: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Mark the entry as a fail-expected probe: it never gates the campaign.
    #[serde(default)]
    pub negative_control: bool,
}

impl CheckSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            fields: None,
            trials: None,
            samples: None,
            c: None,
            alpha: None,
            tolerance: None,
            t: None,
            t_grid: None,
            q_list: None,
            beta_grid: None,
            theta_points: None,
            dim: None,
            dims: None,
            points: None,
            h: None,
            statistic: None,
            v_scale: None,
            measure_skew: None,
            grid_points: None,
            negative_control: false,
        }
    }
}

/// A tail-curve experiment: sample the model, build the empirical tail on a
/// grid, compare with the subgaussian bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailExperimentSpec {
    pub samples: usize,
    #[serde(default = "default_statistic")]
    pub statistic: TailStatistic,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default = "default_v_scale")]
    pub v_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    pub format: OutputFormat,
}
