//! TOML experiment files.
//!
//! ```toml
//! mode = "optimal"        # greedy | optimal | delegate | weighted-step
//! nodes = 7
//! horizon = 8
//! output = "out"
//!
//! [utility]
//! kind = "kb2"
//! phi = 0.01
//!
//! [discount]
//! kind = "farsighted"     # farsighted | geometric | myopic | explicit
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;
use crate::spec::UtilityParams;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: String,
    pub nodes: usize,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub restrict_nsg: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub utility: UtilitySection,
    #[serde(default)]
    pub discount: DiscountSection,
    #[serde(default)]
    pub delegate: DelegateSection,
    #[serde(default)]
    pub weighted: WeightedSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitySection {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default)]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub psi: Option<String>,
    #[serde(default)]
    pub transform: Option<String>,
}

fn default_kind() -> String {
    "kb2".into()
}
fn default_phi() -> f64 {
    0.01
}
fn default_length() -> usize {
    5
}

impl Default for UtilitySection {
    fn default() -> Self {
        UtilitySection {
            kind: default_kind(),
            phi: default_phi(),
            length: default_length(),
            coeffs: None,
            theta: None,
            psi: None,
            transform: None,
        }
    }
}

impl UtilitySection {
    pub fn params(&self) -> UtilityParams {
        let d = UtilityParams::default();
        UtilityParams {
            kind: self.kind.clone(),
            phi: self.phi,
            length: self.length,
            coeffs: self.coeffs.clone().unwrap_or(d.coeffs),
            theta: self.theta.clone(),
            psi: self.psi.clone().unwrap_or(d.psi),
            transform: self.transform.clone().unwrap_or(d.transform),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscountSection {
    #[serde(default = "default_discount")]
    pub kind: String,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    /// Halve ε until the optimal class sequence settles.
    #[serde(default)]
    pub adaptive: bool,
}

fn default_discount() -> String {
    "farsighted".into()
}

impl Default for DiscountSection {
    fn default() -> Self {
        DiscountSection {
            kind: default_discount(),
            delta: None,
            epsilon: None,
            values: None,
            adaptive: false,
        }
    }
}

impl DiscountSection {
    /// The equivalent command-line form, plus explicit values when given.
    pub fn spec(&self) -> Result<(String, Option<Vec<f64>>), CliError> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| CliError::Config(format!("discount `{}` needs `{key}`", self.kind)))
        };
        Ok(match self.kind.as_str() {
            "farsighted" => ("farsighted".into(), None),
            "geometric" => (format!("geometric:{}", need(self.delta, "delta")?), None),
            "myopic" => (
                format!(
                    "myopic:{}",
                    self.epsilon.unwrap_or(seqnet::planner::DEFAULT_MYOPIC_EPSILON)
                ),
                None,
            ),
            "explicit" => (
                "explicit".into(),
                Some(self.values.clone().ok_or_else(|| {
                    CliError::Config("discount `explicit` needs `values`".into())
                })?),
            ),
            other => return Err(CliError::Config(format!("unknown discount kind `{other}`"))),
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelegateSection {
    /// 1-based agents; the recipe is used when absent.
    #[serde(default)]
    pub agents: Option<Vec<usize>>,
    #[serde(default)]
    pub phi: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedSection {
    #[serde(default = "default_resolution")]
    pub resolution: u32,
    /// Links in the quasi-complete base.
    #[serde(default)]
    pub links: Option<usize>,
}

fn default_resolution() -> u32 {
    8
}

impl Default for WeightedSection {
    fn default() -> Self {
        WeightedSection {
            resolution: default_resolution(),
            links: None,
        }
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))
}
