//! Text forms of utilities, schedules and response functions.

use std::path::Path;

use seqnet::games::{ResponseFunction, Transform};
use seqnet::metrics::NodeWeights;
use seqnet::planner::{DiscountSchedule, UtilityKind, UtilitySpec};

use crate::error::CliError;

fn numbers(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(format!("{what}: `{s}` is not a number")))
        })
        .collect()
}

pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    numbers(text, what)
}

/// `linear:a,b`, `quad:a,b,c`, `power:a,b,p` or `softplus:base,shift`.
pub fn parse_psi(text: &str) -> Result<ResponseFunction, CliError> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("psi `{text}` needs the form kind:params")))?;
    let p = numbers(rest, "psi")?;
    let want = |k: usize| -> Result<(), CliError> {
        if p.len() == k {
            Ok(())
        } else {
            Err(CliError::Config(format!("psi `{kind}` takes {k} parameters, got {}", p.len())))
        }
    };
    match kind {
        "linear" => {
            want(2)?;
            Ok(ResponseFunction::linear(p[0], p[1]))
        }
        "quad" => {
            want(3)?;
            Ok(ResponseFunction::Quadratic { a: p[0], b: p[1], c: p[2] })
        }
        "power" => {
            want(3)?;
            Ok(ResponseFunction::Power { a: p[0], b: p[1], exponent: p[2] })
        }
        "softplus" => {
            want(2)?;
            Ok(ResponseFunction::Softplus { base: p[0], shift: p[1] })
        }
        _ => Err(CliError::Config(format!("unknown psi kind `{kind}`"))),
    }
}

pub fn parse_transform(text: &str) -> Result<Transform, CliError> {
    match text {
        "identity" => Ok(Transform::Identity),
        "square" => Ok(Transform::Square),
        "exp-minus-one" => Ok(Transform::ExpMinusOne),
        _ => Err(CliError::Config(format!("unknown transform `{text}`"))),
    }
}

/// Everything needed to build a [`UtilitySpec`].
#[derive(Debug, Clone)]
pub struct UtilityParams {
    pub kind: String,
    pub phi: f64,
    pub length: usize,
    pub coeffs: Vec<f64>,
    pub theta: Option<Vec<f64>>,
    pub psi: String,
    pub transform: String,
}

impl Default for UtilityParams {
    fn default() -> Self {
        UtilityParams {
            kind: "kb2".into(),
            phi: 0.01,
            length: 5,
            coeffs: vec![1.0; 4],
            theta: None,
            psi: "linear:1,0.01".into(),
            transform: "identity".into(),
        }
    }
}

impl UtilityParams {
    pub fn build(&self, n: usize) -> Result<UtilitySpec, CliError> {
        let kind = match self.kind.as_str() {
            "kb" => UtilityKind::KbAggregate { phi: self.phi },
            "kb2" => UtilityKind::KbSquared { phi: self.phi },
            "diffusion" => UtilityKind::Diffusion { phi: self.phi, length: self.length },
            "spectral" => UtilityKind::SpectralRadius,
            "walks" => UtilityKind::WalkWeighted(self.coeffs.clone()),
            "welfare" => UtilityKind::EquilibriumWelfare {
                psi: parse_psi(&self.psi)?,
                transform: parse_transform(&self.transform)?,
            },
            other => return Err(CliError::Config(format!("unknown utility `{other}`"))),
        };
        let mut u = UtilitySpec::new(kind);
        if let Some(t) = &self.theta {
            if t.len() != n {
                return Err(CliError::Config(format!(
                    "theta has {} entries for {n} nodes",
                    t.len()
                )));
            }
            u = u.with_theta(NodeWeights::new(t.clone()).map_err(|e| CliError::Config(e.to_string()))?);
        }
        u.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(u)
    }
}

/// `farsighted`, `geometric:δ`, `myopic:ε` or `file:PATH`.
pub fn parse_discount(text: &str, horizon: usize) -> Result<DiscountSchedule, CliError> {
    let (kind, arg) = match text.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (text, None),
    };
    let num = |a: Option<&str>| -> Result<f64, CliError> {
        a.ok_or_else(|| CliError::Config(format!("discount `{kind}` needs a parameter")))?
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("discount parameter in `{text}` is not a number")))
    };
    let d = match kind {
        "farsighted" => DiscountSchedule::farsighted(horizon),
        "geometric" => DiscountSchedule::geometric(num(arg)?, horizon),
        "myopic" => DiscountSchedule::myopic(num(arg)?, horizon),
        "file" => {
            let path = arg.ok_or_else(|| CliError::Config("discount file needs a path".into()))?;
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            DiscountSchedule::new(numbers(&text, "discount file")?)
        }
        _ => return Err(CliError::Config(format!("unknown discount `{text}`"))),
    };
    let d = d.map_err(|e| CliError::Config(e.to_string()))?;
    if d.len() != horizon {
        return Err(CliError::Config(format!(
            "discount has {} periods, horizon is {horizon}",
            d.len()
        )));
    }
    Ok(d)
}
