use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use seqnet::canon::isomorphic;
use seqnet::format::to_dot;
use seqnet::planner::{period_utilities, FormationPath, UtilitySpec};
use seqnet::structures::{is_nsg, is_quasi_complete, is_weighted_nsg, quasi_star};
use seqnet::Graph;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutFormat {
    Csv,
    Dot,
    Json,
}

#[derive(Debug, Serialize)]
pub struct PeriodRow {
    pub period: usize,
    pub weight: f64,
    pub utility: f64,
    pub nsg: bool,
    pub qc: bool,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub mode: String,
    pub nodes: usize,
    pub horizon: usize,
    pub utility: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discount: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub final_class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agents: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repair_passes: Option<usize>,
    pub periods: Vec<PeriodRow>,
}

/// `QC`, `QS`, `NSG` or `other`; `QC` wins when both shapes coincide.
pub fn structural_class(g: &Graph) -> String {
    if is_quasi_complete(g).is_some() {
        return "QC".into();
    }
    let t = g.link_count();
    if g.is_unweighted() {
        if let Ok(qs) = quasi_star(g.n(), t) {
            if g.n() <= seqnet::canon::MAX_CANON_NODES && isomorphic(g, &qs).unwrap_or(false) {
                return "QS".into();
            }
        }
        if is_nsg(g).is_nsg() {
            return "NSG".into();
        }
    } else if is_weighted_nsg(g).is_nsg() {
        return "weighted-NSG".into();
    }
    "other".into()
}

pub struct Report {
    pub path: FormationPath,
    pub summary: Summary,
}

impl Report {
    pub fn new(
        mode: &str,
        path: FormationPath,
        u: &UtilitySpec,
        utility_label: &str,
        discount: Option<(&str, &[f64])>,
        value: Option<f64>,
    ) -> Result<Report, CliError> {
        let utilities = period_utilities(&path, u)?;
        let weights: Vec<f64> = match discount {
            Some((_, d)) => d.to_vec(),
            None => vec![1.0; path.len()],
        };
        let periods = path
            .graphs()
            .iter()
            .zip(&utilities)
            .zip(&weights)
            .enumerate()
            .map(|(t, ((g, &u), &w))| PeriodRow {
                period: t + 1,
                weight: w,
                utility: u,
                nsg: if g.is_unweighted() { is_nsg(g).is_nsg() } else { is_weighted_nsg(g).is_nsg() },
                qc: is_quasi_complete(g).is_some(),
            })
            .collect();
        let summary = Summary {
            mode: mode.into(),
            nodes: path.n(),
            horizon: path.len(),
            utility: utility_label.into(),
            discount: discount.map(|d| d.0.to_string()),
            value,
            final_class: structural_class(path.last()),
            agents: None,
            seed: None,
            repair_passes: None,
            periods,
        };
        Ok(Report { path, summary })
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("period,weight,utility,nsg,qc\n");
        for r in &self.summary.periods {
            let _ = writeln!(out, "{},{},{},{},{}", r.period, r.weight, r.utility, r.nsg, r.qc);
        }
        out
    }

    pub fn dot(&self) -> String {
        self.path
            .graphs()
            .iter()
            .enumerate()
            .map(|(t, g)| to_dot(g, &format!("period_{}", t + 1)))
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, fmt: OutFormat) -> String {
        match fmt {
            OutFormat::Csv => self.csv(),
            OutFormat::Dot => self.dot(),
            OutFormat::Json => self.json(),
        }
    }

    /// One DOT file per period plus `utilities.csv` and `summary.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), CliError> {
        let io = |p: &Path, e| CliError::io(p.display().to_string(), e);
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let width = self.path.len().to_string().len();
        for (t, g) in self.path.graphs().iter().enumerate() {
            let p = dir.join(format!("period_{:0width$}.dot", t + 1));
            fs::write(&p, to_dot(g, &format!("period_{}", t + 1))).map_err(|e| io(&p, e))?;
        }
        let p = dir.join("utilities.csv");
        fs::write(&p, self.csv()).map_err(|e| io(&p, e))?;
        let p = dir.join("summary.json");
        fs::write(&p, self.json()).map_err(|e| io(&p, e))?;
        Ok(())
    }
}
