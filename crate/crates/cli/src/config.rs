use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    MinEntropy,
    Shannon,
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "min-entropy" => Ok(Kind::MinEntropy),
            "shannon" => Ok(Kind::Shannon),
            _ => Err(format!("unknown kind {s:?} (expected min-entropy or shannon)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub delta: f64,
    pub r: f64,
}

/// Sweep configuration as read from a JSON file; every field is optional
/// there and may be overridden by flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub scenario: Option<Scenario>,
    pub q_grid: Option<Vec<f64>>,
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
    pub q_step: Option<f64>,
    pub targets: Option<Vec<String>>,
    pub kinds: Option<Vec<Kind>>,
    pub m_nodes: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub plot_path: Option<PathBuf>,
}

impl SweepFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(anyhow::anyhow!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Usage(anyhow::anyhow!("parsing {}: {e}", path.display())))
    }
}

/// Grid `min, min + step, …` up to `max`, built from indices so that
/// reruns reproduce identical values.
pub fn grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step + 1e-9).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|i| min + step * i as f64).collect();
    if let Some(last) = g.last_mut() {
        *last = last.min(max);
    }
    g
}
