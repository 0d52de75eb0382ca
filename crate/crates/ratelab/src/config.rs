//! Study configuration: JSON-loadable, with per-study ladder validation.

use anyhow::{bail, Context, Result};
use pidenet::model::ModelFile;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    /// Strong rate of the Euler scheme in the step size.
    EulerRate,
    /// Small-jump truncation rate in the truncation level.
    TruncRate,
    /// Compensator Monte Carlo rate in the sample count.
    CompMcRate,
    /// Size of the assembled approximator against accuracy and dimension.
    SizeScaling,
}

impl StudyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StudyKind::EulerRate => "euler-rate",
            StudyKind::TruncRate => "trunc-rate",
            StudyKind::CompMcRate => "comp-mc-rate",
            StudyKind::SizeScaling => "size-scaling",
        }
    }
}

impl std::str::FromStr for StudyKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "euler-rate" => StudyKind::EulerRate,
            "trunc-rate" => StudyKind::TruncRate,
            "comp-mc-rate" => StudyKind::CompMcRate,
            "size-scaling" => StudyKind::SizeScaling,
            other => bail!("unknown study kind {other:?}"),
        })
    }
}

/// Configuration of one study run. The seed is mandatory; there is no
/// entropy default anywhere in the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub seed: u64,
    /// Inline model description; `model_path` is the alternative.
    #[serde(default)]
    pub model: Option<ModelFile>,
    #[serde(default)]
    pub model_path: Option<PathBuf>,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_horizon")]
    pub t_horizon: f64,

    /// Euler-rate ladder of exponents: `h = T / 2^k`.
    #[serde(default)]
    pub k_ladder: Vec<u32>,
    /// Reference exponent for the fine grid.
    #[serde(default)]
    pub ref_k: Option<u32>,

    /// Truncation-rate ladder of levels (descending).
    #[serde(default)]
    pub delta_ladder: Vec<f64>,
    #[serde(default)]
    pub ref_delta: Option<f64>,
    #[serde(default)]
    pub trunc_n_steps: Option<usize>,

    /// Compensator-MC ladder of sample counts.
    #[serde(default)]
    pub m_ladder: Vec<usize>,
    #[serde(default)]
    pub mc_n_steps: Option<usize>,
    #[serde(default)]
    pub mc_delta: Option<f64>,

    /// Size-scaling ladders.
    #[serde(default)]
    pub eps_ladder: Vec<f64>,
    #[serde(default)]
    pub d_ladder: Vec<usize>,
    /// Calibration constant of the schedule formulas.
    #[serde(default)]
    pub c_cal: Option<f64>,

    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_paths() -> usize {
    10_000
}

fn default_horizon() -> f64 {
    1.0
}

fn strictly_monotone<T: PartialOrd>(xs: &[T]) -> bool {
    if xs.len() < 2 {
        return true;
    }
    let inc = xs.windows(2).all(|w| w[0] < w[1]);
    let dec = xs.windows(2).all(|w| w[0] > w[1]);
    inc || dec
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: StudyConfig = serde_json::from_str(text).context("parsing study config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading study config {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            bail!("n_paths must be positive");
        }
        if self.t_horizon <= 0.0 || self.t_horizon.is_nan() {
            bail!("t_horizon must be positive");
        }
        match self.study {
            StudyKind::EulerRate => {
                if self.k_ladder.is_empty() {
                    bail!("euler-rate needs a nonempty k_ladder");
                }
                if !strictly_monotone(&self.k_ladder) {
                    bail!("k_ladder must be strictly monotone");
                }
                let top = *self.k_ladder.iter().max().expect("nonempty");
                let rk = self.ref_k.unwrap_or(top + 3);
                if rk <= top {
                    bail!("ref_k must exceed every ladder exponent");
                }
            }
            StudyKind::TruncRate => {
                if self.delta_ladder.is_empty() {
                    bail!("trunc-rate needs a nonempty delta_ladder");
                }
                if !strictly_monotone(&self.delta_ladder) {
                    bail!("delta_ladder must be strictly monotone");
                }
                if self.delta_ladder.iter().any(|&d| d <= 0.0) {
                    bail!("truncation levels must be positive");
                }
                let min = self
                    .delta_ladder
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                if let Some(rd) = self.ref_delta {
                    if !(rd > 0.0 && rd < min) {
                        bail!("ref_delta must lie strictly below the ladder");
                    }
                }
            }
            StudyKind::CompMcRate => {
                if self.m_ladder.is_empty() {
                    bail!("comp-mc-rate needs a nonempty m_ladder");
                }
                if !strictly_monotone(&self.m_ladder) {
                    bail!("m_ladder must be strictly monotone");
                }
                if self.m_ladder.iter().any(|&m| m == 0) {
                    bail!("compensator sample counts must be positive");
                }
            }
            StudyKind::SizeScaling => {
                if self.eps_ladder.is_empty() || self.d_ladder.is_empty() {
                    bail!("size-scaling needs eps_ladder and d_ladder");
                }
                if !strictly_monotone(&self.eps_ladder) || !strictly_monotone(&self.d_ladder) {
                    bail!("size-scaling ladders must be strictly monotone");
                }
                if self.eps_ladder.iter().any(|&e| !(0.0 < e && e <= 1.0)) {
                    bail!("accuracies must lie in (0, 1]");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_validation() {
        let text = r#"{
            "study": "euler-rate",
            "seed": 7,
            "k_ladder": [4, 5, 6],
            "ref_k": 10
        }"#;
        let cfg = StudyConfig::from_json(text).unwrap();
        assert_eq!(cfg.study, StudyKind::EulerRate);
        assert_eq!(cfg.seed, 7);

        // seed is mandatory
        assert!(StudyConfig::from_json(r#"{"study": "euler-rate", "k_ladder": [4]}"#).is_err());
        // ladders must be monotone
        assert!(StudyConfig::from_json(
            r#"{"study": "euler-rate", "seed": 1, "k_ladder": [4, 4]}"#
        )
        .is_err());
        assert!(StudyConfig::from_json(
            r#"{"study": "trunc-rate", "seed": 1, "delta_ladder": [0.1, 0.4, 0.2]}"#
        )
        .is_err());
    }
}
