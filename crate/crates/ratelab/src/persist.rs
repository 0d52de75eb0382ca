//! File persistence: networks, realizations, approximators and study
//! results. Every format is JSON with a version header; floats survive the
//! round trip bit-exactly.

use anyhow::{anyhow, bail, Context, Result};
use pidenet::builder::AssembledApproximator;
use pidenet::relu_net::ReluNetwork;
use pidenet::simulate::RandomnessRealization;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const REALIZATION_FORMAT: &str = "pidenet-realization";
pub const REALIZATION_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct RealizationDto {
    format: String,
    version: u32,
    realization: RandomnessRealization,
}

pub fn save_network(path: &Path, net: &ReluNetwork) -> Result<()> {
    std::fs::write(path, net.to_json()).with_context(|| format!("writing {}", path.display()))
}

pub fn load_network(path: &Path) -> Result<ReluNetwork> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ReluNetwork::from_json(&text).map_err(|e| anyhow!("{e}"))
}

pub fn save_approximator(path: &Path, approx: &AssembledApproximator) -> Result<()> {
    std::fs::write(path, approx.to_json()).with_context(|| format!("writing {}", path.display()))
}

pub fn load_approximator(path: &Path) -> Result<AssembledApproximator> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    AssembledApproximator::from_json(&text).map_err(|e| anyhow!("{e}"))
}

pub fn save_realization(path: &Path, realization: &RandomnessRealization) -> Result<()> {
    let dto = RealizationDto {
        format: REALIZATION_FORMAT.into(),
        version: REALIZATION_FORMAT_VERSION,
        realization: realization.clone(),
    };
    std::fs::write(path, serde_json::to_string(&dto)?)
        .with_context(|| format!("writing {}", path.display()))
}

pub fn load_realization(path: &Path) -> Result<RandomnessRealization> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let dto: RealizationDto = serde_json::from_str(&text)
        .with_context(|| format!("parsing realization file {}", path.display()))?;
    if dto.format != REALIZATION_FORMAT || dto.version != REALIZATION_FORMAT_VERSION {
        bail!(
            "unexpected realization format {} v{} in {}",
            dto.format,
            dto.version,
            path.display()
        );
    }
    Ok(dto.realization)
}

pub fn save_study_result(path: &Path, result: &crate::study::StudyResult) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(result)?)
        .with_context(|| format!("writing {}", path.display()))
}

pub fn load_study_result(path: &Path) -> Result<crate::study::StudyResult> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing study result {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pidenet::model::{builtin_model, ModelParams};
    use pidenet::relu_net::identity_net;
    use pidenet::simulate::{euler_path, sample_realization, PathParams, Variant};

    #[test]
    fn network_round_trip_preserves_eval() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let net = identity_net(3, 2).unwrap();
        save_network(&path, &net).unwrap();
        let back = load_network(&path).unwrap();
        for x in [[0.1, -2.0, 5.0], [1.5, 0.0, -0.25]] {
            assert_eq!(net.eval(&x).unwrap(), back.eval(&x).unwrap());
        }
    }

    #[test]
    fn realization_round_trip_reproduces_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("real.json");
        let (spec, _) = builtin_model("merton", 1, &ModelParams::default()).unwrap();
        let params = PathParams::new(1.0, 8);
        let r = sample_realization(&spec, &params, 3, 0).unwrap();
        save_realization(&path, &r).unwrap();
        let back = load_realization(&path).unwrap();
        assert_eq!(r, back);
        let a = euler_path(&spec, None, &[1.0], &r, Variant::ExactCoeff, 1).unwrap();
        let b = euler_path(&spec, None, &[1.0], &back, Variant::ExactCoeff, 1).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn corrupted_file_is_a_clean_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let net = identity_net(2, 2).unwrap();
        save_network(&path, &net).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.pop();
        std::fs::write(&path, text).unwrap();
        assert!(load_network(&path).is_err());
    }
}
