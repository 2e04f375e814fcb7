//! Experiment configuration files (TOML).

use std::fs;
use std::path::Path;

use daps::detectors::DetectorModel;
use daps::fockcore::StateSpec;
use daps::simulator::MAX_DEPTH;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub label: Option<String>,
    /// Signal state; replaced by the heralded state when `heralding` is set.
    #[serde(default)]
    pub state: Option<StateSpec>,
    pub frontend: Frontend,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default = "default_depth")]
    pub depth: u32,
    pub lo: LoGrid,
    /// Sampled events per setting; exact tables only when absent.
    #[serde(default)]
    pub trials: Option<u64>,
    pub seed: u64,
    pub n_max: usize,
    #[serde(default)]
    pub heralding: Option<Heralding>,
    #[serde(default)]
    pub imbalance: Option<ImbalanceConfig>,
}

fn default_depth() -> u32 {
    1
}

/// Signal/LO beam splitter with `|t|^2 = transmittance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frontend {
    pub transmittance: f64,
}

/// LO settings as amplitudes `|beta|`, as intensities `|beta|^2`, or as
/// `settings` equally spaced intensities from 0 to `max_intensity`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoGrid {
    #[serde(default)]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(default)]
    pub intensities: Option<Vec<f64>>,
    #[serde(default)]
    pub max_intensity: Option<f64>,
    #[serde(default)]
    pub settings: Option<usize>,
}

impl LoGrid {
    pub fn amplitudes(&self) -> CliResult<Vec<f64>> {
        let amps = match (&self.amplitudes, &self.intensities, self.max_intensity, self.settings) {
            (Some(a), None, None, None) => a.clone(),
            (None, Some(i), None, None) => {
                if i.iter().any(|v| !(*v >= 0.0)) {
                    return Err(CliError::Config("lo.intensities must be nonnegative".into()));
                }
                i.iter().map(|v| v.sqrt()).collect()
            }
            (None, None, Some(max), Some(n)) => {
                if n < 2 || !(max > 0.0) {
                    return Err(CliError::Config("lo needs settings >= 2 and max_intensity > 0".into()));
                }
                (0..n).map(|i| (max * i as f64 / (n - 1) as f64).sqrt()).collect()
            }
            _ => {
                return Err(CliError::Config(
                    "lo must give exactly one of `amplitudes`, `intensities`, or `max_intensity` with `settings`"
                        .into(),
                ))
            }
        };
        if amps.is_empty() {
            return Err(CliError::Config("lo grid is empty".into()));
        }
        if amps.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(CliError::Config(
                "lo amplitudes must be finite and nonnegative".into(),
            ));
        }
        Ok(amps)
    }
}

/// Two-mode squeezed vacuum whose idler is detected to herald the signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Heralding {
    pub squeezing: f64,
    pub transmittance: f64,
    #[serde(default)]
    pub detector: DetectorModel,
    pub outcomes: Vec<usize>,
}

/// Unequal multiplexing: light fractions and optional efficiency scales per
/// detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImbalanceConfig {
    pub split_weights: Vec<f64>,
    #[serde(default)]
    pub efficiency_scales: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let tau = self.frontend.transmittance;
        if !(tau > 0.0 && tau < 1.0) {
            return bad(format!(
                "frontend.transmittance must lie in (0, 1), got {tau}"
            ));
        }
        if self.depth > MAX_DEPTH {
            return bad(format!(
                "depth {} exceeds the maximum {MAX_DEPTH}",
                self.depth
            ));
        }
        if self.n_max == 0 {
            return bad("n_max must be positive".into());
        }
        if self.trials == Some(0) {
            return bad("trials must be positive".into());
        }
        self.detector.response_matrix::<f64>(1)?;
        self.lo.amplitudes()?;
        match (&self.state, &self.heralding) {
            (Some(_), Some(_)) => return bad("give either `state` or `heralding`, not both".into()),
            (None, None) => return bad("missing `state` (or `heralding`)".into()),
            (Some(s), None) => s.validate()?,
            (None, Some(h)) => {
                if !(h.squeezing >= 0.0 && h.squeezing < 1.0) {
                    return bad(format!(
                        "heralding.squeezing must lie in [0, 1), got {}",
                        h.squeezing
                    ));
                }
                if !(h.transmittance > 0.0 && h.transmittance <= 1.0) {
                    return bad(format!(
                        "heralding.transmittance must lie in (0, 1], got {}",
                        h.transmittance
                    ));
                }
                if h.outcomes.is_empty() {
                    return bad("heralding.outcomes is empty".into());
                }
                if let Some(k) = h.outcomes.iter().find(|&&k| k > h.detector.max_outcome()) {
                    return bad(format!(
                        "heralding outcome {k} exceeds the herald detector's maximum {}",
                        h.detector.max_outcome()
                    ));
                }
                h.detector.response_matrix::<f64>(1)?;
            }
        }
        if let Some(im) = &self.imbalance {
            let n = 1usize << self.depth;
            if im.split_weights.len() != n {
                return bad(format!(
                    "imbalance.split_weights needs {n} entries, got {}",
                    im.split_weights.len()
                ));
            }
            if let Some(s) = &im.efficiency_scales {
                if s.len() != n {
                    return bad(format!(
                        "imbalance.efficiency_scales needs {n} entries, got {}",
                        s.len()
                    ));
                }
                if s.iter()
                    .any(|&v| !(v > 0.0 && v * self.detector.efficiency() <= 1.0))
                {
                    return bad("scaled efficiencies must lie in (0, 1]".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER_LIKE: &str = r#"
schema_version = 1
seed = 7
n_max = 40
trials = 1000

[state]
kind = "fock"
photons = 1

[frontend]
transmittance = 0.9

[detector]
model = "tes"
efficiency = 0.9
nonlinearity = 0.01
max_outcome = 4

[lo]
max_intensity = 28.0
settings = 29
"#;

    fn parse(text: &str) -> CliResult<ExperimentConfig> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn parses_paper_like_config() {
        let cfg = parse(PAPER_LIKE).unwrap();
        let amps = cfg.lo.amplitudes().unwrap();
        assert_eq!(amps.len(), 29);
        assert!((amps[28] * amps[28] - 28.0).abs() < 1e-12);
        assert_eq!(cfg.depth, 1);
    }

    #[test]
    fn unknown_fields_are_reported_with_location() {
        let text = PAPER_LIKE.replace("n_max = 40", "n_max = 40\nnmax = 3");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("nmax") && err.contains("line"), "{err}");
    }

    #[test]
    fn rejects_inconsistent_sections() {
        let both = format!(
            "{PAPER_LIKE}\n[heralding]\nsqueezing = 0.3\ntransmittance = 0.4\noutcomes = [1]\n"
        );
        assert!(matches!(parse(&both), Err(CliError::Config(_))));
        let grid = PAPER_LIKE.replace("settings = 29", "settings = 29\namplitudes = [0.0]");
        assert!(matches!(parse(&grid), Err(CliError::Config(_))));
        let tau = PAPER_LIKE.replace("transmittance = 0.9", "transmittance = 1.5");
        assert!(matches!(parse(&tau), Err(CliError::Config(_))));
    }
}
