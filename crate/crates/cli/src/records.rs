//! JSON result records written by `estimate` and `analyze` and read by
//! `report`. Every record carries `schema_version` and a `kind` tag.

use daps::analysis::{FitResult, GaussPolyModel, Variable};
use daps::estimator::EstimateWithError;
use serde::{Deserialize, Serialize};

pub const RECORD_SCHEMA_VERSION: u32 = 1;

type Estimate = EstimateWithError<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Estimate(EstimateReport),
    Fit(FitReport),
    Prediction(PredictionReport),
    Discrimination(DiscriminationReport),
    OptimalZ(OptimalZReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub source: String,
    pub label: Option<String>,
    pub z_values: Vec<f64>,
    pub weight_vectors: Vec<Vec<f64>>,
    pub settings: Vec<SettingEstimate>,
    pub summary: EstimateSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingEstimate {
    pub index: usize,
    pub beta: f64,
    /// `G_z` for each entry of `z_values`.
    pub gz: Vec<Estimate>,
    /// Generating function for each entry of `weight_vectors`.
    pub generating: Vec<Estimate>,
    pub lambda_min: Estimate,
    pub eigenvector: Vec<f64>,
    pub mu_min: Estimate,
    /// `|beta_DI|^2` from the paired vacuum setting.
    pub di_intensity: Option<Estimate>,
    pub di_amplitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub g_min: Estimate,
    pub g_min_setting: usize,
    pub z_star: Vec<f64>,
    #[serde(with = "extended")]
    pub g_min_significance: f64,
    pub mu_min: Estimate,
    pub mu_min_setting: usize,
    #[serde(with = "extended")]
    pub mu_min_significance: f64,
    pub g_min_negative: bool,
    pub mu_min_negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub source: String,
    pub z: f64,
    pub variable: Variable,
    pub vacuum: FitResult<f64>,
    pub signal: FitResult<f64>,
    pub fixed_decay: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub schema_version: u32,
    pub source: String,
    pub z: f64,
    pub variable: Variable,
    pub vacuum: GaussPolyModel<f64>,
    /// Slope of `|beta_DI|^2` against `|beta|^2`.
    pub di_scale: Option<f64>,
    pub points: Vec<PredictionPoint>,
    pub fraction_within_3_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionPoint {
    pub setting: usize,
    pub x: f64,
    pub mean: f64,
    pub delta: f64,
    pub predicted: f64,
    /// `(mean - predicted) / delta`; absent when `delta` vanishes.
    pub z_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationReport {
    pub schema_version: u32,
    pub sources: Vec<String>,
    pub labels: Vec<String>,
    pub z: f64,
    pub variable: Variable,
    pub probabilities: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalZReport {
    pub schema_version: u32,
    pub source: String,
    pub grid: ZGrid,
    pub setting: usize,
    pub z: f64,
    pub estimate: Estimate,
    #[serde(with = "extended")]
    pub significance: f64,
    /// Set when no grid point gives a negative value.
    pub nonnegative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// Floats that may be infinite or NaN: finite values stay JSON numbers, the
/// rest become `"inf"`, `"-inf"` or `"nan"`.
mod extended {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(D::Error::custom(format!(
                    "expected a number, \"inf\", \"-inf\" or \"nan\", got {t:?}"
                ))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_significance_round_trips() {
        for v in [f64::INFINITY, f64::NEG_INFINITY, 2.5] {
            let e = Estimate::new(-1.0, 0.0, 0.0, None);
            let report = OptimalZReport {
                schema_version: RECORD_SCHEMA_VERSION,
                source: "x".into(),
                grid: ZGrid {
                    start: -1.0,
                    stop: 0.0,
                    step: 0.5,
                },
                setting: 0,
                z: -1.0,
                estimate: e,
                significance: v,
                nonnegative: false,
            };
            let text = serde_json::to_string(&Record::OptimalZ(report.clone())).unwrap();
            let back: Record = serde_json::from_str(&text).unwrap();
            assert_eq!(back, Record::OptimalZ(report));
        }
    }
}
