use std::path::Path;

use daps::estimator::{
    coincidence_eigen, daps_gz, di_amplitude, di_intensity, generating_function, multinomial_test,
};
use daps::ScanDataset;
use rayon::prelude::*;

use crate::data::{setting_data, signal_data};
use crate::error::{CliError, CliResult};
use crate::io::{read_json, write_json};
use crate::records::{
    EstimateReport, EstimateSummary, Record, SettingEstimate, RECORD_SCHEMA_VERSION,
};

pub fn parse_vector(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad weight vector `{text}`: {e}")))
        })
        .collect()
}

pub fn run(
    dataset_path: &Path,
    output: &Path,
    z_values: &[f64],
    zvecs: &[Vec<f64>],
) -> CliResult<()> {
    let dataset: ScanDataset = read_json(dataset_path)?;
    let record = estimate(
        &dataset,
        &dataset_path.display().to_string(),
        z_values,
        zvecs,
    )?;
    write_json(output, &Record::Estimate(record))
}

pub fn estimate(
    dataset: &ScanDataset,
    source: &str,
    z_values: &[f64],
    zvecs: &[Vec<f64>],
) -> CliResult<EstimateReport> {
    if dataset.settings.is_empty() {
        return Err(daps::Error::EmptyScan.into());
    }
    let signal = signal_data(dataset)?;
    let vacuum = if dataset.vacuum.is_empty() {
        None
    } else if dataset.vacuum.len() == dataset.settings.len() {
        Some(
            dataset
                .vacuum
                .iter()
                .map(setting_data)
                .collect::<CliResult<Vec<_>>>()?,
        )
    } else {
        return Err(CliError::Config(
            "vacuum scan does not match the signal scan".into(),
        ));
    };
    let settings = signal
        .par_iter()
        .enumerate()
        .map(|(i, data)| -> CliResult<SettingEstimate> {
            let eig = coincidence_eigen(data)?;
            let (di_i, di_a) = match &vacuum {
                Some(v) => (Some(di_intensity(&v[i])?), Some(di_amplitude(&v[i])?)),
                None => (None, None),
            };
            Ok(SettingEstimate {
                index: dataset.settings[i].index,
                beta: dataset.settings[i].beta,
                gz: z_values
                    .iter()
                    .map(|&z| daps_gz(data, z))
                    .collect::<daps::Result<_>>()?,
                generating: zvecs
                    .iter()
                    .map(|v| generating_function(data, v))
                    .collect::<daps::Result<_>>()?,
                lambda_min: eig.lambda_min,
                eigenvector: eig.z,
                mu_min: multinomial_test(data)?.mu_min,
                di_intensity: di_i,
                di_amplitude: di_a,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let argmin = |key: fn(&SettingEstimate) -> f64| {
        (0..settings.len())
            .min_by(|&a, &b| key(&settings[a]).total_cmp(&key(&settings[b])))
            .expect("nonempty scan")
    };
    let g = argmin(|s| s.lambda_min.mean);
    let m = argmin(|s| s.mu_min.mean);
    let (g_min, mu_min) = (settings[g].lambda_min, settings[m].mu_min);
    let summary = EstimateSummary {
        g_min,
        g_min_setting: settings[g].index,
        z_star: settings[g].eigenvector.clone(),
        g_min_significance: g_min.significance_below_zero(),
        mu_min,
        mu_min_setting: settings[m].index,
        mu_min_significance: mu_min.significance_below_zero(),
        g_min_negative: g_min.mean < 0.0,
        mu_min_negative: mu_min.mean < 0.0,
    };
    Ok(EstimateReport {
        schema_version: RECORD_SCHEMA_VERSION,
        source: source.to_string(),
        label: dataset.metadata.label.clone(),
        z_values: z_values.to_vec(),
        weight_vectors: zvecs.to_vec(),
        settings,
        summary,
    })
}
