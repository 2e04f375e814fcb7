//! Turning stored scans into estimator inputs and curves.

use daps::analysis::{gz_curve, Variable};
use daps::estimator::CoincidenceData;
use daps::simulator::ScanSetting;
use daps::ScanDataset;

use crate::error::{CliError, CliResult};

/// Sampled events when present, otherwise the exact table.
pub fn setting_data(setting: &ScanSetting) -> CliResult<CoincidenceData<f64>> {
    match (&setting.events, &setting.exact) {
        (Some(counts), _) => Ok(CoincidenceData::from_counts(counts)?),
        (None, Some(table)) => Ok(CoincidenceData::from_exact(table)),
        (None, None) => Err(CliError::Config(format!(
            "setting {} holds neither events nor a table",
            setting.index
        ))),
    }
}

pub fn signal_data(dataset: &ScanDataset) -> CliResult<Vec<CoincidenceData<f64>>> {
    dataset.settings.iter().map(setting_data).collect()
}

pub fn vacuum_data(dataset: &ScanDataset) -> CliResult<Vec<CoincidenceData<f64>>> {
    if dataset.vacuum.len() != dataset.settings.len() {
        return Err(CliError::Config(format!(
            "dataset has {} signal settings but {} vacuum settings",
            dataset.settings.len(),
            dataset.vacuum.len()
        )));
    }
    dataset.vacuum.iter().map(setting_data).collect()
}

/// Signal and vacuum `G_z` curves against the chosen abscissa.
pub struct Curves {
    pub signal: daps::RadialCurve,
    pub vacuum: daps::RadialCurve,
}

pub fn curves(dataset: &ScanDataset, z: f64, variable: Variable) -> CliResult<Curves> {
    let signal = signal_data(dataset)?;
    let vacuum = vacuum_data(dataset)?;
    let betas = dataset.betas();
    Ok(Curves {
        signal: gz_curve(&signal, &vacuum, &betas, z, variable)?,
        vacuum: gz_curve(&vacuum, &vacuum, &betas, z, variable)?,
    })
}
