use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use daps::analysis::{
    default_z_grid, discrimination_matrix, fit_heralded, fit_vacuum, linear_fit,
    optimal_z as search_z, predict_convolution, ConvolutionOptions, CurvePoint, FitMode,
    GaussPolyModel, Variable,
};
use daps::estimator::EstimateWithError;
use daps::{RadialCurve, ScanDataset, StateSpec};

use crate::data::{curves, setting_data};
use crate::error::{CliError, CliResult};
use crate::io::{read_json, stem, write_curve_csv, write_json, write_matrix_csv};
use crate::records::{
    DiscriminationReport, FitReport, OptimalZReport, PredictionPoint, PredictionReport, Record,
    ZGrid, RECORD_SCHEMA_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariableArg {
    /// `|beta_DI|^2` from the vacuum scan.
    Di,
    /// `|beta|^2` of the LO setting.
    Raw,
}

impl From<VariableArg> for Variable {
    fn from(v: VariableArg) -> Self {
        match v {
            VariableArg::Di => Variable::DetectorIndependent,
            VariableArg::Raw => Variable::RawIntensity,
        }
    }
}

pub struct Options {
    pub z: f64,
    pub variable: Variable,
    pub khs: Option<Vec<usize>>,
    pub fixed_decay: bool,
}

fn load(path: &Path) -> CliResult<ScanDataset> {
    read_json(path)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn out(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// Degree for the heralded fit: explicit, the heralding outcome, the photon
/// number of a Fock state, or zero.
fn degree(dataset: &ScanDataset, explicit: Option<usize>) -> usize {
    explicit
        .or(dataset.metadata.heralding_outcome)
        .unwrap_or(match dataset.metadata.state {
            StateSpec::Fock { photons } => photons,
            _ => 0,
        })
}

pub fn fit(paths: &[PathBuf], dir: &Path, opts: &Options) -> CliResult<()> {
    if let Some(k) = &opts.khs {
        if k.len() != paths.len() {
            return Err(CliError::Config(format!(
                "--khs has {} entries for {} datasets",
                k.len(),
                paths.len()
            )));
        }
    }
    ensure_dir(dir)?;
    for (i, path) in paths.iter().enumerate() {
        let dataset = load(path)?;
        let c = curves(&dataset, opts.z, opts.variable)?;
        let vacuum = fit_vacuum(&c.vacuum)?;
        let k_h = degree(&dataset, opts.khs.as_ref().map(|k| k[i]));
        let mode = if opts.fixed_decay {
            FitMode::FixedDecay(vacuum.model.b)
        } else {
            FitMode::FreeDecay
        };
        let signal = fit_heralded(&c.signal, k_h, vacuum.model.b, mode)?;
        let name = stem(path);
        write_curve_csv(&out(dir, &format!("{name}.signal.csv")), &c.signal)?;
        write_curve_csv(&out(dir, &format!("{name}.vacuum.csv")), &c.vacuum)?;
        write_curve_csv(
            &out(dir, &format!("{name}.fit.csv")),
            &model_curve(&signal.model, &c.signal)?,
        )?;
        let record = FitReport {
            schema_version: RECORD_SCHEMA_VERSION,
            source: path.display().to_string(),
            z: opts.z,
            variable: opts.variable,
            vacuum,
            signal,
            fixed_decay: opts.fixed_decay,
        };
        write_json(&out(dir, &format!("{name}.fit.json")), &Record::Fit(record))?;
    }
    Ok(())
}

fn model_curve(model: &GaussPolyModel<f64>, at: &RadialCurve) -> CliResult<RadialCurve> {
    let settings: Vec<(usize, f64)> = at.points().iter().map(|p| (p.setting, p.x)).collect();
    Ok(model.curve(&settings)?)
}

/// Predicts the signal curve from the vacuum scan alone and compares it with
/// the direct estimate.
pub fn predict(paths: &[PathBuf], dir: &Path, opts: &Options) -> CliResult<()> {
    ensure_dir(dir)?;
    for path in paths {
        let dataset = load(path)?;
        let state = &dataset.metadata.state;
        if !state.is_rotation_invariant() {
            return Err(CliError::Config(format!(
                "prediction needs a rotationally symmetric state, got {state:?}"
            )));
        }
        let c = curves(&dataset, opts.z, opts.variable)?;
        let vacuum = fit_vacuum(&c.vacuum)?.model;
        let raw_x: Vec<f64> = dataset.betas().iter().map(|b| b * b).collect();
        let (raw_vacuum, di_scale) = match opts.variable {
            Variable::RawIntensity => (vacuum.clone(), None),
            Variable::DetectorIndependent => {
                let scale = linear_fit(&raw_x, &c.vacuum.xs())?.slope;
                (
                    vacuum.rescaled(1.0 / scale, Variable::RawIntensity),
                    Some(scale),
                )
            }
        };
        let tau = dataset.metadata.t.norm_sqr();
        let rho = dataset.metadata.r.norm_sqr();
        let predicted = predict_convolution(
            state,
            &raw_vacuum,
            tau,
            rho,
            &raw_x,
            ConvolutionOptions::default(),
        )?;
        let points: Vec<PredictionPoint> = c
            .signal
            .points()
            .iter()
            .zip(&predicted)
            .map(|(p, &v)| PredictionPoint {
                setting: p.setting,
                x: p.x,
                mean: p.y.mean,
                delta: p.y.delta,
                predicted: v,
                z_score: (p.y.delta > 0.0).then(|| (p.y.mean - v) / p.y.delta),
            })
            .collect();
        let within = points
            .iter()
            .filter(|p| (p.mean - p.predicted).abs() <= 3.0 * p.delta)
            .count();
        let name = stem(path);
        let predicted_curve = RadialCurve::new(
            opts.variable,
            points
                .iter()
                .map(|p| CurvePoint {
                    setting: p.setting,
                    x: p.x,
                    y: EstimateWithError::exact(p.predicted),
                })
                .collect(),
        )?;
        write_curve_csv(&out(dir, &format!("{name}.signal.csv")), &c.signal)?;
        write_curve_csv(
            &out(dir, &format!("{name}.predicted.csv")),
            &predicted_curve,
        )?;
        let record = PredictionReport {
            schema_version: RECORD_SCHEMA_VERSION,
            source: path.display().to_string(),
            z: opts.z,
            variable: opts.variable,
            vacuum,
            di_scale,
            fraction_within_3_delta: within as f64 / points.len() as f64,
            points,
        };
        write_json(
            &out(dir, &format!("{name}.prediction.json")),
            &Record::Prediction(record),
        )?;
    }
    Ok(())
}

pub fn discriminate(paths: &[PathBuf], dir: &Path, opts: &Options) -> CliResult<()> {
    ensure_dir(dir)?;
    let mut labels = Vec::new();
    let mut signal = Vec::new();
    for path in paths {
        let dataset = load(path)?;
        signal.push(curves(&dataset, opts.z, opts.variable)?.signal);
        labels.push(dataset.metadata.label.clone().unwrap_or_else(|| stem(path)));
    }
    let m = discrimination_matrix(&signal)?;
    write_matrix_csv(&out(dir, "discrimination.csv"), &labels, &m)?;
    let record = DiscriminationReport {
        schema_version: RECORD_SCHEMA_VERSION,
        sources: paths.iter().map(|p| p.display().to_string()).collect(),
        labels,
        z: opts.z,
        variable: opts.variable,
        probabilities: (0..m.rows()).map(|i| m.row(i).to_vec()).collect(),
    };
    write_json(
        &out(dir, "discrimination.json"),
        &Record::Discrimination(record),
    )
}

pub fn parse_grid(text: Option<&str>) -> CliResult<(ZGrid, Vec<f64>)> {
    let Some(text) = text else {
        return Ok((
            ZGrid {
                start: -10.0,
                stop: 0.0,
                step: 0.05,
            },
            default_z_grid(),
        ));
    };
    let parts: Vec<f64> = text
        .split(':')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("bad --grid `{text}`: {e}")))?;
    let [start, stop, step] = parts[..] else {
        return Err(CliError::Config(format!(
            "--grid must be start:stop:step, got `{text}`"
        )));
    };
    if !(step > 0.0 && stop >= start) {
        return Err(CliError::Config(format!(
            "--grid needs step > 0 and stop >= start, got `{text}`"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    let values = (0..=n).map(|i| start + step * i as f64).collect();
    Ok((ZGrid { start, stop, step }, values))
}

pub fn optimal_z(paths: &[PathBuf], dir: &Path, grid: Option<&str>) -> CliResult<()> {
    ensure_dir(dir)?;
    let (spec, values) = parse_grid(grid)?;
    for path in paths {
        let dataset = load(path)?;
        let origin = dataset
            .settings
            .iter()
            .find(|s| s.beta == 0.0)
            .ok_or_else(|| {
                CliError::Config(format!("{} has no setting with beta = 0", path.display()))
            })?;
        let result = search_z(&setting_data(origin)?, &values)?;
        let record = OptimalZReport {
            schema_version: RECORD_SCHEMA_VERSION,
            source: path.display().to_string(),
            grid: spec,
            setting: origin.index,
            z: result.z,
            estimate: result.estimate,
            significance: result.significance,
            nonnegative: result.nonnegative,
        };
        write_json(
            &out(dir, &format!("{}.optimal_z.json", stem(path))),
            &Record::OptimalZ(record),
        )?;
    }
    Ok(())
}
