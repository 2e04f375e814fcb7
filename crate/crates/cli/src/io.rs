//! Atomic file output and the JSON/CSV formats shared by all subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use daps::matrix::Matrix;
use daps::RadialCurve;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// One row of a curve file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub setting: usize,
    pub x: f64,
    pub mean: f64,
    pub sigma: f64,
    pub eps: f64,
    pub delta: f64,
}

pub fn curve_rows(curve: &RadialCurve) -> Vec<CurveRow> {
    curve
        .points()
        .iter()
        .map(|p| CurveRow {
            setting: p.setting,
            x: p.x,
            mean: p.y.mean,
            sigma: p.y.sigma,
            eps: p.y.eps,
            delta: p.y.delta,
        })
        .collect()
}

pub fn write_curve_csv(path: &Path, curve: &RadialCurve) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in curve_rows(curve) {
        w.serialize(row)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    write_atomic(path, &bytes)
}

#[cfg(test)]
pub fn read_curve_csv(path: &Path) -> CliResult<Vec<CurveRow>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .collect::<Result<Vec<CurveRow>, _>>()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn write_matrix_csv(path: &Path, labels: &[String], m: &Matrix<f64>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Numeric(e.to_string());
    w.write_record(std::iter::once("").chain(labels.iter().map(String::as_str)))
        .map_err(csv_err)?;
    for (i, label) in labels.iter().enumerate() {
        let row: Vec<String> = std::iter::once(label.clone())
            .chain(m.row(i).iter().map(|v| v.to_string()))
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// File stem used to label outputs derived from `path`.
pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

/// `scan.json` becomes `scan.kh2.json`.
pub fn with_herald_suffix(path: &Path, k_h: usize) -> PathBuf {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "json".into());
    path.with_file_name(format!("{}.kh{k_h}.{ext}", stem(path)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use daps::analysis::{CurvePoint, Variable};
    use daps::estimator::EstimateWithError;
    use daps::simulator::{scan_experiment, MultiplexConfig};
    use daps::{DetectorModel, FrontendConfig, ScanDataset, StateSpec};

    #[test]
    fn dataset_json_round_trip_is_exact() {
        let fe = FrontendConfig::from_transmittance(0.9, 20).unwrap();
        let det = DetectorModel::default().response_matrix(20).unwrap();
        let cfg = MultiplexConfig::new(1, fe, det).unwrap();
        let data = scan_experiment(
            &StateSpec::Fock { photons: 1 },
            &cfg,
            &[0.0, 0.7, 1.3],
            Some(5000),
            3,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.json");
        write_json(&path, &data).unwrap();
        let back: ScanDataset = read_json(&path).unwrap();
        assert_eq!(back, data);
        let first = &data.settings[1].exact.as_ref().unwrap().probs()[3];
        let again = &back.settings[1].exact.as_ref().unwrap().probs()[3];
        assert_eq!(first.to_bits(), again.to_bits());
    }

    #[test]
    fn curve_csv_round_trip_is_exact() {
        let points = (0..5)
            .map(|i| CurvePoint {
                setting: i,
                x: 0.1 * i as f64 + 1.0 / 3.0,
                y: EstimateWithError::new((i as f64).sin(), 1e-3 / 7.0, 2e-17, Some(10)),
            })
            .collect();
        let curve = RadialCurve::new(Variable::DetectorIndependent, points).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_curve_csv(&path, &curve).unwrap();
        assert_eq!(read_curve_csv(&path).unwrap(), curve_rows(&curve));
        let header = fs::read_to_string(&path).unwrap();
        assert!(header.starts_with("setting,x,mean,sigma,eps,delta\n"));
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn herald_suffix() {
        assert_eq!(
            with_herald_suffix(Path::new("a/scan.json"), 2),
            PathBuf::from("a/scan.kh2.json")
        );
        assert_eq!(stem(Path::new("a/scan.kh2.json")), "scan.kh2");
    }
}
