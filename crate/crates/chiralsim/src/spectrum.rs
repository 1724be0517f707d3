//! Sampled spectra and their CSV/JSON serialization.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Direction;
use crate::error::{Error, Result};

/// What a spectrum's values represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumKind {
    Transmission,
    Reflection,
    DeltaT,
    DeltaR,
    Pl,
}

/// Provenance metadata stored in the JSON sidecar next to each CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SpectrumMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<SpectrumKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
}

/// A sampled function of laser detuning (μeV) with units metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    detunings: Vec<f64>,
    values: Vec<f64>,
    pub metadata: SpectrumMetadata,
}

impl Spectrum {
    /// Build a validated spectrum: equal lengths, strictly increasing grid,
    /// finite values.
    pub fn new(detunings: Vec<f64>, values: Vec<f64>, metadata: SpectrumMetadata) -> Result<Self> {
        if detunings.len() != values.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = detunings.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneGrid(i + 1));
        }
        if let Some(i) = detunings
            .iter()
            .chain(values.iter())
            .position(|v| !v.is_finite())
        {
            return Err(Error::NonFiniteValue(i % detunings.len().max(1)));
        }
        Ok(Spectrum { detunings, values, metadata })
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn same_grid(&self, other: &Spectrum) -> bool {
        self.detunings == other.detunings
    }

    /// Indices whose detuning lies in [lo, hi].
    pub fn window_indices(&self, lo: f64, hi: f64) -> Vec<usize> {
        self.detunings
            .iter()
            .enumerate()
            .filter(|(_, d)| (lo..=hi).contains(d))
            .map(|(i, _)| i)
            .collect()
    }

    /// Write `detuning_ueV,value` CSV plus a `.meta.json` sidecar. Both files
    /// are written atomically (temp file + rename). Values are formatted with
    /// 17 significant digits so re-runs are byte-identical.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut body = String::from("detuning_ueV,value\n");
        for (d, v) in self.detunings.iter().zip(&self.values) {
            body.push_str(&format!("{d:.16e},{v:.16e}\n"));
        }
        write_atomic(path, body.as_bytes())?;
        let sidecar = sidecar_path(path);
        let meta = serde_json::to_string_pretty(&self.metadata)?;
        write_atomic(&sidecar, meta.as_bytes())?;
        Ok(())
    }

    /// Read a spectrum written by [`Spectrum::write_csv`] (or any CSV with the
    /// same header). Metadata comes from the sidecar when present.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut detunings = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 {
                if line.trim() != "detuning_ueV,value" {
                    return Err(Error::Csv { row: 1, msg: format!("unexpected header {line:?}") });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let row = idx + 1;
            let mut fields = line.split(',');
            let (d, v) = match (fields.next(), fields.next(), fields.next()) {
                (Some(d), Some(v), None) => (d, v),
                _ => return Err(Error::Csv { row, msg: "expected two comma-separated fields".into() }),
            };
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|e| Error::Csv { row, msg: format!("bad detuning: {e}") })?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| Error::Csv { row, msg: format!("bad value: {e}") })?;
            if !d.is_finite() || !v.is_finite() {
                return Err(Error::NonFiniteValue(row));
            }
            if let Some(&last) = detunings.last() {
                if d <= last {
                    return Err(Error::NonMonotoneGrid(row));
                }
            }
            detunings.push(d);
            values.push(v);
        }
        if detunings.len() < 3 {
            return Err(Error::TooFewPoints(detunings.len()));
        }
        let sidecar = sidecar_path(path);
        let metadata = if sidecar.exists() {
            serde_json::from_str(&fs::read_to_string(&sidecar)?)?
        } else {
            SpectrumMetadata::default()
        };
        Spectrum::new(detunings, values, metadata)
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".meta.json");
    path.with_file_name(name)
}

/// Write via a temp file in the target directory, then rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Spectrum {
        Spectrum::new(
            vec![-1.0, 0.0, 2.5, 7.0],
            vec![0.9, 0.5, 0.95, 1.0],
            SpectrumMetadata {
                kind: Some(SpectrumKind::Transmission),
                direction: Some(Direction::LeftToRight),
                power_w: Some(1e-12),
                config_digest: Some("abc".into()),
            },
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let s = sample();
        s.write_csv(&path).unwrap();
        let back = Spectrum::read_csv(&path).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn rejects_non_monotone_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "detuning_ueV,value\n0.0,1.0\n2.0,1.0\n1.0,1.0\n").unwrap();
        match Spectrum::read_csv(&path) {
            Err(Error::NonMonotoneGrid(row)) => assert_eq!(row, 4),
            other => panic!("expected grid error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_two_point_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.csv");
        fs::write(&path, "detuning_ueV,value\n0.0,1.0\n1.0,1.0\n").unwrap();
        assert!(matches!(Spectrum::read_csv(&path), Err(Error::TooFewPoints(2))));
    }

    #[test]
    fn rejects_nan_with_row_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nan.csv");
        fs::write(&path, "detuning_ueV,value\n0.0,1.0\n1.0,NaN\n2.0,1.0\n").unwrap();
        assert!(matches!(Spectrum::read_csv(&path), Err(Error::NonFiniteValue(3))));
    }

    #[test]
    fn malformed_row_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "detuning_ueV,value\n0.0,1.0\nhello\n").unwrap();
        assert!(matches!(Spectrum::read_csv(&path), Err(Error::Csv { row: 3, .. })));
    }
}
