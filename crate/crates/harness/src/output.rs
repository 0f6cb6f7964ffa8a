//! Files of a run directory: ledger.csv, manifest.json, report.json, snapshots/.

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::report::ExperimentReport;
use fdwave_core::{EnergyLedger, LedgerManifest, State};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// C's `%.17g`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

/// Writes `ledger.csv` and `manifest.json` into `dir`.
pub fn write_ledger(dir: &Path, ledger: &EnergyLedger) -> Result<()> {
    create_dir(dir)?;
    let manifest = ledger.manifest();
    let path = dir.join("ledger.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| HarnessError::io(&path, e.into()))?;
    let csv_err = |e: csv::Error| HarnessError::io(&path, e.into());
    w.write_record(manifest.columns.iter().map(|c| c.name.as_str())).map_err(csv_err)?;
    for i in 0..ledger.rows.len() {
        w.write_record(ledger.row_values(i).into_iter().map(format_g17)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;
    write_json(&dir.join("manifest.json"), &manifest)
}

/// Header and numeric rows of a ledger CSV.
pub fn read_ledger_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::io(path, e.into()))?;
    let header = r
        .headers()
        .map_err(|e| HarnessError::io(path, e.into()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| HarnessError::io(path, e.into()))?;
        let row: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| HarnessError::Serialize(format!("{}: {e}", path.display())))?);
    }
    Ok((header, rows))
}

pub fn read_manifest(path: &Path) -> Result<LedgerManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<()> {
    write_json(&dir.join("report.json"), report)
}

#[derive(Serialize)]
struct SnapshotMeta<'a> {
    dim: usize,
    length: f64,
    modes: usize,
    pad_factor: usize,
    t: f64,
    physics_hash: String,
    data: &'a str,
}

#[derive(Serialize)]
struct SnapshotData<'a> {
    t: f64,
    u: &'a [f64],
    v: &'a [f64],
}

/// Hash of the physics block, identifying the equation a snapshot belongs to.
pub fn physics_hash(config: &RunConfig) -> String {
    let text = serde_json::to_string(&config.physics).expect("physics block is serializable");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Coefficient dump `snapshots/<label>.json` with sidecar `<label>.meta.json`.
pub fn write_snapshot(dir: &Path, label: &str, state: &State<f64>, config: &RunConfig) -> Result<PathBuf> {
    let snaps = dir.join("snapshots");
    let data_name = format!("{label}.json");
    write_json(
        &snaps.join(&data_name),
        &SnapshotData {
            t: state.t,
            u: state.u.coeffs(),
            v: state.v.coeffs(),
        },
    )?;
    let d = state.u.domain();
    let meta = snaps.join(format!("{label}.meta.json"));
    write_json(
        &meta,
        &SnapshotMeta {
            dim: d.dim(),
            length: d.length(),
            modes: d.modes(),
            pad_factor: d.pad_factor(),
            t: state.t,
            physics_hash: physics_hash(config),
            data: &data_name,
        },
    )?;
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_c_printf() {
        // reference strings from C printf("%.17g")
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (123456.789, "123456.789"),
            (1e17, "1e+17"),
            (1e16, "10000000000000000"),
            (0.0001, "0.0001"),
            (std::f64::consts::PI, "3.1415926535897931"),
            (6.02214076e23, "6.0221407599999999e+23"),
            (5e-324, "4.9406564584124654e-324"),
        ];
        for (x, expected) in cases {
            assert_eq!(format_g17(x), expected, "{x:e}");
        }
    }

    #[test]
    fn g17_round_trips() {
        let mut x = 1.234_567_890_123_456_7e-300;
        while x < 1e300 {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
            assert_eq!(format_g17(-x / 3.0).parse::<f64>().unwrap(), -x / 3.0);
            x *= 7.77;
        }
    }
}
