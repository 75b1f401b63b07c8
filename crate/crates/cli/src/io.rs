//! On-disk formats: datasets as a JSON manifest plus a CSV payload, QPCA
//! results as a JSON summary plus per-component CSVs. All numbers are
//! written as decimal text with 17 significant digits, enough to round-trip
//! an f64 bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use qpca::{Dataset, QpcaResult, Signal};
use serde::{Deserialize, Serialize};

/// File-level failure, carrying the exit code the CLI should use.
#[derive(Debug)]
pub struct IoError {
    pub message: String,
    pub exit_code: i32,
}

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for IoError {}

fn data_err(message: impl Into<String>) -> IoError {
    IoError {
        message: message.into(),
        exit_code: 2,
    }
}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        data_err(e.to_string())
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub m: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_hint: Option<f64>,
    pub description: String,
    pub seed: u64,
}

/// A dataset lives at `<base>.json` (manifest) + `<base>.csv` (payload).
pub fn dataset_paths(base: &Path) -> (PathBuf, PathBuf) {
    let stem = base.with_extension("");
    (stem.with_extension("json"), stem.with_extension("csv"))
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_dataset(base: &Path, data: &Dataset, manifest: &Manifest) -> Result<(), IoError> {
    let (json_path, csv_path) = dataset_paths(base);
    if manifest.m != data.num_vectors() || manifest.n != data.signal_len() {
        return Err(data_err("manifest dimensions do not match the dataset"));
    }
    fs::write(&json_path, serde_json::to_string_pretty(manifest).unwrap())?;
    let mut out = String::new();
    for v in data.vectors() {
        let mut first = true;
        for x in v.values() {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{},{}", fmt_f64(x.re), fmt_f64(x.im));
        }
        out.push('\n');
    }
    fs::write(&csv_path, out)?;
    Ok(())
}

pub fn read_dataset(base: &Path) -> Result<(Dataset, Manifest), IoError> {
    let (json_path, csv_path) = dataset_paths(base);
    let manifest_text = fs::read_to_string(&json_path)
        .map_err(|e| data_err(format!("{}: {e}", json_path.display())))?;
    let manifest: Manifest = serde_json::from_str(&manifest_text)
        .map_err(|e| data_err(format!("{}: {e}", json_path.display())))?;
    let payload = fs::read_to_string(&csv_path)
        .map_err(|e| data_err(format!("{}: {e}", csv_path.display())))?;

    let mut vectors = Vec::with_capacity(manifest.m);
    for (lineno, line) in payload.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 * manifest.n {
            return Err(data_err(format!(
                "{}: line {}: expected {} columns, found {}",
                csv_path.display(),
                lineno + 1,
                2 * manifest.n,
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(manifest.n);
        for pair in fields.chunks(2) {
            let parse = |s: &str| -> Result<f64, IoError> {
                s.trim().parse::<f64>().map_err(|e| {
                    data_err(format!(
                        "{}: line {}: bad number {s:?}: {e}",
                        csv_path.display(),
                        lineno + 1
                    ))
                })
            };
            row.push(C64::new(parse(pair[0])?, parse(pair[1])?));
        }
        vectors.push(Signal::new(row).map_err(|e| data_err(e.to_string()))?);
    }
    if vectors.len() != manifest.m {
        return Err(data_err(format!(
            "{}: expected {} rows, found {}",
            csv_path.display(),
            manifest.m,
            vectors.len()
        )));
    }
    let data = Dataset::new(vectors).map_err(|e| data_err(e.to_string()))?;
    Ok((data, manifest))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultSummary {
    #[serde(rename = "N")]
    pub n_cosets: usize,
    pub s: usize,
    pub lambdas: Vec<f64>,
    pub coset_eigenvalues: Vec<Vec<f64>>,
}

/// Write a QPCA result: `<base>.json` summary plus, per component `i`,
/// `<base>_component_<i>.csv` (index,re,im,abs) and
/// `<base>_spectrum_<i>.csv` (k,re,im,abs).
pub fn write_result(base: &Path, result: &QpcaResult) -> Result<(), IoError> {
    let stem = base.with_extension("");
    let summary = ResultSummary {
        n_cosets: result.n_cosets,
        s: result.oversampling,
        lambdas: result.lambdas.clone(),
        coset_eigenvalues: result.coset_eigenvalues.clone(),
    };
    fs::write(
        stem.with_extension("json"),
        serde_json::to_string_pretty(&summary).unwrap(),
    )?;
    for (i, q) in result.components.iter().enumerate() {
        let name = |kind: &str| {
            let mut p = stem.clone();
            p.set_file_name(format!(
                "{}_{kind}_{}.csv",
                stem.file_name().unwrap_or_default().to_string_lossy(),
                i + 1
            ));
            p
        };
        write_complex_csv(&name("component"), "index", q.values())?;
        write_complex_csv(&name("spectrum"), "k", q.dft().values())?;
    }
    Ok(())
}

/// Plot-ready complex series: header + one row per sample.
pub fn write_complex_csv(path: &Path, index_name: &str, x: &[C64]) -> Result<(), IoError> {
    let mut out = format!("{index_name},re,im,abs\n");
    for (k, v) in x.iter().enumerate() {
        let _ = writeln!(
            out,
            "{k},{},{},{}",
            fmt_f64(v.re),
            fmt_f64(v.im),
            fmt_f64(v.norm())
        );
    }
    fs::write(path, out)?;
    Ok(())
}
