//! Test-suite manifest, right-hand-side construction, and per-matrix
//! statistics.

use crate::linalg::{cond_estimate, cond_exact, lu_factor, matvec_fused, DenseMatrix, DenseVector};
use crate::market::{MarketError, MatrixRecord};
use crate::posit::PositConfig;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable naming the directory that holds the downloaded
/// matrix files; entries whose `file` is relative resolve against it before
/// falling back to the manifest's own directory.
pub const MATRIX_DIR_ENV: &str = "POSIT_IR_MATRIX_DIR";

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("io: {0}")]
    Io(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// One matrix of the suite with its expected statistics, when known.
#[derive(Clone, Debug, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub file: String,
    /// Collection identifier; rows are ordered by it.
    pub id: Option<u32>,
    pub group: Option<String>,
    pub n: Option<usize>,
    pub nnz_pct: Option<f64>,
    pub max_abs: Option<f64>,
    pub min_abs: Option<f64>,
    pub cond: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct SuiteManifest {
    #[serde(rename = "matrix", default)]
    pub matrices: Vec<SuiteEntry>,
    #[serde(skip)]
    pub dir: PathBuf,
}

impl SuiteManifest {
    pub fn load(path: &Path) -> Result<SuiteManifest, SuiteError> {
        let text = std::fs::read_to_string(path).map_err(|e| SuiteError::Io(e.to_string()))?;
        let mut m: SuiteManifest =
            toml::from_str(&text).map_err(|e| SuiteError::Manifest(e.to_string()))?;
        m.dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        m.matrices.sort_by_key(|e| (e.id, e.name.clone()));
        Ok(m)
    }

    /// Where the entry's matrix file should be: `$POSIT_IR_MATRIX_DIR` first,
    /// then relative to the manifest.
    pub fn resolve(&self, entry: &SuiteEntry) -> PathBuf {
        let rel = Path::new(&entry.file);
        if rel.is_absolute() {
            return rel.to_path_buf();
        }
        if let Ok(dir) = std::env::var(MATRIX_DIR_ENV) {
            let candidate = Path::new(&dir).join(rel);
            if candidate.exists() {
                return candidate;
            }
        }
        self.dir.join(rel)
    }
}

/// `b = A * (1, 1, ..., 1)`, each entry one rounding of the exact row sum.
pub fn build_rhs(a: &DenseMatrix) -> DenseVector {
    matvec_fused(a, &DenseVector::ones(a.cols(), a.config()))
}

/// Loaded-matrix statistics in the shape of the suite table.
#[derive(Clone, Copy, Debug)]
pub struct MatrixStats {
    pub n: usize,
    pub nnz: usize,
    pub nnz_pct: f64,
    pub max_abs: f64,
    pub min_abs_nonzero: f64,
    pub cond: f64,
}

/// Statistics of a loaded matrix. The extreme magnitudes come from the exact
/// decimals in the file (the working format cannot hold the smallest suite
/// entries to full accuracy); the condition number is the high-precision
/// diagnostic when the order permits, the growth estimate otherwise.
pub fn matrix_stats(record: &MatrixRecord, dense: &DenseMatrix, cond_cap: usize) -> MatrixStats {
    let mut max_abs = 0.0f64;
    let mut min_abs = f64::INFINITY;
    for (_, _, text) in &record.entries {
        let v = text.parse::<f64>().unwrap_or(0.0).abs();
        if v == 0.0 {
            continue;
        }
        max_abs = max_abs.max(v);
        min_abs = min_abs.min(v);
    }
    if min_abs.is_infinite() {
        min_abs = 0.0;
    }
    let nnz = dense.entries().filter(|(_, _, v)| !v.is_zero()).count();
    let n = dense.rows();
    let cond = match cond_exact(dense, cond_cap) {
        Ok(c) => c,
        Err(_) => lu_factor(dense)
            .and_then(|f| cond_estimate(&f, dense))
            .map(|v| v.to_f64())
            .unwrap_or(f64::NAN),
    };
    MatrixStats {
        n,
        nnz,
        nnz_pct: 100.0 * nnz as f64 / (n as f64 * dense.cols() as f64),
        max_abs,
        min_abs_nonzero: min_abs,
        cond,
    }
}

/// Loads and densifies one suite entry.
pub fn load_matrix(
    manifest: &SuiteManifest,
    entry: &SuiteEntry,
    cfg: PositConfig,
) -> Result<(MatrixRecord, DenseMatrix), SuiteError> {
    let path = manifest.resolve(entry);
    let record = MatrixRecord::read_file(&path)?;
    let dense = record.to_dense(cfg);
    Ok((record, dense))
}

/// Relative mismatch of a measured statistic against the manifest's
/// expectation, for "matches to 3 significant figures" checks.
pub fn rel_err(measured: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        return measured.abs();
    }
    (measured - expected).abs() / expected.abs()
}
