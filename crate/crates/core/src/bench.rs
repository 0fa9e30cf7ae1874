//! Benchmark harness: runs the refinement solver over a manifest of
//! matrices and renders the iteration, condition-number and distinct-value
//! tables plus a machine-readable CSV.

use crate::cast::{self, Ratio64};
use crate::ir::{forward_error, ir_solve, CastMode, SolveError, SolveSettings};
use crate::linalg::{cond_exact, DenseVector, LinalgError};
use crate::posit::{PositConfig, P16, P32};
use crate::suite::{build_rhs, SuiteManifest};
use crate::{CastError, DenseMatrix};
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub modes: Vec<CastMode>,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub mu: Ratio64,
    pub power_of_two: bool,
    pub low: PositConfig,
    pub working: PositConfig,
    pub cond_cap: usize,
    /// When false the CSV's seconds column is written as zero so that two
    /// runs on identical inputs are byte-identical.
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            modes: vec![CastMode::RoundClamp, CastMode::ScaleRound, CastMode::Equilibrate],
            epsilon: 1e-8,
            max_iterations: 1000,
            mu: Ratio64::new(1, 16).unwrap(),
            power_of_two: false,
            low: P16,
            working: P32,
            cond_cap: 512,
            timing: true,
        }
    }
}

impl BenchConfig {
    fn settings(&self, mode: CastMode) -> SolveSettings {
        SolveSettings {
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            low: self.low,
            working: self.working,
            mode,
            mu: self.mu,
            power_of_two: self.power_of_two,
            growth_abort: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    Diverged,
    Singular,
    DegenerateScaling,
    Failed,
}

/// One (matrix, mode) outcome.
#[derive(Clone, Debug)]
pub struct BenchCell {
    pub mode: CastMode,
    pub status: RunStatus,
    pub iterations: Option<usize>,
    pub kappa_scaled: f64,
    pub unique_after: Option<usize>,
    pub forward_error: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub id: Option<u32>,
    pub name: String,
    pub n: usize,
    pub kappa: f64,
    pub unique_before: usize,
    pub cells: Vec<BenchCell>,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub mu: Ratio64,
    pub modes: Vec<CastMode>,
    pub rows: Vec<BenchRow>,
    /// (name, reason) for manifest entries that could not be run.
    pub skipped: Vec<(String, String)>,
}

/// Runs every manifest entry under every requested mode. Entries whose file
/// is missing or unreadable are skipped with a reason, never fatal.
pub fn run_bench(manifest: &SuiteManifest, cfg: &BenchConfig) -> BenchReport {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for entry in &manifest.matrices {
        let path = manifest.resolve(entry);
        if !path.exists() {
            skipped.push((entry.name.clone(), format!("missing file {}", path.display())));
            continue;
        }
        let record = match crate::market::MatrixRecord::read_file(&path) {
            Ok(r) => r,
            Err(e) => {
                skipped.push((entry.name.clone(), e.to_string()));
                continue;
            }
        };
        let dense = record.to_dense(cfg.working);
        if !dense.is_square() {
            skipped.push((entry.name.clone(), "not square".into()));
            continue;
        }
        let b = build_rhs(&dense);
        let kappa = cond_exact(&dense, cfg.cond_cap).unwrap_or(f64::NAN);
        let unique_before = cast::unique_count(&dense);
        let cells = cfg
            .modes
            .iter()
            .map(|&mode| run_cell(&dense, &b, mode, cfg))
            .collect();
        rows.push(BenchRow {
            id: entry.id,
            name: entry.name.clone(),
            n: dense.rows(),
            kappa,
            unique_before,
            cells,
        });
    }
    BenchReport { mu: cfg.mu, modes: cfg.modes.clone(), rows, skipped }
}

fn run_cell(a: &DenseMatrix, b: &DenseVector, mode: CastMode, cfg: &BenchConfig) -> BenchCell {
    // Cast once more outside the solver to get the low matrix for the
    // scaled condition number and the distinct-value count.
    let cast_out = match mode {
        CastMode::RoundClamp => cast::round_clamp(a, cfg.low).map(|(low, rep)| (low, rep)),
        CastMode::ScaleRound => cast::scale_round(a, cfg.mu, cfg.low).map(|(low, _, rep)| (low, rep)),
        CastMode::Equilibrate => {
            cast::equilibrate(a, cfg.mu, cfg.power_of_two, cfg.low).map(|(low, _, rep)| (low, rep))
        }
    };
    let (kappa_scaled, unique_after) = match &cast_out {
        Ok((low, rep)) => (
            cond_exact(&low.widen(cfg.working), cfg.cond_cap).unwrap_or(f64::NAN),
            Some(rep.unique_after),
        ),
        Err(_) => (f64::NAN, None),
    };

    let start = Instant::now();
    let solved = ir_solve(a, b, &cfg.settings(mode));
    let seconds = start.elapsed().as_secs_f64();
    match solved {
        Ok((x, report)) => {
            let ones = DenseVector::ones(x.len(), x.config());
            BenchCell {
                mode,
                status: if report.converged { RunStatus::Converged } else { RunStatus::Diverged },
                iterations: Some(report.iterations),
                kappa_scaled,
                unique_after,
                forward_error: Some(forward_error(&x, &ones)),
                seconds,
            }
        }
        Err(e) => BenchCell {
            mode,
            status: match e {
                SolveError::Linalg(LinalgError::Singular { .. }) => RunStatus::Singular,
                SolveError::Cast(CastError::DegenerateScaling { .. }) => {
                    RunStatus::DegenerateScaling
                }
                _ => RunStatus::Failed,
            },
            iterations: None,
            kappa_scaled,
            unique_after,
            forward_error: None,
            seconds,
        },
    }
}

fn cell_iterations(c: &BenchCell) -> String {
    match c.status {
        RunStatus::Converged => c.iterations.unwrap_or(0).to_string(),
        RunStatus::Diverged => "inf".into(),
        RunStatus::Singular => "singular".into(),
        RunStatus::DegenerateScaling => "degenerate".into(),
        RunStatus::Failed => "failed".into(),
    }
}

/// Three tables: iterations per mode, condition numbers of the cast
/// matrices, and distinct nonzero values before/after each cast.
pub fn render_markdown(r: &BenchReport) -> String {
    let mut out = String::new();
    let mode_heads: Vec<&str> = r.modes.iter().map(|m| m.name()).collect();

    out.push_str(&format!("## Iterations (mu = {})\n\n", r.mu));
    out.push_str(&format!("| Matrix | {} |\n", mode_heads.join(" | ")));
    out.push_str(&format!("|---|{}\n", "---|".repeat(r.modes.len())));
    for row in &r.rows {
        let cells: Vec<String> = row.cells.iter().map(cell_iterations).collect();
        out.push_str(&format!("| {} | {} |\n", row.name, cells.join(" | ")));
    }

    out.push_str("\n## Condition numbers after casting\n\n");
    out.push_str(&format!("| Matrix | kappa(A) | {} |\n", mode_heads.join(" | ")));
    out.push_str(&format!("|---|---|{}\n", "---|".repeat(r.modes.len())));
    for row in &r.rows {
        let cells: Vec<String> = row
            .cells
            .iter()
            .map(|c| format_kappa(c.kappa_scaled))
            .collect();
        out.push_str(&format!(
            "| {} | {} | {} |\n",
            row.name,
            format_kappa(row.kappa),
            cells.join(" | ")
        ));
    }

    out.push_str("\n## Distinct nonzero values after casting\n\n");
    out.push_str(&format!("| Matrix (before) | {} |\n", mode_heads.join(" | ")));
    out.push_str(&format!("|---|{}\n", "---|".repeat(r.modes.len())));
    for row in &r.rows {
        let cells: Vec<String> = row
            .cells
            .iter()
            .map(|c| c.unique_after.map_or("-".into(), |u| u.to_string()))
            .collect();
        out.push_str(&format!(
            "| {} ({}) | {} |\n",
            row.name, row.unique_before, cells.join(" | ")
        ));
    }

    if !r.skipped.is_empty() {
        out.push_str("\nSkipped:\n");
        for (name, reason) in &r.skipped {
            out.push_str(&format!("- {name}: {reason}\n"));
        }
    }
    out
}

fn format_kappa(k: f64) -> String {
    if k.is_nan() {
        "-".into()
    } else {
        format!("{k:.2e}")
    }
}

/// Fixed schema:
/// `matrix,name,mode,mu,iterations,converged,kappa_scaled,unique_before,unique_after,seconds`.
pub fn render_csv(r: &BenchReport, timing: bool) -> String {
    let mut out = String::from(
        "matrix,name,mode,mu,iterations,converged,kappa_scaled,unique_before,unique_after,seconds\n",
    );
    for row in &r.rows {
        for c in &row.cells {
            let id = row.id.map_or(String::new(), |i| i.to_string());
            let secs = if timing { c.seconds } else { 0.0 };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{:.3}\n",
                id,
                row.name,
                c.mode.name(),
                r.mu,
                cell_iterations(c),
                c.status == RunStatus::Converged,
                format_kappa(c.kappa_scaled),
                row.unique_before,
                c.unique_after.map_or(String::new(), |u| u.to_string()),
                secs,
            ));
        }
    }
    out
}
