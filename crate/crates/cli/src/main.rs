//! Command-line front end: inspect posit patterns, print format properties,
//! solve a single system, or run the benchmark over a manifest.
//!
//! Exit codes: 0 success/converged, 2 diverged, 3 singular matrix,
//! 4 degenerate scaling, 5 unreadable or malformed input, 64 usage error.

use clap::{Parser, Subcommand};
use posit_ir::bench::{render_csv, render_markdown, run_bench, BenchConfig};
use posit_ir::cast::{CastError, Ratio64};
use posit_ir::ir::{forward_error, ir_solve, CastMode, SolveError, SolveSettings};
use posit_ir::linalg::LinalgError;
use posit_ir::market::MatrixRecord;
use posit_ir::posit::{format_properties, Decoded, PositConfig, PositValue};
use posit_ir::suite::{build_rhs, SuiteManifest, MATRIX_DIR_ENV};
use posit_ir::DenseVector;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_DIVERGED: u8 = 2;
const EXIT_SINGULAR: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;
const EXIT_INPUT: u8 = 5;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "posit-ir",
    about = "Posit arithmetic tools and a mixed-precision iterative-refinement solver",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode a posit bit pattern into its fields and value.
    Decode {
        /// Bit pattern in hex, e.g. 0x02EE.
        bits: String,
        /// Width in bits (8, 16, 24, 32, or 64).
        nbits: u32,
    },
    /// Print the derived constants of a standard posit format.
    Props {
        /// Width in bits (8, 16, 24, 32, or 64).
        nbits: u32,
    },
    /// Solve one Matrix Market system by mixed-precision refinement.
    Solve {
        /// Path to a Matrix Market coordinate file.
        matrix: PathBuf,
        /// Conversion strategy: round_clamp, scale_round, or equilibrate.
        #[arg(long, default_value = "equilibrate")]
        mode: String,
        /// Scale factor as a fraction or decimal, e.g. 1/16 or 0.75.
        #[arg(long, default_value = "1/16")]
        mu: String,
        /// Convergence tolerance.
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        /// Snap equilibration scales to powers of two.
        #[arg(long)]
        pow2: bool,
        /// Low-precision width for the factorization.
        #[arg(long, default_value_t = 16)]
        low: u32,
    },
    /// Run the benchmark over a manifest and write tables plus CSV.
    Bench {
        /// Path to a TOML manifest listing the matrices.
        manifest: PathBuf,
        /// Comma-separated modes to run.
        #[arg(long, default_value = "round_clamp,scale_round,equilibrate")]
        modes: String,
        /// Output directory for bench.md and bench.csv (defaults to stdout
        /// only).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "1/16")]
        mu: String,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        #[arg(long)]
        pow2: bool,
        #[arg(long, default_value_t = 16)]
        low: u32,
        /// Write zeros in the CSV seconds column so outputs diff cleanly.
        #[arg(long)]
        no_timing: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Keep clap's rendering but reserve exit code 2 for divergence.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match cli.command {
        Command::Decode { bits, nbits } => cmd_decode(&bits, nbits),
        Command::Props { nbits } => cmd_props(nbits),
        Command::Solve { matrix, mode, mu, eps, max_iter, pow2, low } => {
            cmd_solve(&matrix, &mode, &mu, eps, max_iter, pow2, low)
        }
        Command::Bench { manifest, modes, out, mu, eps, max_iter, pow2, low, no_timing } => {
            cmd_bench(&manifest, &modes, out.as_deref(), &mu, eps, max_iter, pow2, low, no_timing)
        }
    }
}

fn config_for(nbits: u32) -> Result<PositConfig, String> {
    if (2..=64).contains(&nbits) {
        Ok(PositConfig::standard(nbits))
    } else {
        Err(format!("unsupported width {nbits}; expected 2..=64"))
    }
}

fn cmd_decode(bits: &str, nbits: u32) -> ExitCode {
    let cfg = match config_for(nbits) {
        Ok(c) => c,
        Err(e) => return usage(&e),
    };
    let p = match PositValue::from_hex(bits, cfg) {
        Ok(p) => p,
        Err(e) => return usage(&e),
    };
    println!("pattern : 0x{}", p.to_hex());
    let fields = p.fields();
    println!("fields  : {}", fields.pipes());
    match p.decode() {
        Decoded::Zero => println!("value   : 0"),
        Decoded::NaR => println!("value   : NaR"),
        Decoded::Finite { negative, mantissa, exponent } => {
            println!(
                "regime  : k = {}, exponent e = {}, fraction bits = {}",
                fields.k,
                fields.e,
                fields.fraction.len()
            );
            let sign = if negative { "-" } else { "" };
            println!("exact   : {sign}{mantissa} * 2^{exponent}");
            println!("value   : {:.10e}", p.to_f64());
        }
    }
    ExitCode::from(EXIT_OK)
}

fn cmd_props(nbits: u32) -> ExitCode {
    let cfg = match config_for(nbits) {
        Ok(c) => c,
        Err(e) => return usage(&e),
    };
    let p = format_properties(cfg);
    println!("posit<{}, {}>", p.nbits, p.es);
    println!("minpos                  : 2^{} = {:.6e}", p.minpos_exp2, p.minpos());
    println!("maxpos                  : 2^{} = {:.6e}", p.maxpos_exp2, p.maxpos());
    println!(
        "unit roundoff           : 2^{} = {:.6e}",
        p.unit_roundoff_exp2,
        p.unit_roundoff()
    );
    println!("max fraction bits       : {}", p.max_fraction_bits);
    println!("max consecutive integer : {}", p.max_consecutive_int);
    println!("quire width             : {} bits", p.quire_bits);
    println!("quire sum limit         : 2^{}", p.quire_sum_limit_exp2);
    println!("values in [0, 1]        : {}", p.unit_interval_count);
    ExitCode::from(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    matrix: &std::path::Path,
    mode: &str,
    mu: &str,
    eps: f64,
    max_iter: usize,
    pow2: bool,
    low: u32,
) -> ExitCode {
    let Some(mode) = CastMode::parse(mode) else {
        return usage(&format!("unknown mode '{mode}'"));
    };
    let mu = match Ratio64::parse(mu) {
        Ok(m) => m,
        Err(_) => return usage(&format!("bad scale factor '{mu}'")),
    };
    let low = match config_for(low) {
        Ok(c) => c,
        Err(e) => return usage(&e),
    };
    let record = match MatrixRecord::read_file(matrix) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let s = SolveSettings {
        epsilon: eps,
        max_iterations: max_iter,
        low,
        mode,
        mu,
        power_of_two: pow2,
        ..SolveSettings::default()
    };
    let a = record.to_dense(s.working);
    if !a.is_square() {
        eprintln!("error: {} is {}x{}, need square", record.name, a.rows(), a.cols());
        return ExitCode::from(EXIT_INPUT);
    }
    let b = build_rhs(&a);
    match ir_solve(&a, &b, &s) {
        Ok((x, mut report)) => {
            let ones = DenseVector::ones(x.len(), x.config());
            report.forward_error = Some(forward_error(&x, &ones));
            println!("matrix          : {} (n = {})", record.name, a.rows());
            println!("mode            : {} (mu = {})", mode.name(), mu);
            println!("converged       : {}", report.converged);
            println!("iterations      : {}", report.iterations);
            println!("cond estimate   : {:.3e}", report.cond_estimate_scaled);
            if let Some(c) = &report.cast {
                println!(
                    "cast            : {} -> {} distinct values, {} high / {} low clamps",
                    c.unique_before, c.unique_after, c.clamped_high, c.clamped_low
                );
            }
            println!("forward error   : {:.3e}", report.forward_error.unwrap());
            println!("residual norms  :");
            for (i, (r, rhs)) in report
                .residual_norms
                .iter()
                .zip(&report.criterion_rhs)
                .enumerate()
            {
                println!("  iter {i:>4}: |r| = {r:.6e}  threshold = {rhs:.6e}");
            }
            if report.converged {
                ExitCode::from(EXIT_OK)
            } else {
                println!("did not converge within {max_iter} iterations");
                ExitCode::from(EXIT_DIVERGED)
            }
        }
        Err(SolveError::Linalg(LinalgError::Singular { column })) => {
            eprintln!("error: singular matrix (zero pivot in column {column})");
            ExitCode::from(EXIT_SINGULAR)
        }
        Err(SolveError::Cast(CastError::DegenerateScaling { axis, index })) => {
            eprintln!("error: cannot equilibrate, {axis} {index} is entirely zero");
            ExitCode::from(EXIT_DEGENERATE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    manifest_path: &std::path::Path,
    modes: &str,
    out: Option<&std::path::Path>,
    mu: &str,
    eps: f64,
    max_iter: usize,
    pow2: bool,
    low: u32,
    no_timing: bool,
) -> ExitCode {
    let mut parsed_modes = Vec::new();
    for word in modes.split(',') {
        match CastMode::parse(word) {
            Some(m) => parsed_modes.push(m),
            None => return usage(&format!("unknown mode '{word}'")),
        }
    }
    let mu = match Ratio64::parse(mu) {
        Ok(m) => m,
        Err(_) => return usage(&format!("bad scale factor '{mu}'")),
    };
    let low = match config_for(low) {
        Ok(c) => c,
        Err(e) => return usage(&e),
    };
    let manifest = match SuiteManifest::load(manifest_path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let cfg = BenchConfig {
        modes: parsed_modes,
        epsilon: eps,
        max_iterations: max_iter,
        mu,
        power_of_two: pow2,
        low,
        timing: !no_timing,
        ..BenchConfig::default()
    };
    eprintln!(
        "running {} matrices x {} modes (matrix dir: {})",
        manifest.matrices.len(),
        cfg.modes.len(),
        std::env::var(MATRIX_DIR_ENV).unwrap_or_else(|_| manifest.dir.display().to_string()),
    );
    let report = run_bench(&manifest, &cfg);
    for (name, reason) in &report.skipped {
        eprintln!("warning: skipping {name}: {reason}");
    }
    let md = render_markdown(&report);
    let csv = render_csv(&report, cfg.timing);
    println!("{md}");
    if let Some(dir) = out {
        if let Err(e) = std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(dir.join("bench.md"), &md))
            .and_then(|_| std::fs::write(dir.join("bench.csv"), &csv))
        {
            eprintln!("error: writing outputs: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
        eprintln!("wrote {}/bench.md and bench.csv", dir.display());
    }
    ExitCode::from(EXIT_OK)
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}
