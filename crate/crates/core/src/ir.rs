//! Mixed-precision iterative refinement.
//!
//! The system is cast to low precision by one of the three strategies, the
//! O(n^3) factorization runs there once, and every later step runs in working
//! precision: residuals are fused through the quire (exact until one rounding
//! per entry) and corrections reuse the widened low-precision factors.

use crate::cast::{
    self, CastError, CastReport, Ratio64, ScaleMode, ScalingRecord,
};
use crate::linalg::{
    cond_estimate, inf_norm_matrix, inf_norm_vector, lu_factor, lu_solve, residual_fused,
    DenseMatrix, DenseVector, LinalgError,
};
use crate::posit::{encode_rational, PositConfig, PositValue, P16, P32};
use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Cast(#[from] CastError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Which conversion strategy feeds the low-precision factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CastMode {
    RoundClamp,
    ScaleRound,
    Equilibrate,
}

impl CastMode {
    pub fn name(&self) -> &'static str {
        match self {
            CastMode::RoundClamp => "round_clamp",
            CastMode::ScaleRound => "scale_round",
            CastMode::Equilibrate => "equilibrate",
        }
    }

    pub fn parse(s: &str) -> Option<CastMode> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "round_clamp" => Some(CastMode::RoundClamp),
            "scale_round" => Some(CastMode::ScaleRound),
            "equilibrate" => Some(CastMode::Equilibrate),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveSettings {
    /// Convergence tolerance of the residual criterion.
    pub epsilon: f64,
    /// Correction-step budget; exhausting it reports divergence.
    pub max_iterations: usize,
    pub low: PositConfig,
    pub working: PositConfig,
    pub mode: CastMode,
    pub mu: Ratio64,
    pub power_of_two: bool,
    /// Abort early when the residual norm grows tenfold over five
    /// consecutive iterations. Off by default.
    pub growth_abort: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            epsilon: 1e-8,
            max_iterations: 1000,
            low: P16,
            working: P32,
            mode: CastMode::Equilibrate,
            mu: Ratio64::new(1, 16).unwrap(),
            power_of_two: false,
            growth_abort: false,
        }
    }
}

/// Outcome of a refinement run.
#[derive(Clone, Debug)]
pub struct RefinementReport {
    pub converged: bool,
    /// Number of correction solves performed.
    pub iterations: usize,
    /// Residual infinity norms; one entry per visited iterate, so the length
    /// is `iterations + 1`.
    pub residual_norms: Vec<f64>,
    /// Right-hand side of the stopping criterion at each iterate.
    pub criterion_rhs: Vec<f64>,
    /// Relative forward error against a known solution, when the caller has
    /// one; filled by the harness.
    pub forward_error: Option<f64>,
    /// Growth-heuristic condition estimate of the scaled system.
    pub cond_estimate_scaled: f64,
    /// Conversion statistics of the cast that fed the factorization.
    pub cast: Option<CastReport>,
    /// Scaling metadata (also needed to reconstruct the scaled system).
    pub scaling: ScalingRecord,
}

/// The stopping test: `‖r‖ <= eps * (‖A‖ * ‖x‖ + ‖b‖)`, every quantity in
/// working precision. NaR never satisfies it.
pub fn converged(
    r_norm: PositValue,
    a_norm: PositValue,
    x_norm: PositValue,
    b_norm: PositValue,
    eps: PositValue,
) -> bool {
    if r_norm.is_nar() {
        return false;
    }
    let rhs = eps * (a_norm * x_norm + b_norm);
    if rhs.is_nar() {
        return false;
    }
    r_norm.total_cmp(&rhs).is_le()
}

/// Mixed-precision refinement: cast, factor once in low precision, then
/// refine in working precision until the criterion holds or the iteration
/// budget is spent (reported as divergence, not an error).
pub fn ir_solve(
    a: &DenseMatrix,
    b: &DenseVector,
    s: &SolveSettings,
) -> Result<(DenseVector, RefinementReport), SolveError> {
    check_shapes(a, b, s)?;
    let (a_low, a_s, b_s, record, cast_report) = cast_system(a, b, s)?;
    let f_low = lu_factor(&a_low)?;
    let f = f_low.widen(s.working);
    let x0 = lu_solve(&f, &b_s, s.working)?;
    let (y, mut report) = refine(&a_s, &b_s, &f, x0, s)?;
    report.cast = Some(cast_report);
    report.scaling = record;
    let x = cast::recover_solution(&report.scaling, &y);
    Ok((x, report))
}

/// Single-precision-level refinement: the factorization runs in working
/// precision on the original system. Residuals are still quire-fused.
pub fn ir_solve_classic(
    a: &DenseMatrix,
    b: &DenseVector,
    s: &SolveSettings,
) -> Result<(DenseVector, RefinementReport), SolveError> {
    check_shapes(a, b, s)?;
    let f = lu_factor(a)?;
    let x0 = lu_solve(&f, b, s.working)?;
    let (x, report) = refine(a, b, &f, x0, s)?;
    Ok((x, report))
}

/// Relative forward error `‖x - x_true‖ / ‖x_true‖` in working precision.
pub fn forward_error(x: &DenseVector, x_true: &DenseVector) -> f64 {
    assert_eq!(x.len(), x_true.len(), "length mismatch");
    assert_eq!(x.config(), x_true.config(), "config mismatch");
    let mut diff = DenseVector::zeros(x.len(), x.config());
    for i in 0..x.len() {
        diff.set(i, x.get(i) - x_true.get(i));
    }
    (inf_norm_vector(&diff) / inf_norm_vector(x_true)).to_f64()
}

fn check_shapes(a: &DenseMatrix, b: &DenseVector, s: &SolveSettings) -> Result<(), SolveError> {
    if !a.is_square() {
        return Err(SolveError::Dimension(format!(
            "matrix is {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() != b.len() {
        return Err(SolveError::Dimension(format!(
            "matrix order {} vs rhs length {}",
            a.rows(),
            b.len()
        )));
    }
    if a.config() != s.working || b.config() != s.working {
        return Err(SolveError::Dimension(
            "inputs must be in the working precision".into(),
        ));
    }
    if s.low.nbits() > s.working.nbits() {
        return Err(SolveError::Dimension(
            "low precision wider than working precision".into(),
        ));
    }
    Ok(())
}

type CastSystem = (DenseMatrix, DenseMatrix, DenseVector, ScalingRecord, CastReport);

/// Builds the system actually refined: the low-precision matrix for the
/// factorization, plus the scaled working-precision copy of (A, b) that the
/// residuals and the criterion run against.
fn cast_system(a: &DenseMatrix, b: &DenseVector, s: &SolveSettings) -> Result<CastSystem, SolveError> {
    match s.mode {
        CastMode::RoundClamp => {
            let (low, report) = cast::round_clamp(a, s.low)?;
            Ok((low, a.clone(), b.clone(), ScalingRecord::none(), report))
        }
        CastMode::ScaleRound => {
            let a_s = cast::scale_matrix(a, s.mu);
            let (low, report) = cast::round_clamp(&a_s, s.low)?;
            let b_s = cast::scale_vector(b, s.mu);
            let record = ScalingRecord {
                mode: ScaleMode::Scalar,
                mu: s.mu,
                d1: None,
                d2: None,
                power_of_two: false,
            };
            Ok((low, a_s, b_s, record, report))
        }
        CastMode::Equilibrate => {
            let (low, a_s, record, report) =
                cast::equilibrate_full(a, s.mu, s.power_of_two, s.low)?;
            let b_s = equilibrated_rhs(b, &record);
            Ok((low, a_s, b_s, record, report))
        }
    }
}

/// One rounding of the exact `mu * b_i / d1_i` per entry.
pub fn equilibrated_rhs(b: &DenseVector, rec: &ScalingRecord) -> DenseVector {
    use crate::posit::Decoded;
    let d1 = rec.d1.as_ref().expect("equilibrated record carries d1");
    assert_eq!(d1.len(), b.len(), "scale length mismatch");
    let cfg = b.config();
    let mut out = DenseVector::zeros(b.len(), cfg);
    for i in 0..b.len() {
        let v = b.get(i);
        let Decoded::Finite { negative, mantissa, exponent } = v.decode() else {
            out.set(i, v); // zero stays zero, NaR stays NaR
            continue;
        };
        let Decoded::Finite { mantissa: dm, exponent: de, .. } = d1.get(i).decode() else {
            unreachable!("scales are positive finite");
        };
        let mut num = BigUint::from(mantissa) * BigUint::from(rec.mu.numer());
        let mut den = BigUint::from(dm) * BigUint::from(rec.mu.denom());
        let e = exponent - de;
        if e >= 0 {
            num <<= e as u64;
        } else {
            den <<= (-e) as u64;
        }
        out.set(i, encode_rational(negative, &num, &den, cfg));
    }
    out
}

fn refine(
    a_s: &DenseMatrix,
    b_s: &DenseVector,
    f: &crate::linalg::LUFactors,
    x0: DenseVector,
    s: &SolveSettings,
) -> Result<(DenseVector, RefinementReport), SolveError> {
    let cfg = s.working;
    let eps = PositValue::from_f64(s.epsilon, cfg);
    let a_norm = inf_norm_matrix(a_s);
    let b_norm = inf_norm_vector(b_s);

    let mut x = x0;
    let mut iterations = 0usize;
    let mut residual_norms = Vec::new();
    let mut criterion_rhs = Vec::new();
    let mut done = false;

    loop {
        let r = residual_fused(a_s, &x, b_s);
        let rn = inf_norm_vector(&r);
        let xn = inf_norm_vector(&x);
        let rhs = eps * (a_norm * xn + b_norm);
        residual_norms.push(rn.to_f64());
        criterion_rhs.push(rhs.to_f64());
        if converged(rn, a_norm, xn, b_norm, eps) {
            done = true;
            break;
        }
        if iterations >= s.max_iterations {
            break;
        }
        if s.growth_abort && residual_norms.len() > 5 {
            let now = residual_norms[residual_norms.len() - 1];
            let then = residual_norms[residual_norms.len() - 6];
            if now > 10.0 * then {
                break;
            }
        }
        let c = lu_solve(f, &r, cfg)?;
        for i in 0..x.len() {
            x.set(i, x.get(i) + c.get(i));
        }
        iterations += 1;
    }

    let cond = cond_estimate(f, a_s).map(|v| v.to_f64()).unwrap_or(f64::NAN);
    let report = RefinementReport {
        converged: done,
        iterations,
        residual_norms,
        criterion_rhs,
        forward_error: None,
        cond_estimate_scaled: cond,
        cast: None,
        scaling: ScalingRecord::none(),
    };
    Ok((x, report))
}
