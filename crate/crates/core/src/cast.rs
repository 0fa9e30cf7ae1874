//! Conversion of a working-precision system to low precision, with the
//! scaling metadata needed to map solutions back.
//!
//! Three strategies are provided: plain rounding with range clamping, scalar
//! scaling before rounding, and two-sided row/column equilibration. The
//! equilibrated entries are produced by a single rounding of the exact
//! product `mu * a_ij * d2_j / d1_i`.

use crate::linalg::{DenseMatrix, DenseVector};
use crate::posit::{encode_rational, Decoded, PositConfig, PositValue};
use num_bigint::BigUint;
use std::cmp::Ordering;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CastError {
    #[error("NaR entry at ({row}, {col}); refusing to cast a corrupt matrix")]
    NarEntry { row: usize, col: usize },
    #[error("degenerate scaling: {axis} {index} is entirely zero")]
    DegenerateScaling { axis: &'static str, index: usize },
    #[error("scale factor must be a positive finite rational")]
    BadScale,
}

/// Exact positive rational knob, kept as a fraction so that values like 1/16
/// survive without decimal rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio64 {
    num: u64,
    den: u64,
}

impl Ratio64 {
    pub fn new(num: u64, den: u64) -> Result<Self, CastError> {
        if num == 0 || den == 0 {
            return Err(CastError::BadScale);
        }
        let g = gcd(num, den);
        Ok(Ratio64 { num: num / g, den: den / g })
    }

    pub const ONE: Ratio64 = Ratio64 { num: 1, den: 1 };

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// One rounding into the given format.
    pub fn to_posit(&self, cfg: PositConfig) -> PositValue {
        encode_rational(false, &BigUint::from(self.num), &BigUint::from(self.den), cfg)
    }

    /// Parses `"1/16"`, `"16"`, or an exact decimal like `"0.75"`.
    pub fn parse(s: &str) -> Result<Self, CastError> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let num: u64 = n.trim().parse().map_err(|_| CastError::BadScale)?;
            let den: u64 = d.trim().parse().map_err(|_| CastError::BadScale)?;
            return Ratio64::new(num, den);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let digits = format!("{int}{frac}");
            let num: u64 = digits.parse().map_err(|_| CastError::BadScale)?;
            let den = 10u64
                .checked_pow(frac.len() as u32)
                .ok_or(CastError::BadScale)?;
            return Ratio64::new(num, den);
        }
        let num: u64 = s.parse().map_err(|_| CastError::BadScale)?;
        Ratio64::new(num, 1)
    }
}

impl std::fmt::Display for Ratio64 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// How the system handed to the factorization relates to the original one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleMode {
    None,
    Scalar,
    Equilibrated,
}

/// Diagonal scalings and the scalar factor needed to recover solutions.
#[derive(Clone, Debug)]
pub struct ScalingRecord {
    pub mode: ScaleMode,
    pub mu: Ratio64,
    /// Row scales (the equilibration divides row i by d1[i]).
    pub d1: Option<DenseVector>,
    /// Column scales (the equilibration multiplies column j by d2[j]).
    pub d2: Option<DenseVector>,
    pub power_of_two: bool,
}

impl ScalingRecord {
    pub fn none() -> Self {
        ScalingRecord { mode: ScaleMode::None, mu: Ratio64::ONE, d1: None, d2: None, power_of_two: false }
    }
}

/// Conversion statistics: range clamps and distinct nonzero values before and
/// after the cast.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CastReport {
    pub clamped_high: usize,
    pub clamped_low: usize,
    pub unique_before: usize,
    pub unique_after: usize,
}

/// Number of distinct nonzero stored values, compared by bit pattern.
pub fn unique_count(a: &DenseMatrix) -> usize {
    let mut seen = HashSet::new();
    for (_, _, v) in a.entries() {
        if !v.is_zero() {
            seen.insert(v.bits());
        }
    }
    seen.len()
}

/// Compares two positive dyadics m1*2^e1 and m2*2^e2 exactly.
fn cmp_dyadic(m1: u128, e1: i64, m2: u128, e2: i64) -> Ordering {
    debug_assert!(m1 > 0 && m2 > 0);
    let w1 = 128 - m1.leading_zeros() as i64;
    let w2 = 128 - m2.leading_zeros() as i64;
    match (w1 + e1).cmp(&(w2 + e2)) {
        Ordering::Equal => {}
        ord => return ord,
    }
    // Same leading-bit position; align the narrower mantissa up.
    if w1 < w2 {
        (m1 << (w2 - w1)).cmp(&m2)
    } else {
        m1.cmp(&(m2 << (w1 - w2)))
    }
}

/// Exact magnitude class of a finite value relative to the target's range.
fn classify(mantissa: u64, exponent: i64, cfg: PositConfig) -> Ordering {
    let h_max = cfg.max_scale();
    if cmp_dyadic(mantissa as u128, exponent, 1, h_max) == Ordering::Greater {
        Ordering::Greater // above maxpos
    } else if cmp_dyadic(mantissa as u128, exponent, 1, -h_max) == Ordering::Less {
        Ordering::Less // below minpos
    } else {
        Ordering::Equal
    }
}

/// Element-wise rounding into `low_cfg`. Magnitudes above the target's
/// maxpos land on ±maxpos, nonzero magnitudes below minpos land on ±minpos,
/// zero stays zero; the report counts both kinds of clamp.
pub fn round_clamp(
    a: &DenseMatrix,
    low_cfg: PositConfig,
) -> Result<(DenseMatrix, CastReport), CastError> {
    let mut out = DenseMatrix::zeros(a.rows(), a.cols(), low_cfg);
    let mut report = CastReport::default();
    for (i, j, v) in a.entries() {
        match v.decode() {
            Decoded::NaR => return Err(CastError::NarEntry { row: i, col: j }),
            Decoded::Zero => {}
            Decoded::Finite { mantissa, exponent, .. } => {
                match classify(mantissa, exponent, low_cfg) {
                    Ordering::Greater => report.clamped_high += 1,
                    Ordering::Less => report.clamped_low += 1,
                    Ordering::Equal => {}
                }
                out.set(i, j, v.round_to(low_cfg));
            }
        }
    }
    report.unique_before = unique_count(a);
    report.unique_after = unique_count(&out);
    Ok((out, report))
}

/// Scales the matrix by `mu` in working precision, then rounds and clamps.
pub fn scale_round(
    a: &DenseMatrix,
    mu: Ratio64,
    low_cfg: PositConfig,
) -> Result<(DenseMatrix, ScalingRecord, CastReport), CastError> {
    let scaled = scale_matrix(a, mu);
    let (low, report) = round_clamp(&scaled, low_cfg)?;
    let record = ScalingRecord {
        mode: ScaleMode::Scalar,
        mu,
        d1: None,
        d2: None,
        power_of_two: false,
    };
    Ok((low, record, report))
}

/// `mu * A` in the matrix's own precision.
pub fn scale_matrix(a: &DenseMatrix, mu: Ratio64) -> DenseMatrix {
    let m = mu.to_posit(a.config());
    let mut out = DenseMatrix::zeros(a.rows(), a.cols(), a.config());
    for (i, j, v) in a.entries() {
        out.set(i, j, v * m);
    }
    out
}

/// `mu * b` in the vector's own precision.
pub fn scale_vector(b: &DenseVector, mu: Ratio64) -> DenseVector {
    let m = mu.to_posit(b.config());
    let mut out = DenseVector::zeros(b.len(), b.config());
    for i in 0..b.len() {
        out.set(i, b.get(i) * m);
    }
    out
}

/// A positive dyadic value `mant * 2^exp` used while building scale factors.
#[derive(Clone, Copy, Debug)]
struct Dyadic {
    mant: u64,
    exp: i64,
}

impl Dyadic {
    fn of(v: PositValue) -> Option<Dyadic> {
        match v.decode() {
            Decoded::Finite { mantissa, exponent, .. } => {
                Some(Dyadic { mant: mantissa, exp: exponent })
            }
            _ => None,
        }
    }

    /// Nearest power of two; dyadics never tie on the geometric midpoint.
    fn snap_pow2(self) -> Dyadic {
        let w = (64 - self.mant.leading_zeros()) as i64;
        let h = w - 1 + self.exp;
        // round up when mant/2^(w-1) >= sqrt(2), i.e. mant^2 >= 2^(2w-1)
        let up = (self.mant as u128 * self.mant as u128) >= (1u128 << (2 * w - 1));
        Dyadic { mant: 1, exp: if up { h + 1 } else { h } }
    }
}

/// Row and column equilibration. Computes `d1[i] = max |A(i, :)|`, then for
/// `B = D1^-1 A` computes `d2[j] = 1 / max |B(:, j)|`, and emits one rounding
/// of the exact `mu * d1[i]^-1 * a_ij * d2[j]` per entry, into both the low
/// and the working format.
pub fn equilibrate(
    a: &DenseMatrix,
    mu: Ratio64,
    power_of_two: bool,
    low_cfg: PositConfig,
) -> Result<(DenseMatrix, ScalingRecord, CastReport), CastError> {
    let (low, _, record, report) = equilibrate_full(a, mu, power_of_two, low_cfg)?;
    Ok((low, record, report))
}

/// As [`equilibrate`], but also returns the same scaled matrix rounded once
/// into the working format (needed by the refinement loop's residuals).
pub fn equilibrate_full(
    a: &DenseMatrix,
    mu: Ratio64,
    power_of_two: bool,
    low_cfg: PositConfig,
) -> Result<(DenseMatrix, DenseMatrix, ScalingRecord, CastReport), CastError> {
    let cfg = a.config();
    let (rows, cols) = (a.rows(), a.cols());
    if let Some((i, j)) = a.find_nar() {
        return Err(CastError::NarEntry { row: i, col: j });
    }

    // Row scales: exact row maxima (posit values, no rounding).
    let mut d1 = DenseVector::zeros(rows, cfg);
    let mut d1_dy = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut best = PositValue::zero(cfg);
        for j in 0..cols {
            let v = a.get(i, j).abs();
            if v.total_cmp(&best).is_gt() {
                best = v;
            }
        }
        if best.is_zero() {
            return Err(CastError::DegenerateScaling { axis: "row", index: i });
        }
        let mut dy = Dyadic::of(best).unwrap();
        if power_of_two {
            dy = dy.snap_pow2();
            best = encode_pow2(dy.exp, cfg);
        }
        d1.set(i, best);
        d1_dy.push(dy);
    }

    // Column scales: reciprocal of the exact column maxima of D1^-1 A,
    // rounded once into the working format.
    let mut d2 = DenseVector::zeros(cols, cfg);
    let mut d2_dy = Vec::with_capacity(cols);
    for j in 0..cols {
        // max over i of |a_ij| / d1_i, tracked as an exact ratio
        let mut best: Option<(Dyadic, Dyadic)> = None; // (numerator, denominator)
        for i in 0..rows {
            let v = a.get(i, j).abs();
            let Some(num) = Dyadic::of(v) else { continue };
            let den = d1_dy[i];
            let better = match &best {
                None => true,
                Some((bn, bd)) => {
                    // num/den > bn/bd  <=>  num*bd > bn*den
                    cmp_dyadic(
                        num.mant as u128 * bd.mant as u128,
                        num.exp + bd.exp,
                        bn.mant as u128 * den.mant as u128,
                        bn.exp + den.exp,
                    ) == Ordering::Greater
                }
            };
            if better {
                best = Some((num, den));
            }
        }
        let Some((num, den)) = best else {
            return Err(CastError::DegenerateScaling { axis: "column", index: j });
        };
        // d2 = den/num, exactly, then one rounding (or a power-of-two snap).
        let v = if power_of_two {
            let h_num = 63 - num.mant.leading_zeros() as i64 + num.exp;
            let h_den = 63 - den.mant.leading_zeros() as i64 + den.exp;
            // snap den/num: compute via the ratio's nearest power of two
            let snapped = snap_ratio_pow2(den, num, h_den - h_num);
            d2_dy.push(Dyadic { mant: 1, exp: snapped });
            encode_pow2(snapped, cfg)
        } else {
            let p = encode_ratio(den, num, cfg);
            d2_dy.push(Dyadic::of(p).unwrap());
            p
        };
        d2.set(j, v);
    }

    // Emit both precisions from one exact product per entry.
    let mut low = DenseMatrix::zeros(rows, cols, low_cfg);
    let mut working = DenseMatrix::zeros(rows, cols, cfg);
    let mut report = CastReport::default();
    for (i, j, v) in a.entries() {
        let Some(val) = Dyadic::of(v) else { continue };
        let d2j = d2_dy[j];
        let d1i = d1_dy[i];
        // num / den = mu * v * d2 / d1
        let mut num = BigUint::from(val.mant) * BigUint::from(d2j.mant) * BigUint::from(mu.num);
        let mut den = BigUint::from(d1i.mant) * BigUint::from(mu.den);
        let e = val.exp + d2j.exp - d1i.exp;
        if e >= 0 {
            num <<= e as u64;
        } else {
            den <<= (-e) as u64;
        }
        let negative = v.is_negative();
        match rational_range(&num, &den, low_cfg) {
            Ordering::Greater => report.clamped_high += 1,
            Ordering::Less => report.clamped_low += 1,
            Ordering::Equal => {}
        }
        low.set(i, j, encode_rational(negative, &num, &den, low_cfg));
        working.set(i, j, encode_rational(negative, &num, &den, cfg));
    }
    report.unique_before = unique_count(a);
    report.unique_after = unique_count(&low);

    let record = ScalingRecord {
        mode: ScaleMode::Equilibrated,
        mu,
        d1: Some(d1),
        d2: Some(d2),
        power_of_two,
    };
    Ok((low, working, record, report))
}

/// Where the exact positive rational sits relative to the format's range.
fn rational_range(num: &BigUint, den: &BigUint, cfg: PositConfig) -> Ordering {
    let h = cfg.max_scale() as u64;
    if *num > den << h {
        Ordering::Greater
    } else if num << h < *den {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

fn encode_pow2(exp: i64, cfg: PositConfig) -> PositValue {
    crate::posit::encode::encode_u128(false, 1, exp, false, cfg)
}

/// One rounding of the exact ratio of two positive dyadics.
fn encode_ratio(num: Dyadic, den: Dyadic, cfg: PositConfig) -> PositValue {
    let mut n = BigUint::from(num.mant);
    let mut d = BigUint::from(den.mant);
    let e = num.exp - den.exp;
    if e >= 0 {
        n <<= e as u64;
    } else {
        d <<= (-e) as u64;
    }
    encode_rational(false, &n, &d, cfg)
}

/// Nearest power of two of the exact ratio den_hint... of `a / b`, seeded by
/// the difference of their leading-bit positions.
fn snap_ratio_pow2(a: Dyadic, b: Dyadic, h_guess: i64) -> i64 {
    // The true h = floor(log2(a/b)) is h_guess or h_guess - 1; then round
    // the fractional part against sqrt(2): a/b >= 2^h * sqrt(2) iff
    // (a_mant * 2^x)^2 >= 2 * (b_mant * 2^y)^2 at aligned exponents.
    let h = {
        // a/b >= 2^h_guess  <=>  a_mant * 2^(a.exp - h_guess) >= b_mant * 2^b.exp
        if cmp_dyadic(a.mant as u128, a.exp - h_guess, b.mant as u128, b.exp) == Ordering::Less {
            h_guess - 1
        } else {
            h_guess
        }
    };
    // Compare (a/b) / 2^h against sqrt(2): square both sides.
    // a^2 >= 2 * b^2 * 2^(2h)
    let a2 = a.mant as u128 * a.mant as u128;
    let b2 = b.mant as u128 * b.mant as u128;
    let up = cmp_dyadic(a2, 2 * a.exp, b2, 2 * b.exp + 2 * h + 1) != Ordering::Less;
    if up {
        h + 1
    } else {
        h
    }
}

/// Maps a solution of the scaled system back to the original coordinates.
/// Plain and scalar modes are the identity (the right-hand side was co-scaled);
/// the equilibrated mode multiplies by D2.
pub fn recover_solution(rec: &ScalingRecord, y: &DenseVector) -> DenseVector {
    match rec.mode {
        ScaleMode::None | ScaleMode::Scalar => y.clone(),
        ScaleMode::Equilibrated => {
            let d2 = rec.d2.as_ref().expect("equilibrated record carries d2");
            let mut x = DenseVector::zeros(y.len(), y.config());
            for i in 0..y.len() {
                x.set(i, d2.get(i) * y.get(i));
            }
            x
        }
    }
}
