//! Software posit arithmetic of configurable width.
//!
//! A posit packs a sign bit, a run-length-encoded regime, an exponent field of
//! at most `es` bits and a fraction into `nbits` bits. The standard form uses
//! `es = 2`, so the regime steps the scale by powers of 16. There is exactly
//! one zero (all bits clear) and one NaR (sign bit set, all other bits clear);
//! every other pattern is a finite dyadic rational, negation is the two's
//! complement of the pattern, and value order equals signed-integer order of
//! the patterns.

mod arith;
pub(crate) mod encode;
mod fmt;
mod props;
mod quire;

pub use encode::encode_rational;
pub use fmt::FieldLayout;
pub use props::{format_properties, successor_of_one, FormatProperties};
pub use quire::Quire;

use std::cmp::Ordering;

/// Width parameters of a posit format. `es` is 2 for the standard form used
/// by the solver; other values are accepted for unit tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PositConfig {
    nbits: u32,
    es: u32,
}

impl PositConfig {
    /// Standard posit format: `es = 2`.
    pub fn standard(nbits: u32) -> Self {
        Self::with_es(nbits, 2)
    }

    pub fn with_es(nbits: u32, es: u32) -> Self {
        assert!((2..=64).contains(&nbits), "nbits must be in 2..=64");
        assert!(es <= 4, "es must be at most 4");
        PositConfig { nbits, es }
    }

    pub fn nbits(&self) -> u32 {
        self.nbits
    }

    pub fn es(&self) -> u32 {
        self.es
    }

    pub fn is_standard(&self) -> bool {
        self.es == 2
    }

    pub(crate) fn mask(&self) -> u64 {
        if self.nbits == 64 {
            u64::MAX
        } else {
            (1u64 << self.nbits) - 1
        }
    }

    pub(crate) fn nar_bits(&self) -> u64 {
        1u64 << (self.nbits - 1)
    }

    pub(crate) fn maxpos_bits(&self) -> u64 {
        self.nar_bits() - 1
    }

    /// Scale of maxpos: (n-2) * 2^es. Also the negated scale of minpos.
    pub(crate) fn max_scale(&self) -> i64 {
        ((self.nbits as i64) - 2) << self.es
    }
}

/// Widths used throughout the solver.
pub const P8: PositConfig = PositConfig { nbits: 8, es: 2 };
pub const P16: PositConfig = PositConfig { nbits: 16, es: 2 };
pub const P24: PositConfig = PositConfig { nbits: 24, es: 2 };
pub const P32: PositConfig = PositConfig { nbits: 32, es: 2 };
pub const P64: PositConfig = PositConfig { nbits: 64, es: 2 };

/// A posit value: a bit pattern together with its format.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PositValue {
    bits: u64,
    cfg: PositConfig,
}

/// Exact content of a posit pattern. A finite value is
/// `(-1)^negative * mantissa * 2^exponent` with the mantissa carrying the
/// hidden bit, so `2^m <= mantissa < 2^(m+1)` for m fraction bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decoded {
    Zero,
    NaR,
    Finite {
        negative: bool,
        mantissa: u64,
        exponent: i64,
    },
}

impl PositValue {
    pub fn from_bits(bits: u64, cfg: PositConfig) -> Self {
        assert!(
            bits & !cfg.mask() == 0,
            "bit pattern {bits:#x} does not fit in {} bits",
            cfg.nbits
        );
        PositValue { bits, cfg }
    }

    pub fn zero(cfg: PositConfig) -> Self {
        PositValue { bits: 0, cfg }
    }

    pub fn nar(cfg: PositConfig) -> Self {
        PositValue { bits: cfg.nar_bits(), cfg }
    }

    pub fn one(cfg: PositConfig) -> Self {
        // Regime "10", all remaining bits zero.
        PositValue { bits: 1u64 << (cfg.nbits - 2), cfg }
    }

    pub fn minpos(cfg: PositConfig) -> Self {
        PositValue { bits: 1, cfg }
    }

    pub fn maxpos(cfg: PositConfig) -> Self {
        PositValue { bits: cfg.maxpos_bits(), cfg }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn config(&self) -> PositConfig {
        self.cfg
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn is_nar(&self) -> bool {
        self.bits == self.cfg.nar_bits()
    }

    pub fn is_negative(&self) -> bool {
        !self.is_nar() && self.bits >> (self.cfg.nbits - 1) == 1
    }

    /// Two's complement negation. Zero and NaR negate to themselves.
    pub fn neg(&self) -> Self {
        PositValue {
            bits: self.bits.wrapping_neg() & self.cfg.mask(),
            cfg: self.cfg,
        }
    }

    /// Absolute value; NaR stays NaR.
    pub fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            *self
        }
    }

    /// Splits the pattern into its exact sign/mantissa/exponent content.
    /// Negative patterns are complemented first; the fields of the positive
    /// counterpart carry the magnitude.
    pub fn decode(&self) -> Decoded {
        if self.bits == 0 {
            return Decoded::Zero;
        }
        if self.is_nar() {
            return Decoded::NaR;
        }
        let negative = self.is_negative();
        let mag = if negative {
            self.bits.wrapping_neg() & self.cfg.mask()
        } else {
            self.bits
        };
        let (mantissa, exponent) = decode_positive(mag, self.cfg);
        Decoded::Finite { negative, mantissa, exponent }
    }

    /// Signed-integer interpretation of the pattern; realizes the value order
    /// for non-NaR patterns.
    fn signed_bits(&self) -> i64 {
        ((self.bits << (64 - self.cfg.nbits)) as i64) >> (64 - self.cfg.nbits)
    }

    /// Total order used for pivoting and sorting: NaR sorts before all reals,
    /// reals compare by value.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.cfg, other.cfg, "config mismatch in comparison");
        match (self.is_nar(), other.is_nar()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.signed_bits().cmp(&other.signed_bits()),
        }
    }

    /// Exact, value-preserving conversion to a wider format with the same `es`.
    pub fn widen(&self, cfg: PositConfig) -> Self {
        assert!(cfg.nbits >= self.cfg.nbits && cfg.es == self.cfg.es);
        match self.decode() {
            Decoded::Zero => PositValue::zero(cfg),
            Decoded::NaR => PositValue::nar(cfg),
            Decoded::Finite { negative, mantissa, exponent } => {
                encode::encode_u128(negative, mantissa as u128, exponent, false, cfg)
            }
        }
    }

    /// Rounds the value into `cfg`, which may be narrower.
    pub fn round_to(&self, cfg: PositConfig) -> Self {
        match self.decode() {
            Decoded::Zero => PositValue::zero(cfg),
            Decoded::NaR => PositValue::nar(cfg),
            Decoded::Finite { negative, mantissa, exponent } => {
                encode::encode_u128(negative, mantissa as u128, exponent, false, cfg)
            }
        }
    }

    /// Rounds an `f64` (an exact dyadic rational) into the format.
    /// NaN and infinities map to NaR.
    pub fn from_f64(v: f64, cfg: PositConfig) -> Self {
        if v == 0.0 {
            return PositValue::zero(cfg);
        }
        if !v.is_finite() {
            return PositValue::nar(cfg);
        }
        let bits = v.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7FF) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if biased == 0 {
            (frac, -1074) // subnormal
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        encode::encode_u128(negative, mantissa as u128, exponent, false, cfg)
    }

    /// Nearest `f64`, for display and reporting.
    pub fn to_f64(&self) -> f64 {
        match self.decode() {
            Decoded::Zero => 0.0,
            Decoded::NaR => f64::NAN,
            Decoded::Finite { negative, mantissa, exponent } => {
                let m = mantissa as f64 * 2f64.powi(exponent as i32);
                if negative {
                    -m
                } else {
                    m
                }
            }
        }
    }
}

/// Decodes a positive non-zero pattern into (mantissa, exponent) with the
/// hidden bit included in the mantissa.
pub(crate) fn decode_positive(mag: u64, cfg: PositConfig) -> (u64, i64) {
    debug_assert!(mag > 0 && mag < cfg.nar_bits());
    let body_len = cfg.nbits - 1;
    let body = mag; // top bit (sign) is zero
    let first = (body >> (body_len - 1)) & 1;
    let shifted = body << (64 - body_len);
    let run = if first == 1 {
        shifted.leading_ones().min(body_len)
    } else {
        shifted.leading_zeros().min(body_len)
    };
    let k: i64 = if first == 1 { run as i64 - 1 } else { -(run as i64) };
    let consumed = (run + 1).min(body_len);
    let rest = body_len - consumed;

    let avail_e = cfg.es.min(rest);
    let e_bits = if avail_e == 0 {
        0
    } else {
        (body >> (rest - avail_e)) & ((1u64 << avail_e) - 1)
    };
    let e = (e_bits << (cfg.es - avail_e)) as i64;

    let m = rest - avail_e;
    let frac = if m == 0 { 0 } else { body & ((1u64 << m) - 1) };
    let mantissa = (1u64 << m) | frac;
    let exponent = ((k << cfg.es) + e) - m as i64;
    // Canonical form: odd mantissa.
    let tz = mantissa.trailing_zeros();
    (mantissa >> tz, exponent + tz as i64)
}

impl PartialOrd for PositValue {
    /// NaR is unordered; everything else compares by value.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.is_nar() || other.is_nar() {
            return None;
        }
        Some(self.total_cmp(other))
    }
}
