//! Rounding of exact values into posit patterns.
//!
//! All arithmetic funnels through [`encode_parts`]: the exact magnitude is
//! presented as `(mantissa + sticky) * 2^lsb_exp` where `sticky` stands for an
//! unknown tail strictly between 0 and one unit of the mantissa's last place.
//! The encoder lays the sign, regime, exponent and fraction out as one wide
//! bit string, truncates it to `nbits`, and resolves the cut with
//! round-to-nearest, ties to the even pattern. Magnitudes beyond the dynamic
//! range pin to maxpos/minpos; a nonzero value never rounds to zero or NaR.

use super::{PositConfig, PositValue};
use num_bigint::BigUint;

/// Core rounding step. `mantissa` must be nonzero; if `sticky` is set it must
/// carry at least 62 significant bits so that the tail sits strictly below
/// the rounding boundary of every representable neighbour.
pub(crate) fn encode_parts(
    negative: bool,
    mantissa: u64,
    lsb_exp: i64,
    sticky: bool,
    cfg: PositConfig,
) -> PositValue {
    debug_assert!(mantissa != 0);
    let bits_len = 64 - mantissa.leading_zeros();
    debug_assert!(!sticky || bits_len >= 62, "sticky tail with a short mantissa");

    // Strip trailing zeros so exactness checks see the minimal mantissa.
    let (mut mant, lsb_exp, mut sticky) = if sticky {
        (mantissa, lsb_exp, true)
    } else {
        let tz = mantissa.trailing_zeros();
        (mantissa >> tz, lsb_exp + tz as i64, false)
    };
    // Full-resolution copy for the midpoint comparison in the outer regimes.
    let (mant0, lsb0, sticky0) = (mant, lsb_exp, sticky);
    let mut width = 64 - mant.leading_zeros(); // significant bits of mant
    let h = (width as i64 - 1) + lsb_exp; // floor(log2 of the magnitude)
    let h_max = cfg.max_scale();

    // Values in [maxpos, 2*maxpos) and beyond all land on maxpos; values
    // below minpos pin to minpos.
    if h >= h_max {
        return signed(cfg.maxpos_bits(), negative, cfg);
    }
    if h < -h_max {
        return signed(1, negative, cfg);
    }

    // Regime/exponent split of the scale h = k * 2^es + e.
    let k = h >> cfg.es;
    let e = (h - (k << cfg.es)) as u64;
    let regime_len: u32 = if k >= 0 { k as u32 + 2 } else { (1 - k) as u32 };
    let regime_val: u128 = if k >= 0 { ((1u128 << (k as u32 + 1)) - 1) << 1 } else { 1 };

    // Keep at most (available fraction bits + 2) fraction bits; fold the rest
    // into sticky. This bounds the assembled string to fit in u128.
    let m_avail = cfg.nbits.saturating_sub(1 + regime_len + cfg.es);
    let fbits = width - 1;
    let keep = m_avail + 2;
    if fbits > keep {
        let drop = fbits - keep;
        sticky |= mant & ((1u64 << drop) - 1) != 0;
        mant >>= drop;
        width -= drop;
    }
    let fbits = width - 1;
    let frac = mant & !(1u64 << (width - 1)); // fraction without the hidden bit

    let w: u128 = (regime_val << (cfg.es + fbits))
        | ((e as u128) << fbits)
        | frac as u128;
    let len = 1 + regime_len + cfg.es + fbits; // includes the implicit 0 sign bit

    let pattern = if len <= cfg.nbits {
        // Exact fit. A sticky tail is below half of the final ulp and drops.
        (w << (cfg.nbits - len)) as u64
    } else {
        let shift = len - cfg.nbits;
        let rem = w & ((1u128 << shift) - 1);
        let mut p = (w >> shift) as u64;
        let round_up = if rem == 0 && !sticky {
            false // exactly representable
        } else if shift <= fbits {
            // Only fraction bits were cut, so neighbouring patterns are one
            // last-place unit apart and the dropped bits measure the distance
            // into the gap directly.
            let half = 1u128 << (shift - 1);
            rem > half || (rem == half && (sticky || p & 1 == 1))
        } else {
            // The cut reaches into the exponent field. Out here neighbouring
            // values are whole powers of two apart, so the dropped bits no
            // longer measure the gap linearly; compare the full-resolution
            // value against the arithmetic midpoint of the two neighbours.
            cmp_above_midpoint(mant0, lsb0, sticky0, p, cfg)
        };
        if round_up {
            p += 1;
        }
        debug_assert!(p <= cfg.maxpos_bits());
        p
    };
    signed(pattern, negative, cfg)
}

/// Decides rounding between the adjacent patterns `p` and `p + 1` by exact
/// comparison of `(mant + sticky tail) * 2^lsb_exp` with their midpoint.
/// Only reached in the outermost regimes, where both neighbours and the
/// mantissa are a handful of bits wide.
fn cmp_above_midpoint(mant: u64, lsb_exp: i64, sticky: bool, p: u64, cfg: PositConfig) -> bool {
    use std::cmp::Ordering;
    let (mp, ep) = super::decode_positive(p, cfg);
    let (mq, eq) = super::decode_positive(p + 1, cfg);
    // Neighbours out here carry a few significant bits at most.
    debug_assert!(mp < 16 && mq < 16);
    // 2 * midpoint = mp * 2^ep + mq * 2^eq
    let c = ep.min(eq);
    let sum = ((mp as u128) << (ep - c)) + ((mq as u128) << (eq - c));
    // 2 * value = (mant + tail) * 2^(lsb_exp + 1)
    let d = (lsb_exp + 1) - c;
    let ord = if d >= 0 {
        // Coarse mantissas only arise for exact inputs.
        debug_assert!(!sticky && d < 64 && (mant as u128).leading_zeros() as i64 >= d);
        ((mant as u128) << d).cmp(&sum)
    } else {
        debug_assert!((-d) as u32 + 128 - sum.leading_zeros() <= 128);
        (mant as u128).cmp(&(sum << -d))
    };
    match ord {
        Ordering::Greater => true,
        Ordering::Less => false,
        // The tail sits strictly below the comparison's last place, so it
        // only ever breaks exact ties upward.
        Ordering::Equal => sticky || p & 1 == 1,
    }
}

fn signed(pattern: u64, negative: bool, cfg: PositConfig) -> PositValue {
    let bits = if negative {
        pattern.wrapping_neg() & cfg.mask()
    } else {
        pattern
    };
    PositValue { bits, cfg }
}

/// Rounds `(-1)^negative * mantissa * 2^lsb_exp` with an optional inexact tail.
pub(crate) fn encode_u128(
    negative: bool,
    mantissa: u128,
    lsb_exp: i64,
    sticky: bool,
    cfg: PositConfig,
) -> PositValue {
    if mantissa == 0 {
        debug_assert!(!sticky);
        return PositValue::zero(cfg);
    }
    let width = 128 - mantissa.leading_zeros();
    if width <= 64 {
        encode_parts(negative, mantissa as u64, lsb_exp, sticky, cfg)
    } else {
        let drop = width - 64;
        let tail = mantissa & ((1u128 << drop) - 1);
        encode_parts(
            negative,
            (mantissa >> drop) as u64,
            lsb_exp + drop as i64,
            sticky || tail != 0,
            cfg,
        )
    }
}

/// Rounds `(-1)^negative * mantissa * 2^lsb_exp` for an arbitrarily wide
/// exact mantissa (quire drains, wide aligned sums), with an optional
/// inexact tail below the last place.
pub(crate) fn encode_big(
    negative: bool,
    mantissa: &BigUint,
    lsb_exp: i64,
    sticky: bool,
    cfg: PositConfig,
) -> PositValue {
    let width = mantissa.bits();
    if width == 0 {
        debug_assert!(!sticky);
        return PositValue::zero(cfg);
    }
    if width <= 64 {
        let digits = mantissa.to_u64_digits();
        return encode_parts(negative, digits[0], lsb_exp, sticky, cfg);
    }
    let drop = width - 64;
    let top: u64 = (mantissa >> drop).to_u64_digits()[0];
    let tail_nonzero = mantissa.trailing_zeros().unwrap_or(0) < drop;
    encode_parts(
        negative,
        top,
        lsb_exp + drop as i64,
        sticky || tail_nonzero,
        cfg,
    )
}

/// Rounds the exact rational `(-1)^negative * num / den` into the format.
/// Used for decimal ingestion; division in `arith` uses the same long-division
/// route on machine words.
pub fn encode_rational(negative: bool, num: &BigUint, den: &BigUint, cfg: PositConfig) -> PositValue {
    use num_traits::Zero;
    assert!(!den.is_zero(), "zero denominator");
    if num.is_zero() {
        return PositValue::zero(cfg);
    }
    // Long-divide to at least 65 significant quotient bits; the remainder
    // becomes the sticky tail.
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let shift = (db - nb + 65).max(0) as u64;
    let scaled = num << shift;
    let q = &scaled / den;
    let r = &scaled - &q * den;
    encode_big(negative, &q, -(shift as i64), !r.is_zero(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posit::{Decoded, P16, P32};

    #[test]
    fn one_encodes_to_regime_10() {
        let p = encode_parts(false, 1, 0, false, P16);
        assert_eq!(p.bits(), 0x4000);
    }

    #[test]
    fn saturation() {
        // 10^20 > maxpos = 2^56
        let num = BigUint::from(10u32).pow(20);
        let p = encode_rational(false, &num, &BigUint::from(1u32), P16);
        assert_eq!(p.bits(), 0x7FFF);
        let m = encode_rational(true, &num, &BigUint::from(1u32), P16);
        assert_eq!(m, PositValue::maxpos(P16).neg());
        // below minpos pins to minpos
        let p = encode_rational(false, &BigUint::from(1u32), &(BigUint::from(1u32) << 200), P16);
        assert_eq!(p.bits(), 0x0001);
    }

    #[test]
    fn tie_rounds_to_even_pattern() {
        // p16 has 11 fraction bits at scale 0, so the neighbours of
        // 1 + 2^-12 are 1.0 (0x4000, even) and 1 + 2^-11 (0x4001, odd).
        let mant = (1u64 << 12) | 1; // 1 + 2^-12
        let p = encode_parts(false, mant, -12, false, P16);
        assert_eq!(p.bits(), 0x4000, "midpoint ties to the even pattern");
        // Just above the midpoint rounds up.
        let mant = (1u64 << 13) | 3; // 1 + 2^-12 + 2^-13
        let p = encode_parts(false, mant, -13, false, P16);
        assert_eq!(p.bits(), 0x4001);
    }

    #[test]
    fn round_trip_all_p16() {
        for bits in 0..=0xFFFFu64 {
            let p = PositValue::from_bits(bits, P16);
            let back = match p.decode() {
                Decoded::Zero => PositValue::zero(P16),
                Decoded::NaR => PositValue::nar(P16),
                Decoded::Finite { negative, mantissa, exponent } => {
                    encode_parts(negative, mantissa, exponent, false, P16)
                }
            };
            assert_eq!(back.bits(), bits, "pattern {bits:#06x}");
        }
    }

    #[test]
    fn widen_p16_to_p32_round_trips() {
        for bits in 0..=0xFFFFu64 {
            let p = PositValue::from_bits(bits, P16);
            let wide = p.widen(P32);
            assert_eq!(wide.round_to(P16), p, "pattern {bits:#06x}");
        }
    }
}
