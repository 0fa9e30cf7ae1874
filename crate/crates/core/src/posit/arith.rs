//! Binary operations: unpack to exact significands, operate exactly, round once.

use super::encode::encode_u128;
use super::{Decoded, PositValue};
use num_bigint::BigUint;
use std::ops::{Add, Div, Mul, Neg, Sub};

impl PositValue {
    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.cfg, rhs.cfg, "config mismatch in +");
        let cfg = self.cfg;
        match (self.decode(), rhs.decode()) {
            (Decoded::NaR, _) | (_, Decoded::NaR) => PositValue::nar(cfg),
            (Decoded::Zero, _) => *rhs,
            (_, Decoded::Zero) => *self,
            (
                Decoded::Finite { negative: na, mantissa: ma, exponent: ea },
                Decoded::Finite { negative: nb, mantissa: mb, exponent: eb },
            ) => {
                let lsb = ea.min(eb);
                let (sa, sb) = ((ea - lsb) as u32, (eb - lsb) as u32);
                // Aligned mantissas stay within u128 unless the scales are
                // extremely far apart; then fall back to wide integers.
                if sa.max(sb) <= 60 {
                    let a = (ma as u128) << sa;
                    let b = (mb as u128) << sb;
                    if na == nb {
                        encode_u128(na, a + b, lsb, false, cfg)
                    } else if a == b {
                        PositValue::zero(cfg)
                    } else if a > b {
                        encode_u128(na, a - b, lsb, false, cfg)
                    } else {
                        encode_u128(nb, b - a, lsb, false, cfg)
                    }
                } else {
                    let a = BigUint::from(ma) << sa;
                    let b = BigUint::from(mb) << sb;
                    if na == nb {
                        super::encode::encode_big(na, &(a + b), lsb, false, cfg)
                    } else if a == b {
                        PositValue::zero(cfg)
                    } else if a > b {
                        super::encode::encode_big(na, &(a - b), lsb, false, cfg)
                    } else {
                        super::encode::encode_big(nb, &(b - a), lsb, false, cfg)
                    }
                }
            }
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cfg, rhs.cfg, "config mismatch in *");
        let cfg = self.cfg;
        match (self.decode(), rhs.decode()) {
            (Decoded::NaR, _) | (_, Decoded::NaR) => PositValue::nar(cfg),
            (Decoded::Zero, _) | (_, Decoded::Zero) => PositValue::zero(cfg),
            (
                Decoded::Finite { negative: na, mantissa: ma, exponent: ea },
                Decoded::Finite { negative: nb, mantissa: mb, exponent: eb },
            ) => encode_u128(na != nb, ma as u128 * mb as u128, ea + eb, false, cfg),
        }
    }

    /// Division; any division by zero is NaR.
    pub fn div(&self, rhs: &Self) -> Self {
        assert_eq!(self.cfg, rhs.cfg, "config mismatch in /");
        let cfg = self.cfg;
        match (self.decode(), rhs.decode()) {
            (Decoded::NaR, _) | (_, Decoded::NaR) => PositValue::nar(cfg),
            (_, Decoded::Zero) => PositValue::nar(cfg),
            (Decoded::Zero, _) => PositValue::zero(cfg),
            (
                Decoded::Finite { negative: na, mantissa: ma, exponent: ea },
                Decoded::Finite { negative: nb, mantissa: mb, exponent: eb },
            ) => {
                // Long-divide to at least 65 quotient bits; the remainder is
                // the sticky tail.
                let wa = 64 - ma.leading_zeros();
                let wb = 64 - mb.leading_zeros();
                let shift = (wb + 65).saturating_sub(wa);
                let num = (ma as u128) << shift;
                let den = mb as u128;
                let q = num / den;
                let r = num % den;
                encode_u128(na != nb, q, ea - eb - shift as i64, r != 0, cfg)
            }
        }
    }
}

impl Add for PositValue {
    type Output = PositValue;
    fn add(self, rhs: Self) -> Self {
        PositValue::add(&self, &rhs)
    }
}

impl Sub for PositValue {
    type Output = PositValue;
    fn sub(self, rhs: Self) -> Self {
        PositValue::sub(&self, &rhs)
    }
}

impl Mul for PositValue {
    type Output = PositValue;
    fn mul(self, rhs: Self) -> Self {
        PositValue::mul(&self, &rhs)
    }
}

impl Div for PositValue {
    type Output = PositValue;
    fn div(self, rhs: Self) -> Self {
        PositValue::div(&self, &rhs)
    }
}

impl Neg for PositValue {
    type Output = PositValue;
    fn neg(self) -> Self {
        PositValue::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posit::{P16, P32};

    fn p16(v: f64) -> PositValue {
        PositValue::from_f64(v, P16)
    }

    #[test]
    fn exact_small_integers() {
        assert_eq!(p16(1.0) + p16(1.0), p16(2.0));
        assert_eq!(p16(3.0) * p16(4.0), p16(12.0));
        assert_eq!(p16(1.0) - p16(1.0), PositValue::zero(P16));
        assert_eq!(p16(7.0) / p16(2.0), p16(3.5));
    }

    #[test]
    fn saturating_add() {
        let max = PositValue::maxpos(P16);
        assert_eq!(max + max, max);
        assert_eq!(max.neg() - max, max.neg());
    }

    #[test]
    fn nar_absorbs() {
        let nar = PositValue::nar(P16);
        let one = PositValue::one(P16);
        assert!((nar + one).is_nar());
        assert!((one * nar).is_nar());
        assert!((one / PositValue::zero(P16)).is_nar());
        assert!((PositValue::zero(P16) / PositValue::zero(P16)).is_nar());
    }

    #[test]
    fn zero_identities() {
        let z = PositValue::zero(P32);
        let x = PositValue::from_f64(-2.75, P32);
        assert_eq!(z + x, x);
        assert_eq!(x * z, z);
        assert_eq!(z / x, z);
    }

    #[test]
    fn far_apart_scales_are_exactly_cancelled() {
        // maxpos + minpos rounds back to maxpos; exercises the wide path.
        let max = PositValue::maxpos(P32);
        let min = PositValue::minpos(P32);
        assert_eq!(max + min, max);
        assert_eq!((max + min) - max, PositValue::zero(P32));
    }
}
