//! The quire: a 16n-bit two's-complement fixed-point accumulator.
//!
//! Every product of two posits is an integer multiple of minpos^2, which is
//! exactly the weight of the register's lowest bit, so sums of products
//! accumulate without any rounding. Draining the register back to a posit
//! performs the single rounding of the whole dot product.

use super::encode::encode_big;
use super::{Decoded, PositConfig, PositValue};
use num_bigint::BigUint;

#[derive(Clone, Debug)]
pub struct Quire {
    /// Little-endian limbs; 16n bits total, two's complement.
    limbs: Vec<u64>,
    cfg: PositConfig,
    nar: bool,
}

impl Quire {
    pub fn new(cfg: PositConfig) -> Self {
        assert!(cfg.is_standard(), "the quire is defined for es = 2");
        assert!(cfg.nbits() % 4 == 0, "quire width 16n must be limb-aligned");
        Quire {
            limbs: vec![0; (16 * cfg.nbits() as usize) / 64],
            cfg,
            nar: false,
        }
    }

    pub fn config(&self) -> PositConfig {
        self.cfg
    }

    pub fn width_bits(&self) -> u32 {
        16 * self.cfg.nbits()
    }

    /// Weight of the lowest register bit: minpos^2 = 2^(16 - 8n).
    fn unit_exp(&self) -> i64 {
        -2 * self.cfg.max_scale()
    }

    pub fn clear(&mut self) {
        self.limbs.fill(0);
        self.nar = false;
    }

    pub fn is_nar(&self) -> bool {
        self.nar
    }

    pub fn is_zero(&self) -> bool {
        !self.nar && self.limbs.iter().all(|&l| l == 0)
    }

    /// Adds the exact product `a * b`. NaR inputs poison the quire until it
    /// is cleared.
    pub fn accumulate(&mut self, a: PositValue, b: PositValue) {
        assert_eq!(a.config(), self.cfg);
        assert_eq!(b.config(), self.cfg);
        match (a.decode(), b.decode()) {
            (Decoded::NaR, _) | (_, Decoded::NaR) => self.nar = true,
            (Decoded::Zero, _) | (_, Decoded::Zero) => {}
            (
                Decoded::Finite { negative: na, mantissa: ma, exponent: ea },
                Decoded::Finite { negative: nb, mantissa: mb, exponent: eb },
            ) => {
                let prod = ma as u128 * mb as u128;
                let offset = (ea + eb) - self.unit_exp();
                debug_assert!(offset >= 0, "product below the quire's last place");
                if na == nb {
                    self.add_magnitude(prod, offset as u32);
                } else {
                    self.sub_magnitude(prod, offset as u32);
                }
            }
        }
    }

    /// Adds a single posit value (the product `a * 1`).
    pub fn add_posit(&mut self, a: PositValue) {
        let one = PositValue::one(self.cfg);
        self.accumulate(a, one);
    }

    fn add_magnitude(&mut self, mag: u128, offset: u32) {
        let (limb, bit) = ((offset / 64) as usize, offset % 64);
        let wide = spread(mag, bit);
        let mut carry = 0u64;
        for (i, &w) in wide.iter().enumerate() {
            if limb + i >= self.limbs.len() {
                break;
            }
            let (s1, c1) = self.limbs[limb + i].overflowing_add(w);
            let (s2, c2) = s1.overflowing_add(carry);
            self.limbs[limb + i] = s2;
            carry = (c1 as u64) + (c2 as u64);
        }
        let mut i = limb + 3;
        while carry != 0 && i < self.limbs.len() {
            let (s, c) = self.limbs[i].overflowing_add(carry);
            self.limbs[i] = s;
            carry = c as u64;
            i += 1;
        }
    }

    fn sub_magnitude(&mut self, mag: u128, offset: u32) {
        let (limb, bit) = ((offset / 64) as usize, offset % 64);
        let wide = spread(mag, bit);
        let mut borrow = 0u64;
        for (i, &w) in wide.iter().enumerate() {
            if limb + i >= self.limbs.len() {
                break;
            }
            let (d1, b1) = self.limbs[limb + i].overflowing_sub(w);
            let (d2, b2) = d1.overflowing_sub(borrow);
            self.limbs[limb + i] = d2;
            borrow = (b1 as u64) + (b2 as u64);
        }
        let mut i = limb + 3;
        while borrow != 0 && i < self.limbs.len() {
            let (d, b) = self.limbs[i].overflowing_sub(borrow);
            self.limbs[i] = d;
            borrow = b as u64;
            i += 1;
        }
    }

    /// The register content as an exact signed dyadic value:
    /// `(negative, magnitude, exponent of the last place)`.
    /// `None` when the quire is NaR.
    pub fn to_dyadic(&self) -> Option<(bool, BigUint, i64)> {
        if self.nar {
            return None;
        }
        let negative = self.limbs.last().unwrap() >> 63 == 1;
        let mag = if negative {
            let mut neg = Vec::with_capacity(self.limbs.len());
            let mut carry = 1u64;
            for &l in &self.limbs {
                let (s, c) = (!l).overflowing_add(carry);
                neg.push(s);
                carry = c as u64;
            }
            BigUint::from_slice(&limbs_to_u32(&neg))
        } else {
            BigUint::from_slice(&limbs_to_u32(&self.limbs))
        };
        Some((negative, mag, self.unit_exp()))
    }

    /// Drains the accumulated sum with a single rounding.
    pub fn to_posit(&self) -> PositValue {
        match self.to_dyadic() {
            None => PositValue::nar(self.cfg),
            Some((negative, mag, exp)) => encode_big(negative, &mag, exp, false, self.cfg),
        }
    }
}

/// Spreads `mag << bit` (a value of at most 192 bits) over three 64-bit words.
fn spread(mag: u128, bit: u32) -> [u64; 3] {
    debug_assert!(bit < 64);
    let hi = if bit == 0 { 0 } else { (mag >> (128 - bit)) as u64 };
    [(mag << bit) as u64, (mag >> (64 - bit)) as u64, hi]
}

fn limbs_to_u32(limbs: &[u64]) -> Vec<u32> {
    let mut out = Vec::with_capacity(limbs.len() * 2);
    for &l in limbs {
        out.push(l as u32);
        out.push((l >> 32) as u32);
    }
    out
}
