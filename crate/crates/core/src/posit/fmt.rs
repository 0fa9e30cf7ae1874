//! Printing and parsing of bit patterns: hexadecimal and the annotated
//! sign|regime|exp|fraction split.

use super::{Decoded, PositConfig, PositValue};
use std::fmt;

/// The four fields of a pattern as stored, before any complementing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldLayout {
    pub sign: u8,
    /// Regime bits including the terminating bit when present.
    pub regime: String,
    pub k: i64,
    /// Exponent bits actually stored (may be shorter than es).
    pub exponent: String,
    pub e: u64,
    /// Fraction bits actually stored.
    pub fraction: String,
}

impl FieldLayout {
    /// `0|000001|01|1101110` style rendering. Empty fields are omitted
    /// together with their separator.
    pub fn pipes(&self) -> String {
        let mut s = format!("{}|{}", self.sign, self.regime);
        if !self.exponent.is_empty() {
            s.push('|');
            s.push_str(&self.exponent);
        }
        if !self.fraction.is_empty() {
            s.push('|');
            s.push_str(&self.fraction);
        }
        s
    }
}

impl PositValue {
    /// Splits the raw pattern into its stored fields. Zero and NaR have no
    /// field structure and return a plain bit string in `regime`.
    pub fn fields(&self) -> FieldLayout {
        let n = self.cfg.nbits();
        let sign = (self.bits >> (n - 1)) as u8;
        let body_len = n - 1;
        let body = self.bits & ((1u64 << body_len) - 1);
        if self.is_zero() || self.is_nar() {
            return FieldLayout {
                sign,
                regime: bit_string(body, body_len),
                k: 0,
                exponent: String::new(),
                e: 0,
                fraction: String::new(),
            };
        }
        let first = (body >> (body_len - 1)) & 1;
        let mut run = 0;
        for i in (0..body_len).rev() {
            if (body >> i) & 1 == first {
                run += 1;
            } else {
                break;
            }
        }
        let k = if first == 1 { run as i64 - 1 } else { -(run as i64) };
        let consumed = (run + 1).min(body_len);
        let rest = body_len - consumed;
        let es = self.cfg.es();
        let avail_e = es.min(rest);
        let e_bits = if avail_e == 0 {
            0
        } else {
            (body >> (rest - avail_e)) & ((1u64 << avail_e) - 1)
        };
        let m = rest - avail_e;
        let frac = if m == 0 { 0 } else { body & ((1u64 << m) - 1) };
        FieldLayout {
            sign,
            regime: bit_string(body >> rest, consumed),
            k,
            exponent: bit_string(e_bits, avail_e),
            e: e_bits << (es - avail_e),
            fraction: bit_string(frac, m),
        }
    }

    /// Zero-padded hexadecimal of the pattern.
    pub fn to_hex(&self) -> String {
        let digits = (self.cfg.nbits() as usize + 3) / 4;
        format!("{:0digits$X}", self.bits)
    }

    /// Parses a pattern from hex (with or without `0x`).
    pub fn from_hex(s: &str, cfg: PositConfig) -> Result<Self, String> {
        let t = s.trim().trim_start_matches("0x").trim_start_matches("0X");
        let bits = u64::from_str_radix(t, 16).map_err(|e| format!("bad hex '{s}': {e}"))?;
        if bits & !cfg.mask() != 0 {
            return Err(format!("pattern {s} does not fit in {} bits", cfg.nbits()));
        }
        Ok(PositValue::from_bits(bits, cfg))
    }
}

fn bit_string(bits: u64, len: u32) -> String {
    (0..len)
        .rev()
        .map(|i| if (bits >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

impl fmt::Display for PositValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.decode() {
            Decoded::Zero => write!(f, "0"),
            Decoded::NaR => write!(f, "NaR"),
            Decoded::Finite { .. } => write!(f, "{:.9e}", self.to_f64()),
        }
    }
}

impl fmt::Debug for PositValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "posit<{},{}>(0x{} = {})",
            self.cfg.nbits(),
            self.cfg.es(),
            self.to_hex(),
            self
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posit::P16;

    #[test]
    fn worked_example_fields() {
        let p = PositValue::from_bits(0x02EE, P16);
        let f = p.fields();
        assert_eq!(f.pipes(), "0|000001|01|1101110");
        assert_eq!(f.k, -5);
        assert_eq!(f.e, 1);
    }

    #[test]
    fn hex_round_trip() {
        let p = PositValue::from_bits(0x02EE, P16);
        assert_eq!(p.to_hex(), "02EE");
        assert_eq!(PositValue::from_hex("0x02EE", P16).unwrap(), p);
        assert!(PositValue::from_hex("0x12345", P16).is_err());
        assert!(PositValue::from_hex("zz", P16).is_err());
    }

    #[test]
    fn truncated_exponent_field() {
        // 0x0003 = 0|00000000000001|1: the word ends after one stored
        // exponent bit, which is the high bit of e, so e = 2.
        let p = PositValue::from_bits(0x0003, P16);
        let f = p.fields();
        assert_eq!(f.sign, 0);
        assert_eq!(f.k, -13);
        assert_eq!(f.exponent, "1");
        assert_eq!(f.e, 2);
        assert_eq!(f.fraction, "");
    }
}
