//! Closed-form properties of a standard posit format.

use super::{PositConfig, PositValue};

/// Derived constants of a standard (es = 2) format.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormatProperties {
    pub nbits: u32,
    pub es: u32,
    /// minpos = 2^minpos_exp2 with minpos_exp2 = 8 - 4n.
    pub minpos_exp2: i64,
    /// maxpos = 2^maxpos_exp2 with maxpos_exp2 = 4n - 8.
    pub maxpos_exp2: i64,
    /// Distance from 1.0 to the next larger value: 2^-(n-5).
    pub unit_roundoff_exp2: i64,
    /// Longest run of exactly representable consecutive integers ends here.
    pub max_consecutive_int: u64,
    /// Upper bound on fraction field length: max(0, n-5).
    pub max_fraction_bits: u32,
    /// Quire register width, 16n bits.
    pub quire_bits: u32,
    /// Quire sum limit 2^(23+4n), reported as the exponent.
    pub quire_sum_limit_exp2: i64,
    /// Number of values in [0, 1]: 2^(n-2) + 1.
    pub unit_interval_count: u64,
}

impl FormatProperties {
    pub fn minpos(&self) -> f64 {
        2f64.powi(self.minpos_exp2 as i32)
    }

    pub fn maxpos(&self) -> f64 {
        2f64.powi(self.maxpos_exp2 as i32)
    }

    pub fn unit_roundoff(&self) -> f64 {
        2f64.powi(self.unit_roundoff_exp2 as i32)
    }
}

/// Closed-form constants for a standard format. The unit roundoff is also
/// derivable as decode(successor of 1.0) - 1; the two agree and the tests
/// check it.
pub fn format_properties(cfg: PositConfig) -> FormatProperties {
    assert!(cfg.is_standard(), "properties are defined for es = 2");
    let n = cfg.nbits() as i64;
    FormatProperties {
        nbits: cfg.nbits(),
        es: cfg.es(),
        minpos_exp2: 8 - 4 * n,
        maxpos_exp2: 4 * n - 8,
        unit_roundoff_exp2: -(n - 5).max(0),
        max_consecutive_int: 1u64 << (4 * (n - 3) / 5),
        max_fraction_bits: (n - 5).max(0) as u32,
        quire_bits: 16 * cfg.nbits(),
        quire_sum_limit_exp2: 23 + 4 * n,
        unit_interval_count: (1u64 << (n - 2)) + 1,
    }
}

/// The value one ulp above 1.0, by pattern increment.
pub fn successor_of_one(cfg: PositConfig) -> PositValue {
    let one = PositValue::one(cfg);
    PositValue::from_bits(one.bits() + 1, cfg)
}
