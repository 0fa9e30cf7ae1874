//! Exact rational reference model for posit arithmetic.
//!
//! Everything here is deliberately slow and literal. Bit patterns are decoded
//! field by field into `BigRational` values, rounding is a linear/binary walk
//! over neighbouring patterns, and linear algebra is Gaussian elimination over
//! exact rationals. None of this shares code with the production kernel; the
//! point is to have an independent route to the same answers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Number of bits and exponent-field width of a posit format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Format {
    pub nbits: u32,
    pub es: u32,
}

impl Format {
    pub fn standard(nbits: u32) -> Self {
        Format { nbits, es: 2 }
    }

    pub fn mask(self) -> u64 {
        if self.nbits == 64 {
            u64::MAX
        } else {
            (1u64 << self.nbits) - 1
        }
    }

    pub fn nar_bits(self) -> u64 {
        1u64 << (self.nbits - 1)
    }

    pub fn maxpos_bits(self) -> u64 {
        self.nar_bits() - 1
    }

    /// Largest representable magnitude, 2^((n-2)*2^es).
    pub fn maxpos(self) -> BigRational {
        pow2(((self.nbits as i64) - 2) << self.es)
    }

    /// Smallest positive magnitude, 2^(-(n-2)*2^es).
    pub fn minpos(self) -> BigRational {
        pow2(-(((self.nbits as i64) - 2) << self.es))
    }
}

/// 2^e as an exact rational, for any sign of `e`.
pub fn pow2(e: i64) -> BigRational {
    let one = BigInt::one();
    if e >= 0 {
        BigRational::from_integer(one << e as usize)
    } else {
        BigRational::new(one, BigInt::one() << (-e) as usize)
    }
}

fn twos_complement(bits: u64, f: Format) -> u64 {
    bits.wrapping_neg() & f.mask()
}

/// Decodes a bit pattern by reading the sign, regime, exponent and fraction
/// fields directly off the raw pattern and evaluating
/// `((1 - 3s) + f) * 2^((1 - 2s)(k*2^es + e + s))`.
///
/// Returns `None` for NaR. Zero decodes to `Some(0)`.
pub fn decode(bits: u64, f: Format) -> Option<BigRational> {
    let bits = bits & f.mask();
    if bits == 0 {
        return Some(BigRational::zero());
    }
    if bits == f.nar_bits() {
        return None;
    }
    let n = f.nbits;
    let s = (bits >> (n - 1)) & 1;
    let body_len = n - 1;
    let body = bits & ((1u64 << body_len) - 1);

    // Regime: run of identical bits, optionally terminated.
    let first = (body >> (body_len - 1)) & 1;
    let mut run = 0u32;
    for i in (0..body_len).rev() {
        if (body >> i) & 1 == first {
            run += 1;
        } else {
            break;
        }
    }
    let k: i64 = if first == 1 {
        run as i64 - 1
    } else {
        -(run as i64)
    };
    let consumed = (run + 1).min(body_len);
    let rest = body_len - consumed;

    // Exponent: up to `es` bits, missing low bits read as zero.
    let avail_e = f.es.min(rest);
    let e_bits = if avail_e == 0 {
        0
    } else {
        (body >> (rest - avail_e)) & ((1u64 << avail_e) - 1)
    };
    let e = (e_bits << (f.es - avail_e)) as i64;

    let m = rest - avail_e;
    let frac_bits = if m == 0 { 0 } else { body & ((1u64 << m) - 1) };
    // f = frac / 2^m in [0, 1)
    let frac = BigRational::new(BigInt::from(frac_bits), BigInt::one() << m as usize);

    let s_i = s as i64;
    let lead = BigRational::from_integer(BigInt::from(1 - 3 * s_i));
    let scale_sign = 1 - 2 * s_i;
    let scale = scale_sign * ((k << f.es) + e + s_i);
    Some((lead + frac) * pow2(scale))
}

/// Rounds an exact rational to the nearest posit pattern: ties to the even
/// pattern, magnitudes beyond the dynamic range pinned to maxpos/minpos, and
/// nonzero values never rounded to zero or NaR.
pub fn encode(q: &BigRational, f: Format) -> u64 {
    if q.is_zero() {
        return 0;
    }
    let neg = q.is_negative();
    let mag = q.abs();
    let bits = encode_positive(&mag, f);
    if neg {
        twos_complement(bits, f)
    } else {
        bits
    }
}

fn encode_positive(mag: &BigRational, f: Format) -> u64 {
    let maxpos = f.maxpos();
    let minpos = f.minpos();
    if *mag >= maxpos {
        return f.maxpos_bits();
    }
    if *mag <= minpos {
        return 1;
    }
    // Binary search for the largest pattern whose value is <= mag. Positive
    // patterns are 1..=maxpos_bits and decode monotonically.
    let mut lo = 1u64;
    let mut hi = f.maxpos_bits();
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        let v = decode(mid, f).unwrap();
        if v <= *mag {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let below = decode(lo, f).unwrap();
    if below == *mag {
        return lo;
    }
    let above = decode(lo + 1, f).unwrap();
    let two = BigRational::from_integer(BigInt::from(2));
    let twice = mag * two;
    let sum = &below + &above;
    if twice < sum {
        lo
    } else if twice > sum {
        lo + 1
    } else if lo & 1 == 0 {
        lo
    } else {
        lo + 1
    }
}

/// Exact arithmetic followed by one rounding; `None` operands or results mean NaR.
pub fn arith(a: u64, b: u64, op: char, f: Format) -> u64 {
    let (va, vb) = match (decode(a, f), decode(b, f)) {
        (Some(va), Some(vb)) => (va, vb),
        _ => return f.nar_bits(),
    };
    let exact = match op {
        '+' => va + vb,
        '-' => va - vb,
        '*' => va * vb,
        '/' => {
            if vb.is_zero() {
                return f.nar_bits();
            }
            va / vb
        }
        _ => panic!("unknown op {op}"),
    };
    encode(&exact, f)
}

/// Exact dot product of two rational vectors.
pub fn dot_exact(a: &[BigRational], b: &[BigRational]) -> BigRational {
    assert_eq!(a.len(), b.len());
    let mut acc = BigRational::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Parses a decimal string (integer, fixed-point or scientific) into an exact
/// rational. Panics on malformed input; the oracle only sees trusted fixtures.
pub fn decimal(s: &str) -> BigRational {
    let s = s.trim();
    let (mant, exp10) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().expect("bad exponent")),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let num: BigUint = digits.parse().expect("bad digits");
    let mut num = BigInt::from(num);
    if neg {
        num = -num;
    }
    let e = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    if e >= 0 {
        BigRational::from_integer(num * ten.pow(e as u32))
    } else {
        BigRational::new(num, ten.pow((-e) as u32))
    }
}

/// Infinity norm of a rational matrix (max absolute row sum).
pub fn inf_norm(a: &[Vec<BigRational>]) -> BigRational {
    let mut best = BigRational::zero();
    for row in a {
        let mut sum = BigRational::zero();
        for v in row {
            sum += v.abs();
        }
        if sum > best {
            best = sum;
        }
    }
    best
}

/// Infinity norm of a rational vector.
pub fn inf_norm_vec(v: &[BigRational]) -> BigRational {
    let mut best = BigRational::zero();
    for x in v {
        let a = x.abs();
        if a > best {
            best = a;
        }
    }
    best
}

/// Solves Ax = b exactly by Gaussian elimination with partial pivoting.
/// Panics if the matrix is singular.
pub fn solve_exact(a: &[Vec<BigRational>], b: &[BigRational]) -> Vec<BigRational> {
    let n = b.len();
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i][k].abs().cmp(&m[j][k].abs()))
            .unwrap();
        assert!(!m[piv][k].is_zero(), "singular matrix in oracle solve");
        m.swap(k, piv);
        rhs.swap(k, piv);
        for i in k + 1..n {
            let l = &m[i][k] / &m[k][k];
            for j in k..n {
                let t = &l * &m[k][j];
                m[i][j] -= t;
            }
            let t = &l * &rhs[k];
            rhs[i] -= t;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i].clone();
        for j in i + 1..n {
            s -= &m[i][j] * &x[j];
        }
        x[i] = s / &m[i][i];
    }
    x
}

/// Exact inverse, column by column. Intended for small matrices only.
pub fn inverse_exact(a: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![BigRational::zero(); n];
        e[j] = BigRational::one();
        cols.push(solve_exact(a, &e));
    }
    // transpose columns into rows
    (0..n)
        .map(|i| (0..n).map(|j| cols[j][i].clone()).collect())
        .collect()
}

/// Exact infinity-norm condition number via the exact inverse.
pub fn cond_exact(a: &[Vec<BigRational>]) -> BigRational {
    inf_norm(a) * inf_norm(&inverse_exact(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_basics() {
        let f = Format::standard(16);
        assert_eq!(decode(0x0000, f), Some(BigRational::zero()));
        assert_eq!(decode(0x8000, f), None);
        assert_eq!(decode(0x4000, f), Some(BigRational::one()));
        // 0x02EE = 1.859375 * 2^-19 = 238 / 2^26
        let v = decode(0x02EE, f).unwrap();
        assert_eq!(v, BigRational::new(BigInt::from(238), BigInt::one() << 26));
    }

    #[test]
    fn encode_round_trip_p8() {
        let f = Format::standard(8);
        for bits in 0..=255u64 {
            if bits == f.nar_bits() {
                continue;
            }
            let v = decode(bits, f).unwrap();
            assert_eq!(encode(&v, f), bits, "pattern {bits:#x}");
        }
    }

    #[test]
    fn decimal_parse() {
        assert_eq!(decimal("2.5"), BigRational::new(BigInt::from(5), BigInt::from(2)));
        assert_eq!(decimal("-1e3"), BigRational::from_integer(BigInt::from(-1000)));
        assert_eq!(
            decimal("7.71e-31"),
            BigRational::new(BigInt::from(771u32), BigInt::from(10u8).pow(33).into())
        );
    }

    #[test]
    fn solve_2x2() {
        let two = BigRational::from_integer(BigInt::from(2));
        let four = BigRational::from_integer(BigInt::from(4));
        let a = vec![
            vec![two.clone(), BigRational::zero()],
            vec![BigRational::zero(), four.clone()],
        ];
        let b = vec![two, four];
        let x = solve_exact(&a, &b);
        assert_eq!(x, vec![BigRational::one(), BigRational::one()]);
    }
}
