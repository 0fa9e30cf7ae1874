//! Cross-validation of the posit kernel against the exact rational oracle.
//!
//! The oracle decodes patterns by evaluating the sign-folded field formula
//! directly, so agreement here also settles that the two's-complement
//! treatment of negatives used by the kernel is equivalent to it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use posit_ir::posit::{encode_rational, PositConfig, PositValue};
use posit_ir::{P16, P32, P8};
use posit_oracle as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fmt_of(cfg: PositConfig) -> oracle::Format {
    oracle::Format { nbits: cfg.nbits(), es: cfg.es() }
}

/// Exact rational value of a posit via the kernel's decode.
fn kernel_value(p: PositValue) -> Option<BigRational> {
    use posit_ir::posit::Decoded;
    match p.decode() {
        Decoded::NaR => None,
        Decoded::Zero => Some(BigRational::zero()),
        Decoded::Finite { negative, mantissa, exponent } => {
            let m = BigRational::from_integer(BigInt::from(mantissa));
            let v = m * oracle::pow2(exponent);
            Some(if negative { -v } else { v })
        }
    }
}

#[test]
fn decode_matches_field_formula_exhaustively() {
    for es in 0..=3u32 {
        let cfg = PositConfig::with_es(8, es);
        let f = oracle::Format { nbits: 8, es };
        for bits in 0..=0xFFu64 {
            let p = PositValue::from_bits(bits, cfg);
            assert_eq!(
                kernel_value(p),
                oracle::decode(bits, f),
                "bits {bits:#04x} es {es}"
            );
        }
    }
    let f = fmt_of(P16);
    for bits in 0..=0xFFFFu64 {
        let p = PositValue::from_bits(bits, P16);
        assert_eq!(kernel_value(p), oracle::decode(bits, f), "bits {bits:#06x}");
    }
}

#[test]
fn round_trip_and_monotonicity_up_to_16_bits() {
    for nbits in 2..=16u32 {
        let cfg = PositConfig::standard(nbits);
        let mask = if nbits == 64 { u64::MAX } else { (1u64 << nbits) - 1 };
        let mut prev: Option<BigRational> = None;
        // Walk patterns in signed order: NaR, most negative, ..., maxpos.
        for offset in 0..(1u64 << nbits) {
            let bits = (cfg_nar(nbits) + offset) & mask;
            let p = PositValue::from_bits(bits, cfg);
            match kernel_value(p) {
                None => assert_eq!(bits, cfg_nar(nbits)),
                Some(v) => {
                    // decode then re-encode is the identity
                    let re = reencode(p);
                    assert_eq!(re.bits(), bits, "round trip at {bits:#x} n={nbits}");
                    if let Some(pv) = prev.take() {
                        assert!(pv < v, "monotonicity at {bits:#x} n={nbits}");
                    }
                    prev = Some(v);
                }
            }
        }
    }
}

fn cfg_nar(nbits: u32) -> u64 {
    1u64 << (nbits - 1)
}

fn reencode(p: PositValue) -> PositValue {
    use posit_ir::posit::Decoded;
    match p.decode() {
        Decoded::Zero => PositValue::zero(p.config()),
        Decoded::NaR => PositValue::nar(p.config()),
        Decoded::Finite { .. } => p.round_to(p.config()),
    }
}

#[test]
fn negation_symmetry_exhaustive_p16() {
    for bits in 0..=0xFFFFu64 {
        let p = PositValue::from_bits(bits, P16);
        let (v, nv) = (kernel_value(p), kernel_value(p.neg()));
        match (v, nv) {
            (None, None) => {}
            (Some(a), Some(b)) => assert_eq!(a, -b, "bits {bits:#06x}"),
            _ => panic!("negation changed NaR-ness at {bits:#06x}"),
        }
    }
}

#[test]
fn arithmetic_matches_oracle_exhaustively_p8() {
    let f = fmt_of(P8);
    for a in 0..=0xFFu64 {
        let pa = PositValue::from_bits(a, P8);
        for b in 0..=0xFFu64 {
            let pb = PositValue::from_bits(b, P8);
            assert_eq!((pa + pb).bits(), oracle::arith(a, b, '+', f), "{a:#x} + {b:#x}");
            assert_eq!((pa - pb).bits(), oracle::arith(a, b, '-', f), "{a:#x} - {b:#x}");
            assert_eq!((pa * pb).bits(), oracle::arith(a, b, '*', f), "{a:#x} * {b:#x}");
            assert_eq!((pa / pb).bits(), oracle::arith(a, b, '/', f), "{a:#x} / {b:#x}");
        }
    }
}

#[test]
fn arithmetic_matches_oracle_random_p16() {
    let f = fmt_of(P16);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..20_000 {
        let a = rng.gen_range(0..=0xFFFFu64);
        let b = rng.gen_range(0..=0xFFFFu64);
        let (pa, pb) = (PositValue::from_bits(a, P16), PositValue::from_bits(b, P16));
        for (op, got) in [('+', pa + pb), ('-', pa - pb), ('*', pa * pb), ('/', pa / pb)] {
            assert_eq!(got.bits(), oracle::arith(a, b, op, f), "{a:#x} {op} {b:#x}");
        }
    }
}

#[test]
fn rational_encode_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for cfg in [P8, P16, P32] {
        let f = fmt_of(cfg);
        for _ in 0..2_000 {
            let num: u64 = rng.gen_range(1..u64::MAX);
            let den: u64 = rng.gen_range(1..u64::MAX);
            let neg: bool = rng.gen();
            let got = encode_rational(
                neg,
                &num.into(),
                &den.into(),
                cfg,
            );
            let q = BigRational::new(BigInt::from(num), BigInt::from(den));
            let q = if neg { -q } else { q };
            assert_eq!(got.bits(), oracle::encode(&q, f), "{num}/{den} n={}", cfg.nbits());
        }
    }
}

#[test]
fn widen_is_exact_and_narrows_back() {
    for bits in 0..=0xFFFFu64 {
        let p = PositValue::from_bits(bits, P16);
        let wide = p.widen(P32);
        assert_eq!(kernel_value(wide), kernel_value(p), "widen changed the value");
        assert_eq!(wide.round_to(P16), p, "narrow(widen) at {bits:#06x}");
    }
}

#[test]
fn quire_dot_products_match_exact_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let f = fmt_of(P32);
    for round in 0..40 {
        let len = rng.gen_range(1..=if round < 30 { 50 } else { 1000 });
        let mut q = posit_ir::Quire::new(P32);
        let mut exact = BigRational::zero();
        for _ in 0..len {
            let a = PositValue::from_bits(non_nar(&mut rng, 32), P32);
            let b = PositValue::from_bits(non_nar(&mut rng, 32), P32);
            q.accumulate(a, b);
            exact += kernel_value(a).unwrap() * kernel_value(b).unwrap();
        }
        let want = if exact.is_zero() {
            0
        } else {
            oracle::encode(&exact, f)
        };
        assert_eq!(q.to_posit().bits(), want, "round {round}");
    }
}

fn non_nar(rng: &mut ChaCha8Rng, nbits: u32) -> u64 {
    loop {
        let bits = rng.gen_range(0..(1u64 << nbits));
        if bits != 1 << (nbits - 1) {
            return bits;
        }
    }
}
