//! Shared helpers for the integration tests: exact-rational views of posit
//! containers and seeded random problem generators.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use posit_ir::posit::Decoded;
use posit_ir::{DenseMatrix, DenseVector, PositConfig, PositValue};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Exact rational value of a posit. Panics on NaR.
pub fn rational_of(p: PositValue) -> BigRational {
    match p.decode() {
        Decoded::Zero => BigRational::zero(),
        Decoded::NaR => panic!("NaR has no rational value"),
        Decoded::Finite { negative, mantissa, exponent } => {
            let v = BigRational::from_integer(BigInt::from(mantissa)) * posit_oracle::pow2(exponent);
            if negative {
                -v
            } else {
                v
            }
        }
    }
}

pub fn matrix_rationals(a: &DenseMatrix) -> Vec<Vec<BigRational>> {
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| rational_of(a.get(i, j))).collect())
        .collect()
}

pub fn vector_rationals(v: &DenseVector) -> Vec<BigRational> {
    v.iter().map(rational_of).collect()
}

/// Uniform random matrix with entries in [-1, 1].
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, cfg: PositConfig) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n, cfg);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, PositValue::from_f64(rng.gen_range(-1.0..=1.0), cfg));
        }
    }
    m
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, cfg: PositConfig) -> DenseVector {
    let mut v = DenseVector::zeros(n, cfg);
    for i in 0..n {
        v.set(i, PositValue::from_f64(rng.gen_range(-1.0..=1.0), cfg));
    }
    v
}

/// A matrix with condition number around `target` built as U diag(s) V with
/// near-orthogonal U, V from Gram-Schmidt over random Gaussians and singular
/// values log-spaced from 1 down to 1/target.
pub fn conditioned_matrix(rng: &mut ChaCha8Rng, n: usize, target: f64, cfg: PositConfig) -> DenseMatrix {
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    let mut m = DenseMatrix::zeros(n, n, cfg);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0f64;
            for k in 0..n {
                let s = target.powf(-(k as f64) / (n as f64 - 1.0));
                acc += u[i][k] * s * v[k][j];
            }
            m.set(i, j, PositValue::from_f64(acc, cfg));
        }
    }
    m
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    // Gaussians via Box-Muller, then modified Gram-Schmidt on the rows.
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                    let u2: f64 = rng.gen_range(0.0..1.0);
                    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                })
                .collect()
        })
        .collect();
    for i in 0..n {
        for k in 0..i {
            let dot: f64 = (0..n).map(|j| a[i][j] * a[k][j]).sum();
            for j in 0..n {
                a[i][j] -= dot * a[k][j];
            }
        }
        let norm: f64 = (0..n).map(|j| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        for j in 0..n {
            a[i][j] /= norm;
        }
    }
    a
}
