//! End-to-end checks of the linear algebra and the refinement pipeline
//! against exact rational computation.

mod common;

use common::*;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use posit_ir::cast::{self, Ratio64};
use posit_ir::ir::{forward_error, ir_solve, ir_solve_classic, CastMode, SolveSettings};
use posit_ir::linalg::{lu_factor, lu_solve, residual_fused};
use posit_ir::suite::build_rhs;
use posit_ir::{DenseMatrix, DenseVector, P16, P32};
use posit_oracle as oracle;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn p32_u() -> BigRational {
    oracle::pow2(-27)
}

#[test]
fn lu_reconstruction_error_is_within_bound() {
    // |P A - L U| <= 4 u ||A|| on random 5x5 matrices, measured exactly.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..30 {
        let a = random_matrix(&mut rng, 5, P32);
        let f = lu_factor(&a).unwrap();
        let ar = matrix_rationals(&a);
        let norm_a = oracle::inf_norm(&ar);
        let bound = p32_u() * BigRational::from_integer(4.into()) * &norm_a;
        for i in 0..5 {
            for j in 0..5 {
                let mut lu = BigRational::zero();
                for k in 0..5 {
                    lu += rational_of(f.l(i, k)) * rational_of(f.u(k, j));
                }
                let diff = (&ar[f.permutation()[i]][j] - &lu).abs();
                assert!(
                    diff <= bound,
                    "round {round}: ({i},{j}) error {} vs bound {}",
                    diff.to_f64().unwrap(),
                    bound.to_f64().unwrap()
                );
            }
        }
    }
}

#[test]
fn lu_solve_matches_exact_solution() {
    // Relative error <= 10 u kappa on random 8x8 systems.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for round in 0..20 {
        let a = random_matrix(&mut rng, 8, P32);
        let b = random_vector(&mut rng, 8, P32);
        let f = match lu_factor(&a) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let x = lu_solve(&f, &b, P32).unwrap();
        let ar = matrix_rationals(&a);
        let br = vector_rationals(&b);
        let exact = oracle::solve_exact(&ar, &br);
        let kappa = oracle::cond_exact(&ar);
        let xr = vector_rationals(&x);
        let diff: Vec<BigRational> = exact.iter().zip(&xr).map(|(e, g)| e - g).collect();
        let rel = oracle::inf_norm_vec(&diff) / oracle::inf_norm_vec(&exact);
        let bound = BigRational::from_integer(10.into()) * p32_u() * kappa;
        assert!(
            rel <= bound,
            "round {round}: rel {} vs bound {}",
            rel.to_f64().unwrap(),
            bound.to_f64().unwrap()
        );
    }
}

#[test]
fn residual_matches_oracle_with_one_rounding() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let a = random_matrix(&mut rng, 6, P32);
        let x = random_vector(&mut rng, 6, P32);
        let b = random_vector(&mut rng, 6, P32);
        let r = residual_fused(&a, &x, &b);
        let ar = matrix_rationals(&a);
        let xr = vector_rationals(&x);
        let br = vector_rationals(&b);
        for i in 0..6 {
            let exact = &br[i] - oracle::dot_exact(&ar[i], &xr);
            let want = oracle::encode(&exact, oracle::Format::standard(32));
            assert_eq!(r.get(i).bits(), want, "entry {i}");
        }
    }
}

#[test]
fn classic_refinement_reaches_working_accuracy() {
    // kappa ~ 1e6 system of order 50: converges within 10 corrections and
    // the forward error against the exact rational solution is tiny.
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let a = conditioned_matrix(&mut rng, 50, 1e6, P32);
    let b = build_rhs(&a);
    let s = SolveSettings { max_iterations: 50, ..SolveSettings::default() };
    let (x, rep) = ir_solve_classic(&a, &b, &s).unwrap();
    assert!(rep.converged, "did not converge: {:?}", rep.residual_norms);
    assert!(rep.iterations <= 10, "iterations {}", rep.iterations);

    // The stopping rule implies ||x - x*|| <= eps ||A^-1|| (||A|| ||x|| + ||b||).
    // The error side is exact; the bound side takes ||A^-1|| from the 64-bit
    // diagnostic (accurate to ~1e-12 here) with a small safety factor. The
    // criterion stops well before working accuracy on a system this
    // ill-conditioned, so plain eps-level error is not attainable.
    let ar = matrix_rationals(&a);
    let br = vector_rationals(&b);
    let exact = oracle::solve_exact(&ar, &br);
    let xr = vector_rationals(&x);
    let diff: Vec<BigRational> = exact.iter().zip(&xr).map(|(e, g)| e - g).collect();
    let err = oracle::inf_norm_vec(&diff).to_f64().unwrap();
    let norm_a = oracle::inf_norm(&ar).to_f64().unwrap();
    let inv_norm = posit_ir::linalg::cond_exact(&a, 512).unwrap() / norm_a;
    let xn = oracle::inf_norm_vec(&xr).to_f64().unwrap();
    let bn = oracle::inf_norm_vec(&br).to_f64().unwrap();
    let bound = 1e-8 * inv_norm * (norm_a * xn + bn) * 1.01;
    assert!(err <= bound, "forward error {err} above the criterion-implied bound {bound}");
    let rel = err / oracle::inf_norm_vec(&exact).to_f64().unwrap();
    assert!(rel <= 1e-2, "forward error {rel}");
}

#[test]
fn mixed_equals_classic_when_precisions_coincide() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let a = random_matrix(&mut rng, 10, P32);
    let b = random_vector(&mut rng, 10, P32);
    let s = SolveSettings {
        low: P32,
        mode: CastMode::RoundClamp,
        max_iterations: 30,
        ..SolveSettings::default()
    };
    let (x1, r1) = ir_solve(&a, &b, &s).unwrap();
    let (x2, r2) = ir_solve_classic(&a, &b, &s).unwrap();
    assert_eq!(x1, x2, "iterates diverged between the two algorithms");
    assert_eq!(r1.iterations, r2.iterations);
    assert_eq!(r1.residual_norms, r2.residual_norms);
    assert_eq!(r1.criterion_rhs, r2.criterion_rhs);
    assert_eq!(r1.converged, r2.converged);
}

#[test]
fn reports_are_bit_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let a = random_matrix(&mut rng, 12, P32);
    let b = random_vector(&mut rng, 12, P32);
    let s = SolveSettings::default();
    let (x1, r1) = ir_solve(&a, &b, &s).unwrap();
    let (x2, r2) = ir_solve(&a, &b, &s).unwrap();
    assert_eq!(x1, x2);
    assert_eq!(r1.residual_norms, r2.residual_norms);
    assert_eq!(r1.criterion_rhs, r2.criterion_rhs);
    assert_eq!(r1.cond_estimate_scaled, r2.cond_estimate_scaled);
}

#[test]
fn converged_reports_satisfy_the_criterion() {
    // Monotone-or-stop: a converged report's last residual satisfies the
    // criterion as recorded.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..5 {
        let a = random_matrix(&mut rng, 8, P32);
        let b = random_vector(&mut rng, 8, P32);
        if let Ok((_, rep)) = ir_solve(&a, &b, &SolveSettings::default()) {
            assert_eq!(rep.residual_norms.len(), rep.iterations + 1);
            if rep.converged {
                let last = *rep.residual_norms.last().unwrap();
                let rhs = *rep.criterion_rhs.last().unwrap();
                assert!(last <= rhs, "{last} > {rhs}");
            }
        }
    }
}

#[test]
fn scalar_scaling_preserves_the_exact_solution() {
    // In exact arithmetic, (mu A) x = mu b has the same solution as A x = b.
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let a = random_matrix(&mut rng, 4, P32);
    let b = random_vector(&mut rng, 4, P32);
    let ar = matrix_rationals(&a);
    let br = vector_rationals(&b);
    let mu = BigRational::new(1.into(), 16.into());
    let scaled_a: Vec<Vec<BigRational>> = ar
        .iter()
        .map(|row| row.iter().map(|v| v * &mu).collect())
        .collect();
    let scaled_b: Vec<BigRational> = br.iter().map(|v| v * &mu).collect();
    assert_eq!(oracle::solve_exact(&ar, &br), oracle::solve_exact(&scaled_a, &scaled_b));

    // The posit pipeline scales each entry with one rounding; note that even
    // a power-of-two factor can round, because the fraction field shrinks as
    // the regime grows.
    let m16 = Ratio64::new(1, 16).unwrap();
    let sa = cast::scale_matrix(&a, m16);
    let f32fmt = oracle::Format::standard(32);
    for (i, j, v) in sa.entries() {
        let want = oracle::encode(&(&ar[i][j] * &mu), f32fmt);
        assert_eq!(v.bits(), want, "entry ({i}, {j})");
    }
}

#[test]
fn equilibrated_pipeline_recovers_the_original_solution_exactly() {
    // Replace every arithmetic step by exact rationals: scale with the
    // stored D1, D2, mu, solve the scaled system, recover with D2. The
    // result must equal the exact solution of the original system.
    let a = DenseMatrix::from_f64s(
        &[
            &[100.0, 1.0, 0.0, 2.0],
            &[1.0, 0.25, -3.0, 0.0],
            &[0.5, -1.0, 8.0, 4.0],
            &[2.0, 0.0, 1.0, 0.125],
        ],
        P32,
    );
    let b = DenseVector::from_f64s(&[1.0, 2.0, -1.0, 0.5], P32);
    let mu = Ratio64::new(1, 16).unwrap();
    let (_, rec, _) = cast::equilibrate(&a, mu, false, P16).unwrap();
    let d1 = vector_rationals(rec.d1.as_ref().unwrap());
    let d2 = vector_rationals(rec.d2.as_ref().unwrap());
    let mur = BigRational::new(1.into(), 16.into());

    let ar = matrix_rationals(&a);
    let br = vector_rationals(&b);
    let n = 4;
    let scaled_a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| &mur * &ar[i][j] * &d2[j] / &d1[i]).collect())
        .collect();
    let scaled_b: Vec<BigRational> = (0..n).map(|i| &mur * &br[i] / &d1[i]).collect();
    let y = oracle::solve_exact(&scaled_a, &scaled_b);
    let recovered: Vec<BigRational> = (0..n).map(|i| &d2[i] * &y[i]).collect();
    assert_eq!(recovered, oracle::solve_exact(&ar, &br));
}

#[test]
fn forward_error_of_recovered_solutions_is_small_on_easy_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let a = conditioned_matrix(&mut rng, 20, 1e3, P32);
    let b = build_rhs(&a);
    for mode in [CastMode::RoundClamp, CastMode::ScaleRound, CastMode::Equilibrate] {
        let s = SolveSettings { mode, ..SolveSettings::default() };
        let (x, rep) = ir_solve(&a, &b, &s).unwrap();
        assert!(rep.converged, "{mode:?} diverged");
        let fe = forward_error(&x, &DenseVector::ones(20, P32));
        assert!(fe < 1e-5, "{mode:?}: forward error {fe}");
    }
}
