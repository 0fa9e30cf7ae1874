//! Condition-number estimation and the high-precision diagnostic value.

use super::{inf_norm_matrix, inf_norm_vector, lu_solve, DenseMatrix, DenseVector, LinalgError};
use super::{lu_factor, LUFactors};
use crate::posit::{PositValue, Quire, P64};

/// Default order cap for [`cond_exact`].
pub const DEFAULT_COND_CAP: usize = 512;

/// Order-of-magnitude estimate of the infinity-norm condition number from
/// existing factors: `‖A‖ * ‖y‖ / ‖x‖` where `A y = x` and `x` is grown by
/// the classic heuristic of solving `Uᵀ z = d` with `d` of ±1 entries chosen
/// to maximize the solution.
pub fn cond_estimate(f: &LUFactors, a: &DenseMatrix) -> Result<PositValue, LinalgError> {
    let cfg = a.config();
    assert!(f.config().nbits() <= cfg.nbits(), "factors wider than the matrix");
    let wide;
    let f = if f.config() == cfg {
        f
    } else {
        wide = f.widen(cfg);
        &wide
    };
    let n = f.order();
    let one = PositValue::one(cfg);
    let mut q = Quire::new(cfg);

    // Uᵀ z = d, growing z: at each step take d_k = ±1, whichever candidate
    // is larger in magnitude.
    let mut z = DenseVector::zeros(n, cfg);
    for k in 0..n {
        let d = f.u(k, k);
        if d.is_zero() {
            return Err(LinalgError::Singular { column: k });
        }
        q.clear();
        for i in 0..k {
            q.accumulate(f.u(i, k).neg(), z.get(i));
        }
        let s = q.to_posit();
        let plus = (s + one) / d;
        let minus = (s - one) / d;
        z.set(k, if plus.abs().total_cmp(&minus.abs()).is_ge() { plus } else { minus });
    }

    // Lᵀ v = z (unit diagonal), then undo the row permutation.
    let mut v = DenseVector::zeros(n, cfg);
    for i in (0..n).rev() {
        q.clear();
        q.add_posit(z.get(i));
        for j in i + 1..n {
            q.accumulate(f.l(j, i).neg(), v.get(j));
        }
        v.set(i, q.to_posit());
    }
    let mut w = DenseVector::zeros(n, cfg);
    for i in 0..n {
        w.set(f.permutation()[i], v.get(i));
    }

    // Normalize and take one solve through A.
    let wn = inf_norm_vector(&w);
    if wn.is_zero() {
        return Err(LinalgError::Singular { column: 0 });
    }
    let mut x = DenseVector::zeros(n, cfg);
    for i in 0..n {
        x.set(i, w.get(i) / wn);
    }
    let y = lu_solve(f, &x, cfg)?;
    let ratio = inf_norm_vector(&y) / inf_norm_vector(&x);
    Ok(inf_norm_matrix(a) * ratio)
}

/// Diagnostic condition number `‖A‖∞ ‖A⁻¹‖∞`, with the inverse computed
/// column by column in 64-bit posit arithmetic. Quadratic memory, cubic time;
/// refuses orders above `cap`.
pub fn cond_exact(a: &DenseMatrix, cap: usize) -> Result<f64, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Dimension("cond_exact needs a square matrix".into()));
    }
    let n = a.rows();
    if n > cap {
        return Err(LinalgError::Dimension(format!(
            "order {n} above the diagnostic cap {cap}"
        )));
    }
    let a64 = if a.config() == P64 { a.clone() } else { a.widen(P64) };
    let f = lu_factor(&a64)?;
    // Row sums of |A⁻¹| accumulate across columns, one quire per row.
    let mut rows: Vec<Quire> = (0..n).map(|_| Quire::new(P64)).collect();
    let mut e = DenseVector::zeros(n, P64);
    let one = PositValue::one(P64);
    for j in 0..n {
        e.set(j, one);
        let col = lu_solve(&f, &e, P64)?;
        e.set(j, PositValue::zero(P64));
        for i in 0..n {
            rows[i].add_posit(col.get(i).abs());
        }
    }
    let mut inv_norm = PositValue::zero(P64);
    for q in &rows {
        let s = q.to_posit();
        if s.total_cmp(&inv_norm).is_gt() {
            inv_norm = s;
        }
    }
    Ok((inf_norm_matrix(&a64) * inv_norm).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posit::P32;

    #[test]
    fn identity_estimates_one() {
        let id = DenseMatrix::identity(5, P32);
        let f = lu_factor(&id).unwrap();
        let est = cond_estimate(&f, &id).unwrap().to_f64();
        assert_eq!(est, 1.0);
        assert_eq!(cond_exact(&id, DEFAULT_COND_CAP).unwrap(), 1.0);
    }

    #[test]
    fn scaled_diagonal_estimate_is_in_range() {
        let a = DenseMatrix::from_f64s(&[&[1.0, 0.0], &[0.0, 1e-6]], P32);
        let f = lu_factor(&a).unwrap();
        let est = cond_estimate(&f, &a).unwrap().to_f64();
        assert!((1e5..=1e7).contains(&est), "estimate {est}");
        let exact = cond_exact(&a, DEFAULT_COND_CAP).unwrap();
        let expect = 1e6;
        assert!((exact - expect).abs() / expect < 1e-6, "exact {exact}");
    }

    #[test]
    fn order_cap_is_enforced() {
        let a = DenseMatrix::identity(3, P32);
        assert!(matches!(cond_exact(&a, 2), Err(LinalgError::Dimension(_))));
    }
}
