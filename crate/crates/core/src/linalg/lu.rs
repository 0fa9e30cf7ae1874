//! LU factorization with partial pivoting and quire-fused substitution.

use super::{DenseMatrix, DenseVector, LinalgError};
use crate::posit::{PositConfig, PositValue, Quire};

/// Combined L\U storage (unit diagonal of L implicit) plus the row
/// permutation: row `i` of the factors came from row `perm[i]` of the input.
#[derive(Clone, Debug)]
pub struct LUFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LUFactors {
    pub fn order(&self) -> usize {
        self.lu.rows()
    }

    pub fn config(&self) -> PositConfig {
        self.lu.config()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn combined(&self) -> &DenseMatrix {
        &self.lu
    }

    /// L entry (unit diagonal, zero above it).
    pub fn l(&self, i: usize, j: usize) -> PositValue {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => PositValue::zero(self.config()),
            Equal => PositValue::one(self.config()),
            Greater => self.lu.get(i, j),
        }
    }

    /// U entry (zero below the diagonal).
    pub fn u(&self, i: usize, j: usize) -> PositValue {
        if i <= j {
            self.lu.get(i, j)
        } else {
            PositValue::zero(self.config())
        }
    }

    /// Exact element-wise widening of the factors.
    pub fn widen(&self, cfg: PositConfig) -> LUFactors {
        LUFactors { lu: self.lu.widen(cfg), perm: self.perm.clone() }
    }
}

/// Factors a square matrix in its own precision. Pivots are chosen by the
/// largest absolute value in the column; the smallest row index wins ties.
pub fn lu_factor(a: &DenseMatrix) -> Result<LUFactors, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Dimension(format!(
            "lu_factor needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if let Some((i, j)) = a.find_nar() {
        return Err(LinalgError::NarEntry { row: i, col: j });
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut pivot = k;
        let mut best = lu.get(k, k).abs();
        for i in k + 1..n {
            let cand = lu.get(i, k).abs();
            if cand.total_cmp(&best).is_gt() {
                best = cand;
                pivot = i;
            }
        }
        if best.is_zero() {
            return Err(LinalgError::Singular { column: k });
        }
        lu.swap_rows(k, pivot);
        perm.swap(k, pivot);
        let d = lu.get(k, k);
        for i in k + 1..n {
            let l = lu.get(i, k) / d;
            lu.set(i, k, l);
            if l.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let v = lu.get(i, j) - l * lu.get(k, j);
                lu.set(i, j, v);
            }
        }
    }
    Ok(LUFactors { lu, perm })
}

/// Solves `A x = b` through previously computed factors. The factors are
/// widened exactly into `out_cfg` and both substitutions run there, with each
/// inner product fused in the quire.
pub fn lu_solve(
    f: &LUFactors,
    b: &DenseVector,
    out_cfg: PositConfig,
) -> Result<DenseVector, LinalgError> {
    assert!(f.config().nbits() <= out_cfg.nbits(), "factors wider than the target");
    assert_eq!(b.config(), out_cfg, "rhs must be in the output precision");
    if b.len() != f.order() {
        return Err(LinalgError::Dimension(format!(
            "rhs length {} does not match order {}",
            b.len(),
            f.order()
        )));
    }
    let wide;
    let f = if f.config() == out_cfg {
        f
    } else {
        wide = f.widen(out_cfg);
        &wide
    };
    solve_widened(f, b)
}

fn solve_widened(f: &LUFactors, b: &DenseVector) -> Result<DenseVector, LinalgError> {
    let n = f.order();
    let cfg = f.config();
    let mut q = Quire::new(cfg);

    // Forward: L y = P b
    let mut y = DenseVector::zeros(n, cfg);
    for i in 0..n {
        q.clear();
        q.add_posit(b.get(f.perm[i]));
        for j in 0..i {
            q.accumulate(f.lu.get(i, j).neg(), y.get(j));
        }
        y.set(i, q.to_posit());
    }

    // Backward: U x = y
    let mut x = DenseVector::zeros(n, cfg);
    for i in (0..n).rev() {
        let d = f.lu.get(i, i);
        if d.is_zero() {
            return Err(LinalgError::Singular { column: i });
        }
        q.clear();
        q.add_posit(y.get(i));
        for j in i + 1..n {
            q.accumulate(f.lu.get(i, j).neg(), x.get(j));
        }
        x.set(i, q.to_posit() / d);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::residual_fused;
    use crate::posit::{P16, P32};

    #[test]
    fn identity_factors_trivially() {
        let id = DenseMatrix::identity(4, P32);
        let f = lu_factor(&id).unwrap();
        assert_eq!(f.permutation(), &[0, 1, 2, 3]);
        let b = DenseVector::from_f64s(&[1.0, -2.0, 3.0, 0.5], P32);
        let x = lu_solve(&f, &b, P32).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn antidiagonal_swaps_rows() {
        let a = DenseMatrix::from_f64s(&[&[0.0, 1.0], &[1.0, 0.0]], P32);
        let f = lu_factor(&a).unwrap();
        assert_eq!(f.permutation(), &[1, 0]);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(f.l(i, j).to_f64(), expect);
                assert_eq!(f.u(i, j).to_f64(), expect);
            }
        }
    }

    #[test]
    fn diagonal_solve() {
        let a = DenseMatrix::from_f64s(&[&[2.0, 0.0], &[0.0, 4.0]], P32);
        let f = lu_factor(&a).unwrap();
        let b = DenseVector::from_f64s(&[2.0, 4.0], P32);
        let x = lu_solve(&f, &b, P32).unwrap();
        assert_eq!(x.to_f64s(), vec![1.0, 1.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = DenseMatrix::from_f64s(&[&[1.0, 2.0], &[2.0, 4.0]], P32);
        match lu_factor(&a) {
            Err(LinalgError::Singular { column }) => assert_eq!(column, 1),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn nar_entry_is_rejected() {
        let mut a = DenseMatrix::identity(2, P16);
        a.set(1, 0, PositValue::nar(P16));
        match lu_factor(&a) {
            Err(LinalgError::NarEntry { row: 1, col: 0 }) => {}
            other => panic!("expected NaR rejection, got {other:?}"),
        }
    }

    #[test]
    fn low_precision_factors_solve_in_working_precision() {
        let a16 = DenseMatrix::from_f64s(&[&[4.0, 1.0], &[1.0, 3.0]], P16);
        let f = lu_factor(&a16).unwrap();
        let b = DenseVector::from_f64s(&[5.0, 4.0], P32);
        let x = lu_solve(&f, &b, P32).unwrap();
        let a32 = a16.widen(P32);
        let r = residual_fused(&a32, &x, &b);
        for v in r.iter() {
            assert!(v.abs().to_f64() < 1e-3, "residual {v:?}");
        }
    }
}
