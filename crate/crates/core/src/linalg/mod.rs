//! Precision-generic dense linear algebra on posit values.
//!
//! Matrices and vectors store raw bit patterns plus a single format, so every
//! element of a container is forced to one configuration. Inner products are
//! fused through the quire: the sum is exact and rounds once at the end.

mod cond;
mod lu;

pub use cond::{cond_estimate, cond_exact, DEFAULT_COND_CAP};
pub use lu::{lu_factor, lu_solve, LUFactors};

use crate::posit::{PositConfig, PositValue, Quire};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is singular (zero pivot in column {column})")]
    Singular { column: usize },
    #[error("NaR entry at ({row}, {col})")]
    NarEntry { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Row-major dense matrix with one posit format for all elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    cfg: PositConfig,
    bits: Vec<u64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize, cfg: PositConfig) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        DenseMatrix { rows, cols, cfg, bits: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, cfg: PositConfig) -> Self {
        let mut m = Self::zeros(n, n, cfg);
        let one = PositValue::one(cfg);
        for i in 0..n {
            m.set(i, i, one);
        }
        m
    }

    /// Builds a matrix by rounding each `f64` into the format.
    pub fn from_f64s(rows: &[&[f64]], cfg: PositConfig) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Self::zeros(r, c, cfg);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, PositValue::from_f64(v, cfg));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn config(&self) -> PositConfig {
        self.cfg
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> PositValue {
        PositValue::from_bits(self.bits[i * self.cols + j], self.cfg)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: PositValue) {
        assert_eq!(v.config(), self.cfg, "config mismatch");
        self.bits[i * self.cols + j] = v.bits();
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.bits.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Element-wise exact widening into a larger format.
    pub fn widen(&self, cfg: PositConfig) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols, cfg);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).widen(cfg));
            }
        }
        out
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, PositValue)> + '_ {
        (0..self.rows).flat_map(move |i| (0..self.cols).map(move |j| (i, j, self.get(i, j))))
    }

    /// Index of the first NaR entry, if any.
    pub fn find_nar(&self) -> Option<(usize, usize)> {
        self.entries()
            .find(|(_, _, v)| v.is_nar())
            .map(|(i, j, _)| (i, j))
    }
}

/// Dense vector with one posit format for all elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseVector {
    cfg: PositConfig,
    bits: Vec<u64>,
}

impl DenseVector {
    pub fn zeros(len: usize, cfg: PositConfig) -> Self {
        assert!(len > 0, "empty vector");
        DenseVector { cfg, bits: vec![0; len] }
    }

    pub fn from_f64s(vals: &[f64], cfg: PositConfig) -> Self {
        let mut v = Self::zeros(vals.len(), cfg);
        for (i, &x) in vals.iter().enumerate() {
            v.set(i, PositValue::from_f64(x, cfg));
        }
        v
    }

    /// The all-ones vector.
    pub fn ones(len: usize, cfg: PositConfig) -> Self {
        let mut v = Self::zeros(len, cfg);
        let one = PositValue::one(cfg);
        for i in 0..len {
            v.set(i, one);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty() // constructors reject empty vectors
    }

    pub fn config(&self) -> PositConfig {
        self.cfg
    }

    #[inline]
    pub fn get(&self, i: usize) -> PositValue {
        PositValue::from_bits(self.bits[i], self.cfg)
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: PositValue) {
        assert_eq!(v.config(), self.cfg, "config mismatch");
        self.bits[i] = v.bits();
    }

    pub fn iter(&self) -> impl Iterator<Item = PositValue> + '_ {
        self.bits.iter().map(|&b| PositValue::from_bits(b, self.cfg))
    }

    pub fn widen(&self, cfg: PositConfig) -> DenseVector {
        let mut out = DenseVector::zeros(self.len(), cfg);
        for i in 0..self.len() {
            out.set(i, self.get(i).widen(cfg));
        }
        out
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.iter().map(|v| v.to_f64()).collect()
    }
}

/// Max absolute entry of a vector. A NaR entry makes the result NaR.
pub fn inf_norm_vector(v: &DenseVector) -> PositValue {
    let mut best = PositValue::zero(v.config());
    for x in v.iter() {
        if x.is_nar() {
            return PositValue::nar(v.config());
        }
        let a = x.abs();
        if a.total_cmp(&best).is_gt() {
            best = a;
        }
    }
    best
}

/// Max absolute row sum, each row accumulated exactly in the quire and
/// rounded once. A NaR entry makes the result NaR.
pub fn inf_norm_matrix(a: &DenseMatrix) -> PositValue {
    let cfg = a.config();
    let mut q = Quire::new(cfg);
    let mut best = PositValue::zero(cfg);
    for i in 0..a.rows() {
        q.clear();
        for j in 0..a.cols() {
            let v = a.get(i, j);
            if v.is_nar() {
                return PositValue::nar(cfg);
            }
            q.add_posit(v.abs());
        }
        let sum = q.to_posit();
        if sum.total_cmp(&best).is_gt() {
            best = sum;
        }
    }
    best
}

/// Fused matrix-vector product: each entry of `A x` is an exact quire sum
/// with a single rounding.
pub fn matvec_fused(a: &DenseMatrix, x: &DenseVector) -> DenseVector {
    assert_eq!(a.cols(), x.len(), "shape mismatch");
    assert_eq!(a.config(), x.config(), "config mismatch");
    let cfg = a.config();
    let mut out = DenseVector::zeros(a.rows(), cfg);
    let mut q = Quire::new(cfg);
    for i in 0..a.rows() {
        q.clear();
        for j in 0..a.cols() {
            q.accumulate(a.get(i, j), x.get(j));
        }
        out.set(i, q.to_posit());
    }
    out
}

/// Fused residual: r_i = b_i - sum_j a_ij x_j, accumulated exactly in the
/// quire and rounded once per entry. NaR propagates per entry.
pub fn residual_fused(a: &DenseMatrix, x: &DenseVector, b: &DenseVector) -> DenseVector {
    assert_eq!(a.cols(), x.len(), "shape mismatch");
    assert_eq!(a.rows(), b.len(), "shape mismatch");
    assert_eq!(a.config(), x.config(), "config mismatch");
    assert_eq!(a.config(), b.config(), "config mismatch");
    let cfg = a.config();
    let mut out = DenseVector::zeros(b.len(), cfg);
    let mut q = Quire::new(cfg);
    for i in 0..a.rows() {
        q.clear();
        q.add_posit(b.get(i));
        for j in 0..a.cols() {
            q.accumulate(a.get(i, j).neg(), x.get(j));
        }
        out.set(i, q.to_posit());
    }
    out
}
