//! Minimal dense linear algebra for the network code.
//!
//! A [`Matrix`] is row-major `f64` storage. The few kernels here (matrix ×
//! vector, transposed matrix × vector, rank-1 accumulation) are all the
//! network training needs; keeping them scalar and loop-ordered makes
//! results bit-reproducible.

use alloc::vec;
use alloc::vec::Vec;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from row-major data. Panics if `data` has the wrong length.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// `out = self * x` with `x` of length `cols` and `out` of length `rows`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec input length");
        assert_eq!(out.len(), self.rows, "matvec output length");
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for (w, xv) in row.iter().zip(x.iter()) {
                acc += w * xv;
            }
            out[r] = acc;
        }
    }

    /// `out = self^T * d` with `d` of length `rows` and `out` of length `cols`.
    pub fn matvec_transpose(&self, d: &[f64], out: &mut [f64]) {
        assert_eq!(d.len(), self.rows, "matvec_transpose input length");
        assert_eq!(out.len(), self.cols, "matvec_transpose output length");
        out.fill(0.0);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let dv = d[r];
            for (o, w) in out.iter_mut().zip(row.iter()) {
                *o += dv * w;
            }
        }
    }

    /// `self += scale * left * right^T` (rank-1 update).
    pub fn add_scaled_outer(&mut self, left: &[f64], right: &[f64], scale: f64) {
        assert_eq!(left.len(), self.rows, "outer left length");
        assert_eq!(right.len(), self.cols, "outer right length");
        for r in 0..self.rows {
            let lv = scale * left[r];
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (w, rv) in row.iter_mut().zip(right.iter()) {
                *w += lv * rv;
            }
        }
    }

    pub fn iter_all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    assert!(!xs.is_empty(), "argmax of empty slice");
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate().skip(1) {
        if v > xs[best] {
            best = i;
        }
    }
    best
}

/// `log(sum(exp(xs)))` computed stably.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for &x in xs {
        sum += libm::exp(x - m);
    }
    m + libm::log(sum)
}

/// In-place stable softmax.
pub fn softmax_in_place(xs: &mut [f64]) {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in xs.iter_mut() {
        *x = libm::exp(*x - m);
        sum += *x;
    }
    for x in xs.iter_mut() {
        *x /= sum;
    }
}
