//! Closed-form 2×2 linear algebra used by the per-pair decoupling.

use serde::{Deserialize, Serialize};

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Inverse, or `None` when `|det|` is not above `min_abs_det`.
    pub fn inverse_checked(&self, min_abs_det: f64) -> Option<Mat2> {
        let det = self.det();
        if !det.is_finite() || det.abs() <= min_abs_det {
            return None;
        }
        let m = &self.0;
        Some(Mat2([
            [m[1][1] / det, -m[0][1] / det],
            [-m[1][0] / det, m[0][0] / det],
        ]))
    }

    pub fn inverse(&self) -> Option<Mat2> {
        self.inverse_checked(0.0)
    }

    pub fn transpose(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    #[inline]
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn column(&self, col: usize) -> [f64; 2] {
        [self.0[0][col], self.0[1][col]]
    }

    pub fn row(&self, row: usize) -> [f64; 2] {
        self.0[row]
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()))
    }
}

/// Eigen-decomposition of a symmetric 2×2 matrix.
///
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors as the columns of the returned matrix.
pub fn sym_eigen(m: &Mat2) -> ([f64; 2], Mat2) {
    let a = m.0[0][0];
    let b = 0.5 * (m.0[0][1] + m.0[1][0]);
    let d = m.0[1][1];
    let half_trace = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let radius = half_gap.hypot(b);
    let l1 = half_trace + radius;
    let l2 = half_trace - radius;
    if radius == 0.0 {
        return ([l1, l2], Mat2::IDENTITY);
    }
    // Rotation angle of the principal axis.
    let theta = 0.5 * b.atan2(half_gap);
    let (s, c) = theta.sin_cos();
    ([l1, l2], Mat2([[c, -s], [s, c]]))
}

/// Symmetric inverse square root `(M)^{-1/2}` of a positive definite 2×2 matrix.
pub fn sym_inv_sqrt(m: &Mat2) -> Option<Mat2> {
    let ([l1, l2], v) = sym_eigen(m);
    if !(l1 > 0.0 && l2 > 0.0) {
        return None;
    }
    let d = Mat2::new(1.0 / l1.sqrt(), 0.0, 0.0, 1.0 / l2.sqrt());
    Some(v.mul(&d).mul(&v.transpose()))
}

pub fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm2(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// |cos| of the angle between two vectors; 0 when either is zero.
pub fn abs_cosine(a: [f64; 2], b: [f64; 2]) -> f64 {
    let n = norm2(a) * norm2(b);
    if n == 0.0 {
        0.0
    } else {
        (dot2(a, b) / n).abs()
    }
}
