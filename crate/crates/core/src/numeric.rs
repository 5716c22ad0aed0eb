//! Numeric evaluation of the implicit function as the determinant of the
//! Cayley matrix at a query point, and on/side classification.
//!
//! The sign of the determinant depends on the frozen row/column monomial
//! orderings. It is deterministic but has no geometric meaning by itself:
//! only "same side" versus "opposite side" comparisons between points are
//! meaningful.

use serde::{Deserialize, Serialize};

use crate::dixon::CayleyMatrix;
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Default relative tolerance for on-surface classification.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "dense matrix must be n×n");
        DenseMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    /// `max_j |a_rj|` for every row.
    pub fn row_max_norms(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row(r).iter().fold(0.0_f64, |m, x| m.max(x.abs())))
            .collect()
    }

    /// Determinant by LU factorization with partial pivoting. The first
    /// row with the largest magnitude wins ties, so the result is
    /// bit-reproducible. An exactly-zero pivot column gives `0.0`.
    pub fn lu_determinant(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for r in k + 1..n {
                let v = a[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for r in k + 1..n {
                let f = a[r * n + k] / pivot;
                if f != 0.0 {
                    for c in k + 1..n {
                        a[r * n + c] -= f * a[k * n + c];
                    }
                }
            }
        }
        det
    }
}

/// Determinant of the Cayley matrix at `q`.
pub fn det_eval(cm: &CayleyMatrix, q: Point3) -> f64 {
    cm.matrix_at(q).lu_determinant()
}

/// `rel_tol · Π_r max_j |m_rj|`, the scale against which a determinant
/// is compared to decide "on surface".
pub fn tolerance_scale(cm: &CayleyMatrix, q: Point3, rel_tol: f64) -> f64 {
    rel_tol * cm.matrix_at(q).row_max_norms().iter().product::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    OnSurface,
    SidePositive,
    SideNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub value: f64,
    pub verdict: Verdict,
    pub tolerance_scale: f64,
}

impl ClassificationResult {
    fn from_value(value: f64, tolerance_scale: f64) -> Self {
        let verdict = if value.abs() <= tolerance_scale {
            Verdict::OnSurface
        } else if value > 0.0 {
            Verdict::SidePositive
        } else {
            Verdict::SideNegative
        };
        ClassificationResult { value, verdict, tolerance_scale }
    }
}

/// Classify `q` against the implicit surface of `cm`.
pub fn classify(cm: &CayleyMatrix, q: Point3, rel_tol: f64) -> Result<ClassificationResult> {
    classify_value(cm, q, rel_tol, det_eval(cm, q))
}

/// Classification of an externally computed implicit value (for example the
/// expanded polynomial) using the Cayley matrix's tolerance scale.
pub fn classify_value(
    cm: &CayleyMatrix,
    q: Point3,
    rel_tol: f64,
    value: f64,
) -> Result<ClassificationResult> {
    if !(rel_tol > 0.0 && rel_tol.is_finite()) {
        return Err(Error::InvalidInput(format!("rel_tol must be positive, got {rel_tol}")));
    }
    if !q.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite query point {q}")));
    }
    if cm.is_identically_zero() {
        return Err(Error::DegenerateSurface(
            "Cayley matrix is identically zero (collinear or coincident control points)".into(),
        ));
    }
    Ok(ClassificationResult::from_value(value, tolerance_scale(cm, q, rel_tol)))
}
