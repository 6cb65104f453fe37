//! Algebraic verifications: the one-sample quadratic, the sum-of-squares
//! condition on `S`, idempotent projections and the `LDLᵀ` construction of an
//! orthonormal basis orthogonal to the ones vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::orthocomp::{RowSelection, ORTHONORMAL_TOL, RANK_REL_TOL};

pub const STUDENT_ROOT_TOL: f64 = 1e-12;
pub const SS_CONDITION_TOL: f64 = 1e-9;
pub const IDEMPOTENT_TOL: f64 = 1e-10;

/// Roots of `(n-1)c² - 2c - 1 = 0` as `(c_plus, c_minus)`, checked against
/// `1/(√n - 1)` and `-1/(√n + 1)`.
pub fn verify_student_roots(n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "quadratic needs n >= 2, got {n}"
        )));
    }
    let (c_plus, c_minus) = quadratic_roots(n);
    let rn = (n as f64).sqrt();
    let closed_plus = 1.0 / (rn - 1.0);
    let closed_minus = -1.0 / (rn + 1.0);
    let err = student_root_error(n);
    if !(err <= STUDENT_ROOT_TOL) {
        return Err(Error::CheckFailed(format!(
            "n = {n}: roots ({c_plus}, {c_minus}) vs closed forms ({closed_plus}, {closed_minus})"
        )));
    }
    Ok((c_plus, c_minus))
}

/// Numerically stable quadratic formula for `(n-1)c² - 2c - 1`.
fn quadratic_roots(n: usize) -> (f64, f64) {
    let (a, b, c) = ((n - 1) as f64, -2.0, -1.0);
    let disc = (b * b - 4.0 * a * c).sqrt();
    let q = -0.5 * (b - disc);
    (q / a, c / q)
}

/// Largest relative gap between the quadratic roots and the closed forms.
pub fn student_root_error(n: usize) -> f64 {
    let (c_plus, c_minus) = quadratic_roots(n);
    let rn = (n as f64).sqrt();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    rel(c_plus, 1.0 / (rn - 1.0)).max(rel(c_minus, -1.0 / (rn + 1.0)))
}

/// Max-entry residual of `Sᵀ(I - AᵀA)S - AS - SᵀAᵀ - I` with `A = X_sel`.
pub fn ss_condition_residual(
    s: &DenseMatrix,
    xortho: &DenseMatrix,
    sel: &RowSelection,
) -> Result<f64> {
    let p = xortho.cols();
    if s.shape() != (p, p) {
        return Err(Error::DimensionMismatch {
            context: "sum-of-squares condition S",
            expected: p,
            found: s.rows(),
        });
    }
    if sel.n() != xortho.rows() || sel.p() != p {
        return Err(Error::InvalidSelection(format!(
            "selection ({} of {}) does not match a {}x{} matrix",
            sel.p(),
            sel.n(),
            xortho.rows(),
            p
        )));
    }
    let deviation = xortho.orthonormality_error();
    if !(deviation < ORTHONORMAL_TOL) {
        return Err(Error::NotOrthonormal { deviation });
    }
    let a = xortho.select_rows(sel.indices());
    let at = a.transpose();
    let st = s.transpose();
    let middle = DenseMatrix::identity(p).sub(&at.matmul(&a)?)?;
    let lhs = st
        .matmul(&middle)?
        .matmul(s)?
        .sub(&a.matmul(s)?)?
        .sub(&st.matmul(&at)?)?;
    Ok(lhs.sub(&DenseMatrix::identity(p))?.max_abs())
}

/// Whether `S` makes `W = R_rest + X_rest S R_sel` preserve `RᵀR` for every
/// residual vector. The tolerance scales with `max(1, max|S|²)`.
pub fn verify_ss_condition(
    s: &DenseMatrix,
    xortho: &DenseMatrix,
    sel: &RowSelection,
) -> Result<bool> {
    let residual = ss_condition_residual(s, xortho, sel)?;
    let scale = s.max_abs().powi(2).max(1.0);
    Ok(residual <= SS_CONDITION_TOL * scale)
}

/// `B² = B` cross-checked against `rank(B) + rank(I - B) = n`.
pub fn idempotent_check(b: &DenseMatrix) -> Result<bool> {
    if !b.is_square() {
        return Err(Error::InvalidShape(format!(
            "idempotency needs a square matrix, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    let asym = b.sub(&b.transpose())?.max_abs();
    if asym > IDEMPOTENT_TOL * b.max_abs().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let n = b.rows();
    let square_gap = b.matmul(b)?.sub(b)?.max_abs();
    let by_square = square_gap <= IDEMPOTENT_TOL * b.max_abs().max(1.0);
    let complement = DenseMatrix::identity(n).sub(b)?;
    let by_rank = b.numerical_rank(RANK_REL_TOL) + complement.numerical_rank(RANK_REL_TOL) == n;
    if by_square != by_rank {
        return Err(Error::CheckFailed(format!(
            "B² = B gives {by_square} but the rank criterion gives {by_rank}"
        )));
    }
    Ok(by_square)
}

/// Unpivoted `LDLᵀ` of a symmetric positive semidefinite matrix, keeping
/// only the columns whose pivot exceeds `rel_tol · max|B|`.
///
/// Returns `L` (`n×r`, unit lower triangular in its pivot rows) and the `r`
/// retained pivots.
pub fn ldlt_semidefinite(b: &DenseMatrix, rel_tol: f64) -> Result<(DenseMatrix, Vec<f64>)> {
    if !b.is_square() {
        return Err(Error::InvalidShape("LDLᵀ needs a square matrix".into()));
    }
    let n = b.rows();
    let threshold = rel_tol * b.max_abs();
    let mut a = b.clone();
    let mut l_cols: Vec<Vec<f64>> = Vec::new();
    let mut d = Vec::new();
    for k in 0..n {
        let pivot = a[(k, k)];
        if pivot <= threshold {
            if pivot < -threshold {
                return Err(Error::InvalidInput(format!(
                    "negative pivot {pivot:e} at step {k}: matrix is not semidefinite"
                )));
            }
            continue;
        }
        let mut col = vec![0.0; n];
        col[k] = 1.0;
        for i in k + 1..n {
            col[i] = a[(i, k)] / pivot;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[(i, j)] -= pivot * col[i] * col[j];
            }
        }
        l_cols.push(col);
        d.push(pivot);
    }
    if l_cols.is_empty() {
        return Err(Error::InvalidInput("matrix is numerically zero".into()));
    }
    Ok((DenseMatrix::from_columns(&l_cols)?, d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChengFactor {
    /// `n×(n-1)` with orthonormal columns orthogonal to the ones vector.
    pub m: DenseMatrix,
    pub l: DenseMatrix,
    pub d: Vec<f64>,
}

/// `M = L D^{1/2}` from the elimination of `B₂ = I - (1/n) 1 1ᵀ`.
///
/// The columns of `M` are never re-orthogonalized; orthonormality comes out
/// of the factorization because `B₂` is a symmetric idempotent of rank `n-1`.
pub fn cheng_matrix(n: usize) -> Result<ChengFactor> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need n >= 2, got {n}")));
    }
    let b2 = centering_projector(n);
    let (l, d) = ldlt_semidefinite(&b2, 1e-12)?;
    if d.len() != n - 1 {
        return Err(Error::CheckFailed(format!(
            "elimination kept {} pivots, expected {}",
            d.len(),
            n - 1
        )));
    }
    let mut m = l.clone();
    for i in 0..n {
        for (j, dj) in d.iter().enumerate() {
            m[(i, j)] *= dj.sqrt();
        }
    }
    Ok(ChengFactor { m, l, d })
}

/// `I - (1/n) 1 1ᵀ`.
pub fn centering_projector(n: usize) -> DenseMatrix {
    let mut b = DenseMatrix::identity(n);
    let inv = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] -= inv;
        }
    }
    b
}

/// `X (XᵀX)⁻¹ Xᵀ`, the projector onto `col(X)`.
pub fn hat_matrix(x: &DenseMatrix) -> Result<DenseMatrix> {
    let xt = x.transpose();
    let gram_inv = xt.matmul(x)?.inverse()?;
    x.matmul(&gram_inv)?.matmul(&xt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn student_root_examples() {
        let (plus, minus) = verify_student_roots(4).unwrap();
        assert_abs_diff_eq!(plus, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(minus, -1.0 / 3.0, epsilon = 1e-15);
        let (plus, minus) = verify_student_roots(2).unwrap();
        assert_abs_diff_eq!(plus, 2f64.sqrt() + 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(minus, -(2f64.sqrt() - 1.0), epsilon = 1e-15);
        assert!(verify_student_roots(1).is_err());
    }

    #[test]
    fn ss_condition_scalar_case() {
        let x = DenseMatrix::new(4, 1, vec![0.5; 4]).unwrap();
        let sel = RowSelection::first(1, 4).unwrap();
        let s = DenseMatrix::identity(1).scale(2.0);
        assert!(verify_ss_condition(&s, &x, &sel).unwrap());
        let bad = DenseMatrix::identity(1).scale(2.1);
        assert!(!verify_ss_condition(&bad, &x, &sel).unwrap());
        assert!(verify_ss_condition(&DenseMatrix::identity(2), &x, &sel).is_err());
    }

    #[test]
    fn idempotent_examples() {
        assert!(!idempotent_check(&DenseMatrix::identity(3).scale(2.0)).unwrap());
        let n = 5;
        let j = DenseMatrix::new(n, n, vec![1.0 / n as f64; n * n]).unwrap();
        assert!(idempotent_check(&j).unwrap());
        assert!(idempotent_check(&centering_projector(n)).unwrap());
        let asym = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(idempotent_check(&asym).is_err());
        assert!(idempotent_check(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn cheng_small_cases() {
        let c = cheng_matrix(2).unwrap();
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(c.m[(0, 0)], h, epsilon = 1e-15);
        assert_abs_diff_eq!(c.m[(1, 0)], -h, epsilon = 1e-15);

        let c = cheng_matrix(3).unwrap();
        assert_abs_diff_eq!(c.d[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.d[1], 0.5, epsilon = 1e-15);
        assert!(c.m.orthonormality_error() < 1e-14);
        assert!(c
            .m
            .tr_matvec(&[1.0; 3])
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-15));
        assert!(cheng_matrix(1).is_err());
    }
}
