//! Closed-form action of the orthocomplement basis.
//!
//! For `x ⊥ col(X)` the last `n - p` coordinates of `H_p ⋯ H_1 x` equal
//! `x_rest + X_rest · S · x_sel`, where `x_sel` / `X_rest` are the selected
//! `p` rows and the remaining rows. This module builds the `p×p` matrix `S`
//! (from a Householder `T`, from any normalizer `C` with `XC⁻¹` orthonormal,
//! or directly by the rank-one recursion) and applies the formula.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::householder::{householder_qr, HouseholderQR, SignPolicy};
use crate::matrix::{dot, norm, DenseMatrix};

/// Pivots of the rank-one recursion below this magnitude take the
/// rank-deficient branch.
pub const PIVOT_TOL: f64 = 1e-10;

/// Tolerance on `max |XᵀX - I|` for inputs that must be orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Relative tolerance on `Xᵀx` for inputs that must lie in `col(X)⊥`.
pub const ORTHOGONAL_TOL: f64 = 1e-8;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Which `p` rows of an `n`-row matrix play the role of the leading block.
///
/// The remaining rows keep their original relative order, so
/// [`permutation`](Self::permutation) is `indices ++ complement`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSelection {
    indices: Vec<usize>,
    n: usize,
}

impl RowSelection {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSelection("selection is empty".into()));
        }
        if indices.len() >= n {
            return Err(Error::InvalidSelection(format!(
                "selection of {} rows leaves no complement in {n} rows",
                indices.len()
            )));
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSelection(format!(
                "indices must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidSelection(format!(
                "row index {bad} out of range for {n} rows"
            )));
        }
        Ok(Self { indices, n })
    }

    /// Rows `0..p`.
    pub fn first(p: usize, n: usize) -> Result<Self> {
        Self::new((0..p).collect(), n)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn p(&self) -> usize {
        self.indices.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn complement(&self) -> Vec<usize> {
        let mut chosen = vec![false; self.n];
        for &i in &self.indices {
            chosen[i] = true;
        }
        (0..self.n).filter(|&i| !chosen[i]).collect()
    }

    pub fn permutation(&self) -> Vec<usize> {
        let mut perm = self.indices.clone();
        perm.extend(self.complement());
        perm
    }

    pub fn permute_rows(&self, x: &DenseMatrix) -> DenseMatrix {
        x.select_rows(&self.permutation())
    }

    pub fn permute_vec(&self, x: &[f64]) -> Vec<f64> {
        self.permutation().iter().map(|&i| x[i]).collect()
    }

    fn check_against(&self, x: &DenseMatrix) -> Result<()> {
        if self.n != x.rows() {
            return Err(Error::InvalidSelection(format!(
                "selection built for {} rows, matrix has {}",
                self.n,
                x.rows()
            )));
        }
        if self.p() != x.cols() {
            return Err(Error::InvalidSelection(format!(
                "selection picks {} rows but the matrix has {} columns",
                self.p(),
                x.cols()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SSource {
    FromT,
    FromC,
    Recursion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SProjector {
    pub p: usize,
    pub s: DenseMatrix,
    pub rank: usize,
    pub normalizer: DenseMatrix,
    pub source: SSource,
}

/// `S = (T - X_sel)⁻¹`. The factorization must be of `sel.permute_rows(X)`.
pub fn s_from_qr(qr: &HouseholderQR, x: &DenseMatrix, sel: &RowSelection) -> Result<SProjector> {
    sel.check_against(x)?;
    if qr.n() != x.rows() || qr.p() != x.cols() {
        return Err(Error::InvalidShape(format!(
            "factorization is {}x{}, matrix is {}x{}",
            qr.n(),
            qr.p(),
            x.rows(),
            x.cols()
        )));
    }
    let diff = qr.t().sub(&x.select_rows(sel.indices()))?;
    let rank = diff.numerical_rank(RANK_REL_TOL);
    if rank < qr.p() {
        return Err(Error::Singular(format!(
            "T - X_sel has rank {rank} < {}; use the recursion or a sign fix",
            qr.p()
        )));
    }
    Ok(SProjector {
        p: qr.p(),
        s: diff.inverse()?,
        rank,
        normalizer: qr.t().clone(),
        source: SSource::FromT,
    })
}

/// Rank-one recursion for an orthonormal-column matrix, returning the
/// projector together with the pivot scalar seen at each step.
pub fn s_recursion_with_pivots(
    xortho: &DenseMatrix,
    sel: &RowSelection,
) -> Result<(SProjector, Vec<f64>)> {
    sel.check_against(xortho)?;
    let deviation = xortho.orthonormality_error();
    if !(deviation < ORTHONORMAL_TOL) {
        return Err(Error::NotOrthonormal { deviation });
    }
    let p = xortho.cols();
    let a = xortho.select_rows(sel.indices());
    let mut s = DenseMatrix::zeros(p, p);
    let mut pivots = Vec::with_capacity(p);
    let mut rank = 0;

    for k in 0..p {
        // u = S_k a[..k, k],  w = a[k, ..k] S_k
        let col: Vec<f64> = (0..k).map(|i| a[(i, k)]).collect();
        let row = &a.row(k)[..k];
        let u: Vec<f64> = (0..k).map(|i| dot(&s.row(i)[..k], &col)).collect();
        let w: Vec<f64> = (0..k)
            .map(|j| (0..k).map(|i| row[i] * s[(i, j)]).sum())
            .collect();
        let pivot = 1.0 - a[(k, k)] - dot(row, &u);
        pivots.push(pivot);
        if pivot.abs() < PIVOT_TOL {
            continue;
        }
        rank += 1;
        let inv = 1.0 / pivot;
        for i in 0..k {
            for j in 0..k {
                s[(i, j)] += u[i] * w[j] * inv;
            }
            s[(i, k)] = u[i] * inv;
            s[(k, i)] = w[i] * inv;
        }
        s[(k, k)] = inv;
    }

    Ok((
        SProjector {
            p,
            s,
            rank,
            normalizer: DenseMatrix::identity(p),
            source: SSource::Recursion,
        },
        pivots,
    ))
}

pub fn s_recursion(xortho: &DenseMatrix, sel: &RowSelection) -> Result<SProjector> {
    s_recursion_with_pivots(xortho, sel).map(|(sp, _)| sp)
}

/// `S = C⁻¹ S'` where `S'` is the recursion output for `XC⁻¹`; equals
/// `(C - X_sel)⁻¹` whenever that inverse exists.
pub fn s_from_c(x: &DenseMatrix, c: &DenseMatrix, sel: &RowSelection) -> Result<SProjector> {
    sel.check_against(x)?;
    if c.shape() != (x.cols(), x.cols()) {
        return Err(Error::InvalidShape(format!(
            "normalizer must be {p}x{p}, got {}x{}",
            c.rows(),
            c.cols(),
            p = x.cols()
        )));
    }
    let c_inv = c
        .inverse()
        .map_err(|e| Error::Singular(format!("normalizer C: {e}")))?;
    let xt = x.matmul(&c_inv)?;
    let inner = s_recursion(&xt, sel)?;
    Ok(SProjector {
        p: inner.p,
        s: c_inv.matmul(&inner.s)?,
        rank: inner.rank,
        normalizer: c.clone(),
        source: SSource::FromC,
    })
}

/// Greedy ±1 diagonal `D` with `DC - X_sel` nonsingular.
///
/// At each step the Schur-complement pivot is `d - γ`; choosing
/// `d = -sgn(γ)` (ties to `+1`) keeps every pivot at least 1 in magnitude.
pub fn sign_fix(c: &DenseMatrix, x: &DenseMatrix, sel: &RowSelection) -> Result<Vec<f64>> {
    sel.check_against(x)?;
    let p = x.cols();
    if c.shape() != (p, p) {
        return Err(Error::InvalidShape(format!(
            "normalizer must be {p}x{p}, got {}x{}",
            c.rows(),
            c.cols()
        )));
    }
    let c_inv = c.inverse()?;
    let m = x.select_rows(sel.indices()).matmul(&c_inv)?;

    let mut d = Vec::with_capacity(p);
    // inverse of the leading k×k block of D - M
    let mut a_inv: Vec<Vec<f64>> = Vec::with_capacity(p);
    for k in 0..p {
        // b = -M[..k, k],  cᵀ = -M[k, ..k]
        let b: Vec<f64> = (0..k).map(|i| -m[(i, k)]).collect();
        let ct: Vec<f64> = (0..k).map(|j| -m[(k, j)]).collect();
        let ainv_b: Vec<f64> = a_inv.iter().map(|r| dot(r, &b)).collect();
        let ct_ainv: Vec<f64> = (0..k)
            .map(|j| (0..k).map(|i| ct[i] * a_inv[i][j]).sum())
            .collect();
        let gamma = m[(k, k)] + dot(&ct, &ainv_b);
        let dk = if gamma > 0.0 { -1.0 } else { 1.0 };
        let schur = dk - gamma;
        d.push(dk);

        let inv = 1.0 / schur;
        for i in 0..k {
            for j in 0..k {
                a_inv[i][j] += ainv_b[i] * ct_ainv[j] * inv;
            }
            a_inv[i].push(-ainv_b[i] * inv);
        }
        let mut last: Vec<f64> = ct_ainv.iter().map(|v| -v * inv).collect();
        last.push(inv);
        a_inv.push(last);
    }

    let mut dc = c.clone();
    for (i, &di) in d.iter().enumerate() {
        dc.row_mut(i).iter_mut().for_each(|v| *v *= di);
    }
    let fixed = dc.sub(&x.select_rows(sel.indices()))?;
    let smin = *fixed.singular_values().last().expect("nonempty");
    let c_scale = c.singular_values()[0];
    if !(smin > 1e-12 * c_scale) {
        return Err(Error::CheckFailed(format!(
            "sign fix left DC - X_sel with smallest singular value {smin:e}"
        )));
    }
    Ok(d)
}

/// `x_rest + X_rest · S · x_sel` for `x ⊥ col(X)`.
pub fn orthocomplement_apply(
    sp: &SProjector,
    x: &DenseMatrix,
    v: &[f64],
    sel: &RowSelection,
) -> Result<Vec<f64>> {
    sel.check_against(x)?;
    if v.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            context: "orthocomplement_apply",
            expected: x.rows(),
            found: v.len(),
        });
    }
    if sp.p != x.cols() {
        return Err(Error::DimensionMismatch {
            context: "orthocomplement_apply projector size",
            expected: x.cols(),
            found: sp.p,
        });
    }
    let residual = x.tr_matvec(v)?.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let col_scale = (0..x.cols())
        .map(|j| norm(&x.column(j)))
        .fold(1.0f64, f64::max);
    if residual > ORTHOGONAL_TOL * norm(v) * col_scale {
        return Err(Error::NotOrthogonal { residual });
    }
    Ok(orthocomplement_apply_unchecked(sp, x, v, sel))
}

/// The same formula without validation; O(np).
pub fn orthocomplement_apply_unchecked(
    sp: &SProjector,
    x: &DenseMatrix,
    v: &[f64],
    sel: &RowSelection,
) -> Vec<f64> {
    let v_sel: Vec<f64> = sel.indices().iter().map(|&i| v[i]).collect();
    let correction = sp.s.matvec(&v_sel).expect("projector is p×p");
    sel.complement()
        .into_iter()
        .map(|i| v[i] + dot(x.row(i), &correction))
        .collect()
}

/// Number of nonzero reflectors, cross-checked against the numerical rank of
/// `T - X_lead` where `X_lead` is the leading `p` rows of the factored matrix.
pub fn rank_count(qr: &HouseholderQR, x: &DenseMatrix) -> Result<usize> {
    if qr.n() != x.rows() || qr.p() != x.cols() {
        return Err(Error::InvalidShape(format!(
            "factorization is {}x{}, matrix is {}x{}",
            qr.n(),
            qr.p(),
            x.rows(),
            x.cols()
        )));
    }
    let count = qr.nonzero_reflectors();
    let diff = qr.t().sub(&x.block(qr.p(), qr.p()))?;
    let rank = diff.numerical_rank(RANK_REL_TOL);
    if rank != count {
        return Err(Error::CheckFailed(format!(
            "{count} nonzero reflectors but rank(T - X_lead) = {rank}"
        )));
    }
    Ok(count)
}

/// Standard-sign factorization of the row-permuted matrix and its `S`.
pub fn standard_projector(
    x: &DenseMatrix,
    sel: &RowSelection,
) -> Result<(HouseholderQR, SProjector)> {
    sel.check_against(x)?;
    let qr = householder_qr(&sel.permute_rows(x), SignPolicy::Standard)?;
    let sp = s_from_qr(&qr, x, sel)?;
    Ok((qr, sp))
}
