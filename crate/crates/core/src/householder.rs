//! Householder QR with full-length reflectors and an explicit sign policy.
//!
//! Every reflector is kept as an `n`-vector that is zero in its leading `k`
//! components (0-based step `k`), so the product `H_p ⋯ H_1` can be applied to
//! any `n`-vector without index bookkeeping. A reflector may be exactly zero,
//! in which case the corresponding `H_k` is the identity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, DenseMatrix};

/// Relative size below which a freshly built reflector is treated as zero.
pub const REFLECTOR_ZERO_TOL: f64 = 1e-12;

/// A pivot tail shorter than this multiple of `‖X‖_F` is a rank deficiency.
pub const RANK_TOL: f64 = 1e-12;

/// Choice of `d_k` in `v_k = x + d_k ‖x_tail‖ e_k`.
///
/// `Standard` takes `d_k = sgn(pivot)` (with `sgn(0) = +1`), which never
/// cancels. `ToPositive` takes `d_k = -1`, mapping each column onto `+e_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SignPolicy {
    Standard,
    ToPositive,
    Custom(Vec<f64>),
}

impl SignPolicy {
    fn sign_for(&self, step: usize, pivot: f64) -> f64 {
        match self {
            SignPolicy::Standard => {
                if pivot < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            SignPolicy::ToPositive => -1.0,
            SignPolicy::Custom(signs) => signs[step],
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        if let SignPolicy::Custom(signs) = self {
            if signs.len() != p {
                return Err(Error::DimensionMismatch {
                    context: "custom sign policy",
                    expected: p,
                    found: signs.len(),
                });
            }
            if let Some(bad) = signs.iter().find(|&&s| s != 1.0 && s != -1.0) {
                return Err(Error::InvalidInput(format!(
                    "custom signs must be +1 or -1, got {bad}"
                )));
            }
        }
        Ok(())
    }
}

/// One elementary reflector `I - 2 v vᵀ / ‖v‖²` with its squared norm cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reflector {
    v: Vec<f64>,
    norm_sq: f64,
    start: usize,
}

impl Reflector {
    fn new(v: Vec<f64>, start: usize) -> Self {
        let norm_sq = dot(&v, &v);
        Self { v, norm_sq, start }
    }

    pub fn vector(&self) -> &[f64] {
        &self.v
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sq == 0.0
    }

    /// Index of the first component that may be nonzero.
    pub fn start(&self) -> usize {
        self.start
    }

    #[inline]
    pub fn apply_in_place(&self, x: &mut [f64]) {
        if self.is_zero() {
            return;
        }
        let k = self.start;
        let scale = 2.0 * dot(&self.v[k..], &x[k..]) / self.norm_sq;
        for (xi, vi) in x[k..].iter_mut().zip(&self.v[k..]) {
            *xi -= scale * vi;
        }
    }
}

/// Builds `v = [0; x_tail] + sign · ‖x_tail‖ e_k`, where `x_tail = x[k..]`.
///
/// `k` is 0-based. The result is the exact zero vector when the pivot
/// component cancels, i.e. when all of the tail's mass already sits on
/// component `k` and `sign` opposes it.
pub fn make_reflector(x: &[f64], k: usize, sign: f64) -> Result<Vec<f64>> {
    let n = x.len();
    if k >= n {
        return Err(Error::DimensionMismatch {
            context: "make_reflector step index",
            expected: n,
            found: k,
        });
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidInput(format!(
            "reflector sign must be ±1, got {sign}"
        )));
    }
    let tail_norm = norm(&x[k..]);
    if tail_norm == 0.0 || !tail_norm.is_finite() {
        return Err(Error::RankDeficient {
            column: k,
            tail_norm,
        });
    }
    let mut v = vec![0.0; n];
    v[k..].copy_from_slice(&x[k..]);
    v[k] += sign * tail_norm;
    if norm(&v) <= REFLECTOR_ZERO_TOL * tail_norm {
        v.iter_mut().for_each(|c| *c = 0.0);
    }
    Ok(v)
}

/// `(I - 2 v vᵀ / ‖v‖²) x`; the identity when `v = 0`.
pub fn apply_reflection(v: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if v.len() != x.len() {
        return Err(Error::DimensionMismatch {
            context: "apply_reflection",
            expected: v.len(),
            found: x.len(),
        });
    }
    let vv = dot(v, v);
    if vv == 0.0 {
        return Ok(x.to_vec());
    }
    let scale = 2.0 * dot(v, x) / vv;
    Ok(x.iter().zip(v).map(|(xi, vi)| xi - scale * vi).collect())
}

/// `H_p ⋯ H_1 X = [T; 0]` with the reflectors kept implicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholderQR {
    n: usize,
    p: usize,
    reflectors: Vec<Reflector>,
    t: DenseMatrix,
    policy: SignPolicy,
}

pub fn householder_qr(x: &DenseMatrix, policy: SignPolicy) -> Result<HouseholderQR> {
    let (n, p) = x.shape();
    if p > n {
        return Err(Error::InvalidShape(format!("QR needs p <= n, got {n}x{p}")));
    }
    policy.validate(p)?;
    let scale = x.frobenius_norm();
    let mut columns: Vec<Vec<f64>> = (0..p).map(|j| x.column(j)).collect();
    let mut reflectors = Vec::with_capacity(p);

    for k in 0..p {
        let tail_norm = norm(&columns[k][k..]);
        if !(tail_norm > RANK_TOL * scale) {
            return Err(Error::RankDeficient {
                column: k,
                tail_norm,
            });
        }
        let sign = policy.sign_for(k, columns[k][k]);
        let reflector = Reflector::new(make_reflector(&columns[k], k, sign)?, k);
        for col in columns[k..].iter_mut() {
            reflector.apply_in_place(col);
        }
        reflectors.push(reflector);
    }

    let mut t = DenseMatrix::zeros(p.max(1), p.max(1));
    for j in 0..p {
        for i in 0..=j {
            t[(i, j)] = columns[j][i];
        }
    }
    Ok(HouseholderQR {
        n,
        p,
        reflectors,
        t,
        policy,
    })
}

impl HouseholderQR {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn t(&self) -> &DenseMatrix {
        &self.t
    }

    pub fn reflectors(&self) -> &[Reflector] {
        &self.reflectors
    }

    pub fn policy(&self) -> &SignPolicy {
        &self.policy
    }

    pub fn reflector_norms(&self) -> Vec<f64> {
        self.reflectors.iter().map(Reflector::norm).collect()
    }

    pub fn nonzero_reflectors(&self) -> usize {
        self.reflectors.iter().filter(|r| !r.is_zero()).count()
    }

    fn check_len(&self, x: &[f64], context: &'static str) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `H_p ⋯ H_1 x` in O(np).
    pub fn apply_qt(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x, "apply_qt")?;
        let mut y = x.to_vec();
        self.apply_qt_in_place(&mut y);
        Ok(y)
    }

    pub fn apply_qt_in_place(&self, y: &mut [f64]) {
        for r in &self.reflectors {
            r.apply_in_place(y);
        }
    }

    /// `H_1 ⋯ H_p x`, the inverse of [`apply_qt`](Self::apply_qt).
    pub fn apply_q(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x, "apply_q")?;
        let mut y = x.to_vec();
        for r in self.reflectors.iter().rev() {
            r.apply_in_place(&mut y);
        }
        Ok(y)
    }

    /// Rebuilds `X = H_1 ⋯ H_p [T; 0]` column by column.
    pub fn reconstruct(&self) -> DenseMatrix {
        let columns: Vec<Vec<f64>> = (0..self.p)
            .map(|j| {
                let mut col = vec![0.0; self.n];
                for i in 0..=j {
                    col[i] = self.t[(i, j)];
                }
                self.apply_q(&col).expect("length n")
            })
            .collect();
        DenseMatrix::from_columns(&columns).expect("p >= 1 columns of length n")
    }

    /// Projects `x` onto `col(X)⊥` using the implicit factor.
    pub fn project_to_complement(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.apply_qt(x)?;
        y[..self.p].iter_mut().for_each(|c| *c = 0.0);
        self.apply_q(&y)
    }

    /// Materializes `U₂`, the last `n - p` columns of `H_1 ⋯ H_p`.
    ///
    /// This is the O(n²p) oracle for the closed-form action; the reflections
    /// are applied from the left to `I[:, p..]` one row block at a time.
    pub fn explicit_orthocomplement_basis(&self) -> Result<DenseMatrix> {
        let (n, p) = (self.n, self.p);
        if p >= n {
            return Err(Error::InvalidShape(format!(
                "orthocomplement of a {n}x{p} factor is empty"
            )));
        }
        let m = n - p;
        let mut u = DenseMatrix::zeros(n, m);
        for j in 0..m {
            u[(p + j, j)] = 1.0;
        }
        let mut w = vec![0.0; m];
        for r in self.reflectors.iter().rev() {
            if r.is_zero() {
                continue;
            }
            let v = r.vector();
            w.iter_mut().for_each(|c| *c = 0.0);
            for i in r.start()..n {
                if v[i] != 0.0 {
                    crate::matrix::axpy(v[i], u.row(i), &mut w);
                }
            }
            let scale = 2.0 / r.norm_sq();
            for i in r.start()..n {
                if v[i] != 0.0 {
                    crate::matrix::axpy(-scale * v[i], &w, u.row_mut(i));
                }
            }
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_abs_diff_eq!(x, y, epsilon = tol);
        }
    }

    #[test]
    fn reflector_examples() {
        let v = make_reflector(&[3.0, 4.0], 0, 1.0).unwrap();
        assert_eq!(v, vec![8.0, 4.0]);
        assert_vec_close(
            &apply_reflection(&v, &[3.0, 4.0]).unwrap(),
            &[-5.0, 0.0],
            1e-14,
        );

        assert_eq!(
            make_reflector(&[1.0, 0.0, 0.0], 0, -1.0).unwrap(),
            vec![0.0; 3]
        );

        let v = make_reflector(&[1.0; 4], 0, 1.0).unwrap();
        assert_eq!(v, vec![3.0, 1.0, 1.0, 1.0]);
        assert_vec_close(
            &apply_reflection(&v, &[1.0; 4]).unwrap(),
            &[-2.0, 0.0, 0.0, 0.0],
            1e-14,
        );
    }

    #[test]
    fn reflector_leaves_leading_components_alone() {
        let x = [5.0, -2.0, 1.0, 2.0, 2.0];
        let v = make_reflector(&x, 2, 1.0).unwrap();
        assert_eq!(&v[..2], &[0.0, 0.0]);
        let hx = apply_reflection(&v, &x).unwrap();
        assert_vec_close(&hx, &[5.0, -2.0, -3.0, 0.0, 0.0], 1e-14);
    }

    #[test]
    fn reflector_errors() {
        assert!(matches!(
            make_reflector(&[1.0, 0.0, 0.0], 1, 1.0),
            Err(Error::RankDeficient { column: 1, .. })
        ));
        assert!(make_reflector(&[1.0, 2.0], 2, 1.0).is_err());
        assert!(make_reflector(&[1.0, 2.0], 0, 0.5).is_err());
        assert!(apply_reflection(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn apply_reflection_examples() {
        let v = [3.0, 1.0, 1.0, 1.0];
        assert_vec_close(
            &apply_reflection(&v, &[1.0, 0.0, 0.0, 0.0]).unwrap(),
            &[-0.5; 4],
            1e-15,
        );
        assert_eq!(
            apply_reflection(&[0.0, 0.0], &[5.0, 7.0]).unwrap(),
            vec![5.0, 7.0]
        );
    }

    #[test]
    fn qr_examples() {
        let x = DenseMatrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        let qr = householder_qr(&x, SignPolicy::Standard).unwrap();
        assert_abs_diff_eq!(qr.t()[(0, 0)], -5.0, epsilon = 1e-14);
        assert_eq!(qr.reflectors()[0].vector(), &[8.0, 4.0]);
        assert!(qr.reconstruct().sub(&x).unwrap().max_abs() < 1e-14);

        let ones = DenseMatrix::new(4, 1, vec![1.0; 4]).unwrap();
        let qr = householder_qr(&ones, SignPolicy::Standard).unwrap();
        assert_abs_diff_eq!(qr.t()[(0, 0)], -2.0, epsilon = 1e-15);
        assert_eq!(qr.reflectors()[0].vector(), &[3.0, 1.0, 1.0, 1.0]);
        assert_vec_close(
            &qr.apply_qt(&[1.0; 4]).unwrap(),
            &[-2.0, 0.0, 0.0, 0.0],
            1e-15,
        );
        assert_vec_close(
            &qr.apply_qt(&[1.0, 0.0, 0.0, 0.0]).unwrap(),
            &[-0.5; 4],
            1e-15,
        );
        assert_eq!(qr.apply_qt(&[0.0; 4]).unwrap(), vec![0.0; 4]);

        let e1 = DenseMatrix::new(3, 1, vec![1.0, 0.0, 0.0]).unwrap();
        let qr = householder_qr(&e1, SignPolicy::Custom(vec![-1.0])).unwrap();
        assert!(qr.reflectors()[0].is_zero());
        assert_eq!(qr.t()[(0, 0)], 1.0);
        assert_eq!(qr.nonzero_reflectors(), 0);
    }

    #[test]
    fn qr_rejects_rank_deficiency_and_bad_policies() {
        let dup =
            DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        assert!(matches!(
            householder_qr(&dup, SignPolicy::Standard),
            Err(Error::RankDeficient { column: 1, .. })
        ));
        let x = DenseMatrix::identity(3);
        assert!(householder_qr(&x, SignPolicy::Custom(vec![1.0])).is_err());
        let wide = DenseMatrix::zeros(2, 3);
        assert!(householder_qr(&wide, SignPolicy::Standard).is_err());
        let qr = householder_qr(&x, SignPolicy::Standard).unwrap();
        assert!(qr.apply_qt(&[1.0]).is_err());
    }

    #[test]
    fn explicit_basis_for_ones() {
        let ones = DenseMatrix::new(4, 1, vec![1.0; 4]).unwrap();
        let qr = householder_qr(&ones, SignPolicy::Standard).unwrap();
        let u2 = qr.explicit_orthocomplement_basis().unwrap();
        assert_eq!(u2.shape(), (4, 3));
        assert!(u2.orthonormality_error() < 1e-14);
        assert!(u2
            .tr_matvec(&[1.0; 4])
            .unwrap()
            .iter()
            .all(|c| c.abs() < 1e-14));

        let square = DenseMatrix::identity(2);
        let qr = householder_qr(&square, SignPolicy::Standard).unwrap();
        assert!(qr.explicit_orthocomplement_basis().is_err());
    }

    #[test]
    fn p_equals_n_minus_one_gives_single_column() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let qr = householder_qr(&x, SignPolicy::Standard).unwrap();
        let u2 = qr.explicit_orthocomplement_basis().unwrap();
        assert_eq!(u2.shape(), (3, 1));
        assert_abs_diff_eq!(crate::matrix::norm(&u2.column(0)), 1.0, epsilon = 1e-14);
        assert!(u2.transpose().matmul(&x).unwrap().max_abs() < 1e-14);
    }
}
