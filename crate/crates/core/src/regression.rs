//! Least-squares fits and the independent-residual constructions built on
//! top of them.
//!
//! All constructions produce `n - p` values `W` with `WᵀW = RᵀR`. The general
//! path goes through the closed orthocomplement formula; the one- and two-parameter
//! special cases use their closed-form coefficients directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::householder::{householder_qr, HouseholderQR, SignPolicy};
use crate::matrix::{dot, norm, DenseMatrix};
use crate::orthocomp::{orthocomplement_apply_unchecked, RowSelection, SProjector};

/// Near-singular threshold on the denominator of coefficient set (a).
pub const UNIVARIATE_SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub beta_hat: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
}

impl RegressionFit {
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentResiduals {
    pub w: Vec<f64>,
    /// Correction `S · R_sel`.
    pub v: Vec<f64>,
    /// `β̂ - v`; `W_j = Y_j - x_j · β*` on the complement rows.
    pub beta_star: Vec<f64>,
    pub selection: RowSelection,
}

impl IndependentResiduals {
    pub fn wss(&self) -> f64 {
        dot(&self.w, &self.w)
    }
}

/// Which root of `(n-1)c² - 2c - 1 = 0` to use in the one-sample case.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StudentVariant {
    /// `c = -1/(√n + 1)`, the standard-sign Householder choice.
    #[default]
    Minus,
    /// `c = 1/(√n - 1)`.
    Plus,
}

/// Coefficient choice for intercept-plus-slope regression.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnivariateVariant {
    /// From `(I₂ - X_lead)⁻¹`, with the rank-one fallback when singular.
    A,
    /// From the standard-sign Householder `T`; never singular.
    #[default]
    B,
}

/// A predictor rescaled to `Σt = 0`, `Σt² = 1` via `t = (raw - shift) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedPredictor {
    pub t: Vec<f64>,
    pub shift: f64,
    pub scale: f64,
}

pub fn standardize_predictor(raw: &[f64]) -> Result<StandardizedPredictor> {
    if raw.len() < 2 {
        return Err(Error::InvalidInput(
            "a predictor needs at least two observations".into(),
        ));
    }
    let shift = raw.iter().sum::<f64>() / raw.len() as f64;
    let centered: Vec<f64> = raw.iter().map(|r| r - shift).collect();
    let scale = norm(&centered);
    let magnitude = raw.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if !(scale > 1e-12 * magnitude) || scale == 0.0 {
        return Err(Error::InvalidInput(
            "predictor is constant (collinear with the intercept)".into(),
        ));
    }
    Ok(StandardizedPredictor {
        t: centered.iter().map(|c| c / scale).collect(),
        shift,
        scale,
    })
}

fn back_substitute(t: &DenseMatrix, rhs: &[f64]) -> Vec<f64> {
    let p = t.rows();
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let tail: f64 = (i + 1..p).map(|j| t[(i, j)] * beta[j]).sum();
        beta[i] = (rhs[i] - tail) / t[(i, i)];
    }
    beta
}

/// Coefficients and residuals given a standard-sign factorization of `x`.
pub(crate) fn fit_with_qr(qr: &HouseholderQR, x: &DenseMatrix, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let qty = qr.apply_qt(y).expect("response length checked by caller");
    let beta = back_substitute(qr.t(), &qty[..qr.p()]);
    let fitted = x.matvec(&beta).expect("beta has p entries");
    let residuals = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    (beta, residuals)
}

/// Least squares through Householder QR: `T β̂ = (Qᵀ Y)_lead`.
pub fn fit_least_squares(x: &DenseMatrix, y: &[f64]) -> Result<RegressionFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            context: "fit_least_squares response",
            expected: n,
            found: y.len(),
        });
    }
    if p >= n {
        return Err(Error::InvalidShape(format!(
            "regression needs p < n, got n = {n}, p = {p}"
        )));
    }
    let qr = householder_qr(x, SignPolicy::Standard)?;
    let (beta_hat, residuals) = fit_with_qr(&qr, x, y);
    let rss = dot(&residuals, &residuals);

    let xtr = x.tr_matvec(&residuals)?;
    let worst = xtr.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let bound = 1e-8 * norm(y) * x.frobenius_norm().max(1.0);
    if worst > bound {
        return Err(Error::CheckFailed(format!(
            "residuals not orthogonal to col(X): max |XᵀR| = {worst:e}"
        )));
    }
    Ok(RegressionFit {
        x: x.clone(),
        y: y.to_vec(),
        beta_hat,
        residuals,
        rss,
    })
}

/// `W = R_rest + X_rest v` with `v = S R_sel` and `β* = β̂ - v`.
pub fn independent_residuals(
    fit: &RegressionFit,
    sp: &SProjector,
    sel: &RowSelection,
) -> Result<IndependentResiduals> {
    if sp.p != fit.p() || sel.p() != fit.p() || sel.n() != fit.n() {
        return Err(Error::InvalidSelection(format!(
            "projector (p = {}) / selection ({} of {}) do not match a {}x{} fit",
            sp.p,
            sel.p(),
            sel.n(),
            fit.n(),
            fit.p()
        )));
    }
    // the fit already checked XᵀR against the scale of Y
    let w = orthocomplement_apply_unchecked(sp, &fit.x, &fit.residuals, sel);
    let r_sel: Vec<f64> = sel.indices().iter().map(|&i| fit.residuals[i]).collect();
    let v = sp.s.matvec(&r_sel)?;
    let beta_star = fit.beta_hat.iter().zip(&v).map(|(b, c)| b - c).collect();
    Ok(IndependentResiduals {
        w,
        v,
        beta_star,
        selection: sel.clone(),
    })
}

/// The coefficient `c` in `W_j = R_{j+1} + c R_1`.
pub fn student_coefficient(n: usize, variant: StudentVariant) -> f64 {
    let rn = (n as f64).sqrt();
    match variant {
        StudentVariant::Minus => -1.0 / (rn + 1.0),
        StudentVariant::Plus => 1.0 / (rn - 1.0),
    }
}

/// One-sample case: `X = 1`, `R_j = Y_j - Ȳ`, `W_j = R_{j+1} + c R_1`.
///
/// `beta_star[0]` is the modified mean `μ* = Ȳ - c R_1`.
pub fn student_w(y: &[f64], variant: StudentVariant) -> Result<IndependentResiduals> {
    let n = y.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "one-sample residuals need n >= 2, got {n}"
        )));
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let r1 = y[0] - mean;
    let c = student_coefficient(n, variant);
    let shift = c * r1;
    let w = y[1..].iter().map(|yj| (yj - mean) + shift).collect();
    Ok(IndependentResiduals {
        w,
        v: vec![shift],
        beta_star: vec![mean - shift],
        selection: RowSelection::first(1, n)?,
    })
}

/// `[[A, B], [C, D]]` such that
/// `W_j = R_{j+2} + (A R_1 + B R_2) + (C R_1 + D R_2) t_{j+2}`.
pub fn univariate_coefficients(t: &[f64], variant: UnivariateVariant) -> Result<[[f64; 2]; 2]> {
    let n = t.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "intercept-plus-slope residuals need n >= 3, got {n}"
        )));
    }
    let rn = (n as f64).sqrt();
    let (t1, t2) = (t[0], t[1]);
    Ok(match variant {
        UnivariateVariant::A => {
            let den = (rn - 1.0) * (1.0 - t2) - t1;
            if den.abs() < UNIVARIATE_SINGULAR_TOL {
                [[1.0 / (rn - 1.0), 0.0], [0.0, 0.0]]
            } else {
                [[(1.0 - t2) / den, t1 / den], [1.0 / den, (rn - 1.0) / den]]
            }
        }
        UnivariateVariant::B => {
            let g = (rn + 1.0) * t2 - t1;
            let s = if g < 0.0 { -1.0 } else { 1.0 };
            let k = -s / ((rn + 1.0) + g.abs());
            [[k * (s + t2), -k * t1], [-k, k * (rn + 1.0)]]
        }
    })
}

/// Intercept-plus-slope case with a standardized predictor.
///
/// `beta_hat`, `v` and `beta_star` are in `(intercept, slope)` units for the
/// model `Y = a + b t`, so `a* = â - (A R_1 + B R_2)` and `b* = b̂ - (C R_1 + D R_2)`.
pub fn univariate_w(
    pred: &StandardizedPredictor,
    y: &[f64],
    variant: UnivariateVariant,
) -> Result<IndependentResiduals> {
    let n = y.len();
    if pred.t.len() != n {
        return Err(Error::DimensionMismatch {
            context: "univariate_w predictor",
            expected: n,
            found: pred.t.len(),
        });
    }
    let [[a, b], [c, d]] = univariate_coefficients(&pred.t, variant)?;
    let t = &pred.t;
    let a_hat = y.iter().sum::<f64>() / n as f64;
    let b_hat = dot(t, y);
    let r: Vec<f64> = y
        .iter()
        .zip(t)
        .map(|(yj, tj)| yj - a_hat - b_hat * tj)
        .collect();
    let shift = a * r[0] + b * r[1];
    let slope = c * r[0] + d * r[1];
    let w = (2..n).map(|j| r[j] + shift + slope * t[j]).collect();
    Ok(IndependentResiduals {
        w,
        v: vec![shift, slope],
        beta_star: vec![a_hat - shift, b_hat - slope],
        selection: RowSelection::first(2, n)?,
    })
}
