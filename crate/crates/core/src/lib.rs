//! Householder QR, closed-form actions of the orthogonal complement of a
//! column space, and independent regression residuals built from them.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod householder;
pub mod matrix;
pub mod orthocomp;
pub mod regression;
pub mod validation;

pub use error::{Error, Result};
pub use householder::{
    apply_reflection, householder_qr, make_reflector, HouseholderQR, Reflector, SignPolicy,
};
pub use matrix::DenseMatrix;
pub use orthocomp::{
    orthocomplement_apply, orthocomplement_apply_unchecked, rank_count, s_from_c, s_from_qr,
    s_recursion, s_recursion_with_pivots, sign_fix, standard_projector, RowSelection, SProjector,
    SSource,
};
pub use regression::{
    fit_least_squares, independent_residuals, standardize_predictor, student_coefficient,
    student_w, univariate_coefficients, univariate_w, IndependentResiduals, RegressionFit,
    StandardizedPredictor, StudentVariant, UnivariateVariant,
};
