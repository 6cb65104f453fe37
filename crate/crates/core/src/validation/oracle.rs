use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::orthocomp::{orthocomplement_apply, standard_projector, RowSelection};
use crate::validation::random::{normal_vec, rng_from_seed};

/// Largest entrywise gap between the closed formula and `U₂ᵀx` built from the
/// explicit basis, over `trials` random vectors in `col(X)⊥`. Uses the
/// leading `p` rows.
pub fn oracle_compare(x: &DenseMatrix, trials: usize, seed: u64) -> Result<f64> {
    let sel = RowSelection::first(x.cols(), x.rows())?;
    oracle_compare_with_selection(x, &sel, trials, seed)
}

pub fn oracle_compare_with_selection(
    x: &DenseMatrix,
    sel: &RowSelection,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let (qr, sp) = standard_projector(x, sel)?;
    if trials == 0 {
        return Ok(0.0);
    }
    let u2 = qr.explicit_orthocomplement_basis()?;
    let perm = sel.permutation();
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let z = normal_vec(&mut rng, x.rows());
        // project in permuted coordinates, then scatter back
        let permuted = qr.project_to_complement(&sel.permute_vec(&z))?;
        let mut v = vec![0.0; x.rows()];
        for (pos, &row) in perm.iter().enumerate() {
            v[row] = permuted[pos];
        }
        let fast = orthocomplement_apply(&sp, x, &v, sel)?;
        let slow = u2.tr_matvec(&permuted)?;
        worst = worst.max(crate::matrix::max_abs_diff(&fast, &slow));
    }
    Ok(worst)
}
