//! Seeded generators for test matrices and vectors.
//!
//! Everything is driven by `ChaCha8Rng`; normals come from `rand_distr`'s
//! `StandardNormal` so a given seed reproduces the same draws on every build.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::householder::{householder_qr, SignPolicy};
use crate::matrix::{norm, DenseMatrix};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` under `seed`.
pub fn rng_for_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn normal_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

pub fn normal_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::new(rows, cols, normal_vec(rng, rows * cols)).expect("nonempty shape")
}

pub fn unit_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let v = normal_vec(rng, n);
    let len = norm(&v);
    v.into_iter().map(|c| c / len).collect()
}

/// `n×p` matrix with orthonormal columns: the `Q` factor of a Gaussian matrix.
pub fn orthonormal_columns<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> DenseMatrix {
    let g = normal_matrix(rng, n, p);
    let qr = householder_qr(&g, SignPolicy::Standard).expect("Gaussian matrices have full rank");
    let columns: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            qr.apply_q(&e).expect("length n")
        })
        .collect();
    DenseMatrix::from_columns(&columns).expect("p >= 1")
}

/// Random `p×p` orthogonal matrix.
pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, p: usize) -> DenseMatrix {
    orthonormal_columns(rng, p, p)
}

/// Uniformly chosen strictly increasing `p`-subset of `0..n`.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> Vec<usize> {
    let mut picked = rand::seq::index::sample(rng, n, p).into_vec();
    picked.sort_unstable();
    picked
}
