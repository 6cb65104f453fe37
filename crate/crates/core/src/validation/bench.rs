//! Timing of the three ways to compute `U₂ᵀx`: multiplying by the explicit
//! basis, running the reflections, and the closed formula.

use std::hint::black_box;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::max_abs_diff;
use crate::orthocomp::{orthocomplement_apply_unchecked, standard_projector, RowSelection};
use crate::validation::random::{normal_matrix, rng_from_seed, unit_vec};

/// Minimum wall time per measurement; short kernels are looped until reached.
const MIN_SAMPLE: Duration = Duration::from_millis(5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApplyMethod {
    ExplicitBasis,
    Reflections,
    ClosedFormula,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: ApplyMethod,
    pub n: usize,
    pub p: usize,
    /// Best observed seconds per call over the repeats.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Largest entrywise disagreement between the three methods, over the grid.
    pub max_discrepancy: f64,
}

impl BenchReport {
    pub fn seconds(&self, method: ApplyMethod, n: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.n == n)
            .map(|r| r.seconds)
    }
}

fn time_per_call<T>(repeats: usize, mut f: impl FnMut() -> T) -> f64 {
    black_box(f());
    let mut best = f64::INFINITY;
    for _ in 0..repeats {
        let mut iters = 0u64;
        let start = Instant::now();
        loop {
            black_box(f());
            iters += 1;
            if start.elapsed() >= MIN_SAMPLE {
                break;
            }
        }
        best = best.min(start.elapsed().as_secs_f64() / iters as f64);
    }
    best
}

pub fn benchmark_apply(
    n_grid: &[usize],
    p: usize,
    repeats: usize,
    seed: u64,
) -> Result<BenchReport> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "n grid must be nonempty and strictly ascending".into(),
        ));
    }
    if p < 1 || p >= n_grid[0] {
        return Err(Error::InvalidInput(format!(
            "need 1 <= p < min(n_grid), got p = {p}"
        )));
    }
    if repeats < 1 {
        return Err(Error::InvalidInput("repeats must be at least 1".into()));
    }

    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::new();
    let mut max_discrepancy = 0.0f64;
    for &n in n_grid {
        let x = normal_matrix(&mut rng, n, p);
        let sel = RowSelection::first(p, n)?;
        let (qr, sp) = standard_projector(&x, &sel)?;
        let v = qr.project_to_complement(&unit_vec(&mut rng, n))?;

        let closed = orthocomplement_apply_unchecked(&sp, &x, &v, &sel);
        let reflected = qr.apply_qt(&v)?[p..].to_vec();
        max_discrepancy = max_discrepancy.max(max_abs_diff(&closed, &reflected));

        let closed_t = time_per_call(repeats, || {
            orthocomplement_apply_unchecked(&sp, &x, &v, &sel)
        });
        let reflect_t = time_per_call(repeats, || {
            let mut y = v.clone();
            qr.apply_qt_in_place(&mut y);
            y
        });
        let explicit_t = {
            let u2 = qr.explicit_orthocomplement_basis()?;
            let explicit = u2.tr_matvec(&v)?;
            max_discrepancy = max_discrepancy.max(max_abs_diff(&closed, &explicit));
            time_per_call(repeats, || u2.tr_matvec(&v).expect("length n"))
        };

        for (method, seconds) in [
            (ApplyMethod::ExplicitBasis, explicit_t),
            (ApplyMethod::Reflections, reflect_t),
            (ApplyMethod::ClosedFormula, closed_t),
        ] {
            rows.push(BenchRow {
                method,
                n,
                p,
                seconds,
            });
        }
    }
    Ok(BenchReport {
        rows,
        max_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_run() {
        let report = benchmark_apply(&[20, 40], 2, 1, 5).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert!(report.max_discrepancy < 1e-10);
        assert!(report.seconds(ApplyMethod::ClosedFormula, 40).unwrap() > 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(benchmark_apply(&[], 2, 1, 0).is_err());
        assert!(benchmark_apply(&[40, 20], 2, 1, 0).is_err());
        assert!(benchmark_apply(&[20, 40], 20, 1, 0).is_err());
        assert!(benchmark_apply(&[20, 40], 2, 0, 0).is_err());
    }
}
