//! Dense factorization with pivot-based singularity detection.
//!
//! Every factorization in the solver goes through [`factor_checked`]: an
//! LU with partial pivoting whose pivots are compared against a relative
//! threshold. A pivot below `PIVOT_RTOL` times the largest diagonal entry
//! of the original matrix flags the matrix as singular; the count of such
//! pivots estimates the rank deficiency.

use nalgebra::{DMatrix, DVector, Dyn};

/// Relative pivot threshold: pivots below this fraction of the largest
/// diagonal magnitude count as zero.
pub const PIVOT_RTOL: f64 = 1e-10;

/// Outcome of a failed factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityReport {
    pub n: usize,
    pub n_small_pivots: usize,
    pub min_abs_pivot: f64,
    pub threshold: f64,
}

impl std::fmt::Display for SingularityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} of {} pivots below {:.3e} (smallest {:.3e})",
            self.n_small_pivots, self.n, self.threshold, self.min_abs_pivot
        )
    }
}

/// LU factorization that passed the pivot check.
#[derive(Debug)]
pub struct CheckedLu {
    lu: nalgebra::LU<f64, Dyn, Dyn>,
}

impl CheckedLu {
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        if b.is_empty() {
            return DVector::zeros(0);
        }
        self.lu.solve(b).expect("pivots were checked nonzero")
    }

    pub fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        if b.nrows() == 0 || b.ncols() == 0 {
            return b.clone();
        }
        self.lu.solve(b).expect("pivots were checked nonzero")
    }
}

/// Inspect pivots against the threshold without consuming the factorization.
fn pivot_report(m: &DMatrix<f64>, lu: &nalgebra::LU<f64, Dyn, Dyn>) -> SingularityReport {
    let n = m.nrows();
    let max_diag = (0..n).map(|i| m[(i, i)].abs()).fold(0.0_f64, f64::max);
    let threshold = PIVOT_RTOL * max_diag;
    let mut n_small = 0;
    let mut min_abs = f64::INFINITY;
    let u = lu.u();
    for i in 0..n {
        let p = u[(i, i)].abs();
        min_abs = min_abs.min(p);
        if p <= threshold || !p.is_finite() {
            n_small += 1;
        }
    }
    if n == 0 {
        min_abs = 0.0;
    }
    SingularityReport { n, n_small_pivots: n_small, min_abs_pivot: min_abs, threshold }
}

/// Factor a square matrix, failing when any pivot falls below the relative
/// threshold. The returned report counts offending pivots.
pub fn factor_checked(m: DMatrix<f64>) -> Result<CheckedLu, SingularityReport> {
    assert_eq!(m.nrows(), m.ncols(), "factor_checked needs a square matrix");
    let lu = m.clone().lu();
    let report = pivot_report(&m, &lu);
    if report.n_small_pivots > 0 {
        return Err(report);
    }
    Ok(CheckedLu { lu })
}

/// Pivot diagnosis without keeping the factors.
pub fn diagnose_pivots(m: &DMatrix<f64>) -> SingularityReport {
    let lu = m.clone().lu();
    pivot_report(m, &lu)
}
