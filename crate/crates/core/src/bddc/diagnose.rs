//! Invertibility diagnosis without solving: factor every constrained
//! local problem and, when all of them pass, the coarse matrix, reporting
//! pivot counts per subdomain.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::linalg::{diagnose_pivots, factor_checked, SingularityReport};

use super::constraints::ConstraintSet;
use super::precond::{coarse_layout, local_parts, CoarseLayout, LocalCoarseCol};
use super::schur::{SchurSystem, SubdomainBlock};
use super::BddcError;

#[derive(Debug, Clone)]
pub struct LocalDiagnosis {
    pub sub: usize,
    pub ok: bool,
    pub report: SingularityReport,
}

#[derive(Debug, Clone)]
pub enum CoarseDiagnosis {
    Checked { ok: bool, report: SingularityReport },
    /// Coarse assembly needs every local basis; skipped when a local failed.
    Skipped { failed_subdomains: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct InvertibilityReport {
    pub locals: Vec<LocalDiagnosis>,
    pub coarse: CoarseDiagnosis,
}

impl InvertibilityReport {
    pub fn all_ok(&self) -> bool {
        self.locals.iter().all(|l| l.ok)
            && matches!(self.coarse, CoarseDiagnosis::Checked { ok: true, .. })
    }
}

/// Attempt all local and coarse factorizations with the pivot threshold,
/// reporting pass/fail per subdomain and for the coarse matrix.
pub fn check_invertibility(
    schur: &SchurSystem,
    constraints: &ConstraintSet,
) -> Result<InvertibilityReport, BddcError> {
    let layout = coarse_layout(schur, constraints)?;

    let locals: Vec<LocalDiagnosis> = schur
        .subdomains()
        .par_iter()
        .map(|s| {
            let parts = local_parts(s, &layout);
            let report = diagnose_pivots(&parts.saddle);
            LocalDiagnosis { sub: s.sub, ok: report.n_small_pivots == 0, report }
        })
        .collect();

    let failed: Vec<usize> = locals.iter().filter(|l| !l.ok).map(|l| l.sub).collect();
    if !failed.is_empty() {
        return Ok(InvertibilityReport {
            locals,
            coarse: CoarseDiagnosis::Skipped { failed_subdomains: failed },
        });
    }

    let coarse = assemble_coarse(schur, &layout)?;
    let report = diagnose_pivots(&coarse);
    Ok(InvertibilityReport {
        locals,
        coarse: CoarseDiagnosis::Checked { ok: report.n_small_pivots == 0, report },
    })
}

/// The assembled coarse matrix, exposed so verification suites can run
/// independent rank checks on it. Fails when a local problem is singular.
pub fn coarse_matrix(
    schur: &SchurSystem,
    constraints: &ConstraintSet,
) -> Result<DMatrix<f64>, BddcError> {
    let layout = coarse_layout(schur, constraints)?;
    assemble_coarse(schur, &layout)
}

type CoarseContribution = Result<(Vec<usize>, DMatrix<f64>), BddcError>;

fn assemble_coarse(
    schur: &SchurSystem,
    layout: &CoarseLayout,
) -> Result<DMatrix<f64>, BddcError> {
    let per_sub: Vec<CoarseContribution> = schur
        .subdomains()
        .par_iter()
        .map(|s| local_coarse_contribution(s, layout))
        .collect();
    let mut coarse = DMatrix::zeros(layout.n_coarse, layout.n_coarse);
    for item in per_sub {
        let (ids, k_sub) = item?;
        for (a, &ga) in ids.iter().enumerate() {
            for (b, &gb) in ids.iter().enumerate() {
                coarse[(ga, gb)] += k_sub[(a, b)];
            }
        }
    }
    Ok(coarse)
}

fn local_coarse_contribution(s: &SubdomainBlock, layout: &CoarseLayout) -> CoarseContribution {
    let parts = local_parts(s, layout);
    let n_r = parts.n_r;
    let n_cols = parts.coarse_cols.len();
    let saddle = factor_checked(parts.saddle.clone())
        .map_err(|report| BddcError::SingularLocal { sub: s.sub, report })?;
    let mut rhs = DMatrix::zeros(parts.saddle.nrows(), n_cols);
    for (col, cc) in parts.coarse_cols.iter().enumerate() {
        match *cc {
            LocalCoarseCol::Corner { local_pos, .. } => {
                for (ri, &pi) in parts.r_positions.iter().enumerate() {
                    rhs[(ri, col)] = -s.a_local[(pi, local_pos)];
                }
            }
            LocalCoarseCol::Average { avg_pos, .. } => {
                rhs[(n_r + avg_pos, col)] = 1.0;
            }
        }
    }
    let sol = saddle.solve_mat(&rhs);
    let mut psi = DMatrix::zeros(s.n_local(), n_cols);
    for (col, cc) in parts.coarse_cols.iter().enumerate() {
        if let LocalCoarseCol::Corner { local_pos, .. } = *cc {
            psi[(local_pos, col)] = 1.0;
        }
    }
    for (ri, &pi) in parts.r_positions.iter().enumerate() {
        for col in 0..n_cols {
            psi[(pi, col)] = sol[(ri, col)];
        }
    }
    let k_sub = psi.transpose() * &s.a_local * psi;
    let ids = parts.coarse_cols.iter().map(|c| c.coarse_idx()).collect();
    Ok((ids, k_sub))
}
