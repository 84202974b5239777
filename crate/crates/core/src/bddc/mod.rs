//! BDDC solver stack: Schur-complement reduction, coarse constraints,
//! preconditioner assembly and application, PCG with condition estimation,
//! and invertibility diagnostics.

mod constraints;
mod diagnose;
mod pcg;
mod precond;
mod schur;

pub use constraints::{build_constraints, AverageRow, ConstraintMode, ConstraintSet};
pub use diagnose::{
    check_invertibility, coarse_matrix, CoarseDiagnosis, InvertibilityReport, LocalDiagnosis,
};
pub use pcg::{pcg, pcg_traced, SolveReport, Timings};
pub use precond::{apply_preconditioner, build_preconditioner, BddcOperator};
pub use schur::{reduce_to_schur, SchurSystem, SubdomainBlock};

use thiserror::Error;

use crate::linalg::SingularityReport;

#[derive(Debug, Error)]
pub enum BddcError {
    #[error("partition has a single subdomain: the interface is empty and there is nothing to reduce")]
    EmptyInterface,
    #[error("interior block of subdomain {sub} is singular; it has neither Dirichlet nodes nor interface")]
    SingularInterior { sub: usize },
    #[error("local problem of subdomain {sub} is singular ({report}); its corner set does not fix all rigid motions")]
    SingularLocal { sub: usize, report: SingularityReport },
    #[error("coarse mechanism detected: the coarse matrix is singular ({report})")]
    CoarseMechanism { report: SingularityReport },
    #[error("constraint set is empty; at least one corner or average is required")]
    EmptyConstraints,
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
}
