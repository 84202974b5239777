//! BDDC preconditioner: energy-minimal coarse basis, constrained local
//! corrections, and multiplicity-weighted averaging between the broken
//! and continuous interface spaces.
//!
//! Corner constraints are enforced by eliminating the corner dofs from
//! the local problems (their values are coarse unknowns); average
//! constraints ride along as Lagrange multiplier rows of the local
//! saddle systems. The coarse basis solves
//!
//! ```text
//! [ A_rr  C^T ] [ psi_r ]   [ -A_rc e_c ]      (corner columns)
//! [ C      0  ] [ mu    ] = [  e_m      ]      (average columns)
//! ```
//!
//! per subdomain; the coarse matrix assembles `psi^T A psi` over
//! subdomains and is factored directly. Averaging uses multiplicity
//! weights (one over the number of sharing subdomains per dof).

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::linalg::{factor_checked, CheckedLu};

use super::constraints::ConstraintSet;
use super::schur::{SchurSystem, SubdomainBlock};
use super::BddcError;

/// Global coarse dof layout shared by the preconditioner and diagnostics.
pub(crate) struct CoarseLayout {
    pub n_coarse: usize,
    /// Corner coarse dofs: global dof id -> coarse index.
    pub corner_coarse: BTreeMap<usize, usize>,
    pub avg_rows: Vec<AvgRowDofs>,
}

pub(crate) struct AvgRowDofs {
    pub coarse_idx: usize,
    /// Free global dofs of the row; weights are uniform.
    pub dofs: Vec<usize>,
    pub weight: f64,
    /// Any node of the glob, used to test subdomain membership.
    pub probe_node: usize,
}

pub(crate) fn coarse_layout(
    schur: &SchurSystem,
    constraints: &ConstraintSet,
) -> Result<CoarseLayout, BddcError> {
    let dpn = schur.dofs_per_node;
    let mut corner_coarse = BTreeMap::new();
    let mut next = 0usize;
    for &node in &constraints.corner_nodes {
        for c in 0..dpn {
            let dof = node * dpn + c;
            if schur.is_fixed(dof) {
                continue;
            }
            if schur.interface_index_of(dof).is_none() {
                return Err(BddcError::Inconsistent(format!(
                    "corner node {node} is not on the interface"
                )));
            }
            corner_coarse.insert(dof, next);
            next += 1;
        }
    }
    let mut avg_rows = Vec::new();
    for row in &constraints.averages {
        let dofs: Vec<usize> = row
            .nodes
            .iter()
            .map(|&n| n * dpn + row.component)
            .filter(|&d| !schur.is_fixed(d))
            .collect();
        if dofs.is_empty() {
            continue;
        }
        let weight = 1.0 / dofs.len() as f64;
        avg_rows.push(AvgRowDofs {
            coarse_idx: next,
            dofs,
            weight,
            probe_node: row.nodes[0],
        });
        next += 1;
    }
    Ok(CoarseLayout { n_coarse: next, corner_coarse, avg_rows })
}

/// Per-subdomain pieces needed to factor and apply the local problems.
pub(crate) struct LocalParts {
    pub saddle: DMatrix<f64>,
    pub n_r: usize,
    /// Local dof position per r index (interior first, boundary after).
    pub r_positions: Vec<usize>,
    /// For each local boundary index: its r index, or None at corners.
    pub boundary_to_r: Vec<Option<usize>>,
    /// Local coarse columns ascending by global coarse index.
    pub coarse_cols: Vec<LocalCoarseCol>,
}

pub(crate) enum LocalCoarseCol {
    Corner { coarse_idx: usize, local_pos: usize },
    Average { coarse_idx: usize, avg_pos: usize },
}

impl LocalCoarseCol {
    pub fn coarse_idx(&self) -> usize {
        match *self {
            LocalCoarseCol::Corner { coarse_idx, .. } => coarse_idx,
            LocalCoarseCol::Average { coarse_idx, .. } => coarse_idx,
        }
    }
}

pub(crate) fn local_parts(s: &SubdomainBlock, layout: &CoarseLayout) -> LocalParts {
    let ni = s.n_interior();
    let nb = s.n_boundary();
    let n_local = ni + nb;

    let mut is_corner = vec![false; n_local];
    let mut coarse_cols: Vec<LocalCoarseCol> = Vec::new();
    for (b, &dof) in s.boundary_dofs.iter().enumerate() {
        if let Some(&cidx) = layout.corner_coarse.get(&dof) {
            is_corner[ni + b] = true;
            coarse_cols.push(LocalCoarseCol::Corner { coarse_idx: cidx, local_pos: ni + b });
        }
    }
    // averages whose glob is shared by this subdomain
    let mut local_avgs: Vec<&AvgRowDofs> = Vec::new();
    for row in &layout.avg_rows {
        if s.nodes.binary_search(&row.probe_node).is_ok() {
            coarse_cols.push(LocalCoarseCol::Average {
                coarse_idx: row.coarse_idx,
                avg_pos: local_avgs.len(),
            });
            local_avgs.push(row);
        }
    }
    coarse_cols.sort_by_key(|c| c.coarse_idx());

    let mut r_positions = Vec::with_capacity(n_local);
    let mut local_to_r = vec![None; n_local];
    for (pos, &corner) in is_corner.iter().enumerate() {
        if !corner {
            local_to_r[pos] = Some(r_positions.len());
            r_positions.push(pos);
        }
    }
    let n_r = r_positions.len();
    let boundary_to_r: Vec<Option<usize>> = (0..nb).map(|b| local_to_r[ni + b]).collect();

    let n_avg = local_avgs.len();
    let dim = n_r + n_avg;
    let mut saddle = DMatrix::zeros(dim, dim);
    for (ri, &pi) in r_positions.iter().enumerate() {
        for (rj, &pj) in r_positions.iter().enumerate() {
            saddle[(ri, rj)] = s.a_local[(pi, pj)];
        }
    }
    // global dof -> local boundary index for scattering average weights
    let boundary_index: BTreeMap<usize, usize> =
        s.boundary_dofs.iter().enumerate().map(|(b, &d)| (d, b)).collect();
    for (m, row) in local_avgs.iter().enumerate() {
        for &dof in &row.dofs {
            let b = boundary_index[&dof];
            let r = boundary_to_r[b].expect("average rows never touch corners");
            saddle[(n_r + m, r)] = row.weight;
            saddle[(r, n_r + m)] = row.weight;
        }
    }

    LocalParts { saddle, n_r, r_positions, boundary_to_r, coarse_cols }
}

struct LocalOperator {
    boundary_interface_idx: Vec<usize>,
    weights: DVector<f64>,
    saddle_dim: usize,
    boundary_to_r: Vec<Option<usize>>,
    saddle: CheckedLu,
    /// Coarse basis restricted to boundary dofs, one column per local
    /// coarse dof.
    psi_b: DMatrix<f64>,
    coarse_ids: Vec<usize>,
}

/// Assembled preconditioner state.
pub struct BddcOperator {
    n_interface: usize,
    locals: Vec<LocalOperator>,
    coarse: CheckedLu,
    pub n_coarse_dofs: usize,
    pub coarse_factor_seconds: f64,
    pub setup_seconds: f64,
}

/// Build the preconditioner: factor every constrained local problem,
/// assemble the energy-minimal coarse basis, and factor the coarse matrix.
pub fn build_preconditioner(
    schur: &SchurSystem,
    constraints: &ConstraintSet,
) -> Result<BddcOperator, BddcError> {
    let start = Instant::now();
    if constraints.is_empty() {
        return Err(BddcError::EmptyConstraints);
    }
    let layout = coarse_layout(schur, constraints)?;
    if layout.n_coarse == 0 {
        return Err(BddcError::EmptyConstraints);
    }

    let built: Vec<Result<(LocalOperator, DMatrix<f64>), BddcError>> = schur
        .subdomains()
        .par_iter()
        .map(|s| build_local(s, &layout))
        .collect();

    let mut locals = Vec::with_capacity(built.len());
    let mut coarse_matrix = DMatrix::zeros(layout.n_coarse, layout.n_coarse);
    for item in built {
        let (local, k_sub) = item?;
        for (a, &ga) in local.coarse_ids.iter().enumerate() {
            for (b, &gb) in local.coarse_ids.iter().enumerate() {
                coarse_matrix[(ga, gb)] += k_sub[(a, b)];
            }
        }
        locals.push(local);
    }

    let coarse_start = Instant::now();
    let coarse = factor_checked(coarse_matrix)
        .map_err(|report| BddcError::CoarseMechanism { report })?;
    let coarse_factor_seconds = coarse_start.elapsed().as_secs_f64();

    Ok(BddcOperator {
        n_interface: schur.n_interface_dofs(),
        locals,
        coarse,
        n_coarse_dofs: layout.n_coarse,
        coarse_factor_seconds,
        setup_seconds: start.elapsed().as_secs_f64(),
    })
}

fn build_local(
    s: &SubdomainBlock,
    layout: &CoarseLayout,
) -> Result<(LocalOperator, DMatrix<f64>), BddcError> {
    let parts = local_parts(s, layout);
    let ni = s.n_interior();
    let nb = s.n_boundary();
    let n_local = ni + nb;
    let n_r = parts.n_r;
    let n_cols = parts.coarse_cols.len();

    let saddle = factor_checked(parts.saddle.clone())
        .map_err(|report| BddcError::SingularLocal { sub: s.sub, report })?;

    // right-hand sides for the coarse basis
    let dim = parts.saddle.nrows();
    let mut rhs = DMatrix::zeros(dim, n_cols);
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

    // full local basis: identity at corner dofs, solved values elsewhere
    let mut psi = DMatrix::zeros(n_local, n_cols);
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

    let mut k_sub = psi.transpose() * &s.a_local * &psi;
    // exact symmetry against accumulated roundoff
    for a in 0..n_cols {
        for b in (a + 1)..n_cols {
            let v = 0.5 * (k_sub[(a, b)] + k_sub[(b, a)]);
            k_sub[(a, b)] = v;
            k_sub[(b, a)] = v;
        }
    }

    let psi_b = psi.rows(ni, nb).into_owned();
    let coarse_ids = parts.coarse_cols.iter().map(|c| c.coarse_idx()).collect();
    Ok((
        LocalOperator {
            boundary_interface_idx: s.boundary_interface_idx.clone(),
            weights: s.weights.clone(),
            saddle_dim: dim,
            boundary_to_r: parts.boundary_to_r,
            saddle,
            psi_b,
            coarse_ids,
        },
        k_sub,
    ))
}

impl BddcOperator {
    pub fn n_interface_dofs(&self) -> usize {
        self.n_interface
    }

    /// Apply `M = E S~^{-1} E^T` to an interface residual: weighted
    /// restriction, independent local solves plus one coarse solve, and
    /// weighted averaging back.
    pub fn apply(&self, r: &DVector<f64>) -> DVector<f64> {
        assert_eq!(r.len(), self.n_interface);
        // phase one: local corrections and coarse right-hand side
        let partials: Vec<(DVector<f64>, DVector<f64>)> = self
            .locals
            .par_iter()
            .map(|loc| {
                let r_b = DVector::from_iterator(
                    loc.boundary_interface_idx.len(),
                    loc.boundary_interface_idx
                        .iter()
                        .zip(loc.weights.iter())
                        .map(|(&k, &w)| w * r[k]),
                );
                // coarse residual: psi_b^T r_b
                let rc = loc.psi_b.transpose() * &r_b;
                // local solve with the residual at non-corner boundary dofs
                let mut rhs = DVector::zeros(loc.saddle_dim);
                for (b, r_idx) in loc.boundary_to_r.iter().enumerate() {
                    if let Some(ri) = r_idx {
                        rhs[*ri] = r_b[b];
                    }
                }
                let v = loc.saddle.solve(&rhs);
                let mut z_b = DVector::zeros(r_b.len());
                for (b, r_idx) in loc.boundary_to_r.iter().enumerate() {
                    if let Some(ri) = r_idx {
                        z_b[b] = v[*ri];
                    }
                }
                (z_b, rc)
            })
            .collect();

        let mut r_coarse = DVector::zeros(self.n_coarse_dofs);
        for (loc, (_, rc)) in self.locals.iter().zip(&partials) {
            for (a, &ga) in loc.coarse_ids.iter().enumerate() {
                r_coarse[ga] += rc[a];
            }
        }
        let u_coarse = self.coarse.solve(&r_coarse);

        // phase two: add the coarse component and average back
        let mut out = DVector::zeros(self.n_interface);
        for (loc, (z_b, _)) in self.locals.iter().zip(&partials) {
            let uc_local = DVector::from_iterator(
                loc.coarse_ids.len(),
                loc.coarse_ids.iter().map(|&g| u_coarse[g]),
            );
            let w_b = &loc.psi_b * uc_local;
            for (b, &k) in loc.boundary_interface_idx.iter().enumerate() {
                out[k] += loc.weights[b] * (z_b[b] + w_b[b]);
            }
        }
        out
    }
}

/// Apply the preconditioner to a residual vector.
pub fn apply_preconditioner(op: &BddcOperator, r: &DVector<f64>) -> DVector<f64> {
    op.apply(r)
}
