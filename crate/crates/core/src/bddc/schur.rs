//! Reduction of the assembled system to the interface.
//!
//! The global Schur complement is never formed: each subdomain keeps its
//! own stiffness with interior dofs factored, and `S u` is accumulated
//! subdomain by subdomain. Interface dofs are the free dofs whose node
//! belongs to at least two subdomains; the reduced right-hand side splits
//! nodal interface loads by multiplicity so the subdomain contributions
//! sum to the assembled load exactly.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::mesh::{element_stiffness, Mesh, SparseSystem};
use crate::partition::Partition;

use super::BddcError;

/// One subdomain's share of the reduced problem. Local dofs are ordered
/// interior first, then boundary (interface), both ascending by global id.
pub struct SubdomainBlock {
    pub sub: usize,
    pub nodes: Vec<usize>,
    pub interior_dofs: Vec<usize>,
    pub boundary_dofs: Vec<usize>,
    /// Position of each boundary dof in the global interface vector.
    pub boundary_interface_idx: Vec<usize>,
    /// Multiplicity weights (1 / number of sharing subdomains) per boundary dof.
    pub weights: DVector<f64>,
    /// Full local stiffness, interior block leading.
    pub a_local: DMatrix<f64>,
    chol_ii: Option<Cholesky<f64, Dyn>>,
    f_interior: DVector<f64>,
    f_boundary: DVector<f64>,
}

impl SubdomainBlock {
    pub fn n_interior(&self) -> usize {
        self.interior_dofs.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary_dofs.len()
    }

    pub fn n_local(&self) -> usize {
        self.n_interior() + self.n_boundary()
    }

    fn a_ib(&self) -> nalgebra::DMatrixView<'_, f64> {
        self.a_local.view((0, self.n_interior()), (self.n_interior(), self.n_boundary()))
    }

    fn a_bb(&self) -> nalgebra::DMatrixView<'_, f64> {
        let ni = self.n_interior();
        let nb = self.n_boundary();
        self.a_local.view((ni, ni), (nb, nb))
    }

    pub fn solve_interior(&self, b: &DVector<f64>) -> DVector<f64> {
        match &self.chol_ii {
            Some(chol) => chol.solve(b),
            None => DVector::zeros(0),
        }
    }

    /// Local Schur action: (A_bb - A_bi A_ii^{-1} A_ib) u_b.
    fn apply_local_schur(&self, u_b: &DVector<f64>) -> DVector<f64> {
        let mut out = self.a_bb() * u_b;
        if self.n_interior() > 0 {
            let t = self.solve_interior(&(self.a_ib() * u_b));
            out -= self.a_ib().transpose() * t;
        }
        out
    }
}

/// Interface-reduced system with per-subdomain state.
pub struct SchurSystem {
    /// Global interface dof ids, ascending; `u[k]` lives at `interface_dofs[k]`.
    pub interface_dofs: Vec<usize>,
    pub dofs_per_node: usize,
    pub n_total_dofs: usize,
    g: DVector<f64>,
    subs: Vec<SubdomainBlock>,
    fixed: Vec<Option<f64>>,
}

impl SchurSystem {
    pub fn n_interface_dofs(&self) -> usize {
        self.interface_dofs.len()
    }

    pub fn g(&self) -> &DVector<f64> {
        &self.g
    }

    pub fn subdomains(&self) -> &[SubdomainBlock] {
        &self.subs
    }

    pub fn is_fixed(&self, dof: usize) -> bool {
        self.fixed[dof].is_some()
    }

    /// Position of a global dof in the interface vector, if it is one.
    pub fn interface_index_of(&self, dof: usize) -> Option<usize> {
        self.interface_dofs.binary_search(&dof).ok()
    }

    /// Apply the Schur complement without forming it. Per-subdomain
    /// contributions are computed in parallel but accumulated in
    /// subdomain order, keeping the result deterministic.
    pub fn apply(&self, u: &DVector<f64>) -> DVector<f64> {
        assert_eq!(u.len(), self.n_interface_dofs());
        let contributions: Vec<DVector<f64>> = self
            .subs
            .par_iter()
            .map(|s| {
                let u_b = DVector::from_iterator(
                    s.n_boundary(),
                    s.boundary_interface_idx.iter().map(|&k| u[k]),
                );
                s.apply_local_schur(&u_b)
            })
            .collect();
        let mut out = DVector::zeros(self.n_interface_dofs());
        for (s, w) in self.subs.iter().zip(&contributions) {
            for (local, &k) in s.boundary_interface_idx.iter().enumerate() {
                out[k] += w[local];
            }
        }
        out
    }

    /// Reconstruct the full solution: prescribed values at fixed dofs, the
    /// interface solution, and interior values recovered per subdomain.
    pub fn back_substitute(&self, u: &DVector<f64>) -> DVector<f64> {
        assert_eq!(u.len(), self.n_interface_dofs());
        let mut x = DVector::zeros(self.n_total_dofs);
        for (dof, f) in self.fixed.iter().enumerate() {
            if let Some(v) = f {
                x[dof] = *v;
            }
        }
        for (k, &dof) in self.interface_dofs.iter().enumerate() {
            x[dof] = u[k];
        }
        for s in &self.subs {
            if s.n_interior() == 0 {
                continue;
            }
            let u_b = DVector::from_iterator(
                s.n_boundary(),
                s.boundary_interface_idx.iter().map(|&k| u[k]),
            );
            let rhs = &s.f_interior - s.a_ib() * u_b;
            let x_i = s.solve_interior(&rhs);
            for (local, &dof) in s.interior_dofs.iter().enumerate() {
                x[dof] = x_i[local];
            }
        }
        x
    }
}

/// Build the interface-reduced system from the assembled one.
pub fn reduce_to_schur(
    system: &SparseSystem,
    mesh: &Mesh,
    partition: &Partition,
) -> Result<SchurSystem, BddcError> {
    let dpn = system.dofs_per_node;
    if system.n_dofs() != mesh.n_nodes() * dpn {
        return Err(BddcError::Inconsistent(format!(
            "system has {} dofs, mesh implies {}",
            system.n_dofs(),
            mesh.n_nodes() * dpn
        )));
    }
    if partition.elem_to_sub().len() != mesh.n_elems() {
        return Err(BddcError::Inconsistent(format!(
            "partition covers {} elements, mesh has {}",
            partition.elem_to_sub().len(),
            mesh.n_elems()
        )));
    }
    if partition.n_subdomains() < 2 {
        return Err(BddcError::EmptyInterface);
    }

    // node -> sharing subdomains (closed sets)
    let mut node_subs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); mesh.n_nodes()];
    for (e, conn) in mesh.elements.iter().enumerate() {
        let s = partition.subdomain_of(e);
        for &n in conn {
            node_subs[n].insert(s);
        }
    }

    let fixed = &system.fixed;
    let is_free = |dof: usize| fixed[dof].is_none();

    let mut interface_dofs = Vec::new();
    for (node, subs) in node_subs.iter().enumerate() {
        if subs.len() >= 2 {
            for c in 0..dpn {
                let dof = node * dpn + c;
                if is_free(dof) {
                    interface_dofs.push(dof);
                }
            }
        }
    }
    if interface_dofs.is_empty() {
        return Err(BddcError::EmptyInterface);
    }
    let interface_index: BTreeMap<usize, usize> =
        interface_dofs.iter().enumerate().map(|(k, &d)| (d, k)).collect();

    let by_sub = partition.elements_by_subdomain();
    let subs: Vec<Result<SubdomainBlock, BddcError>> = by_sub
        .par_iter()
        .enumerate()
        .map(|(sub, elems)| {
            build_subdomain(sub, elems, mesh, system, &node_subs, &interface_index)
        })
        .collect();
    let mut blocks = Vec::with_capacity(subs.len());
    for s in subs {
        blocks.push(s?);
    }

    // reduced right-hand side: g = sum_i R_i^T (f_b - A_bi A_ii^{-1} f_i)
    let mut g = DVector::zeros(interface_dofs.len());
    for s in &blocks {
        let mut g_b = s.f_boundary.clone();
        if s.n_interior() > 0 {
            let t = s.solve_interior(&s.f_interior);
            g_b -= s.a_ib().transpose() * t;
        }
        for (local, &k) in s.boundary_interface_idx.iter().enumerate() {
            g[k] += g_b[local];
        }
    }

    Ok(SchurSystem {
        interface_dofs,
        dofs_per_node: dpn,
        n_total_dofs: system.n_dofs(),
        g,
        subs: blocks,
        fixed: fixed.clone(),
    })
}

fn build_subdomain(
    sub: usize,
    elems: &[usize],
    mesh: &Mesh,
    system: &SparseSystem,
    node_subs: &[BTreeSet<usize>],
    interface_index: &BTreeMap<usize, usize>,
) -> Result<SubdomainBlock, BddcError> {
    let dpn = system.dofs_per_node;
    let fixed = &system.fixed;

    let nodes: BTreeSet<usize> =
        elems.iter().flat_map(|&e| mesh.elements[e].iter().copied()).collect();
    let mut interior_dofs = Vec::new();
    let mut boundary_dofs = Vec::new();
    for &node in &nodes {
        for c in 0..dpn {
            let dof = node * dpn + c;
            if fixed[dof].is_some() {
                continue;
            }
            if node_subs[node].len() >= 2 {
                boundary_dofs.push(dof);
            } else {
                interior_dofs.push(dof);
            }
        }
    }
    let ni = interior_dofs.len();
    let nb = boundary_dofs.len();
    let n_local = ni + nb;

    let mut local_index: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, &d) in interior_dofs.iter().enumerate() {
        local_index.insert(d, k);
    }
    for (k, &d) in boundary_dofs.iter().enumerate() {
        local_index.insert(d, ni + k);
    }

    let mut a_local = DMatrix::zeros(n_local, n_local);
    let mut f_local = DVector::zeros(n_local);
    // The assembled rhs already folds prescribed-value couplings into the
    // free rows, so splitting it by node multiplicity reproduces the load
    // exactly: interior corrections are local to their one subdomain, and
    // boundary shares only need to sum to the assembled value.
    for (&dof, &l) in &local_index {
        f_local[l] = system.rhs[dof] / node_subs[dof / dpn].len() as f64;
    }

    for &e in elems {
        let conn = &mesh.elements[e];
        let coords = mesh.coords_of(conn);
        let ke = element_stiffness(mesh.elem_kind, e, &coords, &system.pde)
            .map_err(|err| BddcError::Inconsistent(err.to_string()))?;
        for (a, &na) in conn.iter().enumerate() {
            for da in 0..dpn {
                let gi = na * dpn + da;
                let Some(&li) = local_index.get(&gi) else { continue };
                for (b, &nb_) in conn.iter().enumerate() {
                    for db in 0..dpn {
                        let gj = nb_ * dpn + db;
                        let v = ke[(a * dpn + da, b * dpn + db)];
                        if v == 0.0 {
                            continue;
                        }
                        // fixed columns stay out: their effect already
                        // lives in the split rhs
                        if let Some(&lj) = local_index.get(&gj) {
                            a_local[(li, lj)] += v;
                        }
                    }
                }
            }
        }
    }

    let chol_ii = if ni > 0 {
        let a_ii = a_local.view((0, 0), (ni, ni)).into_owned();
        Some(Cholesky::new(a_ii).ok_or(BddcError::SingularInterior { sub })?)
    } else {
        None
    };

    let boundary_interface_idx: Vec<usize> =
        boundary_dofs.iter().map(|d| interface_index[d]).collect();
    let weights = DVector::from_iterator(
        nb,
        boundary_dofs.iter().map(|&d| 1.0 / node_subs[d / dpn].len() as f64),
    );

    Ok(SubdomainBlock {
        sub,
        nodes: nodes.into_iter().collect(),
        interior_dofs,
        boundary_dofs,
        boundary_interface_idx,
        weights,
        a_local,
        chol_ii,
        f_interior: f_local.rows(0, ni).into_owned(),
        f_boundary: f_local.rows(ni, nb).into_owned(),
    })
}
