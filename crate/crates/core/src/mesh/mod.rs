//! Mesh representation, structured test fixtures, and stiffness assembly.

mod elements;
pub mod io;

pub use elements::{element_stiffness, rigid_body_modes};
pub use io::{load_mesh, save_mesh};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::Partition;
use crate::sparse::{CooMatrix, CsrMatrix};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("element {elem} is degenerate (jacobian determinant {det})")]
    DegenerateElement { elem: usize, det: f64 },
    #[error("element {elem} references node {node} out of range ({n_nodes} nodes)")]
    InvalidNodeIndex { elem: usize, node: usize, n_nodes: usize },
    #[error("element {elem} has {got} nodes, {kind:?} requires {expected}")]
    ArityMismatch { elem: usize, kind: ElemKind, expected: usize, got: usize },
    #[error("element {elem} repeats node {node}")]
    RepeatedNode { elem: usize, node: usize },
    #[error("node {node} has {got} coordinates, mesh dimension is {dim}")]
    CoordinateArity { node: usize, got: usize, dim: usize },
    #[error("dirichlet entry {index} is invalid: {reason}")]
    InvalidDirichlet { index: usize, reason: String },
    #[error("element kind {kind:?} does not match mesh dimension {dim}")]
    KindDimensionMismatch { kind: ElemKind, dim: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("io error reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElemKind {
    Tri3,
    Quad4,
    Tet4,
    Hex8,
}

impl ElemKind {
    pub fn arity(self) -> usize {
        match self {
            ElemKind::Tri3 => 3,
            ElemKind::Quad4 => 4,
            ElemKind::Tet4 => 4,
            ElemKind::Hex8 => 8,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            ElemKind::Tri3 | ElemKind::Quad4 => 2,
            ElemKind::Tet4 | ElemKind::Hex8 => 3,
        }
    }
}

/// Governing equation for assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pde {
    Laplace,
    Elasticity { e: f64, nu: f64 },
}

impl Pde {
    pub fn dofs_per_node(&self, dim: usize) -> usize {
        match self {
            Pde::Laplace => 1,
            Pde::Elasticity { .. } => dim,
        }
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if let Pde::Elasticity { e, nu } = *self {
            if e.is_nan() || e <= 0.0 {
                return Err(MeshError::InvalidMaterial(format!("E must be positive, got {e}")));
            }
            if !(0.0..0.5).contains(&nu) {
                return Err(MeshError::InvalidMaterial(format!(
                    "nu must lie in [0, 0.5), got {nu}"
                )));
            }
        }
        Ok(())
    }
}

/// Finite element mesh with nodal Dirichlet data.
///
/// `dirichlet` entries are `(node, component, prescribed value)`; components
/// beyond the dofs-per-node of the equation being assembled are ignored, so
/// a mesh clamping all displacement components also clamps a scalar unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub elem_kind: ElemKind,
    pub nodes: Vec<Vec<f64>>,
    pub elements: Vec<Vec<usize>>,
    pub dirichlet: Vec<(usize, usize, f64)>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elems(&self) -> usize {
        self.elements.len()
    }

    pub fn coord(&self, node: usize) -> &[f64] {
        &self.nodes[node]
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.elem_kind.dim() != self.dim {
            return Err(MeshError::KindDimensionMismatch { kind: self.elem_kind, dim: self.dim });
        }
        for (n, c) in self.nodes.iter().enumerate() {
            if c.len() != self.dim {
                return Err(MeshError::CoordinateArity { node: n, got: c.len(), dim: self.dim });
            }
        }
        let arity = self.elem_kind.arity();
        for (e, conn) in self.elements.iter().enumerate() {
            if conn.len() != arity {
                return Err(MeshError::ArityMismatch {
                    elem: e,
                    kind: self.elem_kind,
                    expected: arity,
                    got: conn.len(),
                });
            }
            for (i, &n) in conn.iter().enumerate() {
                if n >= self.nodes.len() {
                    return Err(MeshError::InvalidNodeIndex { elem: e, node: n, n_nodes: self.nodes.len() });
                }
                if conn[..i].contains(&n) {
                    return Err(MeshError::RepeatedNode { elem: e, node: n });
                }
            }
        }
        for (i, &(node, comp, value)) in self.dirichlet.iter().enumerate() {
            if node >= self.nodes.len() {
                return Err(MeshError::InvalidDirichlet {
                    index: i,
                    reason: format!("node {node} out of range"),
                });
            }
            if comp >= self.dim {
                return Err(MeshError::InvalidDirichlet {
                    index: i,
                    reason: format!("component {comp} exceeds mesh dimension {}", self.dim),
                });
            }
            if !value.is_finite() {
                return Err(MeshError::InvalidDirichlet {
                    index: i,
                    reason: format!("value {value} is not finite"),
                });
            }
        }
        Ok(())
    }

    /// Dense coordinate block for a list of nodes, one row per node.
    pub fn coords_of(&self, nodes: &[usize]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(nodes.len(), self.dim);
        for (i, &n) in nodes.iter().enumerate() {
            for d in 0..self.dim {
                m[(i, d)] = self.nodes[n][d];
            }
        }
        m
    }
}

/// Regular grid fixture: `cells_per_subdomain[axis]` elements per subdomain
/// and `subdomains_per_axis[axis]` subdomains along each axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredSpec {
    pub dim: usize,
    pub cells_per_subdomain: Vec<usize>,
    pub subdomains_per_axis: Vec<usize>,
}

impl StructuredSpec {
    pub fn new(dim: usize, cells: &[usize], subs: &[usize]) -> Self {
        StructuredSpec {
            dim,
            cells_per_subdomain: cells.to_vec(),
            subdomains_per_axis: subs.to_vec(),
        }
    }

    /// Uniform counts along every axis.
    pub fn cube(dim: usize, cells: usize, subs: usize) -> Self {
        StructuredSpec::new(dim, &vec![cells; dim], &vec![subs; dim])
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if !(self.dim == 2 || self.dim == 3) {
            return Err(MeshError::InvalidSpec(format!("dimension must be 2 or 3, got {}", self.dim)));
        }
        if self.cells_per_subdomain.len() != self.dim || self.subdomains_per_axis.len() != self.dim {
            return Err(MeshError::InvalidSpec(
                "per-axis counts must match the dimension".into(),
            ));
        }
        if self.cells_per_subdomain.iter().chain(&self.subdomains_per_axis).any(|&c| c == 0) {
            return Err(MeshError::InvalidSpec("all counts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Assembled symmetric system. The matrix keeps its full size with
/// Dirichlet rows and columns replaced by the identity, so node indexing
/// is stable across the pipeline. `fixed[dof]` carries prescribed values.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: DVector<f64>,
    pub dofs_per_node: usize,
    pub pde: Pde,
    pub fixed: Vec<Option<f64>>,
}

impl SparseSystem {
    pub fn n_dofs(&self) -> usize {
        self.matrix.n()
    }
}

/// Regular quad/hex grid on the unit square/cube with a block partition.
/// The x = 0 face is clamped in all components.
pub fn generate_structured(spec: &StructuredSpec) -> Result<(Mesh, Partition), MeshError> {
    spec.validate()?;
    let dim = spec.dim;
    let cells: Vec<usize> = (0..dim)
        .map(|d| spec.cells_per_subdomain[d] * spec.subdomains_per_axis[d])
        .collect();
    let nn: Vec<usize> = cells.iter().map(|&c| c + 1).collect();

    let node_id = |ix: usize, iy: usize, iz: usize| -> usize {
        if dim == 2 {
            ix + nn[0] * iy
        } else {
            ix + nn[0] * (iy + nn[1] * iz)
        }
    };

    let mut nodes = Vec::new();
    if dim == 2 {
        for iy in 0..nn[1] {
            for ix in 0..nn[0] {
                nodes.push(vec![ix as f64 / cells[0] as f64, iy as f64 / cells[1] as f64]);
            }
        }
    } else {
        for iz in 0..nn[2] {
            for iy in 0..nn[1] {
                for ix in 0..nn[0] {
                    nodes.push(vec![
                        ix as f64 / cells[0] as f64,
                        iy as f64 / cells[1] as f64,
                        iz as f64 / cells[2] as f64,
                    ]);
                }
            }
        }
    }
    debug_assert_eq!(nodes.len(), nn.iter().product::<usize>());

    let mut elements = Vec::new();
    let mut elem_to_sub = Vec::new();
    let nsub = &spec.subdomains_per_axis;
    let cps = &spec.cells_per_subdomain;
    let zcells = if dim == 3 { cells[2] } else { 1 };
    for cz in 0..zcells {
        for cy in 0..cells[1] {
            for cx in 0..cells[0] {
                if dim == 2 {
                    elements.push(vec![
                        node_id(cx, cy, 0),
                        node_id(cx + 1, cy, 0),
                        node_id(cx + 1, cy + 1, 0),
                        node_id(cx, cy + 1, 0),
                    ]);
                    elem_to_sub.push((cx / cps[0]) + nsub[0] * (cy / cps[1]));
                } else {
                    elements.push(vec![
                        node_id(cx, cy, cz),
                        node_id(cx + 1, cy, cz),
                        node_id(cx + 1, cy + 1, cz),
                        node_id(cx, cy + 1, cz),
                        node_id(cx, cy, cz + 1),
                        node_id(cx + 1, cy, cz + 1),
                        node_id(cx + 1, cy + 1, cz + 1),
                        node_id(cx, cy + 1, cz + 1),
                    ]);
                    elem_to_sub.push(
                        (cx / cps[0]) + nsub[0] * ((cy / cps[1]) + nsub[1] * (cz / cps[2])),
                    );
                }
            }
        }
    }

    let mut dirichlet = Vec::new();
    for (n, c) in nodes.iter().enumerate() {
        if c[0] == 0.0 {
            for d in 0..dim {
                dirichlet.push((n, d, 0.0));
            }
        }
    }

    let kind = if dim == 2 { ElemKind::Quad4 } else { ElemKind::Hex8 };
    let mesh = Mesh { dim, elem_kind: kind, nodes, elements, dirichlet };
    mesh.validate()?;
    let n_subdomains = nsub.iter().product();
    let partition = Partition::new(elem_to_sub, n_subdomains).expect("structured partition is valid");
    Ok((mesh, partition))
}

/// Beam fixture with one subdomain wedged into the other.
///
/// A hex beam of 8 x 4 x 4 unit cells. Subdomain 0 is a tongue made of a
/// narrow 2 x 2 column plus one full cross-section column; subdomain 1 is
/// the surrounding fork (a clamped left block and a free right block held
/// apart by the tongue). The two subdomains share two cross-sectional cuts
/// separated by an air gap, so their common interface splits into two
/// element-connected components while the fork itself splits into two
/// element components.
pub fn generate_wedged_beam() -> (Mesh, Partition) {
    const NX: usize = 8;
    const NC: usize = 4; // cross-section cells per axis
    let nn = [NX + 1, NC + 1, NC + 1];
    let node_id = |ix: usize, iy: usize, iz: usize| ix * nn[1] * nn[2] + iy * nn[2] + iz;

    let mut nodes = Vec::with_capacity(nn[0] * nn[1] * nn[2]);
    for ix in 0..nn[0] {
        for iy in 0..nn[1] {
            for iz in 0..nn[2] {
                nodes.push(vec![ix as f64, iy as f64, iz as f64]);
            }
        }
    }

    let mut elements = Vec::new();
    let mut elem_to_sub = Vec::new();
    let push_cell = |cx: usize, cy: usize, cz: usize, sub: usize,
                         elements: &mut Vec<Vec<usize>>,
                         elem_to_sub: &mut Vec<usize>| {
        elements.push(vec![
            node_id(cx, cy, cz),
            node_id(cx + 1, cy, cz),
            node_id(cx + 1, cy + 1, cz),
            node_id(cx, cy + 1, cz),
            node_id(cx, cy, cz + 1),
            node_id(cx + 1, cy, cz + 1),
            node_id(cx + 1, cy + 1, cz + 1),
            node_id(cx, cy + 1, cz + 1),
        ]);
        elem_to_sub.push(sub);
    };

    for cx in 0..NX {
        let (waist, sub) = match cx {
            0..=2 => (false, 1), // left block of the fork
            3 => (true, 0),      // narrow neck of the tongue
            4 => (false, 0),     // full column of the tongue
            _ => (false, 1),     // right block of the fork
        };
        for cy in 0..NC {
            for cz in 0..NC {
                if waist && !((1..=2).contains(&cy) && (1..=2).contains(&cz)) {
                    continue;
                }
                push_cell(cx, cy, cz, sub, &mut elements, &mut elem_to_sub);
            }
        }
    }

    // drop unreferenced grid nodes (inside the air gap) and renumber
    let mut used = vec![false; nodes.len()];
    for conn in &elements {
        for &n in conn {
            used[n] = true;
        }
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::new();
    for (n, &u) in used.iter().enumerate() {
        if u {
            remap[n] = kept.len();
            kept.push(nodes[n].clone());
        }
    }
    for conn in &mut elements {
        for n in conn.iter_mut() {
            *n = remap[*n];
        }
    }

    let mut dirichlet = Vec::new();
    for (n, c) in kept.iter().enumerate() {
        if c[0] == 0.0 {
            for d in 0..3 {
                dirichlet.push((n, d, 0.0));
            }
        }
    }

    let mesh = Mesh { dim: 3, elem_kind: ElemKind::Hex8, nodes: kept, elements, dirichlet };
    mesh.validate().expect("wedged beam fixture is valid");
    let partition = Partition::new(elem_to_sub, 2).expect("wedged beam partition is valid");
    (mesh, partition)
}

/// Assemble the stiffness matrix and load vector.
///
/// The load is a unit force along the last solution component at every
/// node whose corresponding dof is free. Dirichlet conditions are
/// eliminated symmetrically: constrained rows and columns become identity,
/// their coupling moves to the right-hand side.
pub fn assemble(mesh: &Mesh, pde: &Pde) -> Result<SparseSystem, MeshError> {
    mesh.validate()?;
    pde.validate()?;
    let dpn = pde.dofs_per_node(mesh.dim);
    let n_dofs = mesh.n_nodes() * dpn;

    let mut fixed: Vec<Option<f64>> = vec![None; n_dofs];
    for &(node, comp, value) in &mesh.dirichlet {
        if comp < dpn {
            fixed[node * dpn + comp] = Some(value);
        }
    }

    let mut coo = CooMatrix::new(n_dofs);
    let mut rhs = DVector::zeros(n_dofs);
    for dof in 0..n_dofs {
        if fixed[dof].is_none() && dof % dpn == dpn - 1 {
            rhs[dof] = 1.0;
        }
    }

    for (e, conn) in mesh.elements.iter().enumerate() {
        let coords = mesh.coords_of(conn);
        let ke = element_stiffness(mesh.elem_kind, e, &coords, pde)?;
        for (a, &na) in conn.iter().enumerate() {
            for da in 0..dpn {
                let gi = na * dpn + da;
                let li = a * dpn + da;
                for (b, &nb) in conn.iter().enumerate() {
                    for db in 0..dpn {
                        let gj = nb * dpn + db;
                        let lj = b * dpn + db;
                        let v = ke[(li, lj)];
                        if v == 0.0 {
                            continue;
                        }
                        match (fixed[gi].is_some(), fixed[gj]) {
                            (false, None) => coo.push(gi, gj, v),
                            (false, Some(value)) => rhs[gi] -= v * value,
                            (true, _) => {}
                        }
                    }
                }
            }
        }
    }
    for (dof, f) in fixed.iter().enumerate() {
        if let Some(value) = f {
            coo.push(dof, dof, 1.0);
            rhs[dof] = *value;
        }
    }

    Ok(SparseSystem { matrix: coo.to_csr(), rhs, dofs_per_node: dpn, pde: *pde, fixed })
}
