//! Mesh file format: a JSON object
//! `{dim, elem_kind, nodes: [[x,y(,z)],...], elements: [[i,...],...],
//!   dirichlet: [[node,dof,value],...]}` with 0-based indices.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ElemKind, Mesh, MeshError};

#[derive(Serialize, Deserialize)]
struct MeshFile {
    dim: usize,
    elem_kind: ElemKind,
    nodes: Vec<Vec<f64>>,
    elements: Vec<Vec<usize>>,
    #[serde(default)]
    dirichlet: Vec<(usize, usize, f64)>,
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: MeshFile = serde_json::from_str(&text).map_err(|e| MeshError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mesh = Mesh {
        dim: file.dim,
        elem_kind: file.elem_kind,
        nodes: file.nodes,
        elements: file.elements,
        dirichlet: file.dirichlet,
    };
    mesh.validate()?;
    Ok(mesh)
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    mesh.validate()?;
    let file = MeshFile {
        dim: mesh.dim,
        elem_kind: mesh.elem_kind,
        nodes: mesh.nodes.clone(),
        elements: mesh.elements.clone(),
        dirichlet: mesh.dirichlet.clone(),
    };
    let text = serde_json::to_string_pretty(&file).expect("mesh serializes");
    fs::write(path, text).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })
}
