//! Element-to-subdomain maps: file ingestion (METIS epart style),
//! a coordinate-bisection fallback partitioner, and connectivity queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::mesh::Mesh;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("io error reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("partition file {path}, line {line}: expected an integer, got {text:?}")]
    NotAnInteger { path: String, line: usize, text: String },
    #[error("partition file has {got} lines, mesh has {expected} elements")]
    LineCountMismatch { got: usize, expected: usize },
    #[error("subdomain ids {missing:?} are empty; pass renumbering to compact them")]
    EmptySubdomains { missing: Vec<usize> },
    #[error("invalid partition: {0}")]
    Invalid(String),
}

/// Element-to-subdomain assignment with every id in `[0, n_subdomains)`
/// and every subdomain nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    elem_to_sub: Vec<usize>,
    n_subdomains: usize,
}

impl Partition {
    pub fn new(elem_to_sub: Vec<usize>, n_subdomains: usize) -> Result<Self, PartitionError> {
        if elem_to_sub.is_empty() {
            return Err(PartitionError::Invalid("no elements".into()));
        }
        let mut seen = vec![false; n_subdomains];
        for &s in &elem_to_sub {
            if s >= n_subdomains {
                return Err(PartitionError::Invalid(format!(
                    "subdomain id {s} out of range (N = {n_subdomains})"
                )));
            }
            seen[s] = true;
        }
        let missing: Vec<usize> =
            seen.iter().enumerate().filter(|(_, &s)| !s).map(|(i, _)| i).collect();
        if !missing.is_empty() {
            return Err(PartitionError::EmptySubdomains { missing });
        }
        Ok(Partition { elem_to_sub, n_subdomains })
    }

    pub fn n_subdomains(&self) -> usize {
        self.n_subdomains
    }

    pub fn elem_to_sub(&self) -> &[usize] {
        &self.elem_to_sub
    }

    pub fn subdomain_of(&self, elem: usize) -> usize {
        self.elem_to_sub[elem]
    }

    /// Elements of each subdomain, ascending.
    pub fn elements_by_subdomain(&self) -> Vec<Vec<usize>> {
        let mut by_sub = vec![Vec::new(); self.n_subdomains];
        for (e, &s) in self.elem_to_sub.iter().enumerate() {
            by_sub[s].push(e);
        }
        by_sub
    }
}

/// Gap handling for [`load_partition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapPolicy {
    /// Empty subdomain ids are an error.
    Deny,
    /// Compact ids to remove empty subdomains, reporting a warning.
    Renumber,
}

/// Read a plain-text partition: one integer per line, line i giving the
/// subdomain of element i. Returns the partition and any warnings emitted
/// while renumbering gaps.
pub fn load_partition(
    path: impl AsRef<Path>,
    mesh: &Mesh,
    gaps: GapPolicy,
) -> Result<(Partition, Vec<String>), PartitionError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| PartitionError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let id: usize = trimmed.parse().map_err(|_| PartitionError::NotAnInteger {
            path: path.display().to_string(),
            line: i + 1,
            text: trimmed.to_string(),
        })?;
        ids.push(id);
    }
    if ids.len() != mesh.n_elems() {
        return Err(PartitionError::LineCountMismatch { got: ids.len(), expected: mesh.n_elems() });
    }

    let max_id = *ids.iter().max().expect("nonempty");
    let mut warnings = Vec::new();
    let present: BTreeSet<usize> = ids.iter().copied().collect();
    if present.len() != max_id + 1 {
        match gaps {
            GapPolicy::Deny => {
                let missing = (0..=max_id).filter(|i| !present.contains(i)).collect();
                return Err(PartitionError::EmptySubdomains { missing });
            }
            GapPolicy::Renumber => {
                let remap: BTreeMap<usize, usize> =
                    present.iter().enumerate().map(|(new, &old)| (old, new)).collect();
                warnings.push(format!(
                    "partition ids have gaps; renumbered {} ids into [0, {})",
                    present.len(),
                    present.len()
                ));
                for id in ids.iter_mut() {
                    *id = remap[id];
                }
            }
        }
    }
    let n = *ids.iter().max().expect("nonempty") + 1;
    Ok((Partition::new(ids, n)?, warnings))
}

pub fn save_partition(partition: &Partition, path: impl AsRef<Path>) -> Result<(), PartitionError> {
    let path = path.as_ref();
    let mut text = String::new();
    for &s in partition.elem_to_sub() {
        text.push_str(&s.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|source| PartitionError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Recursive coordinate bisection of element centroids into `n` parts.
///
/// Each cut splits the longest axis of the current centroid bounding box,
/// assigning elements to sides by sorted centroid order so the cut is
/// balanced to within one element (scaled by the part ratio). Ties between
/// equal centroids resolve by element index, making the result a pure
/// function of the inputs.
pub fn partition_geometric(mesh: &Mesh, n: usize) -> Result<Partition, PartitionError> {
    if n == 0 {
        return Err(PartitionError::Invalid("n must be at least 1".into()));
    }
    if n > mesh.n_elems() {
        return Err(PartitionError::Invalid(format!(
            "cannot split {} elements into {n} subdomains",
            mesh.n_elems()
        )));
    }
    let centroids: Vec<Vec<f64>> = mesh
        .elements
        .iter()
        .map(|conn| {
            let mut c = vec![0.0; mesh.dim];
            for &node in conn {
                for (acc, &x) in c.iter_mut().zip(mesh.coord(node)) {
                    *acc += x;
                }
            }
            for v in c.iter_mut() {
                *v /= conn.len() as f64;
            }
            c
        })
        .collect();

    let mut assignment = vec![0usize; mesh.n_elems()];
    let all: Vec<usize> = (0..mesh.n_elems()).collect();
    bisect(&centroids, &all, 0, n, &mut assignment);
    Partition::new(assignment, n)
}

fn bisect(
    centroids: &[Vec<f64>],
    elems: &[usize],
    first_id: usize,
    n_parts: usize,
    assignment: &mut [usize],
) {
    if n_parts == 1 {
        for &e in elems {
            assignment[e] = first_id;
        }
        return;
    }
    let dim = centroids[0].len();
    let span_of = |d: usize| {
        let lo = elems.iter().map(|&e| centroids[e][d]).fold(f64::INFINITY, f64::min);
        let hi = elems.iter().map(|&e| centroids[e][d]).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let widest = (0..dim)
        .max_by(|&a, &b| span_of(a).partial_cmp(&span_of(b)).unwrap().then(b.cmp(&a)))
        .expect("dimension is positive");
    let mut order: Vec<usize> = elems.to_vec();
    order.sort_by(|&a, &b| {
        centroids[a][widest].partial_cmp(&centroids[b][widest]).unwrap().then(a.cmp(&b))
    });
    let left_parts = n_parts / 2;
    let split = (elems.len() * left_parts + n_parts / 2) / n_parts;
    let (left, right) = order.split_at(split);
    bisect(centroids, left, first_id, left_parts, assignment);
    bisect(centroids, right, first_id + left_parts, n_parts - left_parts, assignment);
}

/// Element-connectivity components within each subdomain. Two elements of
/// a subdomain are connected when they share at least one node. Components
/// are listed by ascending smallest element id, elements ascending within.
pub fn subdomain_components(partition: &Partition, mesh: &Mesh) -> Vec<Vec<Vec<usize>>> {
    let by_sub = partition.elements_by_subdomain();
    by_sub
        .iter()
        .map(|elems| {
            // node -> local element list, restricted to this subdomain
            let mut node_elems: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (local, &e) in elems.iter().enumerate() {
                for &n in &mesh.elements[e] {
                    node_elems.entry(n).or_default().push(local);
                }
            }
            let mut seen = vec![false; elems.len()];
            let mut components = Vec::new();
            for start in 0..elems.len() {
                if seen[start] {
                    continue;
                }
                let mut queue = vec![start];
                seen[start] = true;
                let mut comp = Vec::new();
                while let Some(local) = queue.pop() {
                    comp.push(elems[local]);
                    for &n in &mesh.elements[elems[local]] {
                        for &other in &node_elems[&n] {
                            if !seen[other] {
                                seen[other] = true;
                                queue.push(other);
                            }
                        }
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
            components.sort_by_key(|c| c[0]);
            components
        })
        .collect()
}

/// Node graph induced by element connectivity: two nodes of the subset are
/// adjacent when they appear together in some mesh element.
#[derive(Debug, Clone, Default)]
pub struct NodeGraph {
    adjacency: BTreeMap<usize, BTreeSet<usize>>,
}

impl NodeGraph {
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn neighbors(&self, node: usize) -> Option<&BTreeSet<usize>> {
        self.adjacency.get(&node)
    }

    /// Connected components ordered by smallest node, nodes ascending.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut components = Vec::new();
        for &start in self.adjacency.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut queue = vec![start];
            seen.insert(start);
            let mut comp = Vec::new();
            while let Some(n) = queue.pop() {
                comp.push(n);
                for &m in &self.adjacency[&n] {
                    if seen.insert(m) {
                        queue.push(m);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }
}

pub fn node_graph(mesh: &Mesh, node_subset: &BTreeSet<usize>) -> NodeGraph {
    let mut adjacency: BTreeMap<usize, BTreeSet<usize>> =
        node_subset.iter().map(|&n| (n, BTreeSet::new())).collect();
    for conn in &mesh.elements {
        let inside: Vec<usize> = conn.iter().copied().filter(|n| node_subset.contains(n)).collect();
        for (i, &a) in inside.iter().enumerate() {
            for &b in &inside[i + 1..] {
                if a != b {
                    adjacency.get_mut(&a).unwrap().insert(b);
                    adjacency.get_mut(&b).unwrap().insert(a);
                }
            }
        }
    }
    NodeGraph { adjacency }
}
