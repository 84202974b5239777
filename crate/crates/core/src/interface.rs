//! Interface extraction and classification.
//!
//! Subdomains are treated as closed node sets: a node belongs to a
//! subdomain when some element of that subdomain contains it. The
//! interface is the set of nodes belonging to at least two subdomains,
//! grouped into globs by exact equality of their sharing sets:
//!
//! * a *face* groups nodes shared by the same two subdomains,
//! * an *edge* groups nodes shared by the same more than two subdomains,
//! * a *vertex* is a degenerated edge with a single node.
//!
//! Boundary-of-domain information plays no role. A glob may be
//! geometrically disconnected; its element-connected components are kept
//! alongside so downstream selection can treat each piece independently.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use thiserror::Error;

use crate::mesh::Mesh;
use crate::partition::{node_graph, Partition};

#[derive(Debug, Error)]
pub enum InterfaceError {
    #[error("node {0} is not on the interface")]
    NotInterfaceNode(usize),
    #[error("classification has not been built; call classify first")]
    NotClassified,
    #[error("io error writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GlobKind {
    Face,
    Edge,
    Vertex,
}

impl GlobKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GlobKind::Face => "face",
            GlobKind::Edge => "edge",
            GlobKind::Vertex => "vertex",
        }
    }
}

/// A maximal group of interface nodes with identical sharing set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glob {
    pub kind: GlobKind,
    pub sharing_set: Vec<usize>,
    pub nodes: BTreeSet<usize>,
    /// Element-connected components of `nodes`, smallest node first.
    pub components: Vec<Vec<usize>>,
}

/// Interface node bookkeeping. Promotion to corners never loses nodes:
/// corners and the surviving glob nodes always partition the interface.
#[derive(Debug, Clone)]
pub struct InterfaceClassification {
    interface_nodes: BTreeSet<usize>,
    node_to_sharing: BTreeMap<usize, Vec<usize>>,
    globs: Vec<Glob>,
    corners: BTreeSet<usize>,
    classified: bool,
}

impl InterfaceClassification {
    pub fn interface_nodes(&self) -> &BTreeSet<usize> {
        &self.interface_nodes
    }

    pub fn sharing_of(&self, node: usize) -> Option<&[usize]> {
        self.node_to_sharing.get(&node).map(|v| v.as_slice())
    }

    pub fn globs(&self) -> &[Glob] {
        &self.globs
    }

    pub fn corners(&self) -> &BTreeSet<usize> {
        &self.corners
    }

    pub fn is_classified(&self) -> bool {
        self.classified
    }

    /// Count of (faces, edges, vertices) among current globs.
    pub fn kind_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for g in &self.globs {
            match g.kind {
                GlobKind::Face => counts.0 += 1,
                GlobKind::Edge => counts.1 += 1,
                GlobKind::Vertex => counts.2 += 1,
            }
        }
        counts
    }

    /// All interface nodes shared by both subdomains. This is generally a
    /// larger set than the face between them: nodes of adjacent edges and
    /// vertices whose sharing sets contain both subdomains are included.
    pub fn pair_shared_nodes(&self, i: usize, j: usize) -> BTreeSet<usize> {
        assert_ne!(i, j, "a pair needs two distinct subdomains");
        self.node_to_sharing
            .iter()
            .filter(|(_, sharing)| {
                sharing.binary_search(&i).is_ok() && sharing.binary_search(&j).is_ok()
            })
            .map(|(&n, _)| n)
            .collect()
    }

    /// Unordered subdomain pairs that share a face glob, ascending.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        for g in &self.globs {
            if g.kind == GlobKind::Face {
                pairs.insert((g.sharing_set[0], g.sharing_set[1]));
            }
        }
        pairs.into_iter().collect()
    }

    /// Mark nodes as corners, removing them from their globs. Globs left
    /// empty are dropped and surviving components are recomputed.
    pub fn promote_to_corners(
        &self,
        mesh: &Mesh,
        nodes: &BTreeSet<usize>,
    ) -> Result<InterfaceClassification, InterfaceError> {
        if !self.classified {
            return Err(InterfaceError::NotClassified);
        }
        if let Some(&bad) = nodes.iter().find(|n| !self.interface_nodes.contains(n)) {
            return Err(InterfaceError::NotInterfaceNode(bad));
        }
        let mut next = self.clone();
        next.corners.extend(nodes.iter().copied());
        let mut globs = Vec::new();
        for g in &self.globs {
            let survivors: BTreeSet<usize> =
                g.nodes.iter().copied().filter(|n| !next.corners.contains(n)).collect();
            if survivors.is_empty() {
                continue;
            }
            let changed = survivors.len() != g.nodes.len();
            let components = if changed {
                node_graph(mesh, &survivors).components()
            } else {
                g.components.clone()
            };
            globs.push(Glob {
                kind: g.kind,
                sharing_set: g.sharing_set.clone(),
                nodes: survivors,
                components,
            });
        }
        next.globs = globs;
        Ok(next)
    }
}

/// Compute node-to-subdomain sharing and the interface node set.
/// Globs are not built yet; call [`classify`] next.
pub fn extract_interface(mesh: &Mesh, partition: &Partition) -> InterfaceClassification {
    let mut sharing: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (e, conn) in mesh.elements.iter().enumerate() {
        let sub = partition.subdomain_of(e);
        for &n in conn {
            sharing.entry(n).or_default().insert(sub);
        }
    }
    let node_to_sharing: BTreeMap<usize, Vec<usize>> = sharing
        .into_iter()
        .filter(|(_, subs)| subs.len() >= 2)
        .map(|(n, subs)| (n, subs.into_iter().collect()))
        .collect();
    let interface_nodes = node_to_sharing.keys().copied().collect();
    InterfaceClassification {
        interface_nodes,
        node_to_sharing,
        globs: Vec::new(),
        corners: BTreeSet::new(),
        classified: false,
    }
}

/// Group interface nodes into globs by identical sharing set and compute
/// per-glob element-connected components. Globs are ordered by sharing set.
pub fn classify(mesh: &Mesh, cls: &InterfaceClassification) -> InterfaceClassification {
    let mut groups: BTreeMap<Vec<usize>, BTreeSet<usize>> = BTreeMap::new();
    for (&node, sharing) in &cls.node_to_sharing {
        groups.entry(sharing.clone()).or_default().insert(node);
    }
    let globs = groups
        .into_iter()
        .map(|(sharing_set, nodes)| {
            let kind = if sharing_set.len() == 2 {
                GlobKind::Face
            } else if nodes.len() == 1 {
                GlobKind::Vertex
            } else {
                GlobKind::Edge
            };
            let components = node_graph(mesh, &nodes).components();
            Glob { kind, sharing_set, nodes, components }
        })
        .collect();
    InterfaceClassification { globs, classified: true, ..cls.clone() }
}

/// Convenience: extract and classify in one step.
pub fn classify_interface(mesh: &Mesh, partition: &Partition) -> InterfaceClassification {
    classify(mesh, &extract_interface(mesh, partition))
}

/// Write the classification as CSV: `node_id,kind,sharing_set,component_id`.
/// Component ids run over (glob, component) pairs in glob order; sharing
/// sets are pipe-separated subdomain ids.
pub fn write_classification_csv(
    cls: &InterfaceClassification,
    path: impl AsRef<std::path::Path>,
) -> Result<(), InterfaceError> {
    let path = path.as_ref();
    let mut rows = String::from("node_id,kind,sharing_set,component_id\n");
    let mut component_id = 0usize;
    for g in &cls.globs {
        let sharing =
            g.sharing_set.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("|");
        for comp in &g.components {
            for &n in comp {
                use std::fmt::Write as _;
                let _ = writeln!(rows, "{n},{},{sharing},{component_id}", g.kind.as_str());
            }
            component_id += 1;
        }
    }
    let mut out = std::fs::File::create(path).map_err(|source| InterfaceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    out.write_all(rows.as_bytes()).map_err(|source| InterfaceError::Io {
        path: path.display().to_string(),
        source,
    })
}
