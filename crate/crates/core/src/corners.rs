//! Selection of the basic corner (coarse node) set.
//!
//! Three selection strategies share the same remote-node primitives:
//!
//! * `full`: every vertex becomes a corner, then for each pair of
//!   face-adjacent subdomains the set of all nodes they share is split
//!   into element-connected components and each component independently
//!   contributes up to three corners: the two mutually most remote nodes
//!   and the node maximising the triangle area over that base. No
//!   component looks at corners chosen elsewhere, so the result is
//!   independent of processing order and parallelises trivially.
//! * `minimal`: the same walk, but each component enters the remote-node
//!   procedure at a later step depending on how many corners it already
//!   contains (0 from the start, 1 skips to the second corner, 2 skips to
//!   the triangle step, 3 or more selects nothing). Sequential over pairs
//!   in ascending order.
//! * `edge`: vertices plus the two mutually most remote nodes of every
//!   edge-glob component; faces contribute nothing.
//!
//! All arbitrary choices are pinned: "an arbitrary node" is the lowest
//! node index, and every distance or area tie breaks toward the lowest
//! node index, so selections are reproducible across runs and thread
//! counts.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::interface::{GlobKind, InterfaceClassification};
use crate::mesh::Mesh;
use crate::partition::{node_graph, Partition};

#[derive(Debug, Error)]
pub enum CornersError {
    #[error("classification has not been built; call classify first")]
    NotClassified,
    #[error("requested {requested} random corners but only {available} interface nodes remain")]
    NotEnoughCandidates { requested: usize, available: usize },
    #[error("node {0} is not on the interface")]
    NotInterfaceNode(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    Full,
    Minimal,
    Edge,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Full => "full",
            Algorithm::Minimal => "minimal",
            Algorithm::Edge => "edge",
        }
    }
}

/// Whether face components contribute three corners (volumetric problems)
/// or stop at two (plane problems and topologically flat decompositions,
/// e.g. shells).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimMode {
    ThreeD,
    TwoD,
}

impl DimMode {
    pub fn for_mesh(mesh: &Mesh) -> Self {
        if mesh.dim == 2 {
            DimMode::TwoD
        } else {
            DimMode::ThreeD
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionOptions {
    pub algorithm: Algorithm,
    pub dim_mode: DimMode,
    /// Split pair-shared node sets into element-connected components and
    /// fix each independently. Disabling reproduces the failure mode on
    /// decompositions with disconnected interfaces.
    pub detect_components: bool,
}

impl SelectionOptions {
    pub fn new(algorithm: Algorithm, dim_mode: DimMode) -> Self {
        SelectionOptions { algorithm, dim_mode, detect_components: true }
    }
}

/// Where a corner came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Vertex,
    Face { pair: (usize, usize), component: usize },
    Edge { glob: usize, component: usize },
    Random { seed: u64 },
}

impl Provenance {
    pub fn label(&self) -> String {
        match self {
            Provenance::Vertex => "vertex".to_string(),
            Provenance::Face { pair: (i, j), component } => format!("face_{i}_{j}_c{component}"),
            Provenance::Edge { glob, component } => format!("edge_g{glob}_c{component}"),
            Provenance::Random { seed } => format!("random_s{seed}"),
        }
    }
}

/// Selected corners with provenance. Iteration order is ascending node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CornerSet {
    pub algorithm: Algorithm,
    pub corners: BTreeSet<usize>,
    pub provenance: BTreeMap<usize, Provenance>,
}

impl CornerSet {
    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// Fewer nodes than corners wanted; all nodes were taken.
    Tiny,
    /// Every candidate is collinear with the first two corners.
    Collinear,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectionOrigin {
    Pair { pair: (usize, usize) },
    EdgeGlob { glob: usize },
}

/// One face or edge component's outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSelection {
    pub origin: SelectionOrigin,
    pub component: usize,
    pub nodes_in_component: usize,
    pub corners: Vec<usize>,
    pub flag: Option<Degeneracy>,
}

/// Selection summary: per-component corner counts, degeneracy flags, and
/// warnings (empty interface, selection skipped).
#[derive(Debug, Clone, Default)]
pub struct SelectionReport {
    pub components: Vec<ComponentSelection>,
    pub n_vertices: usize,
    pub total_corners: usize,
    pub warnings: Vec<String>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let get = |p: &[f64], d: usize| p.get(d).copied().unwrap_or(0.0);
    let u = [get(b, 0) - get(a, 0), get(b, 1) - get(a, 1), get(b, 2) - get(a, 2)];
    let v = [get(c, 0) - get(a, 0), get(c, 1) - get(a, 1), get(c, 2) - get(a, 2)];
    let cx = u[1] * v[2] - u[2] * v[1];
    let cy = u[2] * v[0] - u[0] * v[2];
    let cz = u[0] * v[1] - u[1] * v[0];
    0.5 * (cx * cx + cy * cy + cz * cz).sqrt()
}

/// Node of `candidates` with maximal Euclidean distance to `seed`;
/// ties break toward the lowest node index.
pub fn farthest_node(seed: usize, candidates: &[usize], coords: &[Vec<f64>]) -> usize {
    assert!(!candidates.is_empty(), "candidates must be nonempty");
    let mut best = candidates[0];
    let mut best_d = dist2(&coords[seed], &coords[best]);
    for &n in &candidates[1..] {
        let d = dist2(&coords[seed], &coords[n]);
        if d > best_d || (d == best_d && n < best) {
            best = n;
            best_d = d;
        }
    }
    best
}

/// Node of `candidates` maximising the area of the triangle with corners
/// `c1`, `c2`; ties break toward the lowest node index. Returns the node
/// and the attained area.
pub fn max_area_third(
    c1: usize,
    c2: usize,
    candidates: &[usize],
    coords: &[Vec<f64>],
) -> (usize, f64) {
    assert!(!candidates.is_empty(), "candidates must be nonempty");
    let mut best = candidates[0];
    let mut best_area = triangle_area(&coords[c1], &coords[c2], &coords[best]);
    for &n in &candidates[1..] {
        let area = triangle_area(&coords[c1], &coords[c2], &coords[n]);
        if area > best_area || (area == best_area && n < best) {
            best = n;
            best_area = area;
        }
    }
    (best, best_area)
}

/// Area below which a component counts as collinear, relative to the
/// squared span of its first two corners so the rule survives unit changes.
fn area_tolerance(c1: usize, c2: usize, coords: &[Vec<f64>]) -> f64 {
    1e-12 * dist2(&coords[c1], &coords[c2])
}

fn select_component(
    component: &[usize],
    coords: &[Vec<f64>],
    dim_mode: DimMode,
    existing: &[usize],
) -> (Vec<usize>, Option<Degeneracy>) {
    debug_assert!(component.windows(2).all(|w| w[0] < w[1]));
    let want = match dim_mode {
        DimMode::ThreeD => 3,
        DimMode::TwoD => 2,
    };
    if existing.len() >= want {
        return (Vec::new(), None);
    }
    if component.len() + existing.len() < want {
        // too small to reach the full count: take everything
        return (component.to_vec(), Some(Degeneracy::Tiny));
    }

    let mut picked: Vec<usize> = existing.to_vec();
    if picked.is_empty() {
        // (a) arbitrary node, fixed as the lowest index; (b) most remote
        let seed = component[0];
        picked.push(farthest_node(seed, component, coords));
    }
    if picked.len() == 1 {
        // (c) most remote from the first corner
        picked.push(farthest_node(picked[0], component, coords));
    }
    let mut selected: Vec<usize> =
        picked.iter().filter(|n| !existing.contains(n)).copied().collect();
    if want == 2 {
        selected.sort_unstable();
        selected.dedup();
        return (selected, None);
    }
    // (d) maximise the triangle area over the first two corners
    let (c1, c2) = (picked[0], picked[1]);
    let (third, area) = max_area_third(c1, c2, component, coords);
    if area <= area_tolerance(c1, c2, coords) {
        selected.sort_unstable();
        selected.dedup();
        return (selected, Some(Degeneracy::Collinear));
    }
    if !existing.contains(&third) {
        selected.push(third);
    }
    selected.sort_unstable();
    selected.dedup();
    (selected, None)
}

/// Up to three corners for one face component (volumetric rule): the two
/// mutually most remote nodes and the max-area third. Components smaller
/// than three nodes yield all their nodes; collinear components yield the
/// two remote nodes and a degeneracy flag.
pub fn select_face_component_3d(
    component: &[usize],
    coords: &[Vec<f64>],
) -> (Vec<usize>, Option<Degeneracy>) {
    select_component(component, coords, DimMode::ThreeD, &[])
}

/// Up to two corners for one face component (plane rule): the two
/// mutually most remote nodes.
pub fn select_face_component_2d(
    component: &[usize],
    coords: &[Vec<f64>],
) -> (Vec<usize>, Option<Degeneracy>) {
    select_component(component, coords, DimMode::TwoD, &[])
}

fn components_of(mesh: &Mesh, nodes: &BTreeSet<usize>, detect: bool) -> Vec<Vec<usize>> {
    if detect {
        node_graph(mesh, nodes).components()
    } else {
        vec![nodes.iter().copied().collect()]
    }
}

/// Select the basic corner set.
pub fn select_corners(
    mesh: &Mesh,
    partition: &Partition,
    cls: &InterfaceClassification,
    opts: SelectionOptions,
) -> Result<(CornerSet, SelectionReport), CornersError> {
    let pairs = cls.adjacent_pairs();
    select_corners_with_pair_order(mesh, partition, cls, opts, &pairs)
}

/// [`select_corners`] with an explicit pair processing order. For the full
/// and edge strategies the outcome is identical for every permutation; the
/// minimal strategy re-sorts to its canonical ascending order.
pub fn select_corners_with_pair_order(
    mesh: &Mesh,
    _partition: &Partition,
    cls: &InterfaceClassification,
    opts: SelectionOptions,
    pair_order: &[(usize, usize)],
) -> Result<(CornerSet, SelectionReport), CornersError> {
    if !cls.is_classified() {
        return Err(CornersError::NotClassified);
    }
    let coords = &mesh.nodes;
    let mut report = SelectionReport::default();
    let mut corners: BTreeSet<usize> = BTreeSet::new();
    let mut provenance: BTreeMap<usize, Provenance> = BTreeMap::new();

    if cls.interface_nodes().is_empty() {
        report.warnings.push("interface is empty; no corners to select".to_string());
        return Ok((CornerSet { algorithm: opts.algorithm, corners, provenance }, report));
    }

    // step one, shared by all strategies: every vertex is a corner
    for g in cls.globs() {
        if g.kind == GlobKind::Vertex {
            for &n in &g.nodes {
                corners.insert(n);
                provenance.insert(n, Provenance::Vertex);
            }
        }
    }
    report.n_vertices = corners.len();

    type PairPick = ((usize, usize), usize, usize, Vec<usize>, Option<Degeneracy>);
    match opts.algorithm {
        Algorithm::Full => {
            // each component selects without looking at other selections,
            // so pairs can run in parallel and in any order
            let picked: Vec<Vec<PairPick>> = pair_order
                .par_iter()
                .map(|&(i, j)| {
                    let shared = cls.pair_shared_nodes(i, j);
                    let comps = components_of(mesh, &shared, opts.detect_components);
                    comps
                        .iter()
                        .enumerate()
                        .map(|(ci, comp)| {
                            let (sel, flag) = select_component(comp, coords, opts.dim_mode, &[]);
                            ((i, j), ci, comp.len(), sel, flag)
                        })
                        .collect()
                })
                .collect();
            // merge in canonical pair order regardless of traversal order
            let mut merged: Vec<PairPick> = picked.into_iter().flatten().collect();
            merged.sort_by_key(|m| (m.0, m.1));
            for (pair, ci, n_nodes, sel, flag) in merged {
                for &n in &sel {
                    corners.insert(n);
                    let p = Provenance::Face { pair, component: ci };
                    match provenance.get(&n) {
                        Some(old) if *old <= p => {}
                        _ => {
                            provenance.insert(n, p);
                        }
                    }
                }
                report.components.push(ComponentSelection {
                    origin: SelectionOrigin::Pair { pair },
                    component: ci,
                    nodes_in_component: n_nodes,
                    corners: sel,
                    flag,
                });
            }
        }
        Algorithm::Minimal => {
            // favouring already selected corners makes the walk sequential
            let mut order: Vec<(usize, usize)> = pair_order.to_vec();
            order.sort_unstable();
            for (i, j) in order {
                let shared = cls.pair_shared_nodes(i, j);
                let comps = components_of(mesh, &shared, opts.detect_components);
                for (ci, comp) in comps.iter().enumerate() {
                    let existing: Vec<usize> =
                        comp.iter().copied().filter(|n| corners.contains(n)).collect();
                    let (sel, flag) = select_component(comp, coords, opts.dim_mode, &existing);
                    for &n in &sel {
                        if corners.insert(n) {
                            provenance.insert(n, Provenance::Face { pair: (i, j), component: ci });
                        }
                    }
                    report.components.push(ComponentSelection {
                        origin: SelectionOrigin::Pair { pair: (i, j) },
                        component: ci,
                        nodes_in_component: comp.len(),
                        corners: sel,
                        flag,
                    });
                }
            }
        }
        Algorithm::Edge => {
            for (gi, g) in cls.globs().iter().enumerate() {
                if g.kind != GlobKind::Edge {
                    continue;
                }
                let comps = if opts.detect_components {
                    g.components.clone()
                } else {
                    vec![g.nodes.iter().copied().collect()]
                };
                for (ci, comp) in comps.iter().enumerate() {
                    // end points of the edge component via the remote-node walk
                    let (sel, flag) = select_component(comp, coords, DimMode::TwoD, &[]);
                    for &n in &sel {
                        if corners.insert(n) {
                            provenance.insert(n, Provenance::Edge { glob: gi, component: ci });
                        }
                    }
                    report.components.push(ComponentSelection {
                        origin: SelectionOrigin::EdgeGlob { glob: gi },
                        component: ci,
                        nodes_in_component: comp.len(),
                        corners: sel,
                        flag,
                    });
                }
            }
        }
    }

    report.total_corners = corners.len();
    if corners.is_empty() {
        report.warnings.push(
            "selection produced no corners; the decomposition has no vertices or edges to use"
                .to_string(),
        );
    }
    Ok((CornerSet { algorithm: opts.algorithm, corners, provenance }, report))
}

/// Add `k` distinct non-corner interface nodes as corners, drawn uniformly
/// with the given seed. The same seed always produces the same set.
pub fn augment_random(
    cs: &CornerSet,
    cls: &InterfaceClassification,
    k: usize,
    seed: u64,
) -> Result<CornerSet, CornersError> {
    let mut pool: Vec<usize> =
        cls.interface_nodes().iter().copied().filter(|n| !cs.corners.contains(n)).collect();
    if k > pool.len() {
        return Err(CornersError::NotEnoughCandidates { requested: k, available: pool.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = cs.clone();
    // partial Fisher-Yates: the first k slots become the sample
    for i in 0..k {
        let j = i + rng.gen_range(0..pool.len() - i);
        pool.swap(i, j);
        next.corners.insert(pool[i]);
        next.provenance.insert(pool[i], Provenance::Random { seed });
    }
    Ok(next)
}

/// Write corners as CSV: `node_id,x,y,z,provenance` (z is 0 for 2D meshes).
pub fn write_corners_csv(
    cs: &CornerSet,
    mesh: &Mesh,
    path: impl AsRef<std::path::Path>,
) -> std::io::Result<()> {
    use std::fmt::Write as _;
    let mut text = String::from("node_id,x,y,z,provenance\n");
    for &n in &cs.corners {
        let c = mesh.coord(n);
        let z = c.get(2).copied().unwrap_or(0.0);
        let label = cs.provenance.get(&n).map(|p| p.label()).unwrap_or_default();
        let _ = writeln!(text, "{n},{},{},{z},{label}", c[0], c[1]);
    }
    std::fs::write(path, text)
}
