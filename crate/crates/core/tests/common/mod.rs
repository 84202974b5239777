//! Shared fixtures and independent dense oracles for the verification
//! suites. Everything here recomputes results from first principles
//! (dense factorizations, brute-force set logic) so the tests do not
//! reuse the code paths they are checking.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};

use substruct_core::bddc::{BddcOperator, SchurSystem};
use substruct_core::corners::{Algorithm, CornerSet, Provenance};
use substruct_core::mesh::{generate_structured, Mesh, SparseSystem, StructuredSpec};
use substruct_core::partition::Partition;

pub fn gather(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows.len(), cols.len());
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            m[(i, j)] = a[(r, c)];
        }
    }
    m
}

pub fn gather_vec(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

/// Direct dense solve of the assembled system (identity rows carry the
/// prescribed values, so the full-size solve is well posed).
pub fn dense_direct_solve(sys: &SparseSystem) -> DVector<f64> {
    let a = sys.matrix.to_dense();
    a.lu().solve(&sys.rhs).expect("assembled system is nonsingular")
}

/// Dense Schur complement and reduced right-hand side computed from the
/// assembled matrix by explicit block elimination.
pub fn dense_schur(sys: &SparseSystem, schur: &SchurSystem) -> (DMatrix<f64>, DVector<f64>) {
    let a = sys.matrix.to_dense();
    let interface = schur.interface_dofs.clone();
    let interior: Vec<usize> = (0..sys.n_dofs())
        .filter(|&d| sys.fixed[d].is_none() && schur.interface_index_of(d).is_none())
        .collect();
    let a_ii = gather(&a, &interior, &interior);
    let a_ib = gather(&a, &interior, &interface);
    let a_bb = gather(&a, &interface, &interface);
    let f_i = gather_vec(&sys.rhs, &interior);
    let f_b = gather_vec(&sys.rhs, &interface);
    let lu = a_ii.lu();
    let x = lu.solve(&a_ib).expect("interior block nonsingular");
    let s = &a_bb - a_ib.transpose() * x;
    let y = lu.solve(&f_i).expect("interior block nonsingular");
    let g = f_b - a_ib.transpose() * y;
    (s, g)
}

/// Materialize a linear operator by applying it to unit vectors.
pub fn materialize(n: usize, mut apply: impl FnMut(&DVector<f64>) -> DVector<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        m.set_column(k, &apply(&e));
    }
    m
}

/// Eigenvalues of the preconditioned operator `M S` via the congruent
/// symmetric form `L^T M L` with `S = L L^T`.
pub fn preconditioned_eigenvalues(schur: &SchurSystem, op: &BddcOperator) -> Vec<f64> {
    let n = schur.n_interface_dofs();
    let s = materialize(n, |v| schur.apply(v));
    let m = materialize(n, |v| op.apply(v));
    let chol = nalgebra::Cholesky::new(s).expect("Schur complement is spd");
    let l = chol.l();
    let sym = l.transpose() * m * l;
    let sym = 0.5 * (&sym + sym.transpose());
    let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

/// Independent connectivity oracle: union-find over co-occurrence of the
/// subset's nodes inside elements.
pub fn component_count_oracle(mesh: &Mesh, subset: &BTreeSet<usize>) -> usize {
    let mut parent: BTreeMap<usize, usize> = subset.iter().map(|&n| (n, n)).collect();
    fn find(parent: &mut BTreeMap<usize, usize>, x: usize) -> usize {
        let mut root = x;
        while parent[&root] != root {
            root = parent[&root];
        }
        let mut cur = x;
        while parent[&cur] != root {
            let next = parent[&cur];
            parent.insert(cur, root);
            cur = next;
        }
        root
    }
    for conn in &mesh.elements {
        let inside: Vec<usize> = conn.iter().copied().filter(|n| subset.contains(n)).collect();
        for w in inside.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent.insert(a, b);
            }
        }
    }
    let roots: BTreeSet<usize> = subset.iter().map(|&n| find(&mut parent, n)).collect();
    roots.len()
}

/// A corner set placed by hand, bypassing the selection algorithms.
pub fn hand_corners(nodes: &[usize]) -> CornerSet {
    CornerSet {
        algorithm: Algorithm::Full,
        corners: nodes.iter().copied().collect(),
        provenance: nodes.iter().map(|&n| (n, Provenance::Vertex)).collect(),
    }
}

pub fn node_at(mesh: &Mesh, coord: &[f64]) -> usize {
    (0..mesh.n_nodes())
        .find(|&n| mesh.coord(n) == coord)
        .unwrap_or_else(|| panic!("no node at {coord:?}"))
}

/// Serial 2D strip of `n_subs` square subdomains with both ends clamped.
pub fn strip_2d_both_clamped(cells: usize, n_subs: usize) -> (Mesh, Partition) {
    let spec = StructuredSpec::new(2, &[cells, cells], &[n_subs, 1]);
    let (mut mesh, part) = generate_structured(&spec).unwrap();
    clamp_face(&mut mesh, 0, 1.0);
    (mesh, part)
}

/// Serial 3D beam of `n_subs` cubic subdomains with both ends clamped.
pub fn beam_3d_both_clamped(cells: usize, n_subs: usize) -> (Mesh, Partition) {
    let spec = StructuredSpec::new(3, &[cells, cells, cells], &[n_subs, 1, 1]);
    let (mut mesh, part) = generate_structured(&spec).unwrap();
    clamp_face(&mut mesh, 0, 1.0);
    (mesh, part)
}

/// Add Dirichlet conditions on every component of the nodes lying on the
/// plane `axis == value`.
pub fn clamp_face(mesh: &mut Mesh, axis: usize, value: f64) {
    let dim = mesh.dim;
    let nodes: Vec<usize> =
        (0..mesh.n_nodes()).filter(|&n| mesh.coord(n)[axis] == value).collect();
    for n in nodes {
        for d in 0..dim {
            mesh.dirichlet.push((n, d, 0.0));
        }
    }
}

/// Deterministic pseudo-random vector for operator tests.
pub fn pseudo_random_vector(n: usize, seed: u64) -> DVector<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-1.0..1.0)))
}

/// Deterministic balanced region growing over element connectivity:
/// a stand-in for graph-partitioner decompositions, with blob-shaped
/// subdomains and irregular interfaces. Seeds spread by farthest-point
/// sampling on centroids; regions grow breadth-first under a size cap.
pub fn grow_partition(mesh: &Mesh, n: usize) -> Partition {
    use std::collections::VecDeque;
    let nel = mesh.n_elems();
    assert!(n >= 1 && n <= nel);
    let centroid = |e: usize| -> Vec<f64> {
        let conn = &mesh.elements[e];
        let mut c = vec![0.0; mesh.dim];
        for &nd in conn {
            for (acc, &x) in c.iter_mut().zip(mesh.coord(nd)) {
                *acc += x;
            }
        }
        c.iter().map(|v| v / conn.len() as f64).collect()
    };
    let cents: Vec<Vec<f64>> = (0..nel).map(centroid).collect();
    let d2 = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };

    let mut seeds = vec![0usize];
    while seeds.len() < n {
        let far = (0..nel)
            .max_by(|&a, &b| {
                let da = seeds.iter().map(|&s| d2(&cents[a], &cents[s])).fold(f64::INFINITY, f64::min);
                let db = seeds.iter().map(|&s| d2(&cents[b], &cents[s])).fold(f64::INFINITY, f64::min);
                da.partial_cmp(&db).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        seeds.push(far);
    }
    let mut node_elems: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (e, conn) in mesh.elements.iter().enumerate() {
        for &nd in conn {
            node_elems.entry(nd).or_default().push(e);
        }
    }
    let cap = nel.div_ceil(n);
    let mut assign = vec![usize::MAX; nel];
    let mut sizes = vec![0usize; n];
    let mut queues: Vec<VecDeque<usize>> = seeds.iter().map(|&s| VecDeque::from([s])).collect();
    let mut remaining = nel;
    while remaining > 0 {
        let mut progressed = false;
        for s in 0..n {
            if sizes[s] >= cap {
                continue;
            }
            while let Some(e) = queues[s].pop_front() {
                if assign[e] != usize::MAX {
                    continue;
                }
                assign[e] = s;
                sizes[s] += 1;
                remaining -= 1;
                progressed = true;
                let mut nbrs: BTreeSet<usize> = BTreeSet::new();
                for &nd in &mesh.elements[e] {
                    for &o in &node_elems[&nd] {
                        if assign[o] == usize::MAX {
                            nbrs.insert(o);
                        }
                    }
                }
                for o in nbrs {
                    queues[s].push_back(o);
                }
                break;
            }
        }
        if !progressed {
            // caps hit with stragglers left: hand them to the nearest seed
            for e in 0..nel {
                if assign[e] == usize::MAX {
                    let s = (0..n)
                        .min_by(|&a, &b| {
                            d2(&cents[e], &cents[seeds[a]])
                                .partial_cmp(&d2(&cents[e], &cents[seeds[b]]))
                                .unwrap()
                        })
                        .unwrap();
                    assign[e] = s;
                    sizes[s] += 1;
                    remaining -= 1;
                }
            }
        }
    }
    Partition::new(assign, n).unwrap()
}

// ---------------------------------------------------------------------
// Property-suite case runners shared by the properties and acceptance
// targets. Each returns the number of cases exercised.
// ---------------------------------------------------------------------

use substruct_core::bddc::{
    build_constraints, build_preconditioner, pcg_traced, reduce_to_schur, ConstraintMode,
};
use substruct_core::corners::{
    augment_random, farthest_node, max_area_third, select_corners, select_face_component_3d,
    DimMode, SelectionOptions,
};
use substruct_core::interface::classify_interface;
use substruct_core::mesh::{assemble, Pde};

fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let g = |p: &[f64], d: usize| p.get(d).copied().unwrap_or(0.0);
    let u = [g(b, 0) - g(a, 0), g(b, 1) - g(a, 1), g(b, 2) - g(a, 2)];
    let v = [g(c, 0) - g(a, 0), g(c, 1) - g(a, 1), g(c, 2) - g(a, 2)];
    let x = u[1] * v[2] - u[2] * v[1];
    let y = u[2] * v[0] - u[0] * v[2];
    let z = u[0] * v[1] - u[1] * v[0];
    0.5 * (x * x + y * y + z * z).sqrt()
}

/// Corners plus surviving glob nodes partition the interface after
/// selection, promotion, and random augmentation.
pub fn run_partition_property_cases() -> usize {
    let mut cases = 0;
    for (dim, cells, subs) in [
        (2usize, 1usize, vec![2usize, 1]),
        (2, 2, vec![2, 2]),
        (2, 1, vec![3, 2]),
        (3, 1, vec![2, 2, 2]),
        (3, 2, vec![2, 1, 1]),
        (3, 1, vec![3, 2, 1]),
    ] {
        let spec = StructuredSpec::new(dim, &vec![cells; dim], &subs);
        let (mesh, part) = generate_structured(&spec).unwrap();
        let cls = classify_interface(&mesh, &part);
        let dim_mode = DimMode::for_mesh(&mesh);
        let (basic, _) =
            select_corners(&mesh, &part, &cls, SelectionOptions::new(substruct_core::corners::Algorithm::Full, dim_mode))
                .unwrap();
        let avail = cls.interface_nodes().len() - basic.len();
        for seed in 0..20u64 {
            let extra = (seed as usize * 5) % (avail + 1);
            let cs = augment_random(&basic, &cls, extra, seed).unwrap();
            let promoted = cls.promote_to_corners(&mesh, &cs.corners).unwrap();
            let mut seen: BTreeSet<usize> = promoted.corners().clone();
            for g in promoted.globs() {
                for &n in &g.nodes {
                    assert!(seen.insert(n), "node {n} in two globs");
                }
                let comp_nodes: BTreeSet<usize> = g.components.iter().flatten().copied().collect();
                assert_eq!(&comp_nodes, &g.nodes);
            }
            assert_eq!(&seen, cls.interface_nodes());
            cases += 1;
        }
    }
    cases
}

/// The selected triangle attains the maximal area over the first two
/// corners, against exhaustive enumeration on pseudo-random point sets.
pub fn run_triangle_maximality_cases() -> usize {
    use rand::{Rng, SeedableRng};
    let mut cases = 0;
    for seed in 0..120u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3..40);
        let coords: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                vec![
                    rng.gen_range(0..20) as f64 * 0.25,
                    rng.gen_range(0..20) as f64 * 0.25,
                    rng.gen_range(0..20) as f64 * 0.25,
                ]
            })
            .collect();
        let nodes: Vec<usize> = (0..n).collect();
        let (_, flag) = select_face_component_3d(&nodes, &coords);
        let c1 = farthest_node(nodes[0], &nodes, &coords);
        let c2 = farthest_node(c1, &nodes, &coords);
        let best = nodes
            .iter()
            .map(|&k| triangle_area(&coords[c1], &coords[c2], &coords[k]))
            .fold(f64::NEG_INFINITY, f64::max);
        let (third, area) = max_area_third(c1, c2, &nodes, &coords);
        assert_eq!(area, best, "seed {seed}");
        assert_eq!(triangle_area(&coords[c1], &coords[c2], &coords[third]), best);
        let _ = flag;
        cases += 1;
    }
    cases
}

/// Weighted restriction followed by weighted assembly is the identity on
/// continuous interface vectors.
pub fn run_e_projection_cases() -> usize {
    let mut cases = 0;
    for (dim, cells, subs) in [
        (2, 2, vec![2, 1]),
        (2, 1, vec![3, 2]),
        (2, 2, vec![2, 2]),
        (3, 1, vec![2, 2, 2]),
        (3, 2, vec![1, 1, 2]),
        (3, 1, vec![3, 1, 2]),
    ] {
        let spec = StructuredSpec::new(dim, &vec![cells; dim], &subs);
        let (mesh, part) = generate_structured(&spec).unwrap();
        let pde = if dim == 2 { Pde::Elasticity { e: 1.0, nu: 0.3 } } else { Pde::Laplace };
        let sys = assemble(&mesh, &pde).unwrap();
        let schur = reduce_to_schur(&sys, &mesh, &part).unwrap();
        for seed in 0..20 {
            let u = pseudo_random_vector(schur.n_interface_dofs(), seed);
            let mut out = DVector::zeros(u.len());
            for s in schur.subdomains() {
                for (b, &k) in s.boundary_interface_idx.iter().enumerate() {
                    out[k] += s.weights[b] * u[k];
                }
            }
            assert!((out - &u).norm() < 1e-12, "dim={dim} subs={subs:?} seed={seed}");
            cases += 1;
        }
    }
    cases
}

/// The S-energy norm of the PCG error decreases strictly until
/// convergence, with the energy evaluated by a dense oracle.
pub fn run_pcg_monotonicity_cases() -> usize {
    let mut cases = 0;
    let configs: Vec<(usize, usize, Vec<usize>, Pde)> = vec![
        (2, 2, vec![2, 1], Pde::Laplace),
        (2, 2, vec![2, 2], Pde::Elasticity { e: 1.0, nu: 0.3 }),
        (2, 1, vec![4, 1], Pde::Elasticity { e: 2.0, nu: 0.2 }),
        (3, 1, vec![2, 2, 2], Pde::Laplace),
        (3, 2, vec![2, 1, 1], Pde::Elasticity { e: 1.0, nu: 0.3 }),
    ];
    for (dim, cells, subs, pde) in configs {
        let spec = StructuredSpec::new(dim, &vec![cells; dim], &subs);
        let (mesh, part) = generate_structured(&spec).unwrap();
        let sys = assemble(&mesh, &pde).unwrap();
        let cls = classify_interface(&mesh, &part);
        let dim_mode = DimMode::for_mesh(&mesh);
        let schur = reduce_to_schur(&sys, &mesh, &part).unwrap();
        let (s_dense, _) = dense_schur(&sys, &schur);
        let s_lu = s_dense.lu();
        let (basic, _) = select_corners(
            &mesh,
            &part,
            &cls,
            SelectionOptions::new(substruct_core::corners::Algorithm::Full, dim_mode),
        )
        .unwrap();
        let avail = cls.interface_nodes().len() - basic.len();
        for seed in 0..24 {
            let extra = (seed as usize * 3) % (avail + 1);
            let cs = augment_random(&basic, &cls, extra, seed).unwrap();
            let promoted = cls.promote_to_corners(&mesh, &cs.corners).unwrap();
            let dpn = pde.dofs_per_node(dim);
            let mode = if seed % 2 == 0 { ConstraintMode::C } else { ConstraintMode::CEF };
            let constraints = build_constraints(&promoted, &cs, mode, dpn).unwrap();
            let op = build_preconditioner(&schur, &constraints).unwrap();
            let (_, report, residuals) = pcg_traced(&schur, &op, 1e-10, 400, true);
            assert!(report.converged, "seed {seed}");
            let energies: Vec<f64> = residuals
                .iter()
                .map(|r| {
                    let si_r = s_lu.solve(r).unwrap();
                    r.dot(&si_r).sqrt()
                })
                .collect();
            for w in energies.windows(2) {
                if w[0] > 1e-12 * energies[0] {
                    assert!(w[1] < w[0], "stalled at seed {seed}: {} -> {}", w[0], w[1]);
                }
            }
            cases += 1;
        }
    }
    cases
}
