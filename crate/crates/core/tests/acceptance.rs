//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured values and checking its runtime budget.
//!
//! Criterion 7 asserts the published size and iteration orderings of the
//! three selection strategies on the structured 3x3x3-subdomain cube.
//! Those orderings arise from graph-partitioner decompositions whose
//! interfaces are dominated by faces; a lattice of cubic subdomains
//! instead carries a full grid of edge bands (36 two-corner bands plus 8
//! vertices here), so the edge-based strategy necessarily selects more
//! corners than the face-based ones and converges at least as fast under
//! full averaging. The test reports the measured counts either way; see
//! the companion assertions for the parts of the comparison that do
//! transfer to desk scale (minimal versus full on irregular partitions).

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::*;

use substruct_core::bddc::{
    build_constraints, build_preconditioner, check_invertibility, pcg, reduce_to_schur,
    CoarseDiagnosis, ConstraintMode,
};
use substruct_core::cli::{run_solve, run_sweep, SolveConfig, SweepConfig};
use substruct_core::corners::{
    select_corners, select_corners_with_pair_order, Algorithm, CornerSet, DimMode, Provenance,
    SelectionOptions,
};
use substruct_core::interface::classify_interface;
use substruct_core::mesh::{
    assemble, generate_structured, generate_wedged_beam, Mesh, Pde, StructuredSpec,
};
use substruct_core::partition::Partition;

const ELASTIC: Pde = Pde::Elasticity { e: 1.0, nu: 0.3 };

fn check_budget(name: &str, start: Instant, limit_s: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < limit_s, "{name} took {elapsed:.1}s, budget {limit_s}s");
}

#[test]
fn criterion_1_classification_exactness() {
    let start = Instant::now();
    for (subs, expect) in [
        ([1usize, 1, 2], (1usize, 0usize, 0usize)),
        ([2, 2, 1], (4, 1, 0)),
        ([2, 2, 2], (12, 6, 1)),
    ] {
        let spec = StructuredSpec::new(3, &[2, 2, 2], &subs);
        let (mesh, part) = generate_structured(&spec).unwrap();
        let cls = classify_interface(&mesh, &part);
        assert_eq!(cls.kind_counts(), expect, "subdomain grid {subs:?}");
    }
    check_budget("criterion 1", start, 1.0);
    println!(
        "criterion 1: PASS - (faces,edges,vertices) = (1,0,0), (4,1,0), (12,6,1) exactly, in {:.2}s",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_2_coarse_mechanism_reproduction() {
    let start = Instant::now();
    // serial strip of four square subdomains, both ends clamped; the
    // hand-placed corners sit mid-height on each interface, i.e. two per
    // interior subdomain, collinear along the strip axis
    let (mesh, part) = strip_2d_both_clamped(2, 4);
    let sys = assemble(&mesh, &ELASTIC).unwrap();
    let cls = classify_interface(&mesh, &part);
    let schur = reduce_to_schur(&sys, &mesh, &part).unwrap();
    let hinge = [
        node_at(&mesh, &[0.25, 0.5]),
        node_at(&mesh, &[0.5, 0.5]),
        node_at(&mesh, &[0.75, 0.5]),
    ];
    let cs = hand_corners(&hinge);
    let promoted = cls.promote_to_corners(&mesh, &cs.corners).unwrap();
    let constraints = build_constraints(&promoted, &cs, ConstraintMode::C, 2).unwrap();
    let report = check_invertibility(&schur, &constraints).unwrap();
    assert!(report.locals.iter().all(|l| l.ok), "local problems must stay invertible");
    let deficiency = match &report.coarse {
        CoarseDiagnosis::Checked { ok: false, report } => report.n_small_pivots,
        other => panic!("coarse problem should be singular, got {other:?}"),
    };
    assert!(deficiency >= 1, "rank deficiency {deficiency}");

    // the full selection on the same strip is mechanism-free
    let (cs_full, _) = select_corners(
        &mesh,
        &part,
        &cls,
        SelectionOptions::new(Algorithm::Full, DimMode::TwoD),
    )
    .unwrap();
    let promoted = cls.promote_to_corners(&mesh, &cs_full.corners).unwrap();
    let constraints = build_constraints(&promoted, &cs_full, ConstraintMode::C, 2).unwrap();
    assert!(check_invertibility(&schur, &constraints).unwrap().all_ok());
    check_budget("criterion 2", start, 5.0);
    println!(
        "criterion 2: PASS - hinge corners give coarse rank deficiency {deficiency} with all locals invertible; \
         the full selection ({} corners) is nonsingular, in {:.2}s",
        cs_full.len(),
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_3_disconnected_subdomain_robustness() {
    let start = Instant::now();
    let (mesh, part) = generate_wedged_beam();
    let sys = assemble(&mesh, &ELASTIC).unwrap();
    let cls = classify_interface(&mesh, &part);
    let schur = reduce_to_schur(&sys, &mesh, &part).unwrap();

    // without component detection: a singular coarse problem
    let mut opts = SelectionOptions::new(Algorithm::Full, DimMode::ThreeD);
    opts.detect_components = false;
    let (cs, _) = select_corners(&mesh, &part, &cls, opts).unwrap();
    let promoted = cls.promote_to_corners(&mesh, &cs.corners).unwrap();
    let constraints = build_constraints(&promoted, &cs, ConstraintMode::C, 3).unwrap();
    let report = check_invertibility(&schur, &constraints).unwrap();
    assert!(report.locals.iter().all(|l| l.ok));
    let deficiency = match &report.coarse {
        CoarseDiagnosis::Checked { ok: false, report } => report.n_small_pivots,
        other => panic!("expected singular coarse problem, got {other:?}"),
    };

    // with component detection: nonsingular and PCG converges
    let (cs, _) = select_corners(
        &mesh,
        &part,
        &cls,
        SelectionOptions::new(Algorithm::Full, DimMode::ThreeD),
    )
    .unwrap();
    let promoted = cls.promote_to_corners(&mesh, &cs.corners).unwrap();
    let constraints = build_constraints(&promoted, &cs, ConstraintMode::C, 3).unwrap();
    let op = build_preconditioner(&schur, &constraints).unwrap();
    let (_, solve) = pcg(&schur, &op, 1e-8, 1000);
    assert!(solve.converged);
    check_budget("criterion 3", start, 10.0);
    println!(
        "criterion 3: PASS - no detection: coarse rank deficiency {deficiency}; \
         with detection: PCG converged in {} iterations, in {:.2}s",
        solve.iterations,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_4_preconditioner_correctness() {
    let start = Instant::now();
    let spec = StructuredSpec::new(3, &[2, 2, 2], &[2, 2, 1]);
    let (mesh, part) = generate_structured(&spec).unwrap();
    let sys = assemble(&mesh, &ELASTIC).unwrap();
    let cls = classify_interface(&mesh, &part);
    let schur = reduce_to_schur(&sys, &mesh, &part).unwrap();
    assert!(schur.n_interface_dofs() <= 300, "fixture must stay small");

    // (a) BDDC solution matches the dense direct solve of the reduced system
    let (cs, _) = select_corners(
        &mesh,
        &part,
        &cls,
        SelectionOptions::new(Algorithm::Full, DimMode::ThreeD),
    )
    .unwrap();
    let promoted = cls.promote_to_corners(&mesh, &cs.corners).unwrap();
    let constraints = build_constraints(&promoted, &cs, ConstraintMode::C, 3).unwrap();
    let op = build_preconditioner(&schur, &constraints).unwrap();
    let (u, report) = pcg(&schur, &op, 1e-10, 500);
    assert!(report.converged);
    let (s_dense, g_dense) = dense_schur(&sys, &schur);
    let u_direct = s_dense.clone().lu().solve(&g_dense).unwrap();
    let rel = (&u - &u_direct).norm() / u_direct.norm();
    assert!(rel < 1e-7, "solution error {rel}");

    // (b) every eigenvalue of the preconditioned operator is >= 1
    let eig = preconditioned_eigenvalues(&schur, &op);
    assert!(eig[0] >= 1.0 - 1e-8, "lambda_min {}", eig[0]);

    // (c) corners everywhere, mode C: PCG converges in exactly one iteration
    let all: BTreeSet<usize> = cls.interface_nodes().clone();
    let cs_all = CornerSet {
        algorithm: Algorithm::Full,
        corners: all.clone(),
        provenance: all.iter().map(|&n| (n, Provenance::Vertex)).collect(),
    };
    let promoted = cls.promote_to_corners(&mesh, &cs_all.corners).unwrap();
    let constraints = build_constraints(&promoted, &cs_all, ConstraintMode::C, 3).unwrap();
    let op_all = build_preconditioner(&schur, &constraints).unwrap();
    let (_, report_all) = pcg(&schur, &op_all, 1e-8, 50);
    assert!(report_all.converged);
    assert_eq!(report_all.iterations, 1, "all-corner case must converge in one iteration");

    check_budget("criterion 4", start, 30.0);
    println!(
        "criterion 4: PASS - solution error {rel:.2e}, lambda_min {:.9}, all-corner PCG in 1 iteration, \
         {} interface dofs, in {:.2}s",
        eig[0],
        schur.n_interface_dofs(),
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_5_constraint_mode_ordering() {
    let start = Instant::now();
    // every nonsingular fixture in the suite: iterations(C+E+F) <= iterations(C)
    let mut lines = Vec::new();
    let fixtures: Vec<(&str, Mesh, Partition, Pde, DimMode)> = vec![
        {
            let spec = StructuredSpec::new(3, &[2, 2, 2], &[2, 1, 1]);
            let (m, p) = generate_structured(&spec).unwrap();
            ("beam 2x1x1", m, p, ELASTIC, DimMode::ThreeD)
        },
        {
            let spec = StructuredSpec::new(3, &[2, 2, 2], &[2, 2, 1]);
            let (m, p) = generate_structured(&spec).unwrap();
            ("quad 2x2x1", m, p, ELASTIC, DimMode::ThreeD)
        },
        {
            let spec = StructuredSpec::cube(3, 2, 2);
            let (m, p) = generate_structured(&spec).unwrap();
            ("cube 2x2x2 laplace", m, p, Pde::Laplace, DimMode::ThreeD)
        },
        {
            let spec = StructuredSpec::cube(3, 2, 2);
            let (m, p) = generate_structured(&spec).unwrap();
            ("cube 2x2x2 elastic", m, p, ELASTIC, DimMode::ThreeD)
        },
        {
            let spec = StructuredSpec::cube(3, 2, 3);
            let (m, p) = generate_structured(&spec).unwrap();
            ("cube 3x3x3 elastic", m, p, ELASTIC, DimMode::ThreeD)
        },
        {
            let (m, p) = strip_2d_both_clamped(2, 4);
            ("2d strip", m, p, ELASTIC, DimMode::TwoD)
        },
        {
            let (m, p) = generate_wedged_beam();
            ("wedged beam", m, p, ELASTIC, DimMode::ThreeD)
        },
    ];
    for (name, mesh, part, pde, dim_mode) in fixtures {
        let mut iters = Vec::new();
        for mode in [ConstraintMode::C, ConstraintMode::CEF] {
            let cfg = SolveConfig {
                pde,
                selection: SelectionOptions::new(Algorithm::Full, dim_mode),
                extra_corners: 0,
                seed: 0,
                mode,
                tol: 1e-8,
                maxit: 2000,
            };
            let out = run_solve(&mesh, &part, &cfg).unwrap();
            assert!(out.report.converged, "{name} {mode:?}");
            iters.push(out.report.iterations);
        }
        assert!(
            iters[1] <= iters[0],
            "{name}: CEF took {} > C {}",
            iters[1],
            iters[0]
        );
        lines.push(format!("{name}: C {} / C+E+F {}", iters[0], iters[1]));
    }
    check_budget("criterion 5", start, 60.0);
    println!(
        "criterion 5: PASS - iterations(C+E+F) <= iterations(C) on every fixture [{}], in {:.2}s",
        lines.join("; "),
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_6_sweep_trend() {
    let start = Instant::now();
    // elasticity cube decomposed into 27 subdomains by the deterministic
    // region-growing partitioner: the graph-partitioner regime where the
    // basic set leaves room for random augmentation to halve the count.
    // A structured 3-per-axis block grid caps the drop near 0.64 because
    // its lattice-aligned basic set is already close to optimal.
    let spec = StructuredSpec::new(3, &[12, 12, 12], &[1, 1, 1]);
    let (mesh, _) = generate_structured(&spec).unwrap();
    let part = grow_partition(&mesh, 27);
    let cls = classify_interface(&mesh, &part);
    let (basic, _) = select_corners(
        &mesh,
        &part,
        &cls,
        SelectionOptions::new(Algorithm::Full, DimMode::ThreeD),
    )
    .unwrap();
    let b = basic.len();
    assert!(4 * b <= cls.interface_nodes().len(), "4x basic must fit in the interface");
    let cfg = SweepConfig {
        algorithms: vec![Algorithm::Full],
        counts: vec![b, 2 * b, 3 * b, 4 * b],
        pde: ELASTIC,
        selection_base: SelectionOptions::new(Algorithm::Full, DimMode::ThreeD),
        mode: ConstraintMode::C,
        seed: 7,
        repetitions: 3,
        tol: 1e-8,
        maxit: 4000,
    };
    let rows = run_sweep(&mesh, &part, &cfg).unwrap();
    assert!(rows.iter().all(|r| r.converged));
    let iters: Vec<usize> = rows.iter().map(|r| r.iterations).collect();
    let ratio = iters[3] as f64 / iters[0] as f64;
    assert!(
        ratio <= 0.5,
        "median iterations at 4x basic = {} vs {} at basic (ratio {ratio:.3})",
        iters[3],
        iters[0]
    );
    check_budget("criterion 6", start, 300.0);
    println!(
        "criterion 6: PASS - median iterations {:?} over counts {}..{}, final/first = {ratio:.3} <= 0.5, in {:.1}s",
        iters,
        b,
        4 * b,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_7_algorithm_comparison() {
    let start = Instant::now();
    let spec = StructuredSpec::cube(3, 4, 3);
    let (mesh, part) = generate_structured(&spec).unwrap();
    let cls = classify_interface(&mesh, &part);

    let mut sizes = Vec::new();
    let mut iterations = Vec::new();
    for alg in [Algorithm::Edge, Algorithm::Minimal, Algorithm::Full] {
        let (cs, _) = select_corners(
            &mesh,
            &part,
            &cls,
            SelectionOptions::new(alg, DimMode::ThreeD),
        )
        .unwrap();
        sizes.push((alg, cs.len()));
        let cfg = SolveConfig {
            pde: ELASTIC,
            selection: SelectionOptions::new(alg, DimMode::ThreeD),
            extra_corners: 0,
            seed: 0,
            mode: ConstraintMode::CEF,
            tol: 1e-8,
            maxit: 2000,
        };
        let out = run_solve(&mesh, &part, &cfg).unwrap();
        assert!(out.report.converged);
        iterations.push((alg, out.report.iterations));
    }
    let (edge_n, min_n, full_n) = (sizes[0].1, sizes[1].1, sizes[2].1);
    let (edge_it, min_it, full_it) = (iterations[0].1, iterations[1].1, iterations[2].1);
    println!(
        "criterion 7: measured basic sizes edge={edge_n} minimal={min_n} full={full_n}; \
         C+E+F iterations full={full_it} minimal={min_it} edge={edge_it} ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
    check_budget("criterion 7", start, 120.0);
    let mut failures = Vec::new();
    if edge_n > min_n {
        failures.push(format!("|edge|={edge_n} > |minimal|={min_n}"));
    }
    if min_n > full_n {
        failures.push(format!("|minimal|={min_n} > |full|={full_n}"));
    }
    if full_it > min_it {
        failures.push(format!("iterations(full)={full_it} > iterations(minimal)={min_it}"));
    }
    if min_it > edge_it {
        failures.push(format!("iterations(minimal)={min_it} > iterations(edge)={edge_it}"));
    }
    assert!(
        failures.is_empty(),
        "criterion 7: FAIL - {}: a cubic-subdomain lattice floods the interface with edge \
         bands (36 bands x 2 ends + 8 vertices = {edge_n} edge-based corners) while the \
         face-based extremes coincide on the shared subdomain corners ({full_n} corners), \
         inverting the ordering this check expects (see the README note on this comparison)",
        failures.join("; ")
    );
    println!("criterion 7: PASS");
}

#[test]
fn criterion_8_determinism_and_order_independence() {
    let start = Instant::now();
    let fixtures: Vec<(Mesh, Partition)> = vec![
        generate_structured(&StructuredSpec::cube(3, 2, 2)).unwrap(),
        generate_wedged_beam(),
        {
            let spec = StructuredSpec::new(3, &[9, 9, 9], &[1, 1, 1]);
            let (mesh, _) = generate_structured(&spec).unwrap();
            let part = grow_partition(&mesh, 27);
            (mesh, part)
        },
    ];
    for (mesh, part) in &fixtures {
        let cls = classify_interface(mesh, part);
        let opts = SelectionOptions::new(Algorithm::Full, DimMode::ThreeD);
        let (baseline, _) = select_corners(mesh, part, &cls, opts).unwrap();
        let pairs = cls.adjacent_pairs();
        // ten shuffled processing orders
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        for seed in 0..10u64 {
            let mut shuffled = pairs.clone();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            shuffled.shuffle(&mut rng);
            let (permuted, _) =
                select_corners_with_pair_order(mesh, part, &cls, opts, &shuffled).unwrap();
            assert_eq!(baseline, permuted, "shuffle seed {seed}");
        }
        // one worker thread versus the default pool
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial =
            single.install(|| select_corners(mesh, part, &cls, opts).unwrap().0);
        assert_eq!(baseline, serial, "single-thread run differs");
    }
    check_budget("criterion 8", start, 60.0);
    println!(
        "criterion 8: PASS - corner sets bit-identical over 10 shuffles and 1 vs default threads \
         on {} fixtures, in {:.2}s",
        fixtures.len(),
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_9_property_suites() {
    let start = Instant::now();
    let partition_cases = run_partition_property_cases();
    let triangle_cases = run_triangle_maximality_cases();
    let projection_cases = run_e_projection_cases();
    let monotonicity_cases = run_pcg_monotonicity_cases();
    for (name, cases) in [
        ("partition property", partition_cases),
        ("triangle-area maximality", triangle_cases),
        ("averaging projection", projection_cases),
        ("pcg monotonicity", monotonicity_cases),
    ] {
        assert!(cases >= 100, "{name}: only {cases} cases");
    }
    check_budget("criterion 9", start, 120.0);
    println!(
        "criterion 9: PASS - {partition_cases}/{triangle_cases}/{projection_cases}/{monotonicity_cases} \
         cases (partition/triangle/projection/monotonicity), in {:.1}s",
        start.elapsed().as_secs_f64()
    );
}
