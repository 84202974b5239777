//! Pipeline drivers behind the command-line front end: single solves,
//! corner-count sweeps, and same-count algorithm comparisons with stable
//! CSV output.

use std::time::Instant;

use nalgebra::DVector;
use thiserror::Error;

use crate::bddc::{
    build_constraints, build_preconditioner, pcg, reduce_to_schur, BddcError, ConstraintMode,
    SolveReport,
};
use crate::corners::{
    augment_random, select_corners, Algorithm, CornerSet, CornersError, SelectionOptions,
    SelectionReport,
};
use crate::interface::{classify_interface, InterfaceError};
use crate::mesh::{assemble, Mesh, MeshError, Pde};
use crate::partition::{Partition, PartitionError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Interface(#[from] InterfaceError),
    #[error(transparent)]
    Corners(#[from] CornersError),
    #[error(transparent)]
    Bddc(#[from] BddcError),
    #[error("{0}")]
    Config(String),
    #[error("io error writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl PipelineError {
    /// Singular configurations map to a dedicated exit code.
    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            PipelineError::Bddc(
                BddcError::SingularInterior { .. }
                    | BddcError::SingularLocal { .. }
                    | BddcError::CoarseMechanism { .. }
            )
        )
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub pde: Pde,
    pub selection: SelectionOptions,
    pub extra_corners: usize,
    pub seed: u64,
    pub mode: ConstraintMode,
    pub tol: f64,
    pub maxit: usize,
}

pub struct SolveOutcome {
    pub corners: CornerSet,
    pub selection_report: SelectionReport,
    pub n_coarse_dofs: usize,
    pub interface_solution: DVector<f64>,
    pub full_solution: DVector<f64>,
    pub report: SolveReport,
}

/// Full pipeline: assemble, classify, select, constrain, reduce, solve.
pub fn run_solve(
    mesh: &Mesh,
    partition: &Partition,
    cfg: &SolveConfig,
) -> Result<SolveOutcome, PipelineError> {
    let setup_start = Instant::now();
    let system = assemble(mesh, &cfg.pde)?;
    let cls = classify_interface(mesh, partition);
    let (basic, selection_report) = select_corners(mesh, partition, &cls, cfg.selection)?;
    let corners = if cfg.extra_corners > 0 {
        augment_random(&basic, &cls, cfg.extra_corners, cfg.seed)?
    } else {
        basic
    };
    let promoted = cls.promote_to_corners(mesh, &corners.corners)?;
    let constraints =
        build_constraints(&promoted, &corners, cfg.mode, cfg.pde.dofs_per_node(mesh.dim))?;
    let schur = reduce_to_schur(&system, mesh, partition)?;
    let op = build_preconditioner(&schur, &constraints)?;
    let setup = setup_start.elapsed().as_secs_f64();

    let (u, mut report) = pcg(&schur, &op, cfg.tol, cfg.maxit);
    report.timings.setup = setup;
    report.timings.coarse_factorization = op.coarse_factor_seconds;
    let full = schur.back_substitute(&u);
    Ok(SolveOutcome {
        corners,
        selection_report,
        n_coarse_dofs: op.n_coarse_dofs,
        interface_solution: u,
        full_solution: full,
        report,
    })
}

/// Sweep settings: which algorithms to compare, which total corner counts
/// to hit (each reached by random augmentation of the basic set), and how
/// many repetitions with distinct seeds to aggregate per point.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub algorithms: Vec<Algorithm>,
    pub counts: Vec<usize>,
    pub pde: Pde,
    pub selection_base: SelectionOptions,
    pub mode: ConstraintMode,
    pub seed: u64,
    pub repetitions: usize,
    pub tol: f64,
    pub maxit: usize,
}

/// One sweep point. Repetitions aggregate by median (iterations, kappa,
/// timings); `converged` is true only when every repetition converged.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub n_corners: usize,
    pub n_coarse_dofs: usize,
    pub iterations: usize,
    pub kappa_est: f64,
    pub t_setup: f64,
    pub t_coarse: f64,
    pub t_pcg: f64,
    pub converged: bool,
    pub note: String,
}

fn median_usize(values: &mut [usize]) -> usize {
    values.sort_unstable();
    values[(values.len() - 1) / 2]
}

fn median_f64(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    values[(values.len() - 1) / 2]
}

/// Run one (algorithm, count) sweep point; singular configurations come
/// back as a non-converged row with the failure cause in `note`.
fn sweep_point(
    mesh: &Mesh,
    partition: &Partition,
    cfg: &SweepConfig,
    algorithm: Algorithm,
    basic_len: usize,
    count: usize,
) -> SweepRow {
    let mut iterations = Vec::new();
    let mut kappas = Vec::new();
    let mut setups = Vec::new();
    let mut coarses = Vec::new();
    let mut pcgs = Vec::new();
    let mut coarse_dofs = 0;
    let mut converged = true;
    let mut note = String::new();

    for rep in 0..cfg.repetitions.max(1) {
        let solve_cfg = SolveConfig {
            pde: cfg.pde,
            selection: SelectionOptions { algorithm, ..cfg.selection_base },
            extra_corners: count - basic_len,
            seed: cfg.seed.wrapping_add(rep as u64),
            mode: cfg.mode,
            tol: cfg.tol,
            maxit: cfg.maxit,
        };
        match run_solve(mesh, partition, &solve_cfg) {
            Ok(outcome) => {
                iterations.push(outcome.report.iterations);
                kappas.push(outcome.report.kappa_est);
                setups.push(outcome.report.timings.setup);
                coarses.push(outcome.report.timings.coarse_factorization);
                pcgs.push(outcome.report.timings.pcg);
                coarse_dofs = outcome.n_coarse_dofs;
                if !outcome.report.converged {
                    converged = false;
                    note = format!("maxit {} exhausted", cfg.maxit);
                }
            }
            Err(err) => {
                return SweepRow {
                    algorithm,
                    n_corners: count,
                    n_coarse_dofs: 0,
                    iterations: 0,
                    kappa_est: f64::NAN,
                    t_setup: 0.0,
                    t_coarse: 0.0,
                    t_pcg: 0.0,
                    converged: false,
                    note: err.to_string(),
                };
            }
        }
    }
    SweepRow {
        algorithm,
        n_corners: count,
        n_coarse_dofs: coarse_dofs,
        iterations: median_usize(&mut iterations),
        kappa_est: median_f64(&mut kappas),
        t_setup: median_f64(&mut setups),
        t_coarse: median_f64(&mut coarses),
        t_pcg: median_f64(&mut pcgs),
        converged,
        note,
    }
}

/// Iterations, condition estimate, and timings versus total corner count.
/// Rows are sorted by (algorithm, count).
pub fn run_sweep(
    mesh: &Mesh,
    partition: &Partition,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRow>, PipelineError> {
    if cfg.counts.is_empty() || cfg.algorithms.is_empty() {
        return Err(PipelineError::Config("sweep needs at least one count and algorithm".into()));
    }
    if cfg.repetitions == 0 {
        return Err(PipelineError::Config("repetitions must be at least 1".into()));
    }
    let cls = classify_interface(mesh, partition);
    let mut rows = Vec::new();
    for &algorithm in &cfg.algorithms {
        let opts = SelectionOptions { algorithm, ..cfg.selection_base };
        let (basic, _) = select_corners(mesh, partition, &cls, opts)?;
        for &count in &cfg.counts {
            if count < basic.len() {
                return Err(PipelineError::Config(format!(
                    "count {count} is below the {} basic set size {}",
                    algorithm.as_str(),
                    basic.len()
                )));
            }
            rows.push(sweep_point(mesh, partition, cfg, algorithm, basic.len(), count));
        }
    }
    rows.sort_by_key(|r| (r.algorithm, r.n_corners));
    Ok(rows)
}

/// Augment each algorithm's basic set to exactly `target_count` corners
/// and solve once per algorithm, for a like-for-like comparison.
pub fn compare_same_count(
    mesh: &Mesh,
    partition: &Partition,
    cfg: &SweepConfig,
    target_count: usize,
) -> Result<Vec<SweepRow>, PipelineError> {
    let cls = classify_interface(mesh, partition);
    let mut rows = Vec::new();
    for &algorithm in &cfg.algorithms {
        let opts = SelectionOptions { algorithm, ..cfg.selection_base };
        let (basic, _) = select_corners(mesh, partition, &cls, opts)?;
        if basic.len() > target_count {
            return Err(PipelineError::Config(format!(
                "algorithm {} already selects {} corners, above the target {target_count}",
                algorithm.as_str(),
                basic.len()
            )));
        }
        rows.push(sweep_point(mesh, partition, cfg, algorithm, basic.len(), target_count));
    }
    rows.sort_by_key(|r| (r.algorithm, r.n_corners));
    Ok(rows)
}

/// CSV schema shared by `sweep` and `compare`:
/// `algorithm,n_corners,n_coarse_dofs,iterations,kappa_est,t_setup,t_coarse,t_pcg,converged,note`.
pub fn sweep_rows_to_csv(rows: &[SweepRow]) -> String {
    use std::fmt::Write as _;
    let mut text = String::from(
        "algorithm,n_corners,n_coarse_dofs,iterations,kappa_est,t_setup,t_coarse,t_pcg,converged,note\n",
    );
    for r in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{:.6},{:.6},{:.6},{},{}",
            r.algorithm.as_str(),
            r.n_corners,
            r.n_coarse_dofs,
            r.iterations,
            r.kappa_est,
            r.t_setup,
            r.t_coarse,
            r.t_pcg,
            r.converged,
            r.note.replace(',', ";")
        );
    }
    text
}

pub fn write_sweep_csv(rows: &[SweepRow], path: impl AsRef<std::path::Path>) -> Result<(), PipelineError> {
    let path = path.as_ref();
    std::fs::write(path, sweep_rows_to_csv(rows)).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Report JSON for the `solve` subcommand.
pub fn solve_report_json(outcome: &SolveOutcome) -> String {
    let r = &outcome.report;
    serde_json::json!({
        "iterations": r.iterations,
        "kappa_est": r.kappa_est,
        "converged": r.converged,
        "n_corners": outcome.corners.len(),
        "n_coarse_dofs": outcome.n_coarse_dofs,
        "timings": {
            "setup": r.timings.setup,
            "coarse_factorization": r.timings.coarse_factorization,
            "pcg": r.timings.pcg,
        },
        "notes": r.notes,
    })
    .to_string()
}
