//! Command-line front end for the substructuring toolkit.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 singular
//! configuration (local or coarse mechanism).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use substruct_core::bddc::ConstraintMode;
use substruct_core::cli::{
    compare_same_count, run_solve, run_sweep, solve_report_json, sweep_rows_to_csv,
    write_sweep_csv, PipelineError, SolveConfig, SweepConfig,
};
use substruct_core::corners::{
    augment_random, select_corners, write_corners_csv, Algorithm, DimMode, SelectionOptions,
};
use substruct_core::interface::{classify_interface, write_classification_csv};
use substruct_core::mesh::{
    generate_structured, generate_wedged_beam, load_mesh, save_mesh, Mesh, Pde, StructuredSpec,
};
use substruct_core::partition::{
    load_partition, partition_geometric, save_partition, GapPolicy, Partition,
};

#[derive(Parser)]
#[command(
    name = "substruct",
    about = "Substructuring toolkit: classify interfaces, select corners, solve with BDDC",
    version
)]
struct CliArgs {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Mesh file (JSON).
    #[arg(long, global = true)]
    mesh: Option<PathBuf>,
    /// Partition file (one subdomain id per element line).
    #[arg(long, global = true)]
    part: Option<PathBuf>,
    /// Partition the mesh internally into N subdomains instead of --part.
    #[arg(long, global = true)]
    nparts: Option<usize>,
    /// Renumber partition ids when some subdomains are empty.
    #[arg(long, global = true)]
    renumber_parts: bool,
    /// Governing equation.
    #[arg(long, global = true, default_value = "elasticity", value_parser = ["laplace", "elasticity"])]
    pde: String,
    /// Young modulus for elasticity.
    #[arg(long, global = true, default_value_t = 1.0)]
    young: f64,
    /// Poisson ratio for elasticity.
    #[arg(long, global = true, default_value_t = 0.3)]
    poisson: f64,
    /// Output path (CSV for classify/select/sweep/compare).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SelectionArgs {
    /// Corner selection strategy.
    #[arg(long, default_value = "full", value_parser = ["full", "minimal", "edge"])]
    algorithm: String,
    /// Face selection rule: three corners (3d) or two (2d); default follows the mesh.
    #[arg(long, value_parser = ["3d", "2d"])]
    dim_mode: Option<String>,
    /// Random corners added on top of the basic set.
    #[arg(long, default_value_t = 0)]
    extra_corners: usize,
    /// Seed for random augmentation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Treat each pair-shared node set as a single component.
    #[arg(long)]
    no_detect_components: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    selection: SelectionArgs,
    /// Constraint mode: corners (c) plus edge/face averages.
    #[arg(long, default_value = "c", value_parser = ["c", "ce", "cf", "cef"])]
    constraints: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    maxit: usize,
    /// Write the solve report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    selection: SelectionArgs,
    #[arg(long, default_value = "c", value_parser = ["c", "ce", "cf", "cef"])]
    constraints: String,
    /// Comma-separated total corner counts.
    #[arg(long, value_delimiter = ',')]
    counts: Vec<usize>,
    /// Count range start:stop:step (inclusive), combined with --counts.
    #[arg(long)]
    range: Option<String>,
    /// Algorithms to sweep.
    #[arg(long, value_delimiter = ',', default_value = "full")]
    algorithms: Vec<String>,
    /// Repetitions per point with distinct seeds; the median is reported.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    maxit: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    selection: SelectionArgs,
    #[arg(long, default_value = "c", value_parser = ["c", "ce", "cf", "cef"])]
    constraints: String,
    /// Every algorithm's basic set is augmented to exactly this count.
    #[arg(long)]
    target_count: usize,
    #[arg(long, value_delimiter = ',', default_value = "full,minimal,edge")]
    algorithms: Vec<String>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    maxit: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Classify interface nodes into faces, edges, and vertices.
    Classify,
    /// Select corners and write them as CSV.
    Select(SelectionArgs),
    /// Run the BDDC-preconditioned PCG solve.
    Solve(SolveArgs),
    /// Iterations and condition estimate versus corner count.
    Sweep(SweepArgs),
    /// Compare algorithms at an equal corner count.
    Compare(CompareArgs),
    /// Write built-in fixture meshes and partitions.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Fixture kind.
    #[arg(long, default_value = "structured", value_parser = ["structured", "wedged-beam"])]
    kind: String,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Cells per subdomain per axis, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    cells: Vec<usize>,
    /// Subdomains per axis, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    subs: Vec<usize>,
    /// Mesh output path.
    #[arg(long)]
    mesh_out: PathBuf,
    /// Partition output path.
    #[arg(long)]
    part_out: Option<PathBuf>,
}

enum CliError {
    Input(String),
    Pipeline(PipelineError),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(1),
            CliError::Pipeline(p) if p.is_singular() => ExitCode::from(2),
            CliError::Pipeline(_) => ExitCode::from(1),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Input(m) => m.clone(),
            CliError::Pipeline(p) => p.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let args = match CliArgs::try_parse() {
        Ok(a) => a,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn parse_pde(g: &GlobalArgs) -> Result<Pde, CliError> {
    match g.pde.as_str() {
        "laplace" => Ok(Pde::Laplace),
        "elasticity" => Ok(Pde::Elasticity { e: g.young, nu: g.poisson }),
        other => Err(CliError::Input(format!("unknown pde {other}"))),
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, CliError> {
    match s {
        "full" => Ok(Algorithm::Full),
        "minimal" => Ok(Algorithm::Minimal),
        "edge" => Ok(Algorithm::Edge),
        other => Err(CliError::Input(format!("unknown algorithm {other}"))),
    }
}

fn parse_mode(s: &str) -> Result<ConstraintMode, CliError> {
    ConstraintMode::parse(s).ok_or_else(|| CliError::Input(format!("unknown constraint mode {s}")))
}

fn selection_options(sel: &SelectionArgs, mesh: &Mesh) -> Result<SelectionOptions, CliError> {
    let algorithm = parse_algorithm(&sel.algorithm)?;
    let dim_mode = match sel.dim_mode.as_deref() {
        None => DimMode::for_mesh(mesh),
        Some("3d") => DimMode::ThreeD,
        Some("2d") => DimMode::TwoD,
        Some(other) => return Err(CliError::Input(format!("unknown dim mode {other}"))),
    };
    Ok(SelectionOptions { algorithm, dim_mode, detect_components: !sel.no_detect_components })
}

fn load_inputs(g: &GlobalArgs) -> Result<(Mesh, Partition), CliError> {
    let mesh_path = g
        .mesh
        .as_ref()
        .ok_or_else(|| CliError::Input("--mesh is required".to_string()))?;
    let mesh = load_mesh(mesh_path).map_err(PipelineError::from)?;
    let partition = match (&g.part, g.nparts) {
        (Some(path), None) => {
            let policy = if g.renumber_parts { GapPolicy::Renumber } else { GapPolicy::Deny };
            let (p, warnings) = load_partition(path, &mesh, policy).map_err(PipelineError::from)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            p
        }
        (None, Some(n)) => partition_geometric(&mesh, n).map_err(PipelineError::from)?,
        (None, None) => {
            return Err(CliError::Input("one of --part or --nparts is required".to_string()))
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Input("--part and --nparts are mutually exclusive".to_string()))
        }
    };
    Ok((mesh, partition))
}

fn run(args: CliArgs) -> Result<(), CliError> {
    let g = &args.global;
    match args.command {
        Command::Generate(gen) => {
            let (mesh, part) = match gen.kind.as_str() {
                "wedged-beam" => generate_wedged_beam(),
                _ => {
                    let spec = StructuredSpec::new(gen.dim, &gen.cells, &gen.subs);
                    generate_structured(&spec).map_err(PipelineError::from)?
                }
            };
            save_mesh(&mesh, &gen.mesh_out).map_err(PipelineError::from)?;
            println!(
                "wrote mesh with {} nodes, {} elements to {}",
                mesh.n_nodes(),
                mesh.n_elems(),
                gen.mesh_out.display()
            );
            if let Some(part_out) = gen.part_out {
                save_partition(&part, &part_out).map_err(PipelineError::from)?;
                println!(
                    "wrote partition with {} subdomains to {}",
                    part.n_subdomains(),
                    part_out.display()
                );
            }
            Ok(())
        }
        Command::Classify => {
            let (mesh, part) = load_inputs(g)?;
            let cls = classify_interface(&mesh, &part);
            let (faces, edges, vertices) = cls.kind_counts();
            println!("interface nodes: {}", cls.interface_nodes().len());
            println!("faces: {faces}");
            println!("edges: {edges}");
            println!("vertices: {vertices}");
            if let Some(out) = &g.out {
                write_classification_csv(&cls, out).map_err(PipelineError::from)?;
                println!("wrote {}", out.display());
            }
            Ok(())
        }
        Command::Select(sel) => {
            let (mesh, part) = load_inputs(g)?;
            let cls = classify_interface(&mesh, &part);
            let opts = selection_options(&sel, &mesh)?;
            let (basic, report) =
                select_corners(&mesh, &part, &cls, opts).map_err(PipelineError::from)?;
            let cs = if sel.extra_corners > 0 {
                augment_random(&basic, &cls, sel.extra_corners, sel.seed)
                    .map_err(PipelineError::from)?
            } else {
                basic
            };
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!("algorithm: {}", cs.algorithm.as_str());
            println!("corners: {} ({} vertices in basic set)", cs.len(), report.n_vertices);
            if let Some(out) = &g.out {
                write_corners_csv(&cs, &mesh, out)
                    .map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;
                println!("wrote {}", out.display());
            }
            Ok(())
        }
        Command::Solve(sa) => {
            let (mesh, part) = load_inputs(g)?;
            let opts = selection_options(&sa.selection, &mesh)?;
            let cfg = SolveConfig {
                pde: parse_pde(g)?,
                selection: opts,
                extra_corners: sa.selection.extra_corners,
                seed: sa.selection.seed,
                mode: parse_mode(&sa.constraints)?,
                tol: sa.tol,
                maxit: sa.maxit,
            };
            let outcome = run_solve(&mesh, &part, &cfg)?;
            let r = &outcome.report;
            println!(
                "converged: {} in {} iterations, kappa_est {:.4}, {} corners, {} coarse dofs",
                r.converged,
                r.iterations,
                r.kappa_est,
                outcome.corners.len(),
                outcome.n_coarse_dofs
            );
            if let Some(path) = &sa.report {
                std::fs::write(path, solve_report_json(&outcome)).map_err(|e| {
                    CliError::Input(format!("cannot write {}: {e}", path.display()))
                })?;
                println!("wrote {}", path.display());
            }
            if !r.converged {
                return Err(CliError::Input(format!(
                    "PCG did not converge within {} iterations",
                    sa.maxit
                )));
            }
            Ok(())
        }
        Command::Sweep(sw) => {
            let (mesh, part) = load_inputs(g)?;
            let opts = selection_options(&sw.selection, &mesh)?;
            let mut counts = sw.counts.clone();
            if let Some(range) = &sw.range {
                counts.extend(parse_range(range)?);
            }
            counts.sort_unstable();
            counts.dedup();
            let algorithms = sw
                .algorithms
                .iter()
                .map(|s| parse_algorithm(s))
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = SweepConfig {
                algorithms,
                counts,
                pde: parse_pde(g)?,
                selection_base: opts,
                mode: parse_mode(&sw.constraints)?,
                seed: sw.selection.seed,
                repetitions: sw.reps,
                tol: sw.tol,
                maxit: sw.maxit,
            };
            let rows = run_sweep(&mesh, &part, &cfg)?;
            emit_rows(&rows, g)
        }
        Command::Compare(ca) => {
            let (mesh, part) = load_inputs(g)?;
            let opts = selection_options(&ca.selection, &mesh)?;
            let algorithms = ca
                .algorithms
                .iter()
                .map(|s| parse_algorithm(s))
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = SweepConfig {
                algorithms,
                counts: vec![ca.target_count],
                pde: parse_pde(g)?,
                selection_base: opts,
                mode: parse_mode(&ca.constraints)?,
                seed: ca.selection.seed,
                repetitions: ca.reps,
                tol: ca.tol,
                maxit: ca.maxit,
            };
            let rows = compare_same_count(&mesh, &part, &cfg, ca.target_count)?;
            emit_rows(&rows, g)
        }
    }
}

fn emit_rows(rows: &[substruct_core::cli::SweepRow], g: &GlobalArgs) -> Result<(), CliError> {
    match &g.out {
        Some(out) => {
            write_sweep_csv(rows, out)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
        }
        None => print!("{}", sweep_rows_to_csv(rows)),
    }
    Ok(())
}

fn parse_range(spec: &str) -> Result<Vec<usize>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!("range must be start:stop:step, got {spec}")));
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.parse().map_err(|_| CliError::Input(format!("bad range component {p}"))))
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step == 0 {
        return Err(CliError::Input("range step must be positive".to_string()));
    }
    Ok((start..=stop).step_by(step).collect())
}
