//! Batch runner for hybrid mixed domain decomposition studies.
//!
//! Exit codes: 0 on success, 1 when any study run failed, 2 on
//! configuration errors.

use clap::{Parser, Subcommand};
use hmdd::assembly::{assemble, QuadratureSettings};
use hmdd::error::Error;
use hmdd::mesh::{read_mesh, write_mesh};
use hmdd::spaces::build_dofmap;
use hmdd::study::{run_study, Geometry, StudyConfig};
use hmdd::trace::build_trace_projector;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hmdd",
    about = "Hybrid mixed domain decomposition solver and convergence-study runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a study from a TOML config: CSV tables, SVG plots, rate summary.
    Run {
        /// Study configuration file (defaults to the built-in benchmark
        /// study when omitted)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the configured output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the number of cores)
        #[arg(long)]
        workers: Option<usize>,
        /// Print one line per finished run
        #[arg(short, long)]
        verbose: bool,
    },
    /// Generate a mesh and write it in the text format.
    Mesh {
        /// square | annulus
        #[arg(long)]
        geometry: String,
        /// Uniform refinements of the generator's base mesh
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Read a mesh file back, re-validate it, and print a summary.
    MeshCheck { path: PathBuf },
    /// Assemble one case and dump the symmetrized system in triplet text
    /// format (for golden-file comparisons).
    DumpSystem {
        /// square | annulus
        #[arg(long)]
        geometry: String,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, default_value_t = 10.0)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) | Error::Parse(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn run(cli: Cli) -> hmdd::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            verbose,
        } => {
            let mut study = match config {
                Some(path) => StudyConfig::load(&path)?,
                None => StudyConfig::default(),
            };
            if let Some(dir) = out {
                study.output_dir = dir;
            }
            if let Some(n) = workers {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            }
            let summary = run_study(&study)?;
            if verbose {
                for rec in &summary.records {
                    match &rec.outcome {
                        Ok(r) => println!(
                            "level={} q={} tau={} h={:.4e} e_u={:.4e} e_mu={:.4e} residual={:.2e}",
                            r.level, r.order, r.tau, r.h, r.e_u, r.e_mu, r.residual
                        ),
                        Err(msg) => println!(
                            "level={} q={} tau={} FAILED: {msg}",
                            rec.level, rec.order, rec.tau
                        ),
                    }
                }
            }
            print!("{}", summary.summary_text);
            for file in &summary.files {
                println!("wrote {}", file.display());
            }
            if summary.n_failures > 0 {
                eprintln!("{} run(s) failed", summary.n_failures);
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Mesh {
            geometry,
            level,
            out,
        } => {
            let mesh = Geometry::parse(&geometry)?.mesh(level)?;
            std::fs::write(&out, write_mesh(&mesh))?;
            println!(
                "wrote {} ({} cells, {} facets, h = {:.6})",
                out.display(),
                mesh.n_cells(),
                mesh.facets.len(),
                mesh.mesh_width
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::MeshCheck { path } => {
            let text = std::fs::read_to_string(&path)?;
            let mesh = read_mesh(&text)?;
            mesh.validate()?;
            println!(
                "{}: valid mesh with {} cells in {} patches, {} facets ({} on the skeleton), h = {:.6}, level {}",
                path.display(),
                mesh.n_cells(),
                mesh.n_patches,
                mesh.facets.len(),
                mesh.skeleton_facets().count(),
                mesh.mesh_width,
                mesh.refinement_level
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpSystem {
            geometry,
            level,
            order,
            tau,
            out,
        } => {
            let geometry = Geometry::parse(&geometry)?;
            let reference = geometry.reference()?;
            let mesh = geometry.mesh(level)?;
            let dofmap = build_dofmap(&mesh, order)?;
            let quad = QuadratureSettings::default();
            let projector = build_trace_projector(&mesh, &dofmap, quad.trace_points(order))?;
            let system = assemble(
                &mesh,
                &dofmap,
                &projector,
                &reference.problem_data(tau),
                &quad,
            )?;
            std::fs::write(&out, system.to_triplet_text())?;
            println!("wrote {} ({} unknowns)", out.display(), system.total());
            Ok(ExitCode::SUCCESS)
        }
    }
}
