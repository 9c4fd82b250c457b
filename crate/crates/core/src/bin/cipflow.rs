use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cip_transport::cli::{cmd_convergence, cmd_run, fitted_rate_table, solver_threads};
use cip_transport::config::parse_config;
use cip_transport::mesh::{export_mesh, import_mesh, Mesh};
use cip_transport::scenarios::Domain;
use cip_transport::verify::{run_verify, Level};

/// CIP-stabilized finite elements for transient transport.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write diagnostics, errors and snapshots.
    Run { config: PathBuf },
    /// Refinement study over the configured `nele` list.
    Convergence { config: PathBuf },
    /// Run the invariant suite.
    Verify {
        #[arg(long)]
        full: bool,
    },
    /// Generate, check or convert meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Write a generated mesh.
    Gen {
        #[arg(value_enum)]
        domain: DomainArg,
        nele: usize,
        out: PathBuf,
    },
    /// Read a mesh file and print its statistics.
    Import { file: PathBuf },
    /// Re-export a mesh file, optionally after uniform refinements.
    Export {
        file: PathBuf,
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        refine: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Disc,
    Square,
    Periodic,
}

fn describe(mesh: &Mesh) -> String {
    format!(
        "vertices {} triangles {} boundary edges {} h {:.6e} shape regularity {:.3} area {:.12}",
        mesh.n_vertices(),
        mesh.n_triangles(),
        mesh.boundary_edges.len(),
        mesh.h,
        mesh.shape_regularity(),
        mesh.total_area()
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> cip_transport::Result<bool> {
    match command {
        Command::Run { config } => {
            let s = cmd_run(&parse_config(&config)?)?;
            print!("{}", s.to_text());
            Ok(true)
        }
        Command::Convergence { config } => {
            let out = cmd_convergence(&parse_config(&config)?, solver_threads())?;
            print!("{}", out.stabilized.to_csv());
            print!("\n# fitted\n{}", fitted_rate_table(&out.stabilized, out.unstabilized.as_ref()));
            for f in &out.files {
                log::info!("wrote {}", f.display());
            }
            Ok(!out.has_failures())
        }
        Command::Verify { full } => {
            let checks = run_verify(if full { Level::Full } else { Level::Fast }, None);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Mesh(MeshCommand::Gen { domain, nele, out }) => {
            let domain = match domain {
                DomainArg::Disc => Domain::Disc,
                DomainArg::Square => Domain::Square,
                DomainArg::Periodic => Domain::PeriodicSquare,
            };
            let mesh = domain.mesh(nele)?;
            export_mesh(&mesh, &out)?;
            println!("{}", describe(&mesh));
            Ok(true)
        }
        Command::Mesh(MeshCommand::Import { file }) => {
            let mesh = import_mesh(&file)?;
            println!("{}", describe(&mesh));
            Ok(true)
        }
        Command::Mesh(MeshCommand::Export { file, out, refine }) => {
            let mut mesh = import_mesh(&file)?;
            for _ in 0..refine {
                mesh = mesh.refine_uniform()?.0;
            }
            export_mesh(&mesh, &out)?;
            println!("{}", describe(&mesh));
            Ok(true)
        }
    }
}
