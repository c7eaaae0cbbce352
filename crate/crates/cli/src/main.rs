use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fairslice_cli::{
    cmd_bench, cmd_oracle, cmd_solve, cmd_verify, BenchFlags, CliError, CommandOutput, OracleMode, SolveFlags,
};

#[derive(Parser)]
#[command(name = "fairslice", version, about = "Envy-free contiguous division among individuals and ad-hoc groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find an allocation whose envy is at most epsilon.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        epsilon: Option<String>,
        /// First mesh of the refinement schedule.
        #[arg(long)]
        mesh: Option<u32>,
        /// auto, scan or walk.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        budget_cells: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute every envy of a result file.
    Verify {
        instance: PathBuf,
        result: PathBuf,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force grid minimum of the largest envy.
    Oracle {
        instance: PathBuf,
        /// individual, variable or fixed.
        #[arg(long, default_value = "variable")]
        mode: String,
        #[arg(long, default_value_t = 20)]
        resolution: u32,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-mesh CSV of cells visited and envy.
    Bench {
        /// Instance file, or a generator: uniform:N, random:N.
        source: String,
        /// Comma-separated meshes.
        #[arg(long, value_delimiter = ',')]
        mesh: Option<Vec<u32>>,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        budget_cells: Option<u64>,
        /// Comma-separated group sizes for generated instances.
        #[arg(long, value_delimiter = ',')]
        groups: Option<Vec<usize>>,
        /// Report wall-clock time per mesh.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> (Result<CommandOutput, CliError>, Option<PathBuf>) {
    match command {
        Command::Solve { instance, epsilon, mesh, mode, workers, budget_cells, out } => {
            let flags = SolveFlags { epsilon, mesh, mode, workers, budget_cells };
            (cmd_solve(&instance, &flags), out)
        }
        Command::Verify { instance, result, epsilon, out } => (cmd_verify(&instance, &result, epsilon.as_deref()), out),
        Command::Oracle { instance, mode, resolution, workers, out } => {
            let result = OracleMode::parse(&mode).and_then(|m| cmd_oracle(&instance, m, resolution, workers));
            (result, out)
        }
        Command::Bench { source, mesh, mode, seed, workers, budget_cells, groups, timing, out } => {
            let flags = BenchFlags { meshes: mesh, mode, seed, workers, budget_cells, groups, timing };
            (cmd_bench(&source, &flags), out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, out) = run(cli.command);
    let code = match result {
        Ok(output) => {
            let written = match &out {
                Some(path) => std::fs::write(path, &output.body).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{}", output.body);
                    Ok(())
                }
            };
            match written {
                Ok(()) => output.exit_code,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
