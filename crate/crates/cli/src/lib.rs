//! File formats and commands behind the `fairslice` binary.
//!
//! Each `cmd_*` function returns the document to print and the process exit
//! code; errors carry their own exit code (see [`error`]).

pub mod bench;
pub mod error;
pub mod oracle;
pub mod schema;
pub mod solve;
pub mod verify;

pub use bench::{cmd_bench, BenchFlags, BenchSource};
pub use error::CliError;
pub use oracle::{cmd_oracle, OracleMode};
pub use schema::{InstanceFile, ResultFile};
pub use solve::{cmd_solve, solve_instance, SolveFlags};
pub use verify::{cmd_verify, verify_result};

/// What a command prints and how the process should exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub body: String,
    pub exit_code: i32,
}
