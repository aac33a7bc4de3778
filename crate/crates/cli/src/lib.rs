//! Command implementations behind the `opmult` binary.
//!
//! Every command returns a [`Report`] and an exit code: 0 on success, 1 on
//! bad input, 2 when the numerical verdict is inconclusive and 3 when a
//! solver fails.

pub mod commands;
pub mod io;
pub mod report;

pub use commands::{cmd_apply, cmd_compact_test, cmd_norm, cmd_saar, parse_schedule, Outcome};
pub use io::{canonicalize, KernelFile, MultiplierFile};
pub use report::Report;

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for malformed input.
pub const EXIT_INPUT: i32 = 1;
/// Exit code for an inconclusive bracket or verdict.
pub const EXIT_INCONCLUSIVE: i32 = 2;
/// Exit code for a solver failure.
pub const EXIT_SOLVER: i32 = 3;

/// Failures that end a command without a report.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
        }
    }
}
