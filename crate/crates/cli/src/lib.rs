//! Problem files, the built-in registry, and run/verify reports for the
//! `vieq` command.

mod error;
mod problem;
mod registry;
mod run;

pub use error::{CliError, Result};
pub use problem::{
    emit, load_problem, parse_problem, AgentSpec, ConeSpec, CorrespondenceSpec, MapSpec, Mode, Problem, ProblemSpec,
    SetSpec, Term, FORMAT_VERSION,
};
pub use registry::{builtin, builtin_with_dim, BUILTIN_NAMES, STEP_WIDTH};
pub use run::{
    parse_report, run, verify_certificate, verify_report, write_trace, Certificate, OracleBlock, RunOptions,
    RunReport, VerifyReport,
};
