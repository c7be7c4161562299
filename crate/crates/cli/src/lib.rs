//! Library side of the `dissim` binary: configuration plumbing, CSV and
//! manifest emission, chart rendering, and the per-subcommand drivers.
//! The integration suite calls these directly; `main` only parses flags.

// negated float comparisons also reject NaN in range validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation or bad configuration value; exits with code 2.
    #[error("{0}")]
    Usage(String),
    /// Anything that went wrong after validation; exits with code 1.
    #[error("{0}")]
    Failure(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

macro_rules! failure_from {
    ($($ty:path),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Failure(e.to_string())
            }
        }
    )*};
}

failure_from!(
    dissim_core::grid::GridError,
    dissim_core::clg::ClgError,
    dissim_core::cid::CidError,
    dissim_core::qsim::QsimError,
    dissim_core::dtc::DtcError,
    dissim_core::transport::TransportError,
    dissim_core::fit::FitError
);

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}
