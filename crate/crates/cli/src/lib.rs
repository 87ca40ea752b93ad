//! Experiment harness behind the `gsp` binary.
//!
//! The binary is a thin argument layer; everything it computes lives here so
//! the same entry points drive the acceptance suite.

pub mod experiments;
pub mod specparse;

use gsp_core::Error;

/// Process exit codes: 0 success, 1 usage, 2 numerical failure, 3 io.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::SchemaMismatch(_) | Error::MalformedTable(_) => 3,
        Error::InvalidPlan { .. }
        | Error::InvalidSupport { .. }
        | Error::InvalidModel(_)
        | Error::IndexOutOfRange { .. }
        | Error::DimensionMismatch { .. } => 1,
        _ => 2,
    }
}
