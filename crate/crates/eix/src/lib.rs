//! File formats, timed benchmark runs, parameter sweeps and the `eix`
//! command-line tool built on [`eix_core`].

pub mod atomic;
pub mod config;
pub mod csvio;
pub mod error;
pub mod rules;
pub mod run;
pub mod snapshot;
pub mod sweep;

pub use error::{Error, Result};

impl Error {
    /// Process exit status for this error: `3` for bad input data, `2` for
    /// everything else (configuration, IO, snapshots).
    pub fn exit_code(&self) -> i32 {
        use eix_core::Error as Core;
        match self {
            Error::Data { .. } => 3,
            Error::Model(
                Core::DimensionMismatch { .. }
                | Core::EmptyInstance
                | Core::RejectedInstance { .. }
                | Core::Unlabeled { .. },
            ) => 3,
            _ => 2,
        }
    }
}
