//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A domain object failed its construction invariants.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// A CSV file failed to parse or violated an invariant. `line` is the
    /// 1-based line number in the file (the header is line 1).
    #[error("{}:{line}: {reason}", path.display())]
    Csv {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Schedule and price scenario horizons disagree.
    #[error("schedule has {powers} intervals but the price scenario has {prices}")]
    HorizonMismatch { powers: usize, prices: usize },

    /// The objective returned a non-finite value at a finite-difference
    /// probe point.
    #[error("objective is not finite at the finite-difference probe for coordinate {coordinate}")]
    NonFiniteProbe { coordinate: usize },

    /// Every optimizer restart tripped the divergence guard.
    #[error("all {} restarts diverged: {}", reports.len(), reports.join("; "))]
    AllRestartsDiverged { reports: Vec<String> },

    /// Covariance factorization failed even after jitter escalation.
    #[error("covariance factorization failed after {attempts} jitter escalations (final jitter {final_jitter:.3e})")]
    Factorization { attempts: usize, final_jitter: f64 },

    /// Polynomial least-squares design matrix is rank deficient.
    #[error("rank-deficient polynomial fit: degree {degree} over {points} points")]
    RankDeficient { degree: usize, points: usize },

    /// Run configuration violated one or more constraints. Every violation
    /// is listed, not just the first.
    #[error("invalid configuration: {}", violations.join("; "))]
    Config { violations: Vec<String> },
}

impl Error {
    pub fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub fn csv(path: impl Into<PathBuf>, line: usize, reason: impl Into<String>) -> Self {
        Error::Csv {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }
}
