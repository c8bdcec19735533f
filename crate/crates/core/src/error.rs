use std::path::PathBuf;

use thiserror::Error;

/// Why a regulator could not lock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoLockReason {
    /// Zero-bias silicon is already slower than the target.
    Unreachable,
    /// The iteration budget ran out before the lock streak completed.
    BudgetExhausted,
}

impl std::fmt::Display for NoLockReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoLockReason::Unreachable => write!(f, "target unreachable at zero bias"),
            NoLockReason::BudgetExhausted => write!(f, "iteration budget exhausted"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {detail}")]
    InvalidInput { what: &'static str, detail: String },

    #[error("non-functional: vdd {vdd:.4} V <= effective threshold {vth:.4} V")]
    NonFunctional { vdd: f64, vth: f64 },

    #[error("calibration infeasible at anchor `{anchor}`: {detail}")]
    CalibrationInfeasible { anchor: String, detail: String },

    #[error("ABB regulator did not lock at {target_hz:.0} Hz: {reason}")]
    NoLock {
        target_hz: f64,
        reason: NoLockReason,
    },

    #[error("illegal SRAM transition {from} -> {to}")]
    IllegalTransition { from: String, to: String },

    #[error("wake-up stage peak {peak_a:.3e} A exceeds current limit {limit_a:.3e} A")]
    CurrentBudgetInfeasible { peak_a: f64, limit_a: f64 },

    #[error("singular activity system: {0}")]
    SingularSystem(String),

    #[error("malformed trace at line {line}: {detail}")]
    MalformedTrace { line: usize, detail: String },

    #[error("address {address:#x} outside the 32 KiB bank")]
    AddressOutOfRange { address: u32 },

    #[error("config error at line {line}: {detail}")]
    Config { line: usize, detail: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidInput {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn infeasible(anchor: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::CalibrationInfeasible {
            anchor: anchor.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that come from the model itself rather than from usage or I/O.
    pub fn is_model_error(&self) -> bool {
        matches!(
            self,
            Error::NonFunctional { .. }
                | Error::CalibrationInfeasible { .. }
                | Error::NoLock { .. }
                | Error::IllegalTransition { .. }
                | Error::CurrentBudgetInfeasible { .. }
                | Error::SingularSystem(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
