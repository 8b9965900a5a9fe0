use thiserror::Error;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 2,
    Numerical = 3,
    BlowUp = 4,
    Partial = 5,
    GateFailed = 6,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn label(self) -> &'static str {
        match self {
            ExitStatus::Success => "ok",
            ExitStatus::Usage => "usage_error",
            ExitStatus::Numerical => "numerical_failure",
            ExitStatus::BlowUp => "blow_up",
            ExitStatus::Partial => "partial_scattering",
            ExitStatus::GateFailed => "gate_failed",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Lib(#[from] nvlab::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        use nvlab::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => ExitStatus::Usage,
            CliError::Lib(e) => match e {
                E::Contract { .. } | E::NonConvergence { .. } | E::Degenerate(_) => {
                    ExitStatus::Numerical
                }
                E::PartialScattering { .. } => ExitStatus::Partial,
                E::InvalidGrid(_)
                | E::TagMismatch { .. }
                | E::GridMismatch(_)
                | E::Usage(_)
                | E::Band { .. }
                | E::Io(_)
                | E::Format(_) => ExitStatus::Usage,
            },
        }
    }
}
