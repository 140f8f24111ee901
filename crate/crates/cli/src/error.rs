use thiserror::Error;

/// Failures split by exit code: input problems exit 1, failed checks
/// exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn context(self, prefix: &str) -> Self {
        match self {
            Self::Input(m) => Self::Input(format!("{prefix}: {m}")),
            Self::Failed(m) => Self::Failed(format!("{prefix}: {m}")),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 1,
            Self::Failed(_) => 2,
        }
    }
}

impl From<rankcomplex::Error> for CliError {
    fn from(e: rankcomplex::Error) -> Self {
        use rankcomplex::Error as E;
        match e {
            E::ZeroModeObstruction { .. } | E::Ellipticity { .. } => Self::Failed(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}
