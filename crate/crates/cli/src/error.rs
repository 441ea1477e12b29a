use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] iet_renorm::Error),
    #[error("cannot read `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Failures of a hypothesis on the instance, as opposed to malformed input.
    pub fn is_hypothesis(&self) -> bool {
        use iet_renorm::Error as E;
        matches!(
            self,
            CliError::Core(
                E::NotAdmissible(_)
                    | E::Residual { .. }
                    | E::Decay(_)
                    | E::Boundary(_)
                    | E::Indeterminate(_)
                    | E::Connection { .. }
            )
        )
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_hypothesis() {
            2
        } else {
            1
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
