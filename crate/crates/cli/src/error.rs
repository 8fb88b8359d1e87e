use std::path::PathBuf;

use fbgforce::pipeline::StageError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// Failure while loading an input file.
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: fbgforce::Error,
    },

    #[error(transparent)]
    Core(#[from] fbgforce::Error),

    #[error(transparent)]
    Stage(#[from] StageError),

    #[error("writing {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Outputs were written but the separation did not converge.
    #[error("{0}")]
    NotConverged(String),
}

/// 0 success, 1 computation, 2 usage or configuration, 3 I/O.
fn core_code(e: &fbgforce::Error) -> u8 {
    use fbgforce::Error as E;
    match e {
        E::Io(_) | E::Parse { .. } => 3,
        E::Config(_) | E::InvalidInput(_) | E::Json(_) => 2,
        _ => 1,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            // a referenced file that does not exist is a usage problem
            CliError::Input {
                source: fbgforce::Error::Io(io),
                ..
            } if io.kind() == std::io::ErrorKind::NotFound => 2,
            CliError::Input { source, .. } => core_code(source),
            CliError::Core(e) => core_code(e),
            CliError::Stage(e) => core_code(&e.source),
            CliError::Write { .. } => 3,
            CliError::NotConverged(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
