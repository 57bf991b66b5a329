use harmonic_gasket::GasketError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] GasketError),

    #[error("{0}")]
    Usage(String),

    #[error("nothing to draw")]
    EmptyGeometry,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 2 usage or validation, 3 resource guard, 4 numerical failure, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::EmptyGeometry => 2,
            CliError::Io { .. } => 1,
            CliError::Library(e) => match e {
                GasketError::ResourceGuard { .. } | GasketError::DepthLimit { .. } => 3,
                GasketError::Numerical(_) | GasketError::RefineDepth { .. } => 4,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
