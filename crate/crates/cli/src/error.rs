use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_VIOLATED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration; `path` locates the offending entry (`options.run.resolution`).
    #[error("{path}: {message}")]
    Validation { path: String, message: String },

    #[error("{context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: cornerlab::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation { path: path.into(), message: message.into() }
    }

    /// Sorts a core error into validation or numeric failure, tagged with the config section.
    pub fn core(context: impl Into<String>, e: cornerlab::Error) -> Self {
        use cornerlab::Error as E;
        let context = context.into();
        match e {
            E::UnknownFamily(_) | E::InvalidParameter(_) | E::Invalid(_) | E::FaceMismatch(_) | E::Json(_) => {
                CliError::Validation { path: context, message: e.to_string() }
            }
            other => CliError::Numeric { context, source: other },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => EXIT_VALIDATION,
            _ => EXIT_NUMERIC,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// `.ctx("metric")` on core results.
pub trait Context<T> {
    fn ctx(self, context: &str) -> CliResult<T>;
}

impl<T> Context<T> for cornerlab::Result<T> {
    fn ctx(self, context: &str) -> CliResult<T> {
        self.map_err(|e| CliError::core(context, e))
    }
}
