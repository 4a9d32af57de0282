use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument or parameter lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Power-law intensity evaluated at t = 0 with shape < 1.
    #[error("intensity is singular at t = 0 for shape {shape} < 1")]
    Singularity { shape: f64 },

    #[error("component `{id}`: {source}")]
    Component {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "literal-sum combination yields {value}, which is not a probability; \
         refusing to multiply it into the system reliability without an explicit override"
    )]
    LiteralSumRefused { value: f64 },

    #[error("no state supplied for component `{0}`")]
    MissingState(String),

    #[error("invalid structure: {0}")]
    Structure(String),

    #[error("{path}: {message}")]
    Document { path: String, message: String },

    #[error("line {line}: {message}")]
    Catalog { line: u64, message: String },

    #[error("catalog entry `{id}`: {message}")]
    CatalogEntry { id: String, message: String },

    #[error("no catalog candidates for module kind(s): {}", .0.join(", "))]
    MissingModules(Vec<String>),

    #[error("schema: {0}")]
    Schema(String),

    #[error("records: {0}")]
    Records(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn with_component(self, id: &str) -> Self {
        match self {
            // keep the innermost id when nesting
            e @ Error::Component { .. } => e,
            other => Error::Component {
                id: id.to_owned(),
                source: Box::new(other),
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures to read or write files, as opposed to invalid content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
