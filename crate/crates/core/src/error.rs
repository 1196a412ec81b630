use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("schema violation in {record}, field `{field}`: {message}")]
    SchemaViolation {
        record: String,
        field: String,
        message: String,
    },

    #[error("invariant violation in {record}, field `{field}`: {message}")]
    InvariantViolation {
        record: String,
        field: String,
        message: String,
    },

    /// An argument or configuration value lies outside its allowed range.
    #[error("`{field}` out of range: {message}")]
    Domain { field: String, message: String },

    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),

    #[error("unknown query id `{0}`")]
    UnknownQueryId(String),

    #[error("unresolved placeholder `{{{{{placeholder}}}}}` in query `{query_id}`")]
    UnresolvedPlaceholder {
        query_id: String,
        placeholder: String,
    },

    #[error("store references query ids missing from the registry: {0:?}")]
    StoreRegistryMismatch(Vec<String>),

    #[error("corrupt store: {0}")]
    CorruptStore(String),

    #[error("failed to bind {addr}: {source}")]
    BindFailure {
        addr: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("http client: {0}")]
    Http(String),
}

impl Error {
    pub(crate) fn domain(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Domain {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn schema(
        record: impl Into<String>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::SchemaViolation {
            record: record.into(),
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invariant(
        record: impl Into<String>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::InvariantViolation {
            record: record.into(),
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad input (flags, config values, dataset contents)
    /// rather than by the environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MissingFile(_)
                | Error::SchemaViolation { .. }
                | Error::InvariantViolation { .. }
                | Error::Domain { .. }
                | Error::UnknownQueryId(_)
                | Error::UnresolvedPlaceholder { .. }
                | Error::StoreRegistryMismatch(_)
        )
    }
}
