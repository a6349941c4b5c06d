use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("cycle detected through category `{0}`")]
    Cycle(String),

    #[error("multiple root categories: {}", .0.join(", "))]
    MultipleRoots(Vec<String>),

    #[error("taxonomy has no root category")]
    NoRoot,

    #[error("category `{category}` names unknown parent `{parent}`")]
    UnknownParent { category: String, parent: String },

    #[error("concept `{concept}` links to missing category `{category}`")]
    DanglingConceptLink { concept: String, category: String },

    #[error("concept `{0}` has an empty label set")]
    EmptyLabels(String),

    #[error("concept `{0}` is linked to no category")]
    NoCategories(String),

    #[error("taxonomy has no concepts")]
    NoConcepts,

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("unknown concept `{0}`")]
    UnknownConcept(String),

    #[error("empty vector: document cannot be categorized")]
    EmptyVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("no eligible documents for class `{0}`")]
    NoEligibleDocuments(String),

    #[error("ensemble member {index}: {source}")]
    Member {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("document `{0}` has no label")]
    MissingLabel(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input")]
    EmptyInput,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid model file: {0}")]
    Model(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Wraps the error with a short provenance string.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by the run configuration rather than the data.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Config(_) | Error::InvalidArgument(_) => true,
            Error::Context { source, .. } | Error::Member { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
