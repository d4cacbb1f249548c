use std::path::PathBuf;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("graph has no edges; {0} is undefined")]
    DegenerateGraph(&'static str),

    #[error("class {class} has no labelled members")]
    EmptyClass { class: usize },

    #[error("label {label} outside [-1, {k})")]
    InvalidLabel { label: i32, k: usize },

    #[error("k-means needs at least {k} points, got {n}")]
    InsufficientPoints { n: usize, k: usize },

    #[error("LDA fit needs at least two classes, found {classes}")]
    DegenerateFit { classes: usize },

    #[error("{0}: no input rows")]
    EmptyInput(&'static str),

    #[error("{0}: node mask is empty")]
    EmptyMask(&'static str),

    #[error("masked label at node {node} where a known label is required")]
    MaskedLabel { node: usize },

    #[error("class {class} has {size} members; splits need at least 3 (2 train + 1 val)")]
    InfeasibleSplit { class: usize, size: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} items, got {got}")]
    TooFewItems { needed: usize, got: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("label file has {labels} entries but the graph has {nodes} nodes")]
    SizeMismatch { labels: usize, nodes: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{method}: {source}")]
    Method {
        method: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn shape(context: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::Shape {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_method(self, method: &'static str) -> Self {
        Error::Method {
            method,
            source: Box::new(self),
        }
    }
}
