use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// [`Error::is_validation`] separates malformed inputs (grammar, config,
/// data files) from failures during computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unbound input variable `{0}`")]
    UnboundVariable(String),
    #[error("builtin `{builtin}` at node {node}: {message}")]
    TypeMismatch {
        builtin: String,
        node: String,
        message: String,
    },
    #[error("integer overflow in `{builtin}` at node {node}")]
    Overflow { builtin: String, node: String },
    #[error("example {index}: {source}")]
    AtExample {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid grammar: {0}")]
    Grammar(String),
    #[error("program does not conform to the grammar: {0}")]
    Nonconforming(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("expected a string value, found {0}")]
    NotAString(String),
    #[error("program height {height} exceeds the prior's bound {bound}")]
    HeightExceeded { height: usize, bound: usize },
    #[error("{what} exceeds the cap of {cap}")]
    CapExceeded { what: String, cap: u128 },
    #[error("the automaton has no accepting states")]
    EmptyFta,
    #[error("state {0} is not accepting")]
    NotAccepting(usize),
    #[error("state {0} accepts no program within the height bound")]
    Unreachable(usize),
    #[error("observed outputs have zero probability under every output class")]
    ZeroMass,
    #[error("cannot parse program `{input}`: {message}")]
    ProgramParse { input: String, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by malformed user-supplied inputs.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Grammar(_)
                | Error::Config(_)
                | Error::ProgramParse { .. }
                | Error::Io { .. }
                | Error::Json(_)
                | Error::Csv(_)
        )
    }

    /// True when a program left the value domain (overflow, ill-typed
    /// builtin application). Such programs are pruned, not fatal.
    pub fn is_domain_failure(&self) -> bool {
        match self {
            Error::Overflow { .. } | Error::TypeMismatch { .. } => true,
            Error::AtExample { source, .. } => source.is_domain_failure(),
            _ => false,
        }
    }

    pub(crate) fn at_example(self, index: usize) -> Error {
        Error::AtExample {
            index,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
