use thiserror::Error;

use crate::extend::{IncompatibilityWitness, ViolationReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("self-loop at vertex `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}`-`{1}`")]
    DuplicateEdge(String, String),
    #[error("negative epsilon {0}")]
    NegativeEpsilon(f64),
    #[error("epsilon must be finite, got {0}")]
    NonFiniteEpsilon(f64),
    #[error("epsilon must be strictly positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("graph is disconnected: `{0}` is unreachable")]
    Disconnected(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("no value for vertex `{0}`")]
    MissingValue(String),
    #[error("alpha must be strictly positive")]
    ZeroAlpha,
    #[error("query value {0} is not 1 or 2")]
    InvalidQuery(i64),
    #[error("no query value for vertex `{0}`")]
    MissingQuery(String),
    #[error("seed set is empty")]
    EmptySeeds,
    #[error("boundary vertices not covered by the partial mechanism: {0:?}")]
    BoundaryNotCovered(Vec<String>),
    #[error("no epsilon-DP extension exists: {0}")]
    Incompatible(IncompatibilityWitness),
    #[error("no epsilon-DP extension exists: {0}")]
    NoDpCompletion(ViolationReport),
    #[error("graph has {vertices} vertices, enumeration cap is {cap}")]
    GraphTooLarge { vertices: usize, cap: usize },
    #[error("relaxation did not converge after {0} sweeps")]
    NonConvergence(usize),
    #[error("hypercube dimension must be odd for a majority query, got {0}")]
    EvenDimension(usize),
    #[error("hypercube dimension must be positive")]
    ZeroDimension,
    #[error("override names a non-edge `{0}`-`{1}`")]
    UnknownOverrideEdge(String, String),
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Field {
        path: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, path: impl Into<String>) -> Self {
        Error::Field {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// The underlying error with any field context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Field { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for the two ways an extension can be refused.
    pub fn is_no_extension(&self) -> bool {
        matches!(
            self.root(),
            Error::Incompatible(_) | Error::NoDpCompletion(_)
        )
    }
}
