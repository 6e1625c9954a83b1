use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid vertex index {0}")]
    InvalidVertex(usize),
    #[error("non-finite coordinate at vertex {0}")]
    NonFinite(usize),
    #[error("duplicate coordinates at vertices {0} and {1}")]
    DuplicatePoint(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("epsilon {0} outside (0,1)")]
    EpsilonOutOfRange(f64),
    #[error("vertex count {n} exceeds cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least {0} points")]
    TooFewPoints(usize),
    #[error("spread {0:e} exceeds guard")]
    SpreadGuard(f64),
    #[error("points too close for fixed-point quadtree resolution")]
    Resolution,
    #[error("cell is not aligned to the root square")]
    MisalignedCell,
    #[error("operation undefined on the root cell")]
    RootCell,
    #[error("pair is not separated enough: {0}")]
    InsufficientSeparation(String),
    #[error("vertex {vertex} is not a center at level {level}")]
    NotACenter { vertex: usize, level: i32 },
    #[error("level {0} outside the tree's level range")]
    LevelOutOfRange(i64),
    #[error("depth {0} out of range")]
    DepthOutOfRange(usize),
    #[error("query on identical vertices")]
    SameVertex,
    #[error("vertices {0} and {1} lie in different components")]
    CrossComponent(usize, usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
