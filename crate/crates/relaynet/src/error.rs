use core::fmt;

/// Everything that can go wrong while building graphs, protocols or runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Bad arguments to a constructor (odd `n*d`, `n <= d`, ...).
    Parameter(&'static str),
    /// A randomized construction ran out of retries.
    Construction(&'static str),
    /// A graph that should be regular is not.
    NotRegular { vertex: usize, degree: usize, expected: usize },
    /// A self-loop was supplied without permission.
    SelfLoop { vertex: usize },
    /// An edge names a vertex outside `0..n`.
    VertexRange { vertex: usize, n: usize },
    /// The inner graph has fewer vertices than the outer degree.
    InsufficientPorts { needed: usize, available: usize },
    /// The inner graph is larger than the configured multiple of the outer degree.
    CloudTooLarge { size: usize, limit: usize },
    /// A structure failed an internal consistency check.
    Invariant(&'static str),
    /// A mapping that should be a bijection is not.
    NotPermutation,
    /// Sizes of two objects that must agree do not.
    Mismatch(&'static str),
    /// The graph is disconnected where connectivity is required.
    Disconnected,
    /// A flooding walk is shorter than the graph diameter.
    WalkTooShort { rounds: u32, diameter: u32 },
    /// An enumeration would exceed its budget; nothing was produced.
    Budget { required: u128, budget: u128 },
    /// Unknown strategy or behavior name.
    Unknown(&'static str),
    /// A level of an iterated construction failed; carries the level index.
    Level { level: usize, source: alloc::boxed::Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(s) => write!(f, "bad parameter: {s}"),
            Error::Construction(s) => write!(f, "construction failed: {s}"),
            Error::NotRegular { vertex, degree, expected } => {
                write!(f, "vertex {vertex} has degree {degree}, expected {expected}")
            }
            Error::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
            Error::VertexRange { vertex, n } => write!(f, "vertex {vertex} out of range 0..{n}"),
            Error::InsufficientPorts { needed, available } => {
                write!(f, "need {needed} port vertices per cloud, inner graph has {available}")
            }
            Error::CloudTooLarge { size, limit } => {
                write!(f, "inner graph has {size} vertices, limit is {limit}")
            }
            Error::Invariant(s) => write!(f, "invariant violated: {s}"),
            Error::NotPermutation => write!(f, "mapping is not a bijection"),
            Error::Mismatch(s) => write!(f, "size mismatch: {s}"),
            Error::Disconnected => write!(f, "graph is disconnected"),
            Error::WalkTooShort { rounds, diameter } => {
                write!(f, "{rounds} rounds cannot cover diameter {diameter}")
            }
            Error::Budget { required, budget } => {
                write!(f, "enumeration needs {required} items, budget is {budget}")
            }
            Error::Unknown(s) => write!(f, "unknown name: {s}"),
            Error::Level { level, source } => write!(f, "level {level}: {source}"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
