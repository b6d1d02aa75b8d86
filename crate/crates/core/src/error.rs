use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("alphabet has {0} letters, above the supported maximum of {max}", max = crate::monoid::MAX_LETTERS)]
    AlphabetTooLarge(usize),
    #[error("letter `{0}` is declared twice")]
    DuplicateLetter(String),
    #[error("independence pair mentions unknown letter `{0}`")]
    UnknownLetterInPair(String),
    #[error("independence pair ({0},{0}) is reflexive")]
    ReflexivePair(String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state list is empty")]
    NoStates,
    #[error("state `{0}` is declared twice")]
    DuplicateState(String),
    #[error("`{0}` is reserved for the sink and cannot name a state")]
    ReservedStateName(String),
    #[error("action does not commute at state `{state}` for independent letters `{a}` and `{b}`")]
    DiamondViolation { state: String, a: String, b: String },

    #[error("system is not accessible")]
    NotAccessible,
    #[error("system is trivial (no state enables any letter)")]
    TrivialSystem,
    #[error("determinant of the Möbius matrix has no root in (0,1]")]
    NoRootInUnitInterval,
    #[error("growth matrix is singular or divergent at t = {0}")]
    SingularAtT(String),
    #[error("power iteration did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("component {component} has radius {radius} inside the tolerance band around {global}")]
    AmbiguousBasic { component: usize, radius: f64, global: f64 },

    #[error("kernel of μ(r) has dimension {0}, expected 1")]
    KernelDimensionNotOne(usize),
    #[error("kernel vector of μ(r) is not strictly positive")]
    NonPositiveKernelVector,
    #[error("Parry cocycle cross-check failed: Γ({from},{to}) = {kernel} vs growth ratio {series}")]
    CrossCheckFailure {
        from: String,
        to: String,
        kernel: f64,
        series: f64,
    },
    #[error("graph and numeric null-node classifications disagree on {0:?}")]
    ClassificationMismatch(Vec<String>),
    #[error("system is not irreducible; the uniform measure is not unique")]
    NotIrreducible,

    #[error("no execution of length {0} from the requested state")]
    EmptySet(usize),
    #[error("length {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("marking {marking} is not 1-bounded after firing `{transition}`")]
    NotOneBounded { marking: String, transition: String },
    #[error("reachable marking count exceeds the cap of {0}")]
    StateExplosion(usize),
}

impl Error {
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            e @ (Error::Syntax { .. } | Error::AtLine { .. }) => e,
            e => Error::AtLine {
                line,
                source: Box::new(e),
            },
        }
    }
}
