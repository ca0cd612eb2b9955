use core::fmt;

/// Every failure the core library can report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    PrecisionExhausted,
    DivisionByZero,
    UnsupportedQ(u8),
    UnsupportedRamified,
    BothRamified,
    SplitInput,
    NotASquare,
    NormalizationFail,
    FactorFail,
    NoSolution,
    SingularBasis,
    SingularMap,
    UnstableBase,
    NotStable,
    NonFreeAction,
    WrongDimension { expected: usize, found: usize },
    WindowOverflow { needed: i64, cap: i64 },
    NotFound,
    Timeout,
    Unstable,
    MissingInput,
    NonMaximalOrder,
    Invalid(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::PrecisionExhausted => write!(f, "precision exhausted; rerun with a larger precision"),
            Error::DivisionByZero => write!(f, "division by exact zero"),
            Error::UnsupportedQ(q) => write!(f, "residue cardinality {q} is not supported (use 2,3,4,5,7,8,9)"),
            Error::UnsupportedRamified => write!(f, "ramified quadratic algebras need odd q"),
            Error::BothRamified => write!(f, "at least one of the two algebras must be unramified"),
            Error::SplitInput => write!(f, "split algebras are not accepted here"),
            Error::NotASquare => write!(f, "polynomial is not a square"),
            Error::NormalizationFail => write!(f, "no invariant normalization satisfies the symmetry"),
            Error::FactorFail => write!(f, "could not separate factors at this precision"),
            Error::NoSolution => write!(f, "linear system has no solution"),
            Error::SingularBasis => write!(f, "basis is singular"),
            Error::SingularMap => write!(f, "map is not bijective on the ambient spaces"),
            Error::UnstableBase => write!(f, "base lattice is not stable"),
            Error::NotStable => write!(f, "lattice is not stable under the required action"),
            Error::NonFreeAction => write!(f, "discrete centralizer subgroup does not act freely"),
            Error::WrongDimension { expected, found } => {
                write!(f, "expected dimension {expected}, found {found}")
            }
            Error::WindowOverflow { needed, cap } => {
                write!(f, "enumeration window {needed} exceeds cap {cap}")
            }
            Error::NotFound => write!(f, "search budget exhausted"),
            Error::Timeout => write!(f, "retry budget exhausted"),
            Error::Unstable => write!(f, "count did not stabilize; raise the truncation level"),
            Error::MissingInput => write!(f, "missing external input value"),
            Error::NonMaximalOrder => write!(f, "generator does not span the maximal order"),
            Error::Invalid(s) => write!(f, "invalid input: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
