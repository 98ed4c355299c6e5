use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("universe must have at least one element")]
    EmptyUniverse,
    #[error("universe labels must be distinct (duplicate `{0}`)")]
    DuplicateLabel(String),
    #[error("universe `{0}` has no element `{1}`")]
    UnknownElement(String, String),
    #[error("element index {index} out of range for universe of size {size}")]
    ElementOutOfRange { index: usize, size: usize },
    #[error("rank {rank} out of range (space has {space} tuples)")]
    RankOutOfRange { rank: usize, space: usize },
    #[error("index map refers to position {index} but the tuple has arity {arity}")]
    MapOutOfRange { index: usize, arity: usize },
    #[error("no Skolem binding for indeterminate {0}")]
    MissingBinding(usize),
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("arity must be positive")]
    ZeroArity,
    #[error("operands live over different universes (`{0}` vs `{1}`)")]
    UniverseMismatch(String, String),
    #[error("function table has {found} entries, expected {expected}")]
    TableLength { expected: usize, found: usize },
    #[error("value set {value:#b} mentions elements outside a codomain of size {size}")]
    ValueOutOfRange { value: u64, size: usize },
    #[error("codomain of size {0} exceeds the supported maximum of 64")]
    CodomainTooLarge(usize),
    #[error("{what} of {count} exceeds the budget of {budget}")]
    BudgetExceeded { what: &'static str, count: u128, budget: u128 },
    #[error("arity {arity} exceeds the cap {cap}")]
    ArityCap { arity: usize, cap: usize },
    #[error("scheme is malformed: {0}")]
    MalformedScheme(String),
    #[error("family has {found} members but the scheme has {expected} sources")]
    FamilySize { expected: usize, found: usize },
    #[error("weak conjunctive minors require a scheme without indeterminates")]
    NotSimple,
    #[error("bounds are invalid: {0}")]
    InvalidBounds(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no separating object exists: {0}")]
    Inside(String),
    #[error("separating function is not partial: {0}")]
    PartialityViolated(String),
}
