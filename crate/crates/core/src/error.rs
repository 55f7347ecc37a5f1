use thiserror::Error;

/// Errors raised by the algebra, automaton and synthesis layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus {modulus:#x} is not an irreducible polynomial of degree {m} over GF(2)")]
    ReducibleModulus { m: u32, modulus: u32 },
    #[error("extension degree {0} not supported (1 <= m <= 8)")]
    UnsupportedDegree(u32),
    #[error("field element {bits} out of range for GF({q})")]
    ElementOutOfRange { bits: u32, q: usize },
    #[error("operands live in different fields")]
    ContextMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown field element token `{0}`")]
    BadToken(String),

    #[error("series is not a Nottingham element (needs t + O(t^2)): {0}")]
    NotNottingham(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("non-contractive fixed-point equation: {0}")]
    NonContractive(String),

    #[error("group closure exceeded {0} elements")]
    ClosureTooLarge(usize),
    #[error("unsupported group for classification: {0}")]
    UnsupportedGroup(String),

    #[error("invalid tower: {0}")]
    InvalidTower(String),
    #[error("tower invariant failed: {0}")]
    TowerInvariant(String),

    #[error("no annihilator with deg_X <= {dx}, deg_t <= {dt} at precision {n}")]
    NoAnnihilator { dx: u32, dt: u32, n: usize },
    #[error("polynomial parse error: {0}")]
    PolyParse(String),

    #[error("malformed automaton table: {0}")]
    MalformedTable(String),
    #[error("state {state} has {found} outgoing edges, expected {expected}")]
    Outdegree { state: usize, found: usize, expected: usize },
    #[error("zero-edge rule violated: state {from} (label {from_label}) -> state {to} (label {to_label})")]
    ZeroEdgeRule { from: usize, to: usize, from_label: String, to_label: String },
    #[error("edge target {target} out of range ({states} states)")]
    BadTarget { target: usize, states: usize },
    #[error("json: {0}")]
    Json(String),

    #[error("polynomial is singular at the origin")]
    Singular,
    #[error("diagonal representation does not reproduce the series root: first mismatch at index {0}")]
    DiagonalMismatch(usize),
    #[error("state bound not stable under the section operators: {0}")]
    UnstableBound(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("state budget of {0} exceeded")]
    StateBudget(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
