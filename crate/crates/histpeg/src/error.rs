use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate. Pure algebra on valid
/// inputs never fails; errors are confined to construction, conditioning
/// on (near-)zero pegs, and file ingestion.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subsystem dims must be non-empty positive integers, got {dims:?}")]
    BadSubsystemDims { dims: Vec<usize> },
    #[error("slot {slot} out of range for {n_slots} slots")]
    SlotOutOfRange { slot: usize, n_slots: usize },
    #[error("rank {rank} out of range for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },
    #[error("slot dimensions must all be equal, got {dims:?}")]
    UnequalSlotDims { dims: Vec<usize> },
    #[error("not a projector: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotAProjector { residual: f64, tol: f64 },
    #[error("not unitary: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },
    #[error("not a density operator: {reason}")]
    NotADensity { reason: String },
    #[error("history must contain at least one step")]
    EmptyHistory,
    #[error("time labels must be strictly increasing: {prev} then {next}")]
    NonIncreasingTimes { prev: f64, next: f64 },
    #[error("dynamics supplies {got} step propagators, {expected} needed")]
    StepCountMismatch { expected: usize, got: usize },
    #[error("history does not share the scenario's base dimension and time grid")]
    GridMismatch,
    #[error("conditioning peg has magnitude {magnitude:.3e}, below cutoff {cutoff:.3e}")]
    ZeroPegConditioning { magnitude: f64, cutoff: f64 },
    #[error("group {group} carries a peg of magnitude {magnitude:.3e}, below cutoff")]
    ZeroGroupPeg { group: usize, magnitude: f64 },
    #[error("reconstruction system is singular: {detail}")]
    SingularSystem { detail: String },
    #[error("operator violates the unit-trace condition: |tr - 1| = {residual:.3e}")]
    TraceCondition { residual: f64 },
    #[error("operator violates the reversal-symmetry condition: residual {residual:.3e}")]
    ReversalCondition { residual: f64 },
    #[error("family is not complete: deficit {deficit:.3e}")]
    IncompleteFamily { deficit: f64 },
    #[error("grouping must cover groups 0..{n_groups}, group {missing} is empty")]
    EmptyGroup { n_groups: usize, missing: usize },
    #[error("grouping assigns {got} elements, distribution has {expected}")]
    GroupingLengthMismatch { expected: usize, got: usize },
    #[error("scenario error at {context}: {message}")]
    Scenario { context: String, message: String },
    #[error("cannot parse scenario (line {line}, column {column}): {message}")]
    ScenarioParse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown order {0:?}, expected \"flux\" or \"real-total\"")]
    UnknownOrder(String),
    #[error("monotonicity audit precondition failed: pair {index} is not ordered")]
    UnorderedPair { index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
