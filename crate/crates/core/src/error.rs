use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("element is not hyperbolic (trace {trace})")]
    NotHyperbolic { trace: f64 },
    #[error("no real trace z solves the cusp equation for x = {x}, y = {y}")]
    NoRealSolution { x: f64, y: f64 },
    #[error("trace {trace} has absolute value at most 2")]
    DegenerateTrace { trace: f64 },
    #[error("point ({u}, {v}) is not in the upper half-plane")]
    OutsideHalfPlane { u: f64, v: f64 },
    #[error("reduction did not terminate within {cap} steps")]
    NonTermination { cap: usize },
    #[error("serialized z = {found} disagrees with recomputed z = {expected}")]
    InconsistentTraces { expected: f64, found: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no certified reduction domain for x = {x}, y = {y} (traces too large)")]
    UncertifiedDomain { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WordError {
    #[error("word reduces to the identity")]
    TrivialWord,
    #[error("invalid letter {0:?}; expected one of a, A, b, B")]
    InvalidLetter(char),
    #[error("slope ({p}, {q}) is not a normalized coprime pair")]
    InvalidSlope { p: i64, q: i64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CensusError {
    #[error("no curve has length at most {cutoff}")]
    CutoffTooSmall { cutoff: f64 },
    #[error("seed {0} is peripheral")]
    SeedPeripheral(String),
    #[error("visited set exceeded the cap of {cap} classes")]
    BudgetExceeded { cap: usize },
    #[error("trace growth not monotone in the Farey tree at slope {p}/{q}")]
    NonMonotoneTrace { p: i64, q: i64 },
    #[error("seed length {seed_length} is not below the cutoff {cutoff}")]
    CutoffBelowSeed { seed_length: f64, cutoff: f64 },
    #[error("invalid cutoff {0}")]
    InvalidCutoff(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("grid point {point} exceeds census cutoff {cutoff}")]
    GridExceedsCutoff { point: f64, cutoff: f64 },
    #[error("need at least {needed} grid points with N > 0 in the window, found {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("census is empty at L = {0}")]
    EmptyCensus(f64),
    #[error(transparent)]
    Census(#[from] CensusError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error("histograms have different binning specs")]
    BinningMismatch,
    #[error("step {0} outside (0, 0.1]")]
    InvalidStep(f64),
    #[error("invalid binning: {0}")]
    InvalidBinning(String),
    #[error("histogram has no mass")]
    EmptyHistogram,
    #[error("closed geodesic of {0} does not cross the ideal domain as its word predicts")]
    DomainMiss(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompareError {
    #[error("class {0} is peripheral on the target structure")]
    PeripheralOnTarget(String),
    #[error("census is empty")]
    EmptyCensus,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("unknown profile {0:?}; available: desk")]
    UnknownProfile(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Compare(#[from] CompareError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Word(#[from] WordError),
}
