use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters a = {a}, h = {h}: need a >= 1 and h > 2")]
    InvalidParameters { a: u64, h: f64 },
    #[error("fixed point for log(lambda) did not converge (a = {a}, h = {h})")]
    LambdaNonConvergence { a: u64, h: f64 },
    #[error("{0} lies on a slit below a ramification point")]
    OnSlit(Complex64),
    #[error("{0} is a ramification point of the surface")]
    AtRamification(Complex64),
    #[error("{0} is outside the domain of the base branch")]
    OutsideDomain(Complex64),
    #[error("preimage of {value} is not on the base sheet (level {level})")]
    NotOnBaseSheet { value: Complex64, level: f64 },
    #[error("preimage of {0} is below the representable range (needle point)")]
    Underflow(Complex64),
    #[error("Newton inversion of {0} diverged")]
    NewtonDivergence(Complex64),
    #[error("path enters the removed disk of radius {epsilon} around a ramification point")]
    PathHitsRamification { epsilon: f64 },
    #[error("path crosses the lower cut Im = {y_cut}")]
    LeftDomain { y_cut: f64 },
    #[error("continuation step underflow near a ramification point")]
    StepUnderflow,
    #[error("sheet level {level} exceeds the crossing budget {budget}")]
    SheetBudgetExceeded { level: i64, budget: u32 },
    #[error("time {0} is not in the time set A_(0,{1})")]
    IllegalTime(String, usize),
    #[error("orbit leaves the domain of definition: {0}")]
    OrbitHitsExclusion(String),
    #[error("ledger has {available} chosen stages, {needed} needed")]
    DepthUnavailable { needed: usize, available: usize },
    #[error("no bracket for the level-curve solver: {0}")]
    BracketFailure(String),
    #[error("theta {0} is not realizable at the available depth")]
    UnrealizableTheta(String),
    #[error("integer overflow in chart anchors")]
    AnchorOverflow,
    #[error("{count} points requested, limit is {limit}")]
    TooManyPoints { count: String, limit: usize },
    #[error("stage {stage}: no a_n up to the cap {a_cap} passes {failing:?}")]
    SearchExhausted { stage: usize, a_cap: u64, failing: Vec<String> },
    #[error("sample grids do not match")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
