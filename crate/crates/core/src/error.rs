use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LandauError {
    #[error("unsupported half-dimension n = {0} (planar numerics need n = 1)")]
    UnsupportedDimension(u32),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid not calibrated: {0}")]
    Uncalibrated(String),
    #[error("calibration needs {needed} points, budget is {budget}")]
    MemoryBudget { needed: usize, budget: usize },
    #[error("energy {0} lies on the unperturbed spectrum")]
    OnSpectrum(f64),
    #[error("mu = {re} + {im}i lies on the branch cut [0, inf)")]
    BranchCut { re: f64, im: f64 },
    #[error("tail bound {tail:.3e} too large relative to value {value:.3e}")]
    TailBound { tail: f64, value: f64 },
    #[error("Galerkin dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("eigensolver failure: {0}")]
    EigenSolver(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("tau = {tau} is resonant: dist(tau^2, 2N+n) = {dist} < 1/2")]
    Resonant { tau: f64, dist: f64 },
    #[error("boundary leak: ring mass {0:.3e} exceeds tolerance")]
    BoundaryLeak(f64),
    #[error("smallness gate failed: |||V|^(1/2) R0 V^(1/2)|| = {0}")]
    GateFailed(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, LandauError>;
