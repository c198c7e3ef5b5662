use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-integrable Laurent term: exponent -1 in {var}")]
    NonIntegrable { var: String },
    #[error("negative exponent for non-Laurent variable {var}")]
    NegativeExponent { var: String },
    #[error("series did not nilpotate within {iterations} iterations")]
    SeriesDidNotNilpotate { iterations: usize },
    #[error("kernel precondition violated: {0}")]
    KernelPrecondition(String),
    #[error("right inverse check failed: {0}")]
    RightInverse(String),
    #[error("not a flag system: {0}")]
    NotFlagSystem(String),
    #[error("coefficient not flag-compatible: {0}")]
    NotFlagCompatible(String),
    #[error("hypotheses of the power perturbation solver violated: {0}")]
    PerturbationHypotheses(String),
    #[error("σ-chain inconsistent: {0}")]
    SigmaChain(String),
    #[error("degenerate dissipation: a must be nonzero")]
    DegenerateDissipation,
    #[error("use plain wave module: lambda must be nonzero")]
    UsePlainWave,
    #[error("input not a reduced-equation solution: {0}")]
    NotReducedSolution(String),
    #[error("degenerate frequency: a must be nonzero")]
    DegenerateFrequency,
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("splitting mismatch at monomial {monomial}, t^{t_power}")]
    SplittingMismatch { monomial: String, t_power: u32 },
    #[error("Y-series not converging: {0}")]
    YSeriesNotConverging(String),
    #[error("exact path requires finite Fourier data: {0}")]
    NonFiniteData(String),
    #[error("not singular: {generator} gives {residual}")]
    NotSingular { generator: String, residual: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}
