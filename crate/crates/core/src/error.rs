use thiserror::Error;

pub type Result<T> = std::result::Result<T, SkewError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SkewError {
    #[error("symbol index {index} lies outside the stored window and the tail is unspecified")]
    OutOfWindow { index: i64 },

    #[error("alphabet size mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("symbol {symbol} is not in the alphabet of size {k}")]
    InvalidSymbol { symbol: u8, k: usize },

    #[error("point {x} is outside the unit interval")]
    Domain { x: f64 },

    #[error("value {y} lies outside the image [{lo}, {hi}]")]
    OutsideImage { y: f64, lo: f64, hi: f64 },

    #[error("operation requires a step system")]
    NonStepSystem,

    #[error("map is not increasing: derivative {derivative} at x = {x}")]
    NotMonotone { x: f64, derivative: f64 },

    #[error("map does not send [0, 1] strictly into itself: f({x}) = {value}")]
    NotIntoInterval { x: f64, value: f64 },

    #[error("fiber not classified after depth {depth}; last width {last_width}")]
    Indeterminate { depth: usize, last_width: f64 },

    #[error("fiber is a bone; pointwise residual is undefined")]
    BoneFiber,

    #[error("measure is not normalized: total weight {total}")]
    NotNormalized { total: f64 },

    #[error("iteration did not converge after {iterations} steps (last change {last_change})")]
    MaxIterations { iterations: usize, last_change: f64 },

    #[error("no witness within depth budget {budget}; best distance {best_distance}")]
    WitnessNotFound { budget: usize, best_distance: f64 },

    #[error("no admissible symbol at depth {depth} for preimage {y}")]
    NoAdmissibleSymbol { depth: usize, y: f64 },

    #[error("bone fraction {fraction} exceeds the allowed threshold {threshold}")]
    TooManyBones { fraction: f64, threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
