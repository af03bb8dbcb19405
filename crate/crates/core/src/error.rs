use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator shapes do not match: ({n_left}, {legs_left}) vs ({n_right}, {legs_right})")]
    ShapeMismatch {
        n_left: usize,
        legs_left: usize,
        n_right: usize,
        legs_right: usize,
    },

    #[error("leg {leg} out of range for an operator on {legs} legs")]
    LegOutOfRange { leg: usize, legs: usize },

    #[error("duplicate leg {leg} in support list")]
    DuplicateLeg { leg: usize },

    #[error("support list has {got} legs, operator acts on {expected}")]
    SupportMismatch { expected: usize, got: usize },

    #[error("malformed permutation {perm:?} on {legs} legs")]
    BadPermutation { perm: Vec<usize>, legs: usize },

    #[error("matrix index ({i}, {j}) out of range for local dimension {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("matrix numerically singular (reciprocal condition estimate {rcond:.3e})")]
    Singular { rcond: f64 },

    #[error("evaluation too close to a pole (|denominator| = {value:.3e} < {floor:.3e})")]
    PoleProximity { value: f64, floor: f64 },

    #[error("ambient leg count {ambient} too small, operator touches leg {needed}")]
    AmbientTooSmall { ambient: usize, needed: usize },

    #[error("shift leg {leg} lies inside the operator support")]
    ShiftLegInSupport { leg: usize },

    #[error("dimension guard exceeded: {dim} > {max}")]
    DimensionGuard { dim: usize, max: usize },

    #[error("no Lax candidate passed calibration; medians: {table:?}")]
    CalibrationFailed { table: Vec<(String, f64)> },

    #[error("extrapolation did not converge (last correction {change:.3e} > {tol:.3e})")]
    NoConvergence { change: f64, tol: f64 },

    #[error("slope fit needs at least 3 usable grid points, got {count}")]
    SlopeFit { count: usize },

    #[error("no admissible sample found after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),
}
