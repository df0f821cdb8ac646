use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("material modulus must be positive and finite, got {0}")]
    NonPositive(f64),
    #[error("materials must be ordered: {first} > {second}")]
    Unordered { first: f64, second: f64 },
    #[error("volume fractions ({m1}, {m2}) leave the simplex")]
    OutOfSimplex { m1: f64, m2: f64 },
    #[error("fractions leave no finite material (m1 + m2 = 0); the bound is infinite")]
    Degenerate,
    #[error("point (s = {s}, d = {d}) violates the cone |d| <= s")]
    ConeViolation { s: f64, d: f64 },
    #[error("translation parameter must be nonnegative, got {0}")]
    NegativeTranslation(f64),
    #[error("fractions cannot be realized by the wheel: {0}")]
    InfeasibleFractions(String),
    #[error("raster cannot meet the area tolerance: {0}")]
    ResolutionTooCoarse(String),
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("singular radial profile: {0}")]
    SingularProfile(String),
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },
    #[error("operation requires the {expected} regime, inputs are in {actual}")]
    RegimeMismatch {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("contrast {contrast} must exceed the largest finite conductivity {k_max}")]
    BadContrast { contrast: f64, k_max: f64 },
    #[error("extrapolation fit is ill-conditioned: {0}")]
    IllConditionedFit(String),
    #[error("invalid elastic moduli: {0}")]
    BadModuli(String),
    #[error("malformed phase map: {0}")]
    Pgm(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
