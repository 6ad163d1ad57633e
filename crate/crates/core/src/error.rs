use thiserror::Error;

pub type Result<T> = std::result::Result<T, HopsError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HopsError {
    #[error("photon-number cutoff {0} outside supported range 1..=128")]
    CutoffOutOfRange(usize),

    #[error("operands live in different Fock spaces (n_max {left} vs {right})")]
    SpaceMismatch { left: usize, right: usize },

    #[error("cutoff n_max={n_max} too small for |alpha|^2={mean:.6}: Poisson tail {tail:.3e} exceeds 1e-12")]
    InsufficientCutoff { n_max: usize, mean: f64, tail: f64 },

    #[error("truncation overflow: {mass:.3e} probability in the outermost number shells (limit {limit:.0e})")]
    TruncationOverflow { mass: f64, limit: f64 },

    #[error("evolution step control failed: norm drifted by {drift:.3e}")]
    StepControl { drift: f64 },

    #[error("coupling-time product g*t={0} outside |g*t| <= 2")]
    EvolutionTooLong(f64),

    #[error("operator is not flagged Hermitian")]
    NotHermitian,

    #[error("negative variance {0:.3e} below clamping window")]
    NegativeVariance(f64),

    #[error("operator quad family mismatch: expected {0}")]
    WrongFamily(&'static str),

    #[error("zero denominator: x amplitude vanishes")]
    ZeroAmplitude,

    #[error("basis vector is not normalized (|e|^2 = {0})")]
    NonUnitBasis(f64),

    #[error("ordering headroom exceeded: orders ({m}, {n}) need n_max >= {need}, have {have}")]
    OrderingHeadroom { m: usize, n: usize, need: usize, have: usize },

    #[error("interaction time kt={0} outside the overflow guard |kt| <= 5")]
    KtOutOfRange(f64),

    #[error("Mobius pole: 1 + i p_h tanh(2kt) vanishes")]
    MobiusPole,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degree undefined: total intensity h0 is zero")]
    ZeroIntensity,

    #[error("no crossing of degree = 1 found for kt in (0, 2]")]
    NoCrossing,

    #[error("ensemble needs at least 4 phase samples, got {0}")]
    TooFewPhases(usize),

    #[error("basis singularity: field has no component along e")]
    BasisSingularity,

    #[error("grid fixture unusable: {0}")]
    Fixture(String),

    #[error("internal consistency violated: {0}")]
    Consistency(String),
}
