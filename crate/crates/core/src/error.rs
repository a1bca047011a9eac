use thiserror::Error;

/// Errors raised by the tunnelling-time library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TunnelError {
    #[error("energy must be positive, got {energy}")]
    NonPositiveEnergy { energy: f64 },

    #[error("energy {energy} is not below the barrier height {height}")]
    EnergyAboveBarrier { energy: f64, height: f64 },

    #[error("invalid barrier: {0}")]
    InvalidBarrier(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("energy {energy} coincides with the potential of segment {segment}; perturb it explicitly")]
    DegenerateSegment { segment: usize, energy: f64 },

    #[error("transfer matrix overflowed for segment {segment} (decay length too short for f64)")]
    Overflow { segment: usize },

    #[error("derivative stencil [{low}, {high}] leaves the admissible interval ({min}, {max})")]
    StepOutOfRegime { low: f64, high: f64, min: f64, max: f64 },

    #[error("phase phi1 vanishes (infinitely opaque barrier)")]
    PhaseSingular,

    #[error("operation requires a lossless barrier")]
    RequiresLossless,

    #[error("spectrum leaves the tunnelling regime: {0}")]
    SpectrumOutOfRegime(String),

    #[error("grid under-resolved: {0}")]
    GridUnderResolved(String),

    #[error("norm drifted by {drift:e} in a lossless run")]
    NormDrift { drift: f64 },

    #[error("flux at x = {plane} has not decayed: final |J| / max|J| = {ratio:e}")]
    TailNotDecayed { plane: f64, ratio: f64 },

    #[error("simulation reached its step cap ({steps}) before the flux tails decayed")]
    HorizonExceeded { steps: usize },

    #[error("no probe recorded at x = {0}")]
    UnknownProbe(f64),

    #[error("flux of the requested sign vanishes at x = {plane}")]
    VanishingFlux { plane: f64 },

    #[error("not evanescent: {0}")]
    NotEvanescent(String),

    #[error("at least {needed} points required, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("quadrature failed to converge: estimated error {error:e} on {value:e}")]
    Quadrature { value: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, TunnelError>;
