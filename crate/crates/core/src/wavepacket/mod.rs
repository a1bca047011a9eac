//! Gaussian wavepackets through barriers: Crank–Nicolson propagation,
//! probability flux at fixed planes and presence-time statistics.
//!
//! A run records the wavefunction around each probe plane every step. Flux
//! records are derived from those stencils, and their time moments give the
//! mean entry and exit times, the mean tunnelling time and its variance
//! decomposition. [`oracle`] holds the stationary-phase predictions the
//! simulated statistics are compared against.

mod flux;
mod grid;
pub mod oracle;
mod packet;
mod propagate;

pub use flux::{
    flux_series, flux_series_unchecked, presence_moment, tunnelling_statistics, tunnelling_statistics_with,
    FluxRecord, FluxSign, MomentDenominator, TimeStatistics,
};
pub use grid::{Grid, GridOptions, MAX_PHASE_PER_STEP, MIN_POINTS_PER_WAVELENGTH};
pub use oracle::{energy_averaged_phase_time, SpectralWeighting};
pub use packet::{GaussianPacket, PacketSpectrum};
pub use propagate::{evolve, ContinuityAudit, EvolveOptions, History, ProbeTrace, Propagator, StopRule};
