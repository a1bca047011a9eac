//! Tunnelling times for one-dimensional quantum and photonic barriers.
//!
//! The crate evaluates the standard catalogue of tunnelling-time definitions
//! (phase time, dwell time, Larmor times, Büttiker–Landauer time, complex
//! Feynman-path time), propagates Gaussian wavepackets to obtain flux-based
//! presence-time statistics, scans barrier width to expose the saturation of
//! mean tunnelling times (Hartman–Fletcher effect) and its breakdown under
//! absorption, and maps photonic barriers onto equivalent quantum barriers.
//!
//! Phase convention: the transmission amplitude `A_T` multiplies `exp(ikx)`
//! to the right of the barrier, so `arg A_T + k a` is the transmission phase
//! shift and the reflection amplitude `A_R` is referred to the barrier centre.

pub mod barrier;
pub mod error;
pub mod hfe;
pub mod numerics;
pub mod photonic;
pub mod spectrum;
pub mod stationary;
pub mod times;
pub mod wavepacket;

pub use barrier::{
    to_piecewise, validate_tunnelling_regime, wavenumbers, PhysicalConstants, PiecewiseBarrier,
    RectangularBarrier, Segment, WaveNumbers,
};
pub use error::{Result, TunnelError};
pub use num_complex::Complex64;
