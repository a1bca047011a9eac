//! Stationary-theory predictions for packet observables, by spectral quadrature.

use serde::{Deserialize, Serialize};

use crate::barrier::{PhysicalConstants, PiecewiseBarrier};
use crate::error::{Result, TunnelError};
use crate::spectrum::{check_support, spectral_integral};
use crate::stationary::stationary_wave;
use crate::times::phase_time;

use super::packet::GaussianPacket;

const REL_TOL: f64 = 1e-10;

/// Measure for `⟨·⟩_E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SpectralWeighting {
    /// `|spectrum(E)|² |A_T(E)|²`: the spectrum of the transmitted packet.
    #[default]
    Transmission,
    /// `|spectrum(E)|²`
    Unweighted,
}

fn checked(packet: &GaussianPacket, barrier: &PiecewiseBarrier, consts: &PhysicalConstants) -> Result<()> {
    if packet.mean_wavenumber() <= 0.0 {
        return Err(TunnelError::InvalidParameter(
            "spectral predictions assume a packet incident from the left".into(),
        ));
    }
    if barrier.top() > 0.0 {
        check_support(&packet.spectrum(consts), 0.0, barrier.top())?;
    }
    Ok(())
}

fn transmission(barrier: &PiecewiseBarrier, energy: f64, consts: &PhysicalConstants) -> Result<f64> {
    Ok(stationary_wave(barrier, energy, consts)?.reduced_transmission().norm_sqr())
}

fn average<F>(
    packet: &GaussianPacket,
    barrier: &PiecewiseBarrier,
    consts: &PhysicalConstants,
    weighting: SpectralWeighting,
    f: F,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    checked(packet, barrier, consts)?;
    let spectrum = packet.spectrum(consts);
    let weight = |e: f64| -> Result<f64> {
        match weighting {
            SpectralWeighting::Transmission => transmission(barrier, e, consts),
            SpectralWeighting::Unweighted => Ok(1.0),
        }
    };
    let norm = spectral_integral(&spectrum, weight, REL_TOL)?;
    let total = spectral_integral(&spectrum, |e| Ok(weight(e)? * f(e)?), REL_TOL)?;
    Ok(total / norm)
}

/// `⟨τ^Ph⟩_E` over the packet's energy distribution.
pub fn energy_averaged_phase_time(
    packet: &GaussianPacket,
    barrier: &PiecewiseBarrier,
    consts: &PhysicalConstants,
    weighting: SpectralWeighting,
) -> Result<f64> {
    average(packet, barrier, consts, weighting, |e| phase_time(barrier, e, consts))
}

/// Transmitted probability `∫ |spectrum|² |A_T|² dE`, i.e. the predicted `∫ J₊(a) dt`.
pub fn spectral_transmission(packet: &GaussianPacket, barrier: &PiecewiseBarrier, consts: &PhysicalConstants) -> Result<f64> {
    checked(packet, barrier, consts)?;
    spectral_integral(&packet.spectrum(consts), |e| transmission(barrier, e, consts), REL_TOL)
}

/// Free-flight arrival time at `plane`, `⟨(plane - x0) μ / (ħ k)⟩_E`.
pub fn spectral_free_arrival(
    packet: &GaussianPacket,
    barrier: &PiecewiseBarrier,
    plane: f64,
    consts: &PhysicalConstants,
    weighting: SpectralWeighting,
) -> Result<f64> {
    let distance = plane - packet.center();
    average(packet, barrier, consts, weighting, |e| {
        Ok(distance * consts.mass / (consts.hbar * consts.wavenumber(e)))
    })
}

/// Mean exit time of the transmitted flux predicted by stationary phase:
/// `⟨-x0 μ/(ħk) + τ^Ph⟩` over the transmitted spectrum. For a packet
/// of forward-moving components this is the exact first moment of `J(a, t)`.
pub fn spectral_exit_time(packet: &GaussianPacket, barrier: &PiecewiseBarrier, consts: &PhysicalConstants) -> Result<f64> {
    let flight = spectral_free_arrival(packet, barrier, 0.0, consts, SpectralWeighting::Transmission)?;
    Ok(flight + energy_averaged_phase_time(packet, barrier, consts, SpectralWeighting::Transmission)?)
}

/// Stationary-phase prediction for `⟨t₊(a)⟩ - ⟨t₊(0)⟩` given a measured entry mean.
pub fn predicted_mean_tunnelling(
    packet: &GaussianPacket,
    barrier: &PiecewiseBarrier,
    consts: &PhysicalConstants,
    mean_entry: f64,
) -> Result<f64> {
    Ok(spectral_exit_time(packet, barrier, consts)? - mean_entry)
}
