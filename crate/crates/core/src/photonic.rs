//! Photonic barriers: undersized waveguides and frustrated total internal
//! reflection, mapped onto evanescent decay constants and onto equivalent
//! quantum barriers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::barrier::{PhysicalConstants, RectangularBarrier};
use crate::error::{Result, TunnelError};
use crate::wavepacket::{self, EvolveOptions, GaussianPacket, Grid, GridOptions};

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(TunnelError::InvalidParameter(format!("{name} must be positive, got {value}")))
    }
}

/// Waveguide section of length `a` driven below its cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideBarrier {
    pub wavelength: f64,
    pub cutoff_wavelength: f64,
    pub length: f64,
}

impl WaveguideBarrier {
    pub fn new(wavelength: f64, cutoff_wavelength: f64, length: f64) -> Result<Self> {
        positive("wavelength", wavelength)?;
        positive("cutoff wavelength", cutoff_wavelength)?;
        positive("length", length)?;
        Ok(Self {
            wavelength,
            cutoff_wavelength,
            length,
        })
    }
}

/// Gap of width `D` between two prisms of index `n`, illuminated beyond the critical angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtirBarrier {
    pub refractive_index: f64,
    /// Radians.
    pub incidence_angle: f64,
    pub vacuum_wavelength: f64,
    pub gap: f64,
    /// `Ω`, supplied by the caller.
    pub rayleigh_frequency: f64,
}

impl FtirBarrier {
    pub fn new(
        refractive_index: f64,
        incidence_angle: f64,
        vacuum_wavelength: f64,
        gap: f64,
        rayleigh_frequency: f64,
    ) -> Result<Self> {
        if !(refractive_index.is_finite() && refractive_index > 1.0) {
            return Err(TunnelError::InvalidParameter(format!(
                "refractive index must exceed 1, got {refractive_index}"
            )));
        }
        if !(incidence_angle.is_finite() && incidence_angle > 0.0 && incidence_angle < 0.5 * PI) {
            return Err(TunnelError::InvalidParameter(format!(
                "incidence angle must lie in (0, π/2), got {incidence_angle}"
            )));
        }
        positive("vacuum wavelength", vacuum_wavelength)?;
        positive("gap", gap)?;
        positive("Rayleigh frequency", rayleigh_frequency)?;
        Ok(Self {
            refractive_index,
            incidence_angle,
            vacuum_wavelength,
            gap,
            rayleigh_frequency,
        })
    }

    /// `arcsin(1 / n)`
    pub fn critical_angle(&self) -> f64 {
        (1.0 / self.refractive_index).asin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonTunnellingReport {
    pub kappa_e: f64,
    /// `κ_e a`; the phase time below is an opaque-barrier result.
    pub opacity: f64,
    pub phase_time: f64,
    pub effective_velocity: f64,
    pub superluminal: bool,
    pub loss_time: Option<f64>,
    pub angular_deviation: Option<f64>,
}

/// `κ_e = 2π (λ_c⁻² - λ⁻²)^{1/2}`, real below cutoff (`λ > λ_c`).
pub fn waveguide_kappa(barrier: &WaveguideBarrier) -> Result<f64> {
    if !(barrier.wavelength > barrier.cutoff_wavelength) {
        return Err(TunnelError::NotEvanescent(format!(
            "wavelength {} does not exceed the cutoff {}",
            barrier.wavelength, barrier.cutoff_wavelength
        )));
    }
    let (l, lc) = (barrier.wavelength, barrier.cutoff_wavelength);
    // (1/lc² - 1/l²) = (l - lc)(l + lc) / (l² lc²), without cancellation near cutoff.
    Ok(2.0 * PI * ((l - lc) * (l + lc)).sqrt() / (l * lc))
}

/// `κ_e = (2π / λ) (n² sin² î - 1)^{1/2}`, real beyond the critical angle.
pub fn ftir_kappa(barrier: &FtirBarrier) -> Result<f64> {
    let s = barrier.refractive_index * barrier.incidence_angle.sin();
    if !(s >= 1.0) {
        return Err(TunnelError::NotEvanescent(format!(
            "incidence angle {} rad is below the critical angle {} rad",
            barrier.incidence_angle,
            barrier.critical_angle()
        )));
    }
    Ok(2.0 * PI / barrier.vacuum_wavelength * ((s - 1.0) * (s + 1.0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonPhaseTime {
    /// `2 / (c κ_e)`
    pub time: f64,
    /// `κ_e a`
    pub opacity: f64,
}

pub fn photon_phase_time(kappa_e: f64, length: f64, consts: &PhysicalConstants) -> Result<PhotonPhaseTime> {
    positive("kappa_e", kappa_e)?;
    positive("length", length)?;
    Ok(PhotonPhaseTime {
        time: 2.0 / (consts.light_speed * kappa_e),
        opacity: kappa_e * length,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveVelocity {
    pub velocity: f64,
    pub superluminal: bool,
}

/// `v = a / τ`, superluminal when it exceeds `c`.
pub fn effective_velocity(length: f64, tau: f64, consts: &PhysicalConstants) -> Result<EffectiveVelocity> {
    positive("length", length)?;
    positive("tau", tau)?;
    let velocity = length / tau;
    Ok(EffectiveVelocity {
        velocity,
        superluminal: velocity > consts.light_speed,
    })
}

/// `D n sin(î) / c`
pub fn optical_traversal_time(barrier: &FtirBarrier, consts: &PhysicalConstants) -> f64 {
    barrier.gap * barrier.refractive_index * barrier.incidence_angle.sin() / consts.light_speed
}

/// `δî = Ω τ_loss`
pub fn angular_deviation(omega: f64, loss_time: f64) -> Result<f64> {
    positive("omega", omega)?;
    if !(loss_time.is_finite() && loss_time >= 0.0) {
        return Err(TunnelError::InvalidParameter(format!(
            "loss time must be non-negative, got {loss_time}"
        )));
    }
    Ok(omega * loss_time)
}

/// Quantum barrier with the same decay constant: `E = f V0` and
/// `V0 = ħ² κ_e² / (2 μ (1 - f))`.
pub fn analog_quantum_barrier(
    kappa_e: f64,
    length: f64,
    probe_energy_fraction: f64,
    consts: &PhysicalConstants,
) -> Result<(RectangularBarrier, f64)> {
    positive("kappa_e", kappa_e)?;
    if !(probe_energy_fraction > 0.0 && probe_energy_fraction < 1.0) {
        return Err(TunnelError::InvalidParameter(format!(
            "probe energy fraction must lie in (0, 1), got {probe_energy_fraction}"
        )));
    }
    let height = consts.energy(kappa_e) / (1.0 - probe_energy_fraction);
    let barrier = RectangularBarrier::lossless(height, length)?;
    Ok((barrier, probe_energy_fraction * height))
}

/// Converts a time on the analog quantum barrier to the photonic clock: the
/// evanescent crossing speed `υ = ħκ/μ` is replaced by `c`.
pub fn to_photonic_time(quantum_time: f64, kappa_e: f64, consts: &PhysicalConstants) -> f64 {
    quantum_time * (consts.hbar * kappa_e / consts.mass) / consts.light_speed
}

/// Packet settings for [`loss_time`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTimeOptions {
    pub probe_energy_fraction: f64,
    pub relative_spread: f64,
    pub grid: GridOptions,
}

impl Default for LossTimeOptions {
    fn default() -> Self {
        Self {
            probe_energy_fraction: 0.5,
            relative_spread: 0.05,
            grid: GridOptions::default(),
        }
    }
}

/// `sqrt(D_dyn τ)` from a packet run on the analog quantum barrier, on the photonic clock.
pub fn loss_time(kappa_e: f64, length: f64, consts: &PhysicalConstants, options: &LossTimeOptions) -> Result<f64> {
    let (barrier, energy) = analog_quantum_barrier(kappa_e, length, options.probe_energy_fraction, consts)?;
    let barrier = barrier.to_piecewise();
    let width = GaussianPacket::from_energy(-1.0, energy, options.relative_spread, consts)?.spatial_width();
    let start = GaussianPacket::suggested_start(width, &barrier, energy, consts)?;
    let packet = GaussianPacket::from_energy(start, energy, options.relative_spread, consts)?;
    let grid = Grid::for_run(&packet, &barrier, consts, &options.grid)?;
    let history = wavepacket::evolve(&packet, &barrier, &grid, consts, &EvolveOptions::for_barrier(&barrier))?;
    let entry = wavepacket::flux_series(&history, 0.0)?;
    let exit = wavepacket::flux_series(&history, length)?;
    let stats = wavepacket::tunnelling_statistics(&entry, &exit)?;
    if stats.negative_dynamical_variance {
        log::warn!("dynamical variance is negative ({}); loss time uses its magnitude", stats.dynamical_variance);
    }
    Ok(to_photonic_time(stats.dynamical_variance.abs().sqrt(), kappa_e, consts))
}

fn report(kappa_e: f64, length: f64, consts: &PhysicalConstants) -> Result<PhotonTunnellingReport> {
    let phase = photon_phase_time(kappa_e, length, consts)?;
    let v = effective_velocity(length, phase.time, consts)?;
    Ok(PhotonTunnellingReport {
        kappa_e,
        opacity: phase.opacity,
        phase_time: phase.time,
        effective_velocity: v.velocity,
        superluminal: v.superluminal,
        loss_time: None,
        angular_deviation: None,
    })
}

pub fn waveguide_report(barrier: &WaveguideBarrier, consts: &PhysicalConstants) -> Result<PhotonTunnellingReport> {
    report(waveguide_kappa(barrier)?, barrier.length, consts)
}

/// FTIR report; with a loss time the angular deviation `Ω τ_loss` is filled in.
pub fn ftir_report(
    barrier: &FtirBarrier,
    consts: &PhysicalConstants,
    loss_time: Option<f64>,
) -> Result<PhotonTunnellingReport> {
    let mut r = report(ftir_kappa(barrier)?, barrier.gap, consts)?;
    if let Some(t) = loss_time {
        r.loss_time = Some(t);
        r.angular_deviation = Some(angular_deviation(barrier.rayleigh_frequency, t)?);
    }
    Ok(r)
}
