use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::barrier::{PhysicalConstants, PiecewiseBarrier};
use crate::error::{Result, TunnelError};
use crate::spectrum::EnergySpectrum;
use crate::stationary::stationary_wave;

/// Minimum-uncertainty packet
/// `psi(x) = (2π Δx²)^{-1/4} exp(i k0 x - (x - x0)² / (4 Δx²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    center: f64,
    mean_wavenumber: f64,
    spatial_width: f64,
}

impl GaussianPacket {
    pub fn new(center: f64, mean_wavenumber: f64, spatial_width: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(TunnelError::InvalidParameter(format!("packet centre must be finite, got {center}")));
        }
        if !(mean_wavenumber.is_finite() && mean_wavenumber != 0.0) {
            return Err(TunnelError::InvalidParameter(format!(
                "mean wavenumber must be finite and non-zero, got {mean_wavenumber}"
            )));
        }
        if !(spatial_width.is_finite() && spatial_width > 0.0) {
            return Err(TunnelError::InvalidParameter(format!(
                "spatial width must be positive, got {spatial_width}"
            )));
        }
        Ok(Self {
            center,
            mean_wavenumber,
            spatial_width,
        })
    }

    /// Packet of mean energy `E0` whose energy spread is `relative_spread · E0`,
    /// with `ΔE = ħ² k0 Δk / μ` and `Δk = 1 / (2 Δx)`.
    pub fn from_energy(center: f64, energy: f64, relative_spread: f64, consts: &PhysicalConstants) -> Result<Self> {
        if !(energy > 0.0) {
            return Err(TunnelError::NonPositiveEnergy { energy });
        }
        if !(relative_spread > 0.0 && relative_spread.is_finite()) {
            return Err(TunnelError::InvalidParameter(format!(
                "relative energy spread must be positive, got {relative_spread}"
            )));
        }
        let k0 = consts.wavenumber(energy);
        let dk = relative_spread * energy * consts.mass / (consts.hbar * consts.hbar * k0);
        Self::new(center, k0, 0.5 / dk)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn mean_wavenumber(&self) -> f64 {
        self.mean_wavenumber
    }

    pub fn spatial_width(&self) -> f64 {
        self.spatial_width
    }

    /// `Δk = 1 / (2 Δx)`
    pub fn wavenumber_spread(&self) -> f64 {
        0.5 / self.spatial_width
    }

    pub fn mean_energy(&self, consts: &PhysicalConstants) -> f64 {
        consts.energy(self.mean_wavenumber)
    }

    /// `ħ² |k0| Δk / μ`
    pub fn energy_spread(&self, consts: &PhysicalConstants) -> f64 {
        consts.hbar * consts.hbar * self.mean_wavenumber.abs() * self.wavenumber_spread() / consts.mass
    }

    pub fn group_velocity(&self, consts: &PhysicalConstants) -> f64 {
        consts.hbar * self.mean_wavenumber / consts.mass
    }

    /// Largest `|k|` carrying non-negligible weight, `|k0| + 6 Δk`.
    pub fn max_wavenumber(&self) -> f64 {
        self.mean_wavenumber.abs() + 6.0 * self.wavenumber_spread()
    }

    pub fn amplitude(&self, x: f64) -> Complex64 {
        let w = self.spatial_width;
        let norm = (2.0 * PI * w * w).powf(-0.25);
        let d = x - self.center;
        Complex64::from_polar(norm * (-d * d / (4.0 * w * w)).exp(), self.mean_wavenumber * x)
    }

    /// Normalised momentum density `|phi(k)|²`.
    pub fn momentum_density(&self, k: f64) -> f64 {
        let w = self.spatial_width;
        let d = k - self.mean_wavenumber;
        (2.0 / PI).sqrt() * w * (-2.0 * w * w * d * d).exp()
    }

    /// Probability carried by wavenumbers of the packet's direction with energy above `energy`.
    pub fn fraction_above(&self, energy: f64, consts: &PhysicalConstants) -> f64 {
        let k = consts.wavenumber(energy.max(0.0));
        let z = (k - self.mean_wavenumber.abs()) * self.spatial_width * 2f64.sqrt();
        0.5 * libm::erfc(z)
    }

    /// Probability moving against the packet's direction.
    pub fn backward_fraction(&self) -> f64 {
        0.5 * libm::erfc(self.mean_wavenumber.abs() * self.spatial_width * 2f64.sqrt())
    }

    /// Energy distribution of the forward-moving part, `|phi(k)|² μ / (ħ² k)`.
    pub fn spectrum(&self, consts: &PhysicalConstants) -> PacketSpectrum {
        PacketSpectrum {
            packet: *self,
            consts: *consts,
        }
    }

    /// Start position left of a barrier beginning at `x = 0` such that the initial
    /// density at `x = width` is below `1e-7 |A_T(E0)|²` of its peak, and never
    /// closer than six widths.
    pub fn suggested_start(
        spatial_width: f64,
        barrier: &PiecewiseBarrier,
        energy: f64,
        consts: &PhysicalConstants,
    ) -> Result<f64> {
        let transmission = stationary_wave(barrier, energy, consts)?
            .reduced_transmission()
            .norm_sqr()
            .min(1.0);
        let distance = (2.0 * (1e7 / transmission).ln()).sqrt().max(6.0);
        Ok(barrier.total_length() - distance * spatial_width)
    }
}

/// Energy spectrum of a [`GaussianPacket`] moving in its mean direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpectrum {
    packet: GaussianPacket,
    consts: PhysicalConstants,
}

impl EnergySpectrum for PacketSpectrum {
    fn weight(&self, energy: f64) -> f64 {
        if !(energy > 0.0) {
            return 0.0;
        }
        let k = self.consts.wavenumber(energy);
        self.packet.momentum_density(k * self.packet.mean_wavenumber.signum()) * self.consts.mass
            / (self.consts.hbar * self.consts.hbar * k)
    }

    fn support(&self) -> (f64, f64) {
        let k0 = self.packet.mean_wavenumber.abs();
        let dk = self.packet.wavenumber_spread();
        let low = (k0 - 6.0 * dk).max(1e-3 * k0);
        (self.consts.energy(low), self.consts.energy(k0 + 6.0 * dk))
    }
}
