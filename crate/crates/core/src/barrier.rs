//! Barrier geometries, physical constants and derived kinematics.
//!
//! Absorption enters only as a non-positive imaginary part of the potential,
//! `V0 - i V1` with `V1 >= 0`. Smooth potentials are approximated by the
//! caller through a [`PiecewiseBarrier`] with enough segments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TunnelError};

/// ħ, particle mass μ and light speed c. Natural units (all 1) by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    pub light_speed: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

impl PhysicalConstants {
    pub const fn natural() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            light_speed: 1.0,
        }
    }

    /// Electron in the eV / nm / fs unit system.
    pub fn electron_lab_units() -> Self {
        const HBAR_EV_FS: f64 = 0.658_211_956_9;
        const LIGHT_NM_PER_FS: f64 = 299.792_458;
        const ELECTRON_REST_ENERGY_EV: f64 = 510_998.950_69;
        Self {
            hbar: HBAR_EV_FS,
            mass: ELECTRON_REST_ENERGY_EV / (LIGHT_NM_PER_FS * LIGHT_NM_PER_FS),
            light_speed: LIGHT_NM_PER_FS,
        }
    }

    pub fn new(hbar: f64, mass: f64, light_speed: f64) -> Result<Self> {
        for (name, value) in [("hbar", hbar), ("mass", mass), ("light_speed", light_speed)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(TunnelError::InvalidParameter(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        Ok(Self {
            hbar,
            mass,
            light_speed,
        })
    }

    /// Free wavenumber `sqrt(2 μ E) / ħ`.
    pub fn wavenumber(&self, energy: f64) -> f64 {
        (2.0 * self.mass * energy).sqrt() / self.hbar
    }

    /// Kinetic energy `ħ² k² / (2 μ)`.
    pub fn energy(&self, wavenumber: f64) -> f64 {
        self.hbar * self.hbar * wavenumber * wavenumber / (2.0 * self.mass)
    }

    /// Complex local wavenumber `sqrt(2 μ (E - V)) / ħ`, principal branch.
    ///
    /// For `Im V <= 0` the result lies in the closed first quadrant.
    pub fn local_wavenumber(&self, energy: f64, potential: Complex64) -> Complex64 {
        ((Complex64::from(energy) - potential) * (2.0 * self.mass)).sqrt() / self.hbar
    }
}

/// Uniform barrier of height `V0`, width `a` and absorption `V1` (potential `V0 - i V1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangularBarrier {
    height: f64,
    width: f64,
    absorption: f64,
}

impl RectangularBarrier {
    pub fn new(height: f64, width: f64, absorption: f64) -> Result<Self> {
        if !(height.is_finite() && height > 0.0) {
            return Err(TunnelError::InvalidBarrier(format!(
                "height must be positive, got {height}"
            )));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(TunnelError::InvalidBarrier(format!(
                "width must be positive, got {width}"
            )));
        }
        if !(absorption.is_finite() && absorption >= 0.0) {
            return Err(TunnelError::InvalidBarrier(format!(
                "absorption must be non-negative, got {absorption}"
            )));
        }
        Ok(Self {
            height,
            width,
            absorption,
        })
    }

    pub fn lossless(height: f64, width: f64) -> Result<Self> {
        Self::new(height, width, 0.0)
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn absorption(&self) -> f64 {
        self.absorption
    }

    pub fn is_lossless(&self) -> bool {
        self.absorption == 0.0
    }

    /// Complex potential `V0 - i V1`.
    pub fn potential(&self) -> Complex64 {
        Complex64::new(self.height, -self.absorption)
    }

    pub fn with_width(&self, width: f64) -> Result<Self> {
        Self::new(self.height, width, self.absorption)
    }

    pub fn with_height(&self, height: f64) -> Result<Self> {
        Self::new(height, self.width, self.absorption)
    }

    pub fn with_absorption(&self, absorption: f64) -> Result<Self> {
        Self::new(self.height, self.width, absorption)
    }

    pub fn to_piecewise(&self) -> PiecewiseBarrier {
        PiecewiseBarrier {
            segments: vec![Segment {
                length: self.width,
                potential: self.potential(),
            }],
        }
    }
}

/// One constant-potential slab of a [`PiecewiseBarrier`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length: f64,
    pub potential: Complex64,
}

impl Segment {
    pub fn new(length: f64, potential: Complex64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(TunnelError::InvalidBarrier(format!(
                "segment length must be positive, got {length}"
            )));
        }
        if !(potential.re.is_finite() && potential.im.is_finite()) {
            return Err(TunnelError::InvalidBarrier("segment potential must be finite".into()));
        }
        if potential.im > 0.0 {
            return Err(TunnelError::InvalidBarrier(format!(
                "segment potential {potential} has Im V > 0 (gain is not supported)"
            )));
        }
        Ok(Self { length, potential })
    }

    pub fn real(length: f64, potential: f64) -> Result<Self> {
        Self::new(length, Complex64::from(potential))
    }
}

/// Ordered constant-potential segments occupying `[0, a]`; free space outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseBarrier {
    segments: Vec<Segment>,
}

impl PiecewiseBarrier {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(TunnelError::InvalidBarrier("at least one segment required".into()));
        }
        for segment in &segments {
            Segment::new(segment.length, segment.potential)?;
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn is_lossless(&self) -> bool {
        self.segments.iter().all(|s| s.potential.im == 0.0)
    }

    /// Barrier followed by `other`, placed back to back.
    pub fn then(&self, other: &PiecewiseBarrier) -> PiecewiseBarrier {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        PiecewiseBarrier { segments }
    }

    /// Mirror image `x -> a - x`.
    pub fn reversed(&self) -> PiecewiseBarrier {
        PiecewiseBarrier {
            segments: self.segments.iter().rev().copied().collect(),
        }
    }

    /// Every segment split into `parts` equal pieces.
    pub fn subdivided(&self, parts: usize) -> PiecewiseBarrier {
        let parts = parts.max(1);
        let segments = self
            .segments
            .iter()
            .flat_map(|s| {
                std::iter::repeat_n(
                    Segment {
                        length: s.length / parts as f64,
                        potential: s.potential,
                    },
                    parts,
                )
            })
            .collect();
        PiecewiseBarrier { segments }
    }

    /// Highest real potential among the segments.
    pub fn top(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.potential.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Potential at `x`; the mean of both sides on an interface, zero outside `[0, a]`.
    pub fn potential_at(&self, x: f64) -> Complex64 {
        let mut left = 0.0;
        let mut previous = Complex64::from(0.0);
        for segment in &self.segments {
            let right = left + segment.length;
            if x == left {
                return 0.5 * (previous + segment.potential);
            }
            if x > left && x < right {
                return segment.potential;
            }
            left = right;
            previous = segment.potential;
        }
        if x == left {
            return 0.5 * previous;
        }
        Complex64::from(0.0)
    }

    /// Largest open energy interval around `energy` (bounded below by zero) that
    /// contains no segment's real potential. Energy derivatives are smooth inside it.
    pub fn smooth_interval(&self, energy: f64) -> (f64, f64) {
        let mut low = 0.0_f64;
        let mut high = f64::INFINITY;
        for segment in &self.segments {
            let v = segment.potential.re;
            if v < energy {
                low = low.max(v);
            } else if v > energy {
                high = high.min(v);
            }
        }
        (low, high)
    }
}

/// Derived kinematics of a particle with energy `E` under a barrier of height `V0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveNumbers {
    pub k: f64,
    pub kappa0: f64,
    pub kappa: f64,
    /// `kappa / k`
    pub sigma: f64,
    /// `ħ κ / μ`
    pub velocity: f64,
}

pub fn validate_tunnelling_regime(energy: f64, barrier: &RectangularBarrier) -> bool {
    energy > 0.0 && energy < barrier.height()
}

pub(crate) fn check_tunnelling_regime(energy: f64, height: f64) -> Result<()> {
    if !(energy > 0.0) {
        return Err(TunnelError::NonPositiveEnergy { energy });
    }
    if !(energy < height) {
        return Err(TunnelError::EnergyAboveBarrier { energy, height });
    }
    Ok(())
}

pub fn wavenumbers(
    energy: f64,
    barrier: &RectangularBarrier,
    consts: &PhysicalConstants,
) -> Result<WaveNumbers> {
    check_tunnelling_regime(energy, barrier.height())?;
    let k = consts.wavenumber(energy);
    let kappa0 = consts.wavenumber(barrier.height());
    // sqrt(2μ(V0 - E))/ħ equals sqrt(κ0² - k²) without the cancellation near the top.
    let kappa = consts.wavenumber(barrier.height() - energy);
    Ok(WaveNumbers {
        k,
        kappa0,
        kappa,
        sigma: kappa / k,
        velocity: consts.hbar * kappa / consts.mass,
    })
}

pub fn to_piecewise(barrier: &RectangularBarrier) -> PiecewiseBarrier {
    barrier.to_piecewise()
}
