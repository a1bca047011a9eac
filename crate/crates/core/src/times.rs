//! The catalogue of tunnelling-time definitions at a single energy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::barrier::{check_tunnelling_regime, wavenumbers, PhysicalConstants, PiecewiseBarrier, RectangularBarrier};
use crate::error::{Result, TunnelError};
use crate::numerics::{default_step, unwrap_near, Derivative, StencilOrder};
use crate::spectrum::{check_support, spectral_integral, EnergySpectrum};
use crate::stationary::{dwell_time, phase_decomposition, phi2_energy_derivative, stationary_wave};

pub use crate::numerics::central_derivative as numeric_derivative;

/// Step and stencil for energy derivatives. `step: None` selects
/// `1e-4 * min(E - low, high - E)` inside the admissible interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeOptions {
    pub step: Option<f64>,
    pub order: StencilOrder,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        Self {
            step: None,
            order: StencilOrder::Fourth,
        }
    }
}

impl DerivativeOptions {
    fn derive<F>(&self, f: F, x: f64, domain: (f64, f64)) -> Result<Derivative>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let step = self.step.unwrap_or_else(|| default_step(x, domain));
        numeric_derivative(f, x, step, self.order, domain)
    }
}

/// Every tunnelling-time definition at one `(barrier, E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeCatalog {
    pub phase_time: f64,
    pub phase_time_phi2: f64,
    pub dwell_time: f64,
    pub larmor_first: f64,
    pub larmor_second: f64,
    pub buttiker_landauer: f64,
    pub feynman_time: Complex64,
    pub energy: f64,
    pub barrier_width: f64,
}

/// Opaque-barrier reference values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpaqueLimits {
    /// `2 / (υ κ)`
    pub phase_limit: f64,
    /// `ħ k / (κ V0)`
    pub dwell_limit: f64,
    /// `a μ / (ħ κ)`
    pub fluctuation_limit: f64,
    /// Set when `κ a < 1`, where none of the three applies.
    pub divergent: bool,
}

/// Transmission phase shift `arg A_T + ka`, on the branch nearest `reference`.
fn transmission_shift(barrier: &PiecewiseBarrier, energy: f64, consts: &PhysicalConstants, reference: f64) -> Result<f64> {
    let wave = stationary_wave(barrier, energy, consts)?;
    Ok(unwrap_near(reference, wave.reduced_transmission().arg()))
}

fn log_transmission_modulus(barrier: &PiecewiseBarrier, energy: f64, consts: &PhysicalConstants) -> Result<f64> {
    Ok(stationary_wave(barrier, energy, consts)?.reduced_transmission().norm().ln())
}

/// Phase time `ħ ∂(arg A_T + ka)/∂E` by finite differences over the transfer matrix.
pub fn phase_time(barrier: &PiecewiseBarrier, energy: f64, consts: &PhysicalConstants) -> Result<f64> {
    phase_time_with(barrier, energy, consts, &DerivativeOptions::default())
}

pub fn phase_time_with(
    barrier: &PiecewiseBarrier,
    energy: f64,
    consts: &PhysicalConstants,
    options: &DerivativeOptions,
) -> Result<f64> {
    let centre = transmission_shift(barrier, energy, consts, 0.0)?;
    let d = options.derive(
        |e| transmission_shift(barrier, e, consts, centre),
        energy,
        barrier.smooth_interval(energy),
    )?;
    Ok(consts.hbar * d.value)
}

/// `ħ ∂φ2/∂E`: closed form when lossless, finite differences of `Re φ2` otherwise.
pub fn phase_time_phi2(barrier: &RectangularBarrier, energy: f64, consts: &PhysicalConstants) -> Result<f64> {
    if barrier.is_lossless() {
        return Ok(consts.hbar * phi2_energy_derivative(barrier, energy, consts)?);
    }
    check_tunnelling_regime(energy, barrier.height())?;
    let centre = phase_decomposition(barrier, energy, consts)?.phi2.re;
    let d = DerivativeOptions::default().derive(
        |e| Ok(unwrap_near(centre, phase_decomposition(barrier, e, consts)?.phi2.re)),
        energy,
        (0.0, barrier.height()),
    )?;
    Ok(consts.hbar * d.value)
}

/// Second Larmor time `ħ (∂φ1/∂E) cot φ1` for a lossless rectangular barrier.
pub fn larmor_second_time(barrier: &RectangularBarrier, energy: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !barrier.is_lossless() {
        return Err(TunnelError::RequiresLossless);
    }
    let phi1 = |e: f64| -> Result<f64> { Ok(phase_decomposition(barrier, e, consts)?.phi1.re) };
    let centre = phi1(energy)?;
    if centre < 1e-14 {
        return Err(TunnelError::PhaseSingular);
    }
    let d = DerivativeOptions::default().derive(phi1, energy, (0.0, barrier.height()))?;
    Ok(consts.hbar * d.value / centre.tan())
}

/// `ħ ∂ln|A_T|/∂E`: the Büttiker–Landauer time, equal to the second Larmor
/// time through `|A_T| = sin φ1`. Valid for any piecewise barrier.
pub fn buttiker_landauer_time(barrier: &PiecewiseBarrier, energy: f64, consts: &PhysicalConstants) -> Result<f64> {
    let d = DerivativeOptions::default().derive(
        |e| log_transmission_modulus(barrier, e, consts),
        energy,
        barrier.smooth_interval(energy),
    )?;
    Ok(consts.hbar * d.value)
}

/// Packet second Larmor time `ħ [⟨(∂|A_T|/∂E)²⟩ / ⟨|A_T|²⟩]^{1/2}`, averages
/// weighted by the spectrum.
pub fn larmor_second_packet<S>(spectrum: &S, barrier: &PiecewiseBarrier, consts: &PhysicalConstants) -> Result<f64>
where
    S: EnergySpectrum + ?Sized,
{
    check_support(spectrum, 0.0, barrier.top())?;
    let rel_tol = 1e-8;
    let slope = spectral_integral(
        spectrum,
        |e| {
            let modulus = stationary_wave(barrier, e, consts)?.reduced_transmission().norm();
            let log_slope = buttiker_landauer_time(barrier, e, consts)? / consts.hbar;
            Ok((modulus * log_slope).powi(2))
        },
        rel_tol,
    )?;
    let norm = spectral_integral(
        spectrum,
        |e| Ok(stationary_wave(barrier, e, consts)?.reduced_transmission().norm_sqr()),
        rel_tol,
    )?;
    Ok(consts.hbar * (slope / norm).sqrt())
}

/// Complex time `-ħ ∂arg A_T/∂V0 - iħ ∂ln|A_T|/∂V0`.
///
/// This is the conjugate of `-iħ ∂ln A_T/∂V0`, chosen so that both parts
/// are positive below the barrier.
pub fn feynman_time(barrier: &RectangularBarrier, energy: f64, consts: &PhysicalConstants) -> Result<Complex64> {
    check_tunnelling_regime(energy, barrier.height())?;
    let at = |height: f64| barrier.with_height(height).map(|b| b.to_piecewise());
    let v0 = barrier.height();
    let domain = (energy, f64::INFINITY);
    let options = DerivativeOptions::default();
    let centre = transmission_shift(&at(v0)?, energy, consts, 0.0)?;
    let phase = options.derive(|v| transmission_shift(&at(v)?, energy, consts, centre), v0, domain)?;
    let modulus = options.derive(|v| log_transmission_modulus(&at(v)?, energy, consts), v0, domain)?;
    Ok(Complex64::new(-consts.hbar * phase.value, -consts.hbar * modulus.value))
}

/// All definitions at once.
///
/// `larmor_second` uses the cot form when the barrier is lossless and
/// `φ1 >= 1e-14`; otherwise it falls back to the log-derivative form.
pub fn time_catalog(barrier: &RectangularBarrier, energy: f64, consts: &PhysicalConstants) -> Result<TimeCatalog> {
    check_tunnelling_regime(energy, barrier.height())?;
    let piecewise = barrier.to_piecewise();
    let dwell = dwell_time(&piecewise, energy, consts)?;
    let buttiker_landauer = buttiker_landauer_time(&piecewise, energy, consts)?;
    let larmor_second = match larmor_second_time(barrier, energy, consts) {
        Ok(t) => t,
        Err(TunnelError::RequiresLossless | TunnelError::PhaseSingular) => buttiker_landauer,
        Err(e) => return Err(e),
    };
    let catalog = TimeCatalog {
        phase_time: phase_time(&piecewise, energy, consts)?,
        phase_time_phi2: phase_time_phi2(barrier, energy, consts)?,
        dwell_time: dwell,
        larmor_first: dwell,
        larmor_second,
        buttiker_landauer,
        feynman_time: feynman_time(barrier, energy, consts)?,
        energy,
        barrier_width: barrier.width(),
    };
    let gap = (catalog.larmor_second - catalog.buttiker_landauer).abs();
    if gap > 1e-8 * catalog.buttiker_landauer.abs().max(1e-300) {
        log::warn!(
            "second Larmor forms disagree at E = {energy}, a = {}: {} vs {}",
            barrier.width(),
            catalog.larmor_second,
            catalog.buttiker_landauer
        );
    }
    Ok(catalog)
}

pub fn opaque_limits(barrier: &RectangularBarrier, energy: f64, consts: &PhysicalConstants) -> Result<OpaqueLimits> {
    let w = wavenumbers(energy, barrier, consts)?;
    Ok(OpaqueLimits {
        phase_limit: 2.0 / (w.velocity * w.kappa),
        dwell_limit: consts.hbar * w.k / (w.kappa * barrier.height()),
        fluctuation_limit: barrier.width() * consts.mass / (consts.hbar * w.kappa),
        divergent: w.kappa * barrier.width() < 1.0,
    })
}
