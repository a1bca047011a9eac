//! Energy spectra used to average stationary quantities over a packet.

use crate::error::{Result, TunnelError};
use crate::numerics::integrate;

/// Energy distribution `|spectrum(E)|²`, not necessarily normalised.
pub trait EnergySpectrum: Sync {
    fn weight(&self, energy: f64) -> f64;

    /// Interval carrying all but a negligible part of the weight.
    fn support(&self) -> (f64, f64);
}

/// Gaussian in energy, truncated at six standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpectrum {
    pub center: f64,
    pub spread: f64,
}

impl GaussianSpectrum {
    pub fn new(center: f64, spread: f64) -> Result<Self> {
        if !(spread > 0.0 && spread.is_finite() && center.is_finite()) {
            return Err(TunnelError::InvalidParameter(format!(
                "Gaussian spectrum needs a finite centre and positive spread, got ({center}, {spread})"
            )));
        }
        Ok(Self { center, spread })
    }
}

impl EnergySpectrum for GaussianSpectrum {
    fn weight(&self, energy: f64) -> f64 {
        let z = (energy - self.center) / self.spread;
        (-0.5 * z * z).exp()
    }

    fn support(&self) -> (f64, f64) {
        (self.center - 6.0 * self.spread, self.center + 6.0 * self.spread)
    }
}

/// Flat spectrum on `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSpectrum {
    pub low: f64,
    pub high: f64,
}

impl UniformSpectrum {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low < high && low.is_finite() && high.is_finite()) {
            return Err(TunnelError::InvalidParameter(format!(
                "uniform spectrum needs low < high, got [{low}, {high}]"
            )));
        }
        Ok(Self { low, high })
    }
}

impl EnergySpectrum for UniformSpectrum {
    fn weight(&self, energy: f64) -> f64 {
        if energy >= self.low && energy <= self.high {
            1.0
        } else {
            0.0
        }
    }

    fn support(&self) -> (f64, f64) {
        (self.low, self.high)
    }
}

pub(crate) fn check_support<S: EnergySpectrum + ?Sized>(spectrum: &S, low: f64, high: f64) -> Result<()> {
    let (a, b) = spectrum.support();
    if a > low && b < high {
        Ok(())
    } else {
        Err(TunnelError::SpectrumOutOfRegime(format!(
            "support [{a}, {b}] is not inside ({low}, {high})"
        )))
    }
}

/// `∫ w f dE` over the support of `spectrum`.
pub fn spectral_integral<S, F>(spectrum: &S, f: F, rel_tol: f64) -> Result<f64>
where
    S: EnergySpectrum + ?Sized,
    F: Fn(f64) -> Result<f64>,
{
    let (a, b) = spectrum.support();
    integrate(|e| Ok(spectrum.weight(e) * f(e)?), a, b, 8, rel_tol)
}

/// `∫ w f dE / ∫ w dE` over the support of `spectrum`.
pub fn spectral_average<S, F>(spectrum: &S, f: F, rel_tol: f64) -> Result<f64>
where
    S: EnergySpectrum + ?Sized,
    F: Fn(f64) -> Result<f64>,
{
    let norm = spectral_integral(spectrum, |_| Ok(1.0), rel_tol)?;
    Ok(spectral_integral(spectrum, f, rel_tol)? / norm)
}
