//! Stationary scattering on piecewise-constant barriers.
//!
//! A wave `exp(ikx)` is incident from the left. To the right of the barrier
//! only the transmitted wave `A_T exp(ikx)` remains; `A_T` therefore carries
//! the `exp(-ika)` factor, and `A_T exp(ika) = psi(a)`. The reflection
//! amplitude is referred to the barrier centre, `A_R = r exp(-ika)` with `r`
//! the coefficient of `exp(-ikx)` for `x < 0`. With these conventions the
//! rectangular barrier obeys
//! `A_T = i sin(phi1) exp(i(phi2 - ka))`, `A_R = cos(phi1) exp(i(phi2 - ka))`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::barrier::{check_tunnelling_regime, PhysicalConstants, PiecewiseBarrier, RectangularBarrier};
use crate::error::{Result, TunnelError};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringAmplitudes {
    pub transmission: Complex64,
    pub reflection: Complex64,
    pub energy: f64,
}

impl ScatteringAmplitudes {
    pub fn transmission_probability(&self) -> f64 {
        self.transmission.norm_sqr()
    }

    pub fn reflection_probability(&self) -> f64 {
        self.reflection.norm_sqr()
    }

    /// `1 - |A_T|² - |A_R|²`, zero for lossless barriers.
    pub fn absorption_probability(&self) -> f64 {
        1.0 - self.transmission_probability() - self.reflection_probability()
    }
}

/// The two phases parametrising the rectangular-barrier amplitudes.
/// Real for lossless barriers, complex under absorption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePair {
    pub phi1: Complex64,
    pub phi2: Complex64,
}

impl PhasePair {
    pub fn is_real(&self) -> bool {
        self.phi1.im == 0.0 && self.phi2.im == 0.0
    }
}

/// Stationary solution with unit incident amplitude.
#[derive(Debug, Clone)]
pub struct StationaryWave {
    k: f64,
    length: f64,
    interfaces: Vec<f64>,
    wavenumbers: Vec<Complex64>,
    /// `(psi, psi')` at every interface, left to right.
    values: Vec<(Complex64, Complex64)>,
    /// Coefficient of `exp(-ikx)` for `x < 0`.
    reflected: Complex64,
    energy: f64,
}

pub fn stationary_wave(
    barrier: &PiecewiseBarrier,
    energy: f64,
    consts: &PhysicalConstants,
) -> Result<StationaryWave> {
    if !(energy > 0.0) {
        return Err(TunnelError::NonPositiveEnergy { energy });
    }
    let k = consts.wavenumber(energy);
    let segments = barrier.segments();
    let wavenumbers: Vec<Complex64> = segments
        .iter()
        .map(|s| consts.local_wavenumber(energy, s.potential))
        .collect();
    if let Some(segment) = wavenumbers.iter().position(|q| *q == Complex64::from(0.0)) {
        return Err(TunnelError::DegenerateSegment { segment, energy });
    }

    // Integrate (psi, psi') from the right edge, where psi = 1, psi' = ik.
    let mut values = vec![(Complex64::from(1.0), I * k); segments.len() + 1];
    for (j, (segment, q)) in segments.iter().zip(&wavenumbers).enumerate().rev() {
        let (psi, dpsi) = values[j + 1];
        let phase = q * segment.length;
        let (cos, sin) = (phase.cos(), phase.sin());
        let prev = (cos * psi - sin / q * dpsi, q * sin * psi + cos * dpsi);
        if !(prev.0.is_finite() && prev.1.is_finite()) {
            return Err(TunnelError::Overflow { segment: j });
        }
        values[j] = prev;
    }
    let (psi0, dpsi0) = values[0];
    let incident = 0.5 * (psi0 + dpsi0 / (I * k));
    let reflected = 0.5 * (psi0 - dpsi0 / (I * k));
    for v in values.iter_mut() {
        v.0 /= incident;
        v.1 /= incident;
    }
    let mut interfaces = Vec::with_capacity(segments.len() + 1);
    let mut x = 0.0;
    interfaces.push(x);
    for s in segments {
        x += s.length;
        interfaces.push(x);
    }
    Ok(StationaryWave {
        k,
        length: x,
        interfaces,
        wavenumbers,
        values,
        reflected: reflected / incident,
        energy,
    })
}

/// `(exp(z) - 1) / z`, continuous at zero.
fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        Complex64::from(1.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        (z.exp() - 1.0) / z
    }
}

impl StationaryWave {
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    /// `A_T`, coefficient of `exp(ikx)` for `x > a`.
    pub fn transmission(&self) -> Complex64 {
        self.reduced_transmission() * Complex64::from_polar(1.0, -self.k * self.length)
    }

    /// `A_T exp(ika) = psi(a)`; its argument is the transmission phase shift.
    pub fn reduced_transmission(&self) -> Complex64 {
        self.values[self.values.len() - 1].0
    }

    /// Reflection amplitude referred to the barrier centre.
    pub fn reflection(&self) -> Complex64 {
        self.reflected * Complex64::from_polar(1.0, -self.k * self.length)
    }

    /// Coefficient of `exp(-ikx)` for `x < 0`.
    pub fn reflection_at_origin(&self) -> Complex64 {
        self.reflected
    }

    pub fn amplitudes(&self) -> ScatteringAmplitudes {
        ScatteringAmplitudes {
            transmission: self.transmission(),
            reflection: self.reflection(),
            energy: self.energy,
        }
    }

    /// Plane-wave coefficients `(A, B)` of segment `j` with
    /// `psi = A exp(iq s) + B exp(-iq (s - L))`, `s` measured from the segment start.
    /// Each wave is referred to the end where it is largest.
    fn segment_coefficients(&self, j: usize) -> (Complex64, Complex64) {
        let q = self.wavenumbers[j];
        let (psi_l, dpsi_l) = self.values[j];
        let (psi_r, dpsi_r) = self.values[j + 1];
        let forward = 0.5 * (psi_l + dpsi_l / (I * q));
        let backward = 0.5 * (psi_r - dpsi_r / (I * q));
        (forward, backward)
    }

    pub fn psi(&self, x: f64) -> Complex64 {
        if x <= 0.0 {
            return Complex64::from_polar(1.0, self.k * x) + self.reflected * Complex64::from_polar(1.0, -self.k * x);
        }
        if x >= self.length {
            return self.reduced_transmission() * Complex64::from_polar(1.0, self.k * (x - self.length));
        }
        let j = self.interfaces.partition_point(|&b| b <= x) - 1;
        let j = j.min(self.wavenumbers.len() - 1);
        let q = self.wavenumbers[j];
        let s = x - self.interfaces[j];
        let length = self.interfaces[j + 1] - self.interfaces[j];
        let (forward, backward) = self.segment_coefficients(j);
        forward * (I * q * s).exp() + backward * (-I * q * (s - length)).exp()
    }

    /// `∫_0^a |psi|² dx`, evaluated segment by segment in closed form.
    pub fn barrier_density(&self) -> f64 {
        (0..self.wavenumbers.len())
            .map(|j| {
                let q = self.wavenumbers[j];
                let length = self.interfaces[j + 1] - self.interfaces[j];
                let (forward, backward) = self.segment_coefficients(j);
                let decay = exprel(Complex64::from(-2.0 * q.im * length)).re * length;
                let cross = forward
                    * backward.conj()
                    * (-I * q.conj() * length).exp()
                    * exprel(2.0 * I * q.re * length)
                    * length;
                (forward.norm_sqr() + backward.norm_sqr()) * decay + 2.0 * cross.re
            })
            .sum()
    }
}

pub fn transfer_matrix_amplitudes(
    barrier: &PiecewiseBarrier,
    energy: f64,
    consts: &PhysicalConstants,
) -> Result<ScatteringAmplitudes> {
    Ok(stationary_wave(barrier, energy, consts)?.amplitudes())
}

/// Mean dwell time `(μ/ħk) ∫_0^a |psi|² dx` for unit incident flux.
pub fn dwell_time(barrier: &PiecewiseBarrier, energy: f64, consts: &PhysicalConstants) -> Result<f64> {
    let wave = stationary_wave(barrier, energy, consts)?;
    Ok(consts.mass / (consts.hbar * wave.wavenumber()) * wave.barrier_density())
}

/// Rectangular-barrier kinematics with complex `κ` when absorptive.
struct RectKinematics {
    k: f64,
    kappa: Complex64,
    width: f64,
}

fn rect_kinematics(barrier: &RectangularBarrier, energy: f64, consts: &PhysicalConstants) -> Result<RectKinematics> {
    check_tunnelling_regime(energy, barrier.height())?;
    let k = consts.wavenumber(energy);
    let kappa = ((barrier.potential() - energy) * (2.0 * consts.mass)).sqrt() / consts.hbar;
    Ok(RectKinematics {
        k,
        kappa,
        width: barrier.width(),
    })
}

/// Phases `phi1`, `phi2` of the rectangular barrier.
///
/// `phi1 = arctan(2σ / ((1 + σ²) sinh κa))` and
/// `phi2 = -π/2 - arctan(((σ² - 1) / 2σ) tanh κa)`, so `phi2` lies in `(-π, 0)`
/// and varies continuously with `a` and `E`. Under absorption `σ = κ/k` is
/// complex and so are both phases.
pub fn phase_decomposition(
    barrier: &RectangularBarrier,
    energy: f64,
    consts: &PhysicalConstants,
) -> Result<PhasePair> {
    let RectKinematics { k, kappa, width } = rect_kinematics(barrier, energy, consts)?;
    if barrier.is_lossless() {
        let (kappa, sigma) = (kappa.re, kappa.re / k);
        let ka = kappa * width;
        let phi1 = (2.0 * sigma / ((1.0 + sigma * sigma) * ka.sinh())).atan();
        let skew = (sigma * sigma - 1.0) / (2.0 * sigma);
        let phi2 = -FRAC_PI_2 - (skew * ka.tanh()).atan();
        return Ok(PhasePair {
            phi1: phi1.into(),
            phi2: phi2.into(),
        });
    }
    let sigma = kappa / k;
    let ka = kappa * width;
    let one = Complex64::from(1.0);
    let phi1 = (2.0 * sigma / ((one + sigma * sigma) * ka.sinh())).atan();
    let skew = (sigma * sigma - 1.0) / (2.0 * sigma);
    let phi2 = -FRAC_PI_2 - (skew * ka.tanh()).atan();
    Ok(PhasePair { phi1, phi2 })
}

/// Amplitudes assembled from [`phase_decomposition`].
pub fn rect_amplitudes_closed_form(
    barrier: &RectangularBarrier,
    energy: f64,
    consts: &PhysicalConstants,
) -> Result<ScatteringAmplitudes> {
    let PhasePair { phi1, phi2 } = phase_decomposition(barrier, energy, consts)?;
    let ka = consts.wavenumber(energy) * barrier.width();
    let carrier = (I * (phi2 - ka)).exp();
    let unit = (I * phi1).exp();
    // Im/Re of exp(i phi1), continued analytically: sin(phi1) and cos(phi1).
    let (sin, cos) = if barrier.is_lossless() {
        (Complex64::from(unit.im), Complex64::from(unit.re))
    } else {
        (phi1.sin(), phi1.cos())
    };
    Ok(ScatteringAmplitudes {
        transmission: I * sin * carrier,
        reflection: cos * carrier,
        energy,
    })
}

/// Closed-form `d phi2 / dE` for a lossless rectangular barrier.
pub fn phi2_energy_derivative(
    barrier: &RectangularBarrier,
    energy: f64,
    consts: &PhysicalConstants,
) -> Result<f64> {
    if !barrier.is_lossless() {
        return Err(TunnelError::RequiresLossless);
    }
    let RectKinematics { k, kappa, width } = rect_kinematics(barrier, energy, consts)?;
    let kappa = kappa.re;
    let scale = consts.mass / (consts.hbar * consts.hbar);
    let dk = scale / k;
    let dkappa = -scale / kappa;
    let skew = 0.5 * (kappa / k - k / kappa);
    let dskew = 0.5 * ((dkappa * k - kappa * dk) / (k * k) - (dk * kappa - k * dkappa) / (kappa * kappa));
    let ka = kappa * width;
    let tanh = ka.tanh();
    let sech2 = 1.0 / ka.cosh().powi(2);
    let u = skew * tanh;
    let du = dskew * tanh + skew * width * sech2 * dkappa;
    Ok(-du / (1.0 + u * u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::Segment;

    fn unit() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    fn rect(width: f64) -> RectangularBarrier {
        RectangularBarrier::lossless(1.0, width).unwrap()
    }

    #[test]
    fn opaque_transmission_matches_reference() {
        // 1 / cosh²(5), mpmath at 50 digits.
        let amps = transfer_matrix_amplitudes(&rect(5.0).to_piecewise(), 0.5, &unit()).unwrap();
        let expected = 1.815_832_309_438_066_8e-4;
        assert!((amps.transmission_probability() - expected).abs() < 1e-15);
        assert!((amps.transmission_probability() + amps.reflection_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_width_is_transparent() {
        let amps = transfer_matrix_amplitudes(&rect(1e-9).to_piecewise(), 0.5, &unit()).unwrap();
        assert!((amps.transmission - Complex64::from(1.0)).norm() < 1e-8);
        assert!(amps.reflection.norm() < 1e-8);
        let closed = rect_amplitudes_closed_form(&rect(1e-9), 0.5, &unit()).unwrap();
        assert!((closed.transmission - Complex64::from(1.0)).norm() < 1e-8);
        assert!(closed.reflection.norm() < 1e-8);
    }

    #[test]
    fn stacked_halves_match_single_segment() {
        let single = transfer_matrix_amplitudes(&rect(5.0).to_piecewise(), 0.3, &unit()).unwrap();
        let halves = transfer_matrix_amplitudes(&rect(5.0).to_piecewise().subdivided(2), 0.3, &unit()).unwrap();
        assert!((single.transmission - halves.transmission).norm() < 1e-12 * single.transmission.norm());
        assert!((single.reflection - halves.reflection).norm() < 1e-12);
    }

    #[test]
    fn degenerate_segment_is_an_error() {
        let b = PiecewiseBarrier::new(vec![Segment::real(1.0, 0.5).unwrap()]).unwrap();
        assert_eq!(
            transfer_matrix_amplitudes(&b, 0.5, &unit()),
            Err(TunnelError::DegenerateSegment { segment: 0, energy: 0.5 })
        );
        assert!(transfer_matrix_amplitudes(&b, 0.5 + 1e-9, &unit()).is_ok());
        assert!(matches!(
            transfer_matrix_amplitudes(&b, 0.0, &unit()),
            Err(TunnelError::NonPositiveEnergy { .. })
        ));
    }

    #[test]
    fn phase_values_at_unit_sigma() {
        let pair = phase_decomposition(&rect(5.0), 0.5, &unit()).unwrap();
        assert!(pair.is_real());
        // arctan(1 / sinh 5), mpmath.
        assert!((pair.phi1.re - 0.013_475_690_068_845_597).abs() < 1e-15);
        assert!((pair.phi1.re.sin() - 0.013_475_282_221_304_557).abs() < 1e-15);
        assert!((pair.phi2.re + FRAC_PI_2).abs() < 1e-15);
        let tm = transfer_matrix_amplitudes(&rect(5.0).to_piecewise(), 0.5, &unit()).unwrap();
        assert!((pair.phi1.re.sin().powi(2) - tm.transmission_probability()).abs() < 1e-10);
    }

    #[test]
    fn opaque_phases_become_width_independent() {
        for sigma in [0.5f64, 1.0, 2.0] {
            let k = (2.0 / (1.0 + sigma * sigma)).sqrt();
            let energy = 0.5 * k * k;
            let kappa = sigma * k;
            let pair = phase_decomposition(&rect(40.0 / kappa), energy, &unit()).unwrap();
            assert!(pair.phi1.re < 1e-16);
            // tan(phi2) -> 2σ / (σ² - 1)
            let expected = if sigma == 1.0 { f64::INFINITY } else { 2.0 * sigma / (sigma * sigma - 1.0) };
            if expected.is_finite() {
                assert!((pair.phi2.re.tan() - expected).abs() < 1e-12);
            } else {
                assert!((pair.phi2.re + FRAC_PI_2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_form_matches_transfer_matrix_at_unit_sigma() {
        let tm = transfer_matrix_amplitudes(&rect(5.0).to_piecewise(), 0.5, &unit()).unwrap();
        let cf = rect_amplitudes_closed_form(&rect(5.0), 0.5, &unit()).unwrap();
        assert!((tm.transmission - cf.transmission).norm() < 1e-10);
        assert!((tm.reflection - cf.reflection).norm() < 1e-10);
    }

    #[test]
    fn phase_convention_shift_is_quarter_turn_plus_phi2() {
        // arg A_T + ka = π/2 + phi2
        for (energy, width) in [(0.2, 1.0), (0.5, 5.0), (0.9, 2.5)] {
            let b = rect(width);
            let wave = stationary_wave(&b.to_piecewise(), energy, &unit()).unwrap();
            let pair = phase_decomposition(&b, energy, &unit()).unwrap();
            let shift = wave.reduced_transmission().arg();
            assert!((shift - (FRAC_PI_2 + pair.phi2.re)).abs() < 1e-12);
            let direct = wave.transmission().arg() + wave.wavenumber() * width;
            assert!((crate::numerics::unwrap_near(shift, direct) - shift).abs() < 1e-12);
        }
    }

    #[test]
    fn absorptive_closed_form_matches_transfer_matrix() {
        for absorption in [1e-3, 0.05, 0.3] {
            let b = RectangularBarrier::new(1.0, 4.0, absorption).unwrap();
            let tm = transfer_matrix_amplitudes(&b.to_piecewise(), 0.4, &unit()).unwrap();
            let cf = rect_amplitudes_closed_form(&b, 0.4, &unit()).unwrap();
            assert!(!phase_decomposition(&b, 0.4, &unit()).unwrap().is_real());
            assert!((tm.transmission - cf.transmission).norm() < 1e-10, "{absorption}");
            assert!((tm.reflection - cf.reflection).norm() < 1e-10, "{absorption}");
            assert!(tm.absorption_probability() > 0.0);
        }
    }

    #[test]
    fn dwell_time_reference_values() {
        // mpmath quadrature of |psi|² / k.
        let d = dwell_time(&rect(5.0).to_piecewise(), 0.5, &unit()).unwrap();
        assert!((d - 0.999_909_204_262_595_1).abs() < 1e-10);
        let d = dwell_time(&rect(20.0).to_piecewise(), 0.5, &unit()).unwrap();
        assert!((d - 1.0).abs() < 1e-10);
        let d = dwell_time(&rect(3.0).to_piecewise(), 0.8, &unit()).unwrap();
        assert!((d - 1.770_974_996_066_891_7).abs() < 1e-10);
        let d = dwell_time(&rect(1e-9).to_piecewise(), 0.5, &unit()).unwrap();
        assert!(d.abs() < 1e-8);
    }

    #[test]
    fn dwell_density_agrees_with_pointwise_quadrature() {
        // Composite Simpson over psi(x) sampled from the same solution.
        let b = RectangularBarrier::lossless(1.0, 3.0)
            .unwrap()
            .to_piecewise()
            .then(&PiecewiseBarrier::new(vec![Segment::new(2.0, Complex64::new(0.2, -0.05)).unwrap()]).unwrap());
        let wave = stationary_wave(&b, 0.6, &unit()).unwrap();
        let n = 20_000;
        let h = 5.0 / n as f64;
        let simpson: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * wave.psi(i as f64 * h).norm_sqr()
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((wave.barrier_density() - simpson).abs() < 1e-10 * simpson);
    }

    #[test]
    fn wavefunction_is_continuous_at_interfaces() {
        let b = rect(2.0).to_piecewise().then(&rect(1.0).with_height(2.0).unwrap().to_piecewise());
        let wave = stationary_wave(&b, 0.7, &unit()).unwrap();
        for x in [0.0, 2.0, 3.0] {
            let (l, r) = (wave.psi(x - 1e-12), wave.psi(x + 1e-12));
            assert!((l - r).norm() < 1e-9, "{x}");
        }
    }

    #[test]
    fn phi2_derivative_reference_values() {
        let b = rect(5.0);
        let analytic = phi2_energy_derivative(&b, 0.5, &unit()).unwrap();
        // Frozen mpmath phase time at (V0=1, E=0.5, a=5).
        assert!((analytic - 1.999_818_408_525_190_3).abs() < 1e-12);
        let b = rect(3.0);
        assert!((phi2_energy_derivative(&b, 0.2, &unit()).unwrap() - 2.501_593_245_714_838_5).abs() < 1e-12);
        assert!((phi2_energy_derivative(&b, 0.8, &unit()).unwrap() - 2.264_260_311_014_100_6).abs() < 1e-12);
    }
}
