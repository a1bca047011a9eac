//! Finite-difference derivatives with Richardson extrapolation, phase
//! unwrapping and a thin wrapper over double-exponential quadrature.

use std::cell::RefCell;
use std::f64::consts::PI;

use crate::error::{Result, TunnelError};

/// Central-difference stencil accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilOrder {
    Second,
    Fourth,
}

/// A derivative estimate and the gap between the two Richardson levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

/// Central difference of `f` at `x` with one Richardson level.
///
/// The stencil spans `[x - 2 step, x + 2 step]`, which must lie strictly
/// inside `domain`. The fourth-order rule combines step sizes `step` and
/// `step / 2`; the second-order rule combines `2 step` and `step`.
pub fn central_derivative<F>(
    mut f: F,
    x: f64,
    step: f64,
    order: StencilOrder,
    domain: (f64, f64),
) -> Result<Derivative>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(TunnelError::InvalidParameter(format!(
            "derivative step must be positive, got {step}"
        )));
    }
    let (low, high) = (x - 2.0 * step, x + 2.0 * step);
    if !(low > domain.0 && high < domain.1) {
        return Err(TunnelError::StepOutOfRegime {
            low,
            high,
            min: domain.0,
            max: domain.1,
        });
    }
    let (coarse, fine, gain) = match order {
        StencilOrder::Second => {
            let d = |f: &mut F, h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
            (d(&mut f, 2.0 * step)?, d(&mut f, step)?, 4.0)
        }
        StencilOrder::Fourth => {
            let d = |f: &mut F, h: f64| -> Result<f64> {
                Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?)
                    / (12.0 * h))
            };
            (d(&mut f, step)?, d(&mut f, 0.5 * step)?, 16.0)
        }
    };
    let value = (gain * fine - coarse) / (gain - 1.0);
    Ok(Derivative {
        value,
        error: (value - fine).abs(),
    })
}

/// Default energy step `1e-4 * min(E - low, high - E)` inside `(low, high)`.
pub fn default_step(x: f64, domain: (f64, f64)) -> f64 {
    1e-4 * (x - domain.0).min(domain.1 - x)
}

/// `value + 2πn` closest to `reference`.
pub fn unwrap_near(reference: f64, value: f64) -> f64 {
    value + 2.0 * PI * ((reference - value) / (2.0 * PI)).round()
}

/// Integral of `f` over `[a, b]` split into `panels` equal pieces, each by
/// double-exponential quadrature, to relative accuracy `rel_tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, panels: usize, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<TunnelError>> = RefCell::new(None);
    let wrapped = |x: f64| -> f64 {
        if failure.borrow().is_some() {
            return 0.0;
        }
        match f(x) {
            Ok(v) => v,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let bounds = |i: usize| (a + i as f64 * width, if i + 1 == panels { b } else { a + (i + 1) as f64 * width });

    // A coarse pass fixes the absolute target for the requested relative accuracy.
    let coarse: f64 = (0..panels)
        .map(|i| {
            let (lo, hi) = bounds(i);
            quadrature::integrate(wrapped, lo, hi, 1e-3 * width.abs()).integral
        })
        .sum();
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let target = (rel_tol * coarse.abs()).max(f64::MIN_POSITIVE);
    let mut value = 0.0;
    let mut error = 0.0;
    for i in 0..panels {
        let (lo, hi) = bounds(i);
        let out = quadrature::integrate(wrapped, lo, hi, target / panels as f64);
        value += out.integral;
        error += out.error_estimate;
    }
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    if !(error <= 10.0 * target) || !value.is_finite() {
        return Err(TunnelError::Quadrature { value, error });
    }
    Ok(value)
}
