use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::barrier::{PhysicalConstants, PiecewiseBarrier};
use crate::error::{Result, TunnelError};
use crate::stationary::stationary_wave;

use super::packet::GaussianPacket;

/// Uniform space-time grid. Node `i` sits at `x_min + i h` with
/// `h = (x_max - x_min) / (points - 1)`; `steps` is the step budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub time_step: f64,
    pub steps: usize,
}

/// Knobs for [`Grid::for_run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Nodes per shortest significant wavelength `2π / (|k0| + 6 Δk)`.
    pub points_per_wavelength: f64,
    /// Overrides the automatic time step.
    pub time_step: Option<f64>,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            points_per_wavelength: 256.0,
            time_step: None,
        }
    }
}

/// Minimum resolution accepted by [`Grid::validate`].
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 16.0;
/// Largest accepted CN phase per step, `dt · max|E - E0| / ħ`, over the packet spectrum.
pub const MAX_PHASE_PER_STEP: f64 = 0.5;

impl Grid {
    pub fn new(x_min: f64, x_max: f64, points: usize, time_step: f64, steps: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(TunnelError::InvalidParameter(format!(
                "grid needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if points < 16 {
            return Err(TunnelError::InvalidParameter(format!("grid needs at least 16 points, got {points}")));
        }
        if !(time_step.is_finite() && time_step > 0.0) {
            return Err(TunnelError::InvalidParameter(format!("time step must be positive, got {time_step}")));
        }
        Ok(Self {
            x_min,
            x_max,
            points,
            time_step,
            steps,
        })
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    /// Nearest node to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.spacing()).round();
        i.clamp(0.0, (self.points - 1) as f64) as usize
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.time_step
    }

    /// Same extent with half the spacing, half the time step and twice the steps.
    /// Every node of `self` remains a node.
    pub fn refined(&self) -> Grid {
        Grid {
            points: 2 * self.points - 1,
            time_step: 0.5 * self.time_step,
            steps: 2 * self.steps,
            ..*self
        }
    }

    /// Grid sized for `packet` on `barrier` (occupying `[0, a]`): both barrier
    /// edges fall on nodes, the packet starts `>= 6 Δx` inside the left edge, and
    /// the right edge stays beyond `a + horizon · v0 + 6 Δx` for a horizon long
    /// enough for the slow spectral tail to clear the entry plane.
    pub fn for_run(
        packet: &GaussianPacket,
        barrier: &PiecewiseBarrier,
        consts: &PhysicalConstants,
        options: &GridOptions,
    ) -> Result<Grid> {
        if packet.mean_wavenumber() <= 0.0 {
            return Err(TunnelError::InvalidParameter(
                "automatic grids assume a packet moving to the right".into(),
            ));
        }
        let a = barrier.total_length();
        let w = packet.spatial_width();
        let target = 2.0 * PI / packet.max_wavenumber() / options.points_per_wavelength;
        let h = a / (a / target).ceil();

        let v0 = packet.group_velocity(consts);
        let k0 = packet.mean_wavenumber();
        let slowest = (k0 - 6.0 * packet.wavenumber_spread()).max(0.5 * k0) / k0;
        let spread_at = |t: f64| w * (1.0 + (consts.hbar * t / (2.0 * consts.mass * w * w)).powi(2)).sqrt();
        let ballistic = (a - packet.center()) / v0;
        let delay = barrier_delay_scale(barrier, packet.mean_energy(consts), consts);
        let mut horizon = (a - packet.center() + 8.0 * w) / (v0 * slowest) + delay;
        horizon = (a - packet.center() + 8.0 * spread_at(horizon)) / (v0 * slowest) + delay;
        let horizon = horizon.max(ballistic) * 1.25;

        let left = packet.center() - 12.0 * w;
        let right = a + horizon * v0 + 8.0 * spread_at(horizon);
        let below = (-left / h).ceil();
        let above = ((right - a) / h).ceil();
        let interior = (a / h).round();
        let x_min = -below * h;
        let points = (below + interior + above) as usize + 1;
        let x_max = x_min + (points - 1) as f64 * h;

        let time_step = match options.time_step {
            Some(dt) => dt,
            None => default_time_step(packet, consts, h),
        };
        let steps = (horizon / time_step).ceil() as usize;
        let grid = Grid::new(x_min, x_max, points, time_step, steps)?;
        grid.validate(packet, barrier, consts)?;
        Ok(grid)
    }

    /// Checks the resolution and extent invariants for a run of `packet` on `barrier`.
    pub fn validate(&self, packet: &GaussianPacket, barrier: &PiecewiseBarrier, consts: &PhysicalConstants) -> Result<()> {
        let h = self.spacing();
        let limit = 2.0 * PI / packet.max_wavenumber() / MIN_POINTS_PER_WAVELENGTH;
        if h > limit {
            return Err(TunnelError::GridUnderResolved(format!(
                "spacing {h} exceeds {limit} (16 points per shortest wavelength)"
            )));
        }
        let phase = self.time_step * max_energy_offset(packet, consts) / consts.hbar;
        if phase > MAX_PHASE_PER_STEP {
            return Err(TunnelError::GridUnderResolved(format!(
                "time step {} gives a phase of {phase} rad per step over the packet spectrum (limit {MAX_PHASE_PER_STEP})",
                self.time_step
            )));
        }
        let a = barrier.total_length();
        let w = packet.spatial_width();
        let x0 = packet.center();
        let travel = self.horizon() * packet.group_velocity(consts).abs();
        let (near_edge, far_edge) = if packet.mean_wavenumber() > 0.0 {
            if x0 > -6.0 * w {
                return Err(TunnelError::InvalidParameter(format!(
                    "packet centre {x0} is closer than 6 widths to the barrier at x = 0"
                )));
            }
            (self.x_min < x0 - 6.0 * w, self.x_max > a + travel + 6.0 * w)
        } else {
            if x0 < a + 6.0 * w {
                return Err(TunnelError::InvalidParameter(format!(
                    "packet centre {x0} is closer than 6 widths to the barrier at x = {a}"
                )));
            }
            (self.x_max > x0 + 6.0 * w, self.x_min < -travel - 6.0 * w)
        };
        if !near_edge {
            return Err(TunnelError::GridUnderResolved(format!(
                "grid [{}, {}] does not contain the initial packet within 6 widths",
                self.x_min, self.x_max
            )));
        }
        if !far_edge {
            return Err(TunnelError::GridUnderResolved(format!(
                "grid [{}, {}] is too short for the transmitted packet over a horizon of {}",
                self.x_min,
                self.x_max,
                self.horizon()
            )));
        }
        if self.x_min > 0.0 || self.x_max < a {
            return Err(TunnelError::GridUnderResolved("grid does not cover the barrier".into()));
        }
        Ok(())
    }

    /// Potential sampled at the nodes. Nodes within `1e-6 h` of an interface take
    /// the mean of both sides.
    pub fn sample_potential(&self, barrier: &PiecewiseBarrier) -> Vec<Complex64> {
        let h = self.spacing();
        let tol = 1e-6 * h;
        let mut edges = vec![0.0];
        for s in barrier.segments() {
            edges.push(edges[edges.len() - 1] + s.length);
        }
        let inside = |j: usize| barrier.segments()[j].potential;
        (0..self.points)
            .map(|i| {
                let x = self.node(i);
                if let Some(e) = edges.iter().position(|&e| (x - e).abs() <= tol) {
                    let left = if e == 0 { Complex64::from(0.0) } else { inside(e - 1) };
                    let right = if e == edges.len() - 1 { Complex64::from(0.0) } else { inside(e) };
                    return 0.5 * (left + right);
                }
                if x < 0.0 || x > edges[edges.len() - 1] {
                    return Complex64::from(0.0);
                }
                let j = edges.partition_point(|&e| e < x) - 1;
                inside(j.min(barrier.segments().len() - 1))
            })
            .collect()
    }
}

/// Largest `|E - E0|` over `|k0| ± 6 Δk`.
fn max_energy_offset(packet: &GaussianPacket, consts: &PhysicalConstants) -> f64 {
    let e0 = packet.mean_energy(consts);
    let k0 = packet.mean_wavenumber().abs();
    let dk = 6.0 * packet.wavenumber_spread();
    let low = consts.energy((k0 - dk).max(0.0));
    let high = consts.energy(k0 + dk);
    (high - e0).max(e0 - low)
}

/// Time step resolving the packet's spectral phase and its duration at the
/// probes, capped so that the dispersion of the spatial grid dominates the error.
fn default_time_step(packet: &GaussianPacket, consts: &PhysicalConstants, h: f64) -> f64 {
    let phase_limited = 0.05 * consts.hbar / max_energy_offset(packet, consts);
    let duration = packet.spatial_width() / packet.group_velocity(consts).abs();
    let crossing = h / (consts.hbar * packet.max_wavenumber() / consts.mass);
    phase_limited.min(duration / 400.0).max(crossing)
}

/// Order-of-magnitude tunnelling delay, used only to size the horizon.
fn barrier_delay_scale(barrier: &PiecewiseBarrier, energy: f64, consts: &PhysicalConstants) -> f64 {
    let k = consts.wavenumber(energy);
    let free = barrier.total_length() * consts.mass / (consts.hbar * k);
    let dwell = stationary_wave(barrier, energy, consts)
        .map(|w| consts.mass / (consts.hbar * k) * w.barrier_density())
        .unwrap_or(0.0);
    free.max(dwell) + 4.0 * consts.mass / (consts.hbar * k * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::{RectangularBarrier, Segment};

    #[test]
    fn barrier_edges_are_nodes() {
        let consts = PhysicalConstants::natural();
        let barrier = RectangularBarrier::lossless(1.0, 15.0).unwrap().to_piecewise();
        let packet = GaussianPacket::from_energy(-220.0, 0.5, 0.05, &consts).unwrap();
        let grid = Grid::for_run(&packet, &barrier, &consts, &GridOptions::default()).unwrap();
        let i0 = grid.nearest(0.0);
        let ia = grid.nearest(15.0);
        assert!(grid.node(i0).abs() < 1e-9 * grid.spacing());
        assert!((grid.node(ia) - 15.0).abs() < 1e-9 * grid.spacing());
        let v = grid.sample_potential(&barrier);
        assert_eq!(v[i0].re, 0.5);
        assert_eq!(v[ia].re, 0.5);
        assert_eq!(v[i0 + 1].re, 1.0);
        assert_eq!(v[i0 - 1].re, 0.0);
        assert_eq!(v[ia + 1].re, 0.0);

        let refined = grid.refined();
        assert!((refined.node(2 * ia) - grid.node(ia)).abs() < 1e-9 * grid.spacing());
        assert!(refined.validate(&packet, &barrier, &consts).is_ok());
    }

    #[test]
    fn resolution_is_enforced() {
        let consts = PhysicalConstants::natural();
        let barrier = PiecewiseBarrier::new(vec![Segment::real(1.0, 0.0).unwrap()]).unwrap();
        let packet = GaussianPacket::new(-60.0, 1.0, 5.0).unwrap();
        let coarse = Grid::new(-120.0, 400.0, 1000, 0.1, 100).unwrap();
        assert!(matches!(
            coarse.validate(&packet, &barrier, &consts),
            Err(TunnelError::GridUnderResolved(_))
        ));
        let short = Grid::new(-120.0, 50.0, 10_000, 0.1, 10_000).unwrap();
        assert!(matches!(
            short.validate(&packet, &barrier, &consts),
            Err(TunnelError::GridUnderResolved(_))
        ));
        let slow = Grid::new(-120.0, 400.0, 20_000, 50.0, 4).unwrap();
        assert!(matches!(
            slow.validate(&packet, &barrier, &consts),
            Err(TunnelError::GridUnderResolved(_))
        ));
    }
}
