use num_complex::Complex64;

use crate::barrier::{PhysicalConstants, PiecewiseBarrier};
use crate::error::{Result, TunnelError};

use super::grid::Grid;
use super::packet::GaussianPacket;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Crank–Nicolson stepper for `iħ ∂ψ/∂t = (H - E_s) ψ` with the three-point
/// Laplacian and hard walls. The constant shift `E_s` only rotates the global
/// phase; it keeps the per-step phase of the packet's spectrum small.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Grid,
    hbar: f64,
    mass: f64,
    psi: Vec<Complex64>,
    rhs: Vec<Complex64>,
    diag: Vec<Complex64>,
    off: Complex64,
    /// Thomas factors: `upper[i] = c / pivot_i`, `inv_pivot[i] = 1 / pivot_i`.
    upper: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
    previous: Vec<Complex64>,
    time: f64,
    lossless: bool,
}

impl Propagator {
    pub fn new(grid: &Grid, barrier: &PiecewiseBarrier, consts: &PhysicalConstants, energy_shift: f64) -> Self {
        let h = grid.spacing();
        let dt = grid.time_step;
        let kinetic = consts.hbar * consts.hbar / (2.0 * consts.mass * h * h);
        let factor = I * dt / (2.0 * consts.hbar);
        let potential = grid.sample_potential(barrier);
        let off = -factor * kinetic;
        let diag: Vec<Complex64> = potential
            .iter()
            .map(|v| 1.0 + factor * (2.0 * kinetic + v - energy_shift))
            .collect();

        // Interior nodes 1..n-2; the walls stay at zero.
        let n = grid.points;
        let mut upper = vec![Complex64::from(0.0); n];
        let mut inv_pivot = vec![Complex64::from(0.0); n];
        for i in 1..n - 1 {
            let pivot = if i == 1 { diag[i] } else { diag[i] - off * upper[i - 1] };
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = off * inv_pivot[i];
        }
        Self {
            grid: *grid,
            hbar: consts.hbar,
            mass: consts.mass,
            psi: vec![Complex64::from(0.0); n],
            rhs: vec![Complex64::from(0.0); n],
            diag,
            off,
            upper,
            inv_pivot,
            previous: vec![Complex64::from(0.0); n],
            time: 0.0,
            lossless: barrier.is_lossless(),
        }
    }

    /// Samples `packet` on the nodes and rescales it to unit discrete norm.
    pub fn load(&mut self, packet: &GaussianPacket) {
        let n = self.grid.points;
        for i in 1..n - 1 {
            self.psi[i] = packet.amplitude(self.grid.node(i));
        }
        self.psi[0] = Complex64::from(0.0);
        self.psi[n - 1] = Complex64::from(0.0);
        let norm = self.norm().sqrt();
        for v in self.psi.iter_mut() {
            *v /= norm;
        }
        self.previous.copy_from_slice(&self.psi);
        self.time = 0.0;
    }

    pub fn set_state(&mut self, psi: &[Complex64]) {
        self.psi.copy_from_slice(psi);
        self.previous.copy_from_slice(psi);
        self.time = 0.0;
    }

    pub fn state(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn is_lossless(&self) -> bool {
        self.lossless
    }

    pub fn step(&mut self) {
        let n = self.grid.points;
        let (psi, rhs, off) = (&mut self.psi, &mut self.rhs, self.off);
        self.previous.copy_from_slice(psi);
        // rhs = (2 - A) psi, then A psi_new = rhs.
        for i in 1..n - 1 {
            let a_psi = self.diag[i] * psi[i] + off * (psi[i - 1] + psi[i + 1]);
            rhs[i] = 2.0 * psi[i] - a_psi;
        }
        let mut carry = Complex64::from(0.0);
        for i in 1..n - 1 {
            carry = (rhs[i] - off * carry) * self.inv_pivot[i];
            rhs[i] = carry;
        }
        let mut next = Complex64::from(0.0);
        for i in (1..n - 1).rev() {
            next = rhs[i] - self.upper[i] * next;
            psi[i] = next;
        }
        self.time += self.grid.time_step;
    }

    /// `h Σ |ψ_i|²`
    pub fn norm(&self) -> f64 {
        self.grid.spacing() * self.psi.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `(⟨x⟩, sqrt(⟨x²⟩ - ⟨x⟩²))` of the normalised density.
    pub fn position_moments(&self) -> (f64, f64) {
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (i, v) in self.psi.iter().enumerate() {
            let x = self.grid.node(i);
            let p = v.norm_sqr();
            m0 += p;
            m1 += p * x;
            m2 += p * x * x;
        }
        let mean = m1 / m0;
        (mean, (m2 / m0 - mean * mean).max(0.0).sqrt())
    }

    /// Current between nodes `i` and `i + 1` consistent with the last step:
    /// `(ħ / μ h) Im(ψ̄_i* ψ̄_{i+1})`, `ψ̄` the average of the two time levels.
    /// With it the discrete continuity equation holds to rounding.
    pub fn link_current(&self, i: usize) -> f64 {
        let avg = |j: usize| 0.5 * (self.psi[j] + self.previous[j]);
        self.hbar / (self.mass * self.grid.spacing()) * (avg(i).conj() * avg(i + 1)).im
    }

    /// `h Σ_{i=lo}^{hi} |ψ_i|²` at the current and previous time levels.
    pub fn partial_norms(&self, lo: usize, hi: usize) -> (f64, f64) {
        let h = self.grid.spacing();
        let now = self.psi[lo..=hi].iter().map(|v| v.norm_sqr()).sum::<f64>() * h;
        let before = self.previous[lo..=hi].iter().map(|v| v.norm_sqr()).sum::<f64>() * h;
        (now, before)
    }

    /// Flux `(ħ/μ) Im(ψ* ∂ψ/∂x)` at node `i` with the fourth-order central derivative.
    pub fn flux_at(&self, i: usize) -> f64 {
        flux_from_stencil(&self.stencil(i), self.grid.spacing(), self.hbar, self.mass)
    }

    pub fn stencil(&self, i: usize) -> [Complex64; 5] {
        [self.psi[i - 2], self.psi[i - 1], self.psi[i], self.psi[i + 1], self.psi[i + 2]]
    }
}

pub(crate) fn flux_from_stencil(s: &[Complex64; 5], h: f64, hbar: f64, mass: f64) -> f64 {
    let derivative = (s[0] - 8.0 * s[1] + 8.0 * s[3] - s[4]) / (12.0 * h);
    hbar / mass * (s[2].conj() * derivative).im
}

/// When to stop an [`evolve`] run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Run until the flux at every probe has stayed below `1e-6 max|J|` for a
    /// trailing window of two packet durations, within the step budget.
    UntilTailsDecay,
    /// Exactly this many steps.
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    /// Planes at which `ψ` stencils are recorded every step.
    pub probes: Vec<f64>,
    pub stop: StopRule,
    /// Free-space interval `[x1, x2]` for the continuity audit.
    pub audit: Option<(f64, f64)>,
    /// Record `⟨x⟩` and the width every this many steps (0 disables).
    pub moment_interval: usize,
}

impl EvolveOptions {
    /// Probes at both barrier edges, tail-decay stopping, no audit.
    pub fn for_barrier(barrier: &PiecewiseBarrier) -> Self {
        Self {
            probes: vec![0.0, barrier.total_length()],
            stop: StopRule::UntilTailsDecay,
            audit: None,
            moment_interval: 0,
        }
    }
}

/// Recorded `ψ` stencils at one plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTrace {
    pub plane: f64,
    pub node: usize,
    pub stencils: Vec<[Complex64; 5]>,
}

/// Worst continuity-equation residual seen over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityAudit {
    pub interval: (f64, f64),
    /// `max |dN/dt + J(x2) - J(x1)|`
    pub max_residual: f64,
    /// `max |J|` at the two interval ends.
    pub max_flux: f64,
}

/// Everything recorded during an [`evolve`] run.
#[derive(Debug, Clone)]
pub struct History {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub probes: Vec<ProbeTrace>,
    pub norms: Vec<f64>,
    /// `(t, ⟨x⟩, width)` every `moment_interval` steps.
    pub moments: Vec<(f64, f64, f64)>,
    pub audit: Option<ContinuityAudit>,
    pub final_state: Vec<Complex64>,
    pub hbar: f64,
    pub mass: f64,
    pub lossless: bool,
}

impl History {
    pub fn probe(&self, plane: f64) -> Result<&ProbeTrace> {
        let tol = 1e-6 * self.grid.spacing();
        self.probes
            .iter()
            .find(|p| (p.plane - plane).abs() <= tol)
            .ok_or(TunnelError::UnknownProbe(plane))
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Propagates `packet` across `barrier` on `grid`.
pub fn evolve(
    packet: &GaussianPacket,
    barrier: &PiecewiseBarrier,
    grid: &Grid,
    consts: &PhysicalConstants,
    options: &EvolveOptions,
) -> Result<History> {
    grid.validate(packet, barrier, consts)?;
    let top = barrier.top();
    if top > 0.0 {
        let above = packet.fraction_above(top, consts);
        if above > 1e-3 {
            log::warn!("{above:.3e} of the packet spectrum lies above the barrier top {top}");
        }
    }

    let mut stepper = Propagator::new(grid, barrier, consts, packet.mean_energy(consts));
    stepper.load(packet);

    let h = grid.spacing();
    let n = grid.points;
    let mut probes = Vec::with_capacity(options.probes.len());
    for &plane in &options.probes {
        let node = grid.nearest(plane);
        if (grid.node(node) - plane).abs() > 0.5 * h + 1e-9 * h || node < 6 || node + 6 >= n {
            return Err(TunnelError::InvalidParameter(format!(
                "probe plane {plane} must lie inside the grid, at least 6 nodes from its edges"
            )));
        }
        probes.push(ProbeTrace {
            plane,
            node,
            stencils: Vec::new(),
        });
    }
    let audit_nodes = match options.audit {
        Some((x1, x2)) => {
            let (lo, hi) = (grid.nearest(x1), grid.nearest(x2));
            if !(lo >= 1 && hi + 1 < n && lo < hi) {
                return Err(TunnelError::InvalidParameter(format!("audit interval [{x1}, {x2}] not inside the grid")));
            }
            Some((lo, hi))
        }
        None => None,
    };

    let v0 = packet.group_velocity(consts).abs();
    let duration = packet.spatial_width() / v0;
    let window = ((2.0 * duration / grid.time_step).ceil() as usize).max(10);
    let crossing_cap = (10.0 * (grid.x_max - grid.x_min) / v0 / grid.time_step).ceil() as usize;
    let budget = match options.stop {
        StopRule::Fixed(steps) => {
            if steps > grid.steps {
                return Err(TunnelError::InvalidParameter(format!(
                    "{steps} steps exceed the grid budget of {}",
                    grid.steps
                )));
            }
            steps
        }
        StopRule::UntilTailsDecay => grid.steps.min(crossing_cap),
    };
    let arrival: Vec<usize> = probes
        .iter()
        .map(|p| ((p.plane - packet.center()).abs() / v0 / grid.time_step) as usize)
        .collect();

    let record = |stepper: &Propagator, probes: &mut Vec<ProbeTrace>, fluxes: &mut Vec<Vec<f64>>| {
        for (p, series) in probes.iter_mut().zip(fluxes.iter_mut()) {
            let s = stepper.stencil(p.node);
            series.push(flux_from_stencil(&s, h, consts.hbar, consts.mass));
            p.stencils.push(s);
        }
    };

    let mut fluxes: Vec<Vec<f64>> = vec![Vec::new(); probes.len()];
    let mut times = vec![0.0];
    let mut norms = vec![stepper.norm()];
    let mut moments = Vec::new();
    if options.moment_interval > 0 {
        let (m, w) = stepper.position_moments();
        moments.push((0.0, m, w));
    }
    record(&stepper, &mut probes, &mut fluxes);
    let mut audit = options.audit.map(|interval| ContinuityAudit {
        interval,
        max_residual: 0.0,
        max_flux: 0.0,
    });

    let mut finished = false;
    for step in 1..=budget {
        stepper.step();
        times.push(stepper.time());
        let norm = stepper.norm();
        norms.push(norm);
        if stepper.is_lossless() && (norm - 1.0).abs() > 1e-8 {
            return Err(TunnelError::NormDrift { drift: norm - 1.0 });
        }
        record(&stepper, &mut probes, &mut fluxes);
        if options.moment_interval > 0 && step % options.moment_interval == 0 {
            let (m, w) = stepper.position_moments();
            moments.push((stepper.time(), m, w));
        }
        if let (Some(a), Some((lo, hi))) = (audit.as_mut(), audit_nodes) {
            let (now, before) = stepper.partial_norms(lo, hi);
            let inflow = stepper.link_current(lo - 1);
            let outflow = stepper.link_current(hi);
            let residual = (now - before) / grid.time_step + outflow - inflow;
            a.max_residual = a.max_residual.max(residual.abs());
            a.max_flux = a.max_flux.max(inflow.abs()).max(outflow.abs());
        }
        if options.stop == StopRule::UntilTailsDecay && step % 25 == 0 {
            let decayed = fluxes.iter().zip(&arrival).all(|(series, &arrive)| {
                if step < arrive + window {
                    return false;
                }
                let peak = series.iter().fold(0.0f64, |m, j| m.max(j.abs()));
                let recent = series[series.len() - window..].iter().fold(0.0f64, |m, j| m.max(j.abs()));
                peak > 0.0 && recent < 1e-6 * peak
            });
            if decayed {
                finished = true;
                break;
            }
        }
    }
    if options.stop == StopRule::UntilTailsDecay && !finished {
        return Err(TunnelError::HorizonExceeded { steps: budget });
    }

    Ok(History {
        grid: *grid,
        times,
        probes,
        norms,
        moments,
        audit,
        final_state: stepper.state().to_vec(),
        hbar: consts.hbar,
        mass: consts.mass,
        lossless: barrier.is_lossless(),
    })
}
