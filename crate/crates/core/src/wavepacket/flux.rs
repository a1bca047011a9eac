use serde::{Deserialize, Serialize};

use crate::error::{Result, TunnelError};

use super::propagate::{flux_from_stencil, History};

/// Flux `J(x, t)` at one plane with its sign split `J = J₊ + J₋`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxRecord {
    pub plane: f64,
    pub times: Vec<f64>,
    pub flux: Vec<f64>,
    pub positive_part: Vec<f64>,
    pub negative_part: Vec<f64>,
}

impl FluxRecord {
    pub fn new(plane: f64, times: Vec<f64>, flux: Vec<f64>) -> Result<Self> {
        if times.len() != flux.len() || times.len() < 2 {
            return Err(TunnelError::InvalidParameter(format!(
                "flux record needs matching series of at least two samples, got {} times and {} values",
                times.len(),
                flux.len()
            )));
        }
        let positive_part = flux.iter().map(|j| j.max(0.0)).collect();
        let negative_part = flux.iter().map(|j| j.min(0.0)).collect();
        Ok(Self {
            plane,
            times,
            flux,
            positive_part,
            negative_part,
        })
    }

    pub fn peak(&self) -> f64 {
        self.flux.iter().fold(0.0f64, |m, j| m.max(j.abs()))
    }

    /// `|J(t_final)| / max|J|`
    pub fn tail_ratio(&self) -> f64 {
        let peak = self.peak();
        if peak == 0.0 {
            return 0.0;
        }
        self.flux[self.flux.len() - 1].abs() / peak
    }

    fn series(&self, sign: FluxSign) -> &[f64] {
        match sign {
            FluxSign::Positive => &self.positive_part,
            FluxSign::Negative => &self.negative_part,
        }
    }

    /// Trapezoidal `∫ f(t) J dt` for the chosen series.
    fn integrate<F: Fn(f64) -> f64>(&self, values: &[f64], f: F) -> f64 {
        self.times
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, j)| 0.5 * (t[1] - t[0]) * (f(t[0]) * j[0] + f(t[1]) * j[1]))
            .sum()
    }

    /// `∫ J_sign dt`
    pub fn integral(&self, sign: FluxSign) -> f64 {
        self.integrate(self.series(sign), |_| 1.0)
    }

    pub fn net_integral(&self) -> f64 {
        self.integrate(&self.flux, |_| 1.0)
    }
}

/// Extracts the flux record at `plane` and checks that its tail has decayed.
pub fn flux_series(history: &History, plane: f64) -> Result<FluxRecord> {
    let record = flux_series_unchecked(history, plane)?;
    let ratio = record.tail_ratio();
    if ratio >= 1e-6 {
        return Err(TunnelError::TailNotDecayed { plane, ratio });
    }
    Ok(record)
}

/// As [`flux_series`] without the tail condition, for truncated runs.
pub fn flux_series_unchecked(history: &History, plane: f64) -> Result<FluxRecord> {
    let probe = history.probe(plane)?;
    let h = history.grid.spacing();
    let flux = probe
        .stencils
        .iter()
        .map(|s| flux_from_stencil(s, h, history.hbar, history.mass))
        .collect();
    FluxRecord::new(probe.plane, history.times.clone(), flux)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FluxSign {
    Positive,
    Negative,
}

/// Normalisation of presence-time moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MomentDenominator {
    /// `∫ J_sign dt`: moments of a probability distribution.
    #[default]
    Signed,
    /// `∫ J dt`, the net flux.
    Net,
}

/// `∫ tⁿ J_sign dt / ∫ J_sign dt` (or over `∫ J dt`).
///
/// Fails with `VanishingFlux` when the denominator is not above `1e-12` of
/// `∫ |J| dt`; the threshold is relative so that strongly attenuated
/// transmitted fluxes remain usable.
pub fn presence_moment(record: &FluxRecord, sign: FluxSign, order: u32, denominator: MomentDenominator) -> Result<f64> {
    if order == 0 {
        return Err(TunnelError::InvalidParameter("moment order must be at least 1".into()));
    }
    let values = record.series(sign);
    let scale = record.integrate(&record.flux.iter().map(|j| j.abs()).collect::<Vec<_>>(), |_| 1.0);
    let norm = match denominator {
        MomentDenominator::Signed => record.integrate(values, |_| 1.0),
        MomentDenominator::Net => record.net_integral(),
    };
    if !(norm.abs() > 1e-12 * scale) || scale == 0.0 {
        return Err(TunnelError::VanishingFlux { plane: record.plane });
    }
    Ok(record.integrate(values, |t| t.powi(order as i32)) / norm)
}

/// Presence-time statistics of a tunnelling run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStatistics {
    /// `⟨t₊(0)⟩`
    pub mean_entry: f64,
    /// `⟨t₊(a)⟩`
    pub mean_exit: f64,
    /// `⟨t₊(a)⟩ - ⟨t₊(0)⟩`
    pub mean_tunnelling: f64,
    /// `⟨τ²⟩ - ⟨τ⟩²`
    pub variance: f64,
    /// `D t₊(0)`
    pub entry_variance: f64,
    /// `Dτ - D t₊(0)`, reported with its sign.
    pub dynamical_variance: f64,
    /// `⟨[t₊(a) - ⟨t₊(0)⟩]²⟩ + D t₊(0)`
    pub second_moment: f64,
    /// `∫|J₋(0)| dt / ∫J₊(0) dt`: weight of the reflected-wave overlap at the entry plane.
    pub entry_backflow: f64,
    pub negative_dynamical_variance: bool,
}

pub fn tunnelling_statistics(entry: &FluxRecord, exit: &FluxRecord) -> Result<TimeStatistics> {
    tunnelling_statistics_with(entry, exit, MomentDenominator::Signed)
}

pub fn tunnelling_statistics_with(
    entry: &FluxRecord,
    exit: &FluxRecord,
    denominator: MomentDenominator,
) -> Result<TimeStatistics> {
    for r in [entry, exit] {
        let ratio = r.tail_ratio();
        if ratio >= 1e-6 {
            return Err(TunnelError::TailNotDecayed { plane: r.plane, ratio });
        }
    }
    let mean_entry = presence_moment(entry, FluxSign::Positive, 1, denominator)?;
    let entry_square = presence_moment(entry, FluxSign::Positive, 2, denominator)?;
    let mean_exit = presence_moment(exit, FluxSign::Positive, 1, denominator)?;

    let exit_norm = match denominator {
        MomentDenominator::Signed => exit.integral(FluxSign::Positive),
        MomentDenominator::Net => exit.net_integral(),
    };
    let centred = exit.integrate(&exit.positive_part, |t| (t - mean_entry).powi(2)) / exit_norm;

    let entry_variance = match denominator {
        // Centred form avoids cancelling large t².
        MomentDenominator::Signed => {
            entry.integrate(&entry.positive_part, |t| (t - mean_entry).powi(2)) / entry.integral(FluxSign::Positive)
        }
        MomentDenominator::Net => entry_square - mean_entry * mean_entry,
    };

    let mean_tunnelling = mean_exit - mean_entry;
    let second_moment = centred + entry_variance;
    let variance = second_moment - mean_tunnelling * mean_tunnelling;
    let dynamical_variance = variance - entry_variance;
    Ok(TimeStatistics {
        mean_entry,
        mean_exit,
        mean_tunnelling,
        variance,
        entry_variance,
        dynamical_variance,
        second_moment,
        entry_backflow: -entry.integral(FluxSign::Negative) / entry.integral(FluxSign::Positive),
        negative_dynamical_variance: dynamical_variance < 0.0,
    })
}
