//! Width and absorption scans: saturation plateaus of tunnelling times and the
//! absorption criterion for their breakdown.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barrier::{wavenumbers, PhysicalConstants, RectangularBarrier};
use crate::error::{Result, TunnelError};
use crate::times::{phase_time, time_catalog, TimeCatalog};

pub const DEFAULT_SATURATION_TOLERANCE: f64 = 1e-2;
pub const DEFAULT_CRITERION_THRESHOLD: f64 = 0.2;

/// Definitions tracked by a width scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeDefinition {
    Phase,
    PhasePhi2,
    Dwell,
    LarmorFirst,
    LarmorSecond,
    ButtikerLandauer,
    FeynmanRe,
    FeynmanIm,
}

impl TimeDefinition {
    pub const ALL: [TimeDefinition; 8] = [
        TimeDefinition::Phase,
        TimeDefinition::PhasePhi2,
        TimeDefinition::Dwell,
        TimeDefinition::LarmorFirst,
        TimeDefinition::LarmorSecond,
        TimeDefinition::ButtikerLandauer,
        TimeDefinition::FeynmanRe,
        TimeDefinition::FeynmanIm,
    ];

    pub fn value(self, c: &TimeCatalog) -> f64 {
        match self {
            TimeDefinition::Phase => c.phase_time,
            TimeDefinition::PhasePhi2 => c.phase_time_phi2,
            TimeDefinition::Dwell => c.dwell_time,
            TimeDefinition::LarmorFirst => c.larmor_first,
            TimeDefinition::LarmorSecond => c.larmor_second,
            TimeDefinition::ButtikerLandauer => c.buttiker_landauer,
            TimeDefinition::FeynmanRe => c.feynman_time.re,
            TimeDefinition::FeynmanIm => c.feynman_time.im,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationRecord {
    pub saturated: bool,
    /// Mean over the trailing window, reported whether or not it saturated.
    pub plateau_value: f64,
    /// First abscissa from which every point stays within tolerance of the plateau.
    pub onset_opacity: Option<f64>,
}

impl SaturationRecord {
    fn insufficient(value: f64) -> Self {
        Self {
            saturated: false,
            plateau_value: value,
            onset_opacity: None,
        }
    }
}

fn within(value: f64, plateau: f64, tol: f64) -> bool {
    (value - plateau).abs() <= tol * plateau.abs()
}

/// Trailing-window plateau test on `(x, time)` pairs, `x` usually `κa`.
///
/// Saturated when the last `⌈n/2⌉` times lie within `rel_tolerance` of their
/// mean; the onset is then walked back while earlier points also qualify.
pub fn detect_saturation(series: &[(f64, f64)], rel_tolerance: f64) -> Result<SaturationRecord> {
    if series.len() < 3 {
        return Err(TunnelError::TooFewPoints {
            needed: 3,
            got: series.len(),
        });
    }
    if !(rel_tolerance > 0.0) {
        return Err(TunnelError::InvalidParameter(format!(
            "saturation tolerance must be positive, got {rel_tolerance}"
        )));
    }
    let n = series.len();
    let window = &series[n - n.div_ceil(2)..];
    let plateau = window.iter().map(|p| p.1).sum::<f64>() / window.len() as f64;
    if !window.iter().all(|p| within(p.1, plateau, rel_tolerance)) {
        return Ok(SaturationRecord::insufficient(plateau));
    }
    let onset = series
        .iter()
        .rposition(|p| !within(p.1, plateau, rel_tolerance))
        .map_or(0, |i| i + 1);
    Ok(SaturationRecord {
        saturated: true,
        plateau_value: plateau,
        onset_opacity: Some(series[onset].0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthScanResult {
    pub widths: Vec<f64>,
    /// `κa` for each width.
    pub opacities: Vec<f64>,
    pub catalog_rows: Vec<TimeCatalog>,
    pub saturation: Vec<(TimeDefinition, SaturationRecord)>,
}

impl WidthScanResult {
    pub fn saturation_of(&self, definition: TimeDefinition) -> SaturationRecord {
        self.saturation
            .iter()
            .find(|(d, _)| *d == definition)
            .map(|(_, r)| *r)
            .expect("every definition is analysed")
    }

    pub fn series(&self, definition: TimeDefinition) -> Vec<(f64, f64)> {
        self.opacities
            .iter()
            .zip(&self.catalog_rows)
            .map(|(&x, c)| (x, definition.value(c)))
            .collect()
    }
}

fn check_widths(widths: &[f64]) -> Result<()> {
    if widths.is_empty() {
        return Err(TunnelError::InvalidParameter("width list is empty".into()));
    }
    if let Some(&w) = widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(TunnelError::InvalidParameter(format!("widths must be positive, got {w}")));
    }
    if widths.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(TunnelError::InvalidParameter("widths must be strictly increasing".into()));
    }
    Ok(())
}

/// Saturation analysis of a series; fewer than three points are reported unsaturated.
fn saturation_or_unsaturated(series: &[(f64, f64)], rel_tolerance: f64) -> Result<SaturationRecord> {
    match detect_saturation(series, rel_tolerance) {
        Err(TunnelError::TooFewPoints { .. }) => {
            Ok(SaturationRecord::insufficient(series.last().map_or(f64::NAN, |p| p.1)))
        }
        r => r,
    }
}

pub fn scan_widths(
    template: &RectangularBarrier,
    energy: f64,
    widths: &[f64],
    consts: &PhysicalConstants,
) -> Result<WidthScanResult> {
    scan_widths_with(template, energy, widths, consts, DEFAULT_SATURATION_TOLERANCE)
}

/// Time catalog per width, evaluated in parallel and returned in input order.
pub fn scan_widths_with(
    template: &RectangularBarrier,
    energy: f64,
    widths: &[f64],
    consts: &PhysicalConstants,
    rel_tolerance: f64,
) -> Result<WidthScanResult> {
    check_widths(widths)?;
    let kappa = wavenumbers(energy, template, consts)?.kappa;
    let catalog_rows = widths
        .par_iter()
        .map(|&w| time_catalog(&template.with_width(w)?, energy, consts))
        .collect::<Result<Vec<_>>>()?;
    let opacities: Vec<f64> = widths.iter().map(|w| kappa * w).collect();
    let mut result = WidthScanResult {
        widths: widths.to_vec(),
        opacities,
        catalog_rows,
        saturation: Vec::new(),
    };
    for d in TimeDefinition::ALL {
        let record = saturation_or_unsaturated(&result.series(d), rel_tolerance)?;
        result.saturation.push((d, record));
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionCriterion {
    pub quotient: f64,
    pub hfe_expected: bool,
    pub threshold: f64,
}

pub fn absorption_quotient(
    barrier: &RectangularBarrier,
    energy: f64,
    consts: &PhysicalConstants,
) -> Result<AbsorptionCriterion> {
    absorption_quotient_with(barrier, energy, consts, DEFAULT_CRITERION_THRESHOLD)
}

/// `Q = V1 √μ υ κ a / [2 (V0 - E)]^{3/2}` with `υ = ħκ/μ`; the effect is
/// expected to survive when `Q < 2 · threshold`.
pub fn absorption_quotient_with(
    barrier: &RectangularBarrier,
    energy: f64,
    consts: &PhysicalConstants,
    threshold: f64,
) -> Result<AbsorptionCriterion> {
    if !(threshold > 0.0) {
        return Err(TunnelError::InvalidParameter(format!(
            "criterion threshold must be positive, got {threshold}"
        )));
    }
    let w = wavenumbers(energy, barrier, consts)?;
    let gap = 2.0 * (barrier.height() - energy);
    let quotient = barrier.absorption() * consts.mass.sqrt() * w.velocity * w.kappa * barrier.width() / gap.powf(1.5);
    Ok(AbsorptionCriterion {
        quotient,
        hfe_expected: quotient < 2.0 * threshold,
        threshold,
    })
}

/// Settings of [`absorption_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionScanOptions {
    /// Relative spread allowed on the trailing window of each phase-time curve.
    pub saturation_tolerance: f64,
    pub criterion_threshold: f64,
    /// Largest width elasticity `(a/τ) ∂τ/∂a` counted as saturated at a single `(V1, a)` cell.
    pub elasticity_threshold: f64,
}

impl Default for AbsorptionScanOptions {
    fn default() -> Self {
        Self {
            saturation_tolerance: DEFAULT_SATURATION_TOLERANCE,
            criterion_threshold: DEFAULT_CRITERION_THRESHOLD,
            elasticity_threshold: DEFAULT_CRITERION_THRESHOLD,
        }
    }
}

/// Phase-time curve for one absorption strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionRow {
    pub absorption: f64,
    pub phase_times: Vec<f64>,
    /// Least-squares `dτ^Ph/da` over the trailing window.
    pub asymptotic_slope: f64,
    pub saturation: SaturationRecord,
    /// Largest `Q` over the widths.
    pub max_quotient: f64,
    /// Criterion verdict at the largest width.
    pub hfe_expected: bool,
}

/// One `(V1, a)` cell of the concordance table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceCell {
    pub absorption: f64,
    pub width: f64,
    pub quotient: f64,
    pub hfe_expected: bool,
    /// `(a/τ^Ph) ∂τ^Ph/∂a`
    pub elasticity: f64,
    pub saturation_survives: bool,
}

impl ConcordanceCell {
    pub fn agrees(&self) -> bool {
        self.hfe_expected == self.saturation_survives
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionReport {
    pub energy: f64,
    pub widths: Vec<f64>,
    pub opacities: Vec<f64>,
    pub rows: Vec<AbsorptionRow>,
    pub cells: Vec<ConcordanceCell>,
    /// Fraction of cells where criterion and measurement agree.
    pub concordance: f64,
}

fn trailing_slope(widths: &[f64], values: &[f64]) -> f64 {
    let n = widths.len();
    if n < 2 {
        return 0.0;
    }
    let start = n - n.div_ceil(2).max(2);
    let (x, y) = (&widths[start..], &values[start..]);
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// `(a/τ) ∂τ/∂a` by a central difference in the width.
fn width_elasticity(barrier: &RectangularBarrier, energy: f64, consts: &PhysicalConstants) -> Result<f64> {
    let a = barrier.width();
    let h = 1e-3 * a;
    let tau = |w: f64| -> Result<f64> { phase_time(&barrier.with_width(w)?.to_piecewise(), energy, consts) };
    let derivative = (tau(a + h)? - tau(a - h)?) / (2.0 * h);
    Ok(a * derivative / tau(a)?)
}

/// Phase-time width scans for each absorption strength, and the cell-by-cell
/// comparison of the absorption criterion with the measured width sensitivity.
pub fn absorption_scan(
    template: &RectangularBarrier,
    energy: f64,
    widths: &[f64],
    absorptions: &[f64],
    consts: &PhysicalConstants,
    options: &AbsorptionScanOptions,
) -> Result<AbsorptionReport> {
    check_widths(widths)?;
    if absorptions.is_empty() {
        return Err(TunnelError::InvalidParameter("absorption list is empty".into()));
    }
    let kappa = wavenumbers(energy, template, consts)?.kappa;
    let cells_in = absorptions
        .iter()
        .flat_map(|&v1| widths.iter().map(move |&w| (v1, w)))
        .collect::<Vec<_>>();
    let evaluated = cells_in
        .par_iter()
        .map(|&(v1, w)| -> Result<(f64, ConcordanceCell)> {
            let barrier = RectangularBarrier::new(template.height(), w, v1)?;
            let tau = phase_time(&barrier.to_piecewise(), energy, consts)?;
            let criterion = absorption_quotient_with(&barrier, energy, consts, options.criterion_threshold)?;
            let elasticity = width_elasticity(&barrier, energy, consts)?;
            Ok((
                tau,
                ConcordanceCell {
                    absorption: v1,
                    width: w,
                    quotient: criterion.quotient,
                    hfe_expected: criterion.hfe_expected,
                    elasticity,
                    saturation_survives: elasticity.abs() < options.elasticity_threshold,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let opacities: Vec<f64> = widths.iter().map(|w| kappa * w).collect();
    let mut rows = Vec::with_capacity(absorptions.len());
    for (i, &v1) in absorptions.iter().enumerate() {
        let block = &evaluated[i * widths.len()..(i + 1) * widths.len()];
        let phase_times: Vec<f64> = block.iter().map(|(t, _)| *t).collect();
        let series: Vec<(f64, f64)> = opacities.iter().copied().zip(phase_times.iter().copied()).collect();
        let last = block[block.len() - 1].1;
        rows.push(AbsorptionRow {
            absorption: v1,
            asymptotic_slope: trailing_slope(widths, &phase_times),
            saturation: saturation_or_unsaturated(&series, options.saturation_tolerance)?,
            max_quotient: block.iter().fold(0.0f64, |m, (_, c)| m.max(c.quotient)),
            hfe_expected: last.hfe_expected,
            phase_times,
        });
    }
    let cells: Vec<ConcordanceCell> = evaluated.into_iter().map(|(_, c)| c).collect();
    let concordance = cells.iter().filter(|c| c.agrees()).count() as f64 / cells.len() as f64;
    Ok(AbsorptionReport {
        energy,
        widths: widths.to_vec(),
        opacities,
        rows,
        cells,
        concordance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    #[test]
    fn constant_series_saturates_at_first_point() {
        let s: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 3.0)).collect();
        let r = detect_saturation(&s, 1e-2).unwrap();
        assert!(r.saturated);
        assert_eq!(r.plateau_value, 3.0);
        assert_eq!(r.onset_opacity, Some(1.0));
    }

    #[test]
    fn linear_series_does_not_saturate() {
        let s: Vec<(f64, f64)> = (1..=6).map(|i| (5.0 * i as f64, 5.0 * i as f64)).collect();
        assert!(!detect_saturation(&s, 1e-2).unwrap().saturated);
    }

    #[test]
    fn approach_to_limit() {
        let s: Vec<(f64, f64)> = (1..=6)
            .map(|i| {
                let x = 5.0 * i as f64;
                (x, 2.0 * (1.0 + (-x).exp()))
            })
            .collect();
        let r = detect_saturation(&s, 1e-2).unwrap();
        assert!(r.saturated);
        assert!((r.plateau_value / 2.0 - 1.0).abs() < 1e-2);
        assert_eq!(r.onset_opacity, Some(5.0));
    }

    #[test]
    fn too_few_points() {
        assert_eq!(
            detect_saturation(&[(1.0, 1.0), (2.0, 1.0)], 1e-2),
            Err(TunnelError::TooFewPoints { needed: 3, got: 2 })
        );
    }

    #[test]
    fn quotient_examples() {
        let c = natural();
        let q = absorption_quotient(&RectangularBarrier::new(1.0, 20.0, 0.01).unwrap(), 0.5, &c).unwrap();
        assert!((q.quotient - 0.2).abs() < 1e-14);
        assert!(q.hfe_expected);
        let q = absorption_quotient(&RectangularBarrier::new(1.0, 20.0, 0.1).unwrap(), 0.5, &c).unwrap();
        assert!((q.quotient - 2.0).abs() < 1e-13);
        assert!(!q.hfe_expected);
        let q = absorption_quotient(&RectangularBarrier::lossless(1.0, 20.0).unwrap(), 0.5, &c).unwrap();
        assert_eq!(q.quotient, 0.0);
        assert!(q.hfe_expected);
    }

    #[test]
    fn scan_preserves_order_and_flags_fluctuation_time() {
        let c = natural();
        let template = RectangularBarrier::lossless(1.0, 1.0).unwrap();
        let widths = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
        let r = scan_widths(&template, 0.5, &widths, &c).unwrap();
        for (w, row) in widths.iter().zip(&r.catalog_rows) {
            assert_eq!(row.barrier_width, *w);
        }
        let phase = r.saturation_of(TimeDefinition::Phase);
        assert!(phase.saturated);
        assert!((phase.plateau_value - 2.0).abs() < 1e-2);
        assert!(!r.saturation_of(TimeDefinition::FeynmanIm).saturated);
    }

    #[test]
    fn single_width_is_unsaturated() {
        let c = natural();
        let template = RectangularBarrier::lossless(1.0, 1.0).unwrap();
        let r = scan_widths(&template, 0.5, &[20.0], &c).unwrap();
        assert!(r.saturation.iter().all(|(_, s)| !s.saturated));
    }

    #[test]
    fn unordered_widths_are_rejected() {
        let c = natural();
        let template = RectangularBarrier::lossless(1.0, 1.0).unwrap();
        assert!(scan_widths(&template, 0.5, &[2.0, 1.0, 3.0], &c).is_err());
    }
}
