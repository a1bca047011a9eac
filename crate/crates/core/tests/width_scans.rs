use proptest::prelude::*;
use tunneltime::hfe::*;
use tunneltime::{PhysicalConstants, RectangularBarrier};

fn unit() -> PhysicalConstants {
    PhysicalConstants::natural()
}

fn template() -> RectangularBarrier {
    RectangularBarrier::lossless(1.0, 1.0).unwrap()
}

#[test]
fn phase_time_plateau_at_unit_sigma() {
    let widths = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    let r = scan_widths(&template(), 0.5, &widths, &unit()).unwrap();
    let phase = r.saturation_of(TimeDefinition::Phase);
    assert!(phase.saturated);
    assert!((phase.plateau_value - 2.0).abs() < 2e-2);
    assert!(!r.saturation_of(TimeDefinition::LarmorSecond).saturated);
    assert!(!r.saturation_of(TimeDefinition::ButtikerLandauer).saturated);
    assert_eq!(r.opacities, widths.to_vec());
}

#[test]
fn nothing_saturates_below_opacity_two() {
    let widths = [0.2, 0.5, 0.8, 1.1, 1.4, 1.7];
    let r = scan_widths(&template(), 0.5, &widths, &unit()).unwrap();
    for (d, s) in &r.saturation {
        assert!(!s.saturated, "{d:?}");
    }
}

#[test]
fn lossless_saturation_across_sigma() {
    let c = unit();
    for sigma in [0.3, 0.6, 1.0, 2.0, 3.0] {
        let e = 1.0 / (1.0 + sigma * sigma);
        let kappa = c.wavenumber(1.0 - e);
        let widths: Vec<f64> = (0..7).map(|i| (15.0 + 2.5 * i as f64) / kappa).collect();
        let r = scan_widths(&template(), e, &widths, &c).unwrap();
        for d in [TimeDefinition::Phase, TimeDefinition::Dwell, TimeDefinition::FeynmanRe] {
            assert!(r.saturation_of(d).saturated, "σ = {sigma}, {d:?}");
        }
        for d in [TimeDefinition::LarmorSecond, TimeDefinition::FeynmanIm] {
            assert!(!r.saturation_of(d).saturated, "σ = {sigma}, {d:?}");
        }
    }
}

#[test]
fn strong_absorption_destroys_the_plateau() {
    let c = unit();
    let widths: Vec<f64> = (0..7).map(|i| 15.0 + 2.5 * i as f64).collect();
    let r = absorption_scan(&template(), 0.5, &widths, &[0.0, 0.2], &c, &AbsorptionScanOptions::default()).unwrap();
    let (lossless, lossy) = (&r.rows[0], &r.rows[1]);
    assert!(lossless.saturation.saturated);
    assert!(lossless.hfe_expected);
    assert!(!lossy.saturation.saturated);
    assert!(lossy.max_quotient > 2.0);
    assert!(lossy.asymptotic_slope > 10.0 * lossless.asymptotic_slope.abs().max(1e-12));
}

#[test]
fn weak_absorption_keeps_the_plateau() {
    let c = unit();
    let widths: Vec<f64> = (0..7).map(|i| 15.0 + 2.5 * i as f64).collect();
    let r = absorption_scan(&template(), 0.5, &widths, &[1e-3], &c, &AbsorptionScanOptions::default()).unwrap();
    let row = &r.rows[0];
    assert!(row.max_quotient < 0.4);
    assert!(row.saturation.saturated);
    let (lo, hi) = row
        .phase_times
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &t| (l.min(t), h.max(t)));
    assert!((hi - lo) / row.saturation.plateau_value < 1e-2);
}

#[test]
fn slope_grows_with_absorption() {
    let c = unit();
    let widths: Vec<f64> = (0..7).map(|i| 15.0 + 2.5 * i as f64).collect();
    let v1: Vec<f64> = (0..8).map(|i| 1e-3 * 2f64.powi(i)).collect();
    let r = absorption_scan(&template(), 0.5, &widths, &v1, &c, &AbsorptionScanOptions::default()).unwrap();
    for pair in r.rows.windows(2) {
        assert!(pair[1].asymptotic_slope.abs() >= pair[0].asymptotic_slope.abs());
    }
}

#[test]
fn criterion_concordance_on_ten_by_ten_grid() {
    let c = unit();
    let widths: Vec<f64> = (0..10).map(|i| 15.0 + 15.0 * i as f64 / 9.0).collect();
    let v1: Vec<f64> = (0..10).map(|i| 10f64.powf(-3.0 + 2.5 * i as f64 / 9.0)).collect();
    let r = absorption_scan(&template(), 0.5, &widths, &v1, &c, &AbsorptionScanOptions::default()).unwrap();
    assert_eq!(r.cells.len(), 100);
    assert!(r.concordance >= 0.9, "{}", r.concordance);
}

#[test]
fn scan_rejects_widths_out_of_order() {
    let c = unit();
    assert!(absorption_scan(&template(), 0.5, &[3.0, 2.0], &[0.0], &c, &AbsorptionScanOptions::default()).is_err());
    assert!(scan_widths(&template(), 0.5, &[], &c).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn saturated_points_lie_near_plateau(values in prop::collection::vec(1.0f64..1.02, 3..12), tol in 1e-3f64..5e-2) {
        let series: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        let r = detect_saturation(&series, tol).unwrap();
        if let Some(onset) = r.onset_opacity {
            prop_assert!(r.saturated);
            for &(x, t) in &series {
                if x >= onset {
                    prop_assert!((t - r.plateau_value).abs() <= tol * r.plateau_value);
                }
            }
        } else {
            prop_assert!(!r.saturated);
        }
    }

    #[test]
    fn criterion_flag_follows_quotient(v1 in 0.0f64..0.3, a in 1.0f64..40.0, e in 0.1f64..0.9, threshold in 0.05f64..1.0) {
        let b = RectangularBarrier::new(1.0, a, v1).unwrap();
        let q = absorption_quotient_with(&b, e, &unit(), threshold).unwrap();
        prop_assert_eq!(q.hfe_expected, q.quotient < 2.0 * threshold);
        prop_assert!(q.quotient >= 0.0);
    }
}
