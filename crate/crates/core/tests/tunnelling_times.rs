use proptest::prelude::*;
use tunneltime::stationary::dwell_time;
use tunneltime::times::{
    buttiker_landauer_time, feynman_time, larmor_second_time, opaque_limits, phase_time, phase_time_phi2, time_catalog,
};
use tunneltime::{wavenumbers, PhysicalConstants, RectangularBarrier};

fn unit() -> PhysicalConstants {
    PhysicalConstants::natural()
}

fn rect(a: f64) -> RectangularBarrier {
    RectangularBarrier::lossless(1.0, a).unwrap()
}

fn point(sigma: f64, kappa_a: f64) -> (f64, f64) {
    let k = (2.0 / (1.0 + sigma * sigma)).sqrt();
    (0.5 * k * k, kappa_a / (sigma * k))
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x / y - 1.0).abs() < tol
}

struct Reference {
    energy: f64,
    width: f64,
    phase: f64,
    dwell: f64,
    log: f64,
    feynman: (f64, f64),
}

// tests/oracles/times_oracle.py
const REFERENCE: [Reference; 5] = [
    Reference {
        energy: 0.2,
        width: 10.0,
        phase: 2.5000000001420161,
        dwell: 0.50000000015355967,
        log: 9.7806941503258458,
        feynman: (0.50000000015355972, 8.2806941503654239),
    },
    Reference {
        energy: 0.8,
        width: 10.0,
        phase: 2.4998980442339522,
        dwell: 1.9998989431585777,
        log: 13.936375284309035,
        feynman: (1.9998989431585777, 14.311372202317085),
    },
    Reference {
        energy: 0.5,
        width: 15.0,
        phase: 1.9999999999996257,
        dwell: 0.99999999999981285,
        log: 14.999999999997193,
        feynman: (0.99999999999981285, 14.999999999997193),
    },
    Reference {
        energy: 0.2,
        width: 15.0,
        phase: 2.5000000000000007,
        dwell: 0.50000000000000072,
        log: 13.733541225631422,
        feynman: (0.50000000000000076, 12.233541225631422),
    },
    Reference {
        energy: 0.8,
        width: 15.0,
        phase: 2.4999997300054287,
        dwell: 1.999999731616073,
        log: 21.842082402474328,
        feynman: (1.999999731616073, 22.217082396952119),
    },
];

#[test]
fn lossless_times_match_reference() {
    let c = unit();
    for r in &REFERENCE {
        let b = rect(r.width);
        let p = b.to_piecewise();
        let tag = format!("E = {}, a = {}", r.energy, r.width);
        assert!(close(phase_time(&p, r.energy, &c).unwrap(), r.phase, 1e-9), "{tag}");
        assert!(close(dwell_time(&p, r.energy, &c).unwrap(), r.dwell, 1e-12), "{tag}");
        assert!(close(buttiker_landauer_time(&p, r.energy, &c).unwrap(), r.log, 1e-9), "{tag}");
        assert!(close(larmor_second_time(&b, r.energy, &c).unwrap(), r.log, 1e-9), "{tag}");
        let f = feynman_time(&b, r.energy, &c).unwrap();
        assert!(close(f.re, r.feynman.0, 1e-8), "{tag}: {}", f.re);
        assert!(close(f.im, r.feynman.1, 1e-9), "{tag}: {}", f.im);
    }
}

#[test]
fn absorbing_times_match_reference() {
    let c = unit();
    for (a, phase, log, dwell) in [
        (5.0, 2.1416459261787543, 4.8916442202248726, 0.94872987418942423),
        (15.0, 2.6388934418388451, 14.85467791140732, 0.94899799800885389),
    ] {
        let p = RectangularBarrier::new(1.0, a, 0.05).unwrap().to_piecewise();
        assert!(close(phase_time(&p, 0.5, &c).unwrap(), phase, 1e-9), "a = {a}");
        assert!(close(buttiker_landauer_time(&p, 0.5, &c).unwrap(), log, 1e-9), "a = {a}");
        assert!(close(dwell_time(&p, 0.5, &c).unwrap(), dwell, 1e-12), "a = {a}");
    }
}

#[test]
fn numeric_and_analytic_phase_times_agree_on_grid() {
    let c = unit();
    for i in 0..20 {
        let sigma = 0.1 * 100f64.powf(i as f64 / 19.0);
        for j in 0..20 {
            let ka = 0.1 * 300f64.powf(j as f64 / 19.0);
            let (e, a) = point(sigma, ka);
            let b = rect(a);
            let numeric = phase_time(&b.to_piecewise(), e, &c).unwrap();
            let analytic = phase_time_phi2(&b, e, &c).unwrap();
            assert!(close(numeric, analytic, 1e-6), "σ = {sigma}, κa = {ka}: {numeric} vs {analytic}");
        }
    }
}

#[test]
fn phase_and_dwell_saturate_beyond_opacity_fifteen() {
    let c = unit();
    for e in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let kappa = c.wavenumber(1.0 - e);
        let widths: Vec<f64> = [15.0, 20.0, 25.0, 30.0].iter().map(|ka| ka / kappa).collect();
        let p: Vec<f64> = widths.iter().map(|&a| phase_time(&rect(a).to_piecewise(), e, &c).unwrap()).collect();
        let d: Vec<f64> = widths.iter().map(|&a| dwell_time(&rect(a).to_piecewise(), e, &c).unwrap()).collect();
        for series in [&p, &d] {
            for x in series.iter() {
                assert!((x - series[0]).abs() / series[0] < 1e-3, "E = {e}: {series:?}");
            }
        }
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

#[test]
fn fluctuation_times_grow_linearly() {
    let c = unit();
    for e in [0.2, 0.5, 0.8] {
        let kappa = c.wavenumber(1.0 - e);
        let widths: Vec<f64> = (0..7).map(|i| (15.0 + 2.5 * i as f64) / kappa).collect();
        let tz: Vec<f64> = widths.iter().map(|&a| larmor_second_time(&rect(a), e, &c).unwrap()).collect();
        let im: Vec<f64> = widths.iter().map(|&a| feynman_time(&rect(a), e, &c).unwrap().im).collect();
        let expected = c.mass / (c.hbar * kappa);
        assert!(close(slope(&widths, &tz), expected, 1e-2), "E = {e}");
        assert!(close(slope(&widths, &im), expected, 1e-2), "E = {e}");
    }
}

#[test]
fn feynman_parts_track_dwell_and_second_larmor_at_unit_sigma() {
    let c = unit();
    for a in [15.0, 20.0, 30.0] {
        let b = rect(a);
        let f = feynman_time(&b, 0.5, &c).unwrap();
        assert!(close(f.re, dwell_time(&b.to_piecewise(), 0.5, &c).unwrap(), 2e-2));
        assert!(close(f.im, larmor_second_time(&b, 0.5, &c).unwrap(), 2e-2));
    }
}

#[test]
fn feynman_real_part_is_dwell_for_any_sigma() {
    let c = unit();
    for e in [0.1, 0.2, 0.8, 0.9] {
        let kappa = c.wavenumber(1.0 - e);
        for ka in [15.0, 25.0] {
            let b = rect(ka / kappa);
            let f = feynman_time(&b, e, &c).unwrap();
            assert!(close(f.re, dwell_time(&b.to_piecewise(), e, &c).unwrap(), 2e-2), "E = {e}, κa = {ka}");
        }
    }
}

#[test]
fn catalog_widths_twenty_and_twenty_five() {
    let c = unit();
    let a = time_catalog(&rect(20.0), 0.5, &c).unwrap();
    let b = time_catalog(&rect(25.0), 0.5, &c).unwrap();
    assert!((a.phase_time - b.phase_time).abs() < 1e-3 * a.phase_time);
    assert!(((b.larmor_second - a.larmor_second) - 5.0).abs() < 1e-6);
    assert!((a.phase_time - 2.0).abs() < 1e-6);
    assert!((a.dwell_time - 1.0).abs() < 1e-6);
    assert!((a.larmor_second - 20.0).abs() < 1e-6);
    assert_eq!(a.larmor_first.to_bits(), a.dwell_time.to_bits());
}

#[test]
fn thin_barrier_catalog_is_finite() {
    let c = unit();
    let t = time_catalog(&rect(0.1), 0.5, &c).unwrap();
    for x in [t.phase_time, t.dwell_time, t.larmor_second, t.buttiker_landauer, t.feynman_time.re, t.feynman_time.im] {
        assert!(x.is_finite());
    }
    assert!(t.larmor_second.abs() < 0.1);
}

#[test]
fn opaque_limits_follow_the_kinematics() {
    let c = unit();
    let b = rect(20.0);
    let w = wavenumbers(0.2, &b, &c).unwrap();
    let l = opaque_limits(&b, 0.2, &c).unwrap();
    assert!(close(l.phase_limit, 2.0 / (w.velocity * w.kappa), 1e-15));
    assert!(close(l.fluctuation_limit, 20.0 / w.kappa, 1e-15));
    assert!(!l.divergent);
    assert!(opaque_limits(&rect(0.5), 0.5, &c).unwrap().divergent);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn larmor_forms_coincide(sigma in 0.2f64..5.0, ka in 0.5f64..25.0) {
        let c = unit();
        let (e, a) = point(sigma, ka);
        let b = rect(a);
        let cot = larmor_second_time(&b, e, &c).unwrap();
        let log = buttiker_landauer_time(&b.to_piecewise(), e, &c).unwrap();
        prop_assert!((cot - log).abs() <= 1e-7 * log.abs().max(1e-3));
    }

    #[test]
    fn catalog_aliases_dwell(sigma in 0.2f64..5.0, ka in 0.5f64..25.0) {
        let c = unit();
        let (e, a) = point(sigma, ka);
        let t = time_catalog(&rect(a), e, &c).unwrap();
        prop_assert_eq!(t.larmor_first.to_bits(), t.dwell_time.to_bits());
        prop_assert!(t.dwell_time > 0.0);
    }
}
