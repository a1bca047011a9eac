use num_complex::Complex64;
use proptest::prelude::*;
use tunneltime::stationary::{rect_amplitudes_closed_form, stationary_wave, transfer_matrix_amplitudes};
use tunneltime::{PhysicalConstants, PiecewiseBarrier, RectangularBarrier, Segment};

fn unit() -> PhysicalConstants {
    PhysicalConstants::natural()
}

/// `(E, a)` under `V0 = 1` for a given `σ = κ/k` and opacity `κa`.
fn point(sigma: f64, kappa_a: f64) -> (f64, f64) {
    let k = (2.0 / (1.0 + sigma * sigma)).sqrt();
    let kappa = sigma * k;
    (0.5 * k * k, kappa_a / kappa)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn two_step() -> PiecewiseBarrier {
    PiecewiseBarrier::new(vec![Segment::real(2.0, 1.0).unwrap(), Segment::real(3.0, 0.7).unwrap()]).unwrap()
}

// mpmath ODE integration of the two-step barrier, tests/oracles/times_oracle.py.
const TWO_STEP_T: Complex64 = Complex64::new(0.036745142886114043, 0.0082488348499479041);
const TWO_STEP_R: Complex64 = Complex64::new(0.0079090953963013746, -0.99925932440378536);
const REVERSED_R: Complex64 = Complex64::new(0.41996826057657366, -0.90675708505982156);

#[test]
fn two_step_barrier_matches_ode_reference() {
    let w = stationary_wave(&two_step(), 0.5, &unit()).unwrap();
    assert!(rel(w.reduced_transmission(), TWO_STEP_T) < 1e-12);
    assert!(rel(w.reflection_at_origin(), TWO_STEP_R) < 1e-12);
}

#[test]
fn reversed_two_step_changes_reflection_phase_only() {
    let w = stationary_wave(&two_step().reversed(), 0.5, &unit()).unwrap();
    assert!(rel(w.reduced_transmission(), TWO_STEP_T) < 1e-12);
    assert!(rel(w.reflection_at_origin(), REVERSED_R) < 1e-12);
    assert!((w.reflection_at_origin().norm() - TWO_STEP_R.norm()).abs() < 1e-12);
}

#[test]
fn absorbing_barrier_matches_reference() {
    let c = unit();
    for (a, expected) in [(5.0, 0.00016272163738721177), (15.0, 3.2716217450825775e-13)] {
        let b = RectangularBarrier::new(1.0, a, 0.05).unwrap();
        let t = transfer_matrix_amplitudes(&b.to_piecewise(), 0.5, &c).unwrap();
        assert!((t.transmission_probability() / expected - 1.0).abs() < 1e-11, "a = {a}");
        assert!(t.absorption_probability() > 0.0);
    }
}

#[test]
fn unitarity_on_log_grid() {
    let c = unit();
    for sigma in log_grid(0.1, 10.0, 20) {
        for ka in log_grid(0.1, 30.0, 20) {
            let (e, a) = point(sigma, ka);
            let amp = transfer_matrix_amplitudes(&RectangularBarrier::lossless(1.0, a).unwrap().to_piecewise(), e, &c)
                .unwrap();
            let sum = amp.transmission_probability() + amp.reflection_probability();
            assert!((sum - 1.0).abs() < 1e-12, "σ = {sigma}, κa = {ka}: {sum}");
        }
    }
}

#[test]
fn closed_form_and_transfer_matrix_agree_on_grid() {
    let c = unit();
    for sigma in log_grid(0.1, 10.0, 20) {
        for ka in log_grid(0.1, 30.0, 20) {
            let (e, a) = point(sigma, ka);
            let b = RectangularBarrier::lossless(1.0, a).unwrap();
            let closed = rect_amplitudes_closed_form(&b, e, &c).unwrap();
            let matrix = transfer_matrix_amplitudes(&b.to_piecewise(), e, &c).unwrap();
            assert!(rel(closed.transmission, matrix.transmission) < 1e-10, "σ = {sigma}, κa = {ka}");
            assert!((closed.reflection - matrix.reflection).norm() < 1e-10, "σ = {sigma}, κa = {ka}");
        }
    }
}

#[test]
fn transmission_phase_convention() {
    let c = unit();
    let b = RectangularBarrier::lossless(1.0, 3.0).unwrap();
    let w = stationary_wave(&b.to_piecewise(), 0.8, &c).unwrap();
    let ka = c.wavenumber(0.8) * 3.0;
    let shifted = w.transmission() * Complex64::from_polar(1.0, ka);
    assert!(rel(shifted, w.reduced_transmission()) < 1e-14);
}

fn segments() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.05f64..3.0, 0.6f64..3.0, 0.0f64..0.3), 1..5)
}

fn build(parts: &[(f64, f64, f64)], lossy: bool) -> PiecewiseBarrier {
    PiecewiseBarrier::new(
        parts
            .iter()
            .map(|&(l, v, w)| Segment::new(l, Complex64::new(v, if lossy { -w } else { 0.0 })).unwrap())
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn halving_segments_leaves_amplitudes_unchanged(parts in segments(), e in 0.05f64..0.55, lossy in any::<bool>()) {
        let c = unit();
        let b = build(&parts, lossy);
        let whole = transfer_matrix_amplitudes(&b, e, &c).unwrap();
        let split = transfer_matrix_amplitudes(&b.subdivided(2), e, &c).unwrap();
        prop_assert!(rel(split.transmission, whole.transmission) < 1e-12);
        prop_assert!((split.reflection - whole.reflection).norm() < 1e-12);
    }

    #[test]
    fn transmission_is_reciprocal(parts in segments(), e in 0.05f64..0.55) {
        let c = unit();
        let b = build(&parts, false);
        let left = transfer_matrix_amplitudes(&b, e, &c).unwrap().transmission.norm();
        let right = transfer_matrix_amplitudes(&b.reversed(), e, &c).unwrap().transmission.norm();
        prop_assert!((left / right - 1.0).abs() < 1e-12);
    }

    #[test]
    fn absorption_removes_probability(parts in segments(), e in 0.05f64..0.55) {
        let c = unit();
        prop_assume!(parts.iter().any(|p| p.2 > 1e-3));
        let amp = transfer_matrix_amplitudes(&build(&parts, true), e, &c).unwrap();
        prop_assert!(amp.transmission_probability() + amp.reflection_probability() < 1.0);
    }

    #[test]
    fn lossless_piecewise_is_unitary(parts in segments(), e in 0.05f64..0.55) {
        let c = unit();
        let amp = transfer_matrix_amplitudes(&build(&parts, false), e, &c).unwrap();
        prop_assert!((amp.transmission_probability() + amp.reflection_probability() - 1.0).abs() < 1e-12);
    }
}
