use proptest::prelude::*;
use solpath::baseline::make_schedule;
use solpath::optimize::{distance_diagnostic_update, DiagnosticParams, DiagnosticState};
use solpath::pathlearn::{path_discrepancy, warm_start_pad};
use solpath::{Basis, BoxDomain, Coefficients};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn padding_preserves_the_path(q in 2usize..8, d in 1usize..4, values in prop::collection::vec(-3.0..3.0f64, 24)) {
        let old = Basis::legendre(q, d);
        let new = old.extend().unwrap();
        let beta = Coefficients::new(&old, values[..old.p()].to_vec()).unwrap();
        let padded = warm_start_pad(&beta, &old, &new).unwrap();
        let gap = path_discrepancy(&old, &beta.values, &new, &padded.values).unwrap();
        prop_assert_eq!(gap, 0.0);
    }

    #[test]
    fn tensor_padding_preserves_the_path(side in 2usize..5, values in prop::collection::vec(-1.0..1.0f64, 2 * 16)) {
        let dom = BoxDomain::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let old = Basis::tensor_legendre(side, 2, dom).unwrap();
        let new = old.extend().unwrap();
        let beta = Coefficients::new(&old, values[..old.p()].to_vec()).unwrap();
        let padded = warm_start_pad(&beta, &old, &new).unwrap();
        let gap = path_discrepancy(&old, &beta.values, &new, &padded.values).unwrap();
        prop_assert!(gap <= 1e-13, "gap {gap}");
    }

    #[test]
    fn finer_targets_never_shrink_the_schedule(a in 1e-8..0.2f64, b in 1e-8..0.2f64, c1 in 0.1..2.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let fine = make_schedule(lo, c1, 1.0).unwrap();
        let coarse = make_schedule(hi, c1, 1.0).unwrap();
        prop_assert!(fine.points_per_axis >= coarse.points_per_axis);
        prop_assert!(fine.steps_per_point >= coarse.steps_per_point);
        prop_assert!(fine.steps_per_point >= 1);
    }

    #[test]
    fn diffusive_growth_keeps_the_step(scale in 1e-6..1e3f64) {
        let mut state = DiagnosticState::new(DiagnosticParams::default(), 0);
        let mut eta = 1.0;
        for _ in 0..20 {
            let t = state.next_checkpoint();
            let (next, reset) = distance_diagnostic_update(&mut state, scale * t as f64, t, eta);
            prop_assert!(!reset);
            eta = next;
        }
        prop_assert_eq!(eta, 1.0);
    }
}

#[test]
fn stalled_distance_halves_the_step() {
    let params = DiagnosticParams::default();
    let mut state = DiagnosticState::new(params, 0);
    let t0 = state.next_checkpoint();
    assert!(t0 > 0);
    let (eta, reset) = distance_diagnostic_update(&mut state, 1.0, t0, 1.0);
    assert_eq!((eta, reset), (1.0, false));
    let t1 = state.next_checkpoint();
    let (eta, reset) = distance_diagnostic_update(&mut state, 1.0, t1, 1.0);
    assert!(reset);
    assert_eq!(eta, params.reduction_factor);
    assert!(state.next_checkpoint() > t1);
}
