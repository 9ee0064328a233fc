mod common;

use proptest::prelude::*;
use spectral_ncd::linalg::{sym_eigen, Order};
use spectral_ncd::toy::{
    build_toy, closed_form_oracle, cubic, projector, r_of_lambda, sweep_t, t_bar, t_family_pairs, toy_residual, ToyCase,
};

#[test]
fn case_residuals_on_both_sides() {
    for ((ts, tc), want) in [((0.25, 0.2), [0.0, 1.0]), ((0.2, 0.25), [0.0, 0.0])] {
        for (case, w) in [ToyCase::Case1, ToyCase::Case2].into_iter().zip(want) {
            let s = build_toy(case, ts, tc, None).unwrap();
            let r = toy_residual(&s).unwrap();
            assert!((r.numeric - w).abs() < 1e-6, "{case:?} {ts} {tc}: {}", r.numeric);
            assert!((common::toy_residual_oracle(&s.matrix) - w).abs() < 1e-6);
            assert_eq!(r.predicted, Some(w));
        }
    }
}

#[test]
fn gray_cube_costs_one_unit() {
    let a = toy_residual(&build_toy(ToyCase::Case3, 0.2, 0.25, None).unwrap()).unwrap();
    let b = toy_residual(&build_toy(ToyCase::Case2, 0.2, 0.25, None).unwrap()).unwrap();
    assert!((a.numeric - b.numeric - 1.0).abs() < 1e-6);
}

#[test]
fn threshold_located_by_bisection() {
    // the oracle residual jumps from near 1 to 0 at the threshold
    let (ts, tc) = (0.25, 0.2);
    let (mut lo, mut hi) = (0.0, ts * 0.999);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if common::toy_residual_oracle(&common::toy_t(ts, tc, mid)) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 0.08164965809277261).abs() < 1e-9, "{lo}");
    assert!((t_bar(ts, tc).unwrap() - lo).abs() < 1e-9);
}

#[test]
fn case1_spectrum_frozen() {
    let (oracle, _) = common::jacobi_eigen(&common::toy_t(0.25, 0.2, 0.2));
    let frozen = [1.535599350721563, 1.117860960677912, 1.05, 0.746539688600524, 0.55];
    let closed = closed_form_oracle(&build_toy(ToyCase::Case1, 0.25, 0.2, None).unwrap()).unwrap();
    for i in 0..5 {
        assert!((oracle[i] - frozen[i]).abs() < 1e-12);
        assert!((closed.pairs[i].value - frozen[i]).abs() < 1e-9);
    }
}

#[test]
fn sweep_decreases_through_threshold() {
    let grid: Vec<f64> = (0..50).map(|i| 0.245 * i as f64 / 49.0).collect();
    let rows = sweep_t(0.25, 0.2, &grid).unwrap();
    let tb = t_bar(0.25, 0.2).unwrap();
    assert!((rows[0].residual_numeric - 1.0).abs() < 1e-9);
    for w in rows.windows(2) {
        assert!(w[1].residual_numeric <= w[0].residual_numeric + 1e-12);
    }
    for r in &rows {
        if r.t > tb {
            assert!(r.residual_numeric < 1e-9);
        } else if r.t > 0.0 {
            assert!(r.residual_numeric > 0.0 && r.residual_numeric < 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closed_form_pairs_match_jacobi(tc in 0.1f64..0.3, a in 0.01f64..0.99, b in 0.0f64..0.99) {
        let ts = tc * (1.0 + 0.5 * a);
        let t = ts * b;
        let (values, vectors) = common::jacobi_eigen(&common::toy_t(ts, tc, t));
        let pairs = t_family_pairs(ts, tc, t);
        for (i, p) in pairs.iter().enumerate() {
            prop_assert!((p.value - values[i]).abs() < 1e-9);
            if p.from_cubic {
                prop_assert!(cubic(ts, tc, t, p.value - 1.0).abs() < 1e-9);
            }
            let simple = (i == 0 || (values[i - 1] - values[i]).abs() > 1e-5)
                && (i == 4 || (values[i] - values[i + 1]).abs() > 1e-5);
            if simple {
                let v: Vec<f64> = vectors.column(i).iter().copied().collect();
                prop_assert!((projector(&p.vector) - projector(&v)).amax() < 1e-6);
            }
        }
    }

    #[test]
    fn residual_follows_the_law_below_threshold(tc in 0.1f64..0.3, a in 0.05f64..0.95, b in 0.01f64..0.99) {
        let ts = tc * (1.0 + 0.5 * a);
        let t = t_bar(ts, tc).unwrap() * b;
        let m = common::toy_t(ts, tc, t);
        let (values, _) = common::jacobi_eigen(&m);
        let law = r_of_lambda(ts, tc, values[0]);
        let numeric = common::toy_residual_oracle(&m);
        prop_assert!((numeric - law).abs() < 1e-6, "{numeric} vs {law}");
        let crate_values = sym_eigen(&m, Order::Value).values;
        prop_assert!((crate_values[0] - values[0]).abs() < 1e-12);
    }
}
