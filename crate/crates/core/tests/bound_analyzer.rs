mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use spectral_ncd::bounds::{
    cosine_functional, cosine_functional_min, coverage_analysis, lbar_structure_check, omega_ratio_diagnostics,
    theorem4_analysis, theorem4_condition, Verdict,
};
use spectral_ncd::population::{build_adjacency, ApproxGraph};
use spectral_ncd::spectral::SpectralEmbedding;
use spectral_ncd::synth::{instance_rng, random_binary, random_block_approx, random_graph, random_spec, SpecShape};

/// y with every ω equal, solved test-side: row i of R is
/// ((σ̄_i − A_uu)⁻¹ η_u)ᵀ and y is the minimum-norm solution of Ry = 1,
/// through a QR factorization of Rᵀ.
fn equal_omega_labels(ap: &ApproxGraph, sigmas: &[f64]) -> Option<DVector<f64>> {
    let nu = ap.a_uu.nrows();
    let rows: Vec<DVector<f64>> = sigmas
        .iter()
        .map(|s| (DMatrix::identity(nu, nu) * *s - &ap.a_uu).lu().solve(&ap.eta_u))
        .collect::<Option<_>>()?;
    let r = DMatrix::from_fn(rows.len(), nu, |a, b| rows[a][b]);
    let qr = r.transpose().qr();
    let z = qr
        .r()
        .transpose()
        .solve_lower_triangular(&DVector::from_element(rows.len(), 1.0))?;
    Some(qr.q() * z)
}

#[test]
fn cosine_two_weights_by_angle_scan() {
    for w in [[1.0, 4.0], [0.3, 0.31], [2.0, 9.0]] {
        let scan = (0..=200_000)
            .map(|i| {
                let th = std::f64::consts::FRAC_PI_2 * i as f64 / 200_000.0;
                cosine_functional(&w, &[th.cos(), th.sin()])
            })
            .fold(f64::INFINITY, f64::min);
        let m = cosine_functional_min(&w).unwrap();
        assert!((m.min_value - scan).abs() < 1e-8, "{w:?}: {} vs {scan}", m.min_value);
        assert!((m.closed_form - scan).abs() < 1e-8);
    }
    // 2√(1·4)/(1+4)
    assert!((cosine_functional_min(&[1.0, 4.0]).unwrap().closed_form - 0.8).abs() < 1e-15);
}

#[test]
fn equal_weights_give_one() {
    let m = cosine_functional_min(&[3.0; 4]).unwrap();
    assert!((m.min_value - 1.0).abs() < 1e-12);
    assert!(cosine_functional_min(&[1.0, -1.0]).is_err());
}

#[test]
fn secular_estimate_improves_with_smaller_eta_u() {
    let median_dev = |m: f64| {
        let mut devs = Vec::new();
        for i in 0..40 {
            let mut rng = instance_rng(17, i);
            let ap = random_block_approx(&mut rng, 2, 6, m);
            let y = random_binary(&mut rng, 6);
            for r in omega_ratio_diagnostics(&ap, 4, &y).unwrap() {
                if r.exact.is_finite() && r.exact != 0.0 {
                    devs.push((r.approx_scaled / r.exact - 1.0).abs());
                }
            }
        }
        devs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        devs[devs.len() / 2]
    };
    let d: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|m| median_dev(*m)).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    assert!(d[2] < 1e-3, "{d:?}");
}

#[test]
fn solvable_labels_have_zero_residual() {
    let mut rng = instance_rng(3, 0);
    let g = random_graph(&mut rng, 9, 3);
    let emb = SpectralEmbedding::from_symmetric(&g.normalized, 3, 4).unwrap();
    let y = emb.u_top() * DVector::from_vec(vec![0.5, -1.0, 0.25, 2.0]);
    let kd = theorem4_analysis(&emb, &y).unwrap();
    let c = theorem4_condition(&emb, &g.normalized, &y).unwrap();
    assert!(kd.residual < 1e-20);
    assert_eq!(c.verdict, Verdict::Holds);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn residual_below_rejection_bound(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 0);
        let shape = SpecShape::random(&mut rng, 12);
        let g = build_adjacency(&random_spec(&mut rng, shape)).unwrap();
        let k = rng.gen_range(1..=g.n());
        let emb = SpectralEmbedding::from_symmetric(&g.normalized, g.n_labeled, k).unwrap();
        let y = random_binary(&mut rng, g.n_unlabeled);
        let kd = theorem4_analysis(&emb, &y).unwrap();
        prop_assert!(kd.residual <= kd.theorem4_bound + 1e-9);
        // bound recomputed with Gram–Schmidt on the rows of L♭
        let bound = common::projection_residual(&emb.l_rest().transpose(), &(emb.u_rest().transpose() * &y));
        prop_assert!((kd.theorem4_bound - bound).abs() < 1e-8);
        let c = theorem4_condition(&emb, &g.normalized, &y).unwrap();
        if c.verdict != Verdict::IllPosed {
            prop_assert!(c.agrees_with_residual);
        }
    }

    #[test]
    fn coverage_identity_on_psd_blocks(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 1);
        let nu = rng.gen_range(2..=8);
        let nl = rng.gen_range(1..=4);
        let ap = random_block_approx(&mut rng, nl, nu, 1.0);
        let k = rng.gen_range(1..=nu);
        let y = random_binary(&mut rng, nu);
        let c = coverage_analysis(&ap, k, &y).unwrap();
        prop_assert!(c.warnings.is_empty(), "{:?}", c.warnings);
        prop_assert!((c.residual_approx - c.exact_identity_rhs).abs() < 1e-8);
        let (span, gap) = common::top_span(&ap.a_bar, k);
        if gap > 1e-8 {
            let u = span.rows(ap.n_labeled, nu).into_owned();
            prop_assert!((common::projection_residual(&u, &y) - c.residual_approx).abs() < 1e-8);
        }
    }

    #[test]
    fn top_eigenvectors_have_constant_labeled_part(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 2);
        let nu = rng.gen_range(2..=8);
        let nl = rng.gen_range(1..=4);
        let ap = random_block_approx(&mut rng, nl, nu, 1.0);
        let k = rng.gen_range(1..=nu);
        let s = lbar_structure_check(&ap, k).unwrap();
        prop_assert_eq!(s.holds, Some(true));
    }

    #[test]
    fn equal_omegas_give_full_coverage(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 3);
        let nu = rng.gen_range(2..=8);
        let nl = rng.gen_range(1..=4);
        let ap = random_block_approx(&mut rng, nl, nu, 1.0);
        let k = rng.gen_range(1..=nu);
        let probe = coverage_analysis(&ap, k, &DVector::zeros(nu)).unwrap();
        let emb = SpectralEmbedding::from_symmetric(&ap.a_bar, nl, k).unwrap();
        let sigmas: Vec<f64> = probe.index_set.iter().map(|&i| emb.eigenvalues[i]).collect();
        prop_assume!(!sigmas.is_empty());
        let y = equal_omega_labels(&ap, &sigmas).unwrap();
        let c = coverage_analysis(&ap, k, &y).unwrap();
        let spread = c.omega.iter().fold(0.0f64, |m, w| m.max((w - c.omega[0]).abs())) / c.omega[0].abs();
        prop_assert!(spread < 1e-6, "{:?}", c.omega);
        prop_assert!((c.kappa - 1.0).abs() < 1e-6, "{}", c.kappa);
    }

    #[test]
    fn closed_form_is_the_minimum(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 4);
        let n = rng.gen_range(1..=6);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let m = cosine_functional_min(&w).unwrap();
        prop_assert!((m.min_value - m.closed_form).abs() < 1e-6);
        let l: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        prop_assert!(cosine_functional(&w, &l) >= m.closed_form - 1e-12);
    }
}
