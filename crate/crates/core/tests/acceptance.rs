//! Acceptance run: one line per criterion, exit status 1 if any fails.
//! Run with `cargo test --test acceptance`.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use spectral_ncd::bounds::{
    cosine_functional_min, coverage_analysis, lbar_structure_check, theorem4_analysis, theorem4_condition, Verdict,
};
use spectral_ncd::linalg::{sym_eigen, Order};
use spectral_ncd::nscl::{equivalence_certificate, minimize_nscl, nscl_gradient, nscl_loss, FeatureMap};
use spectral_ncd::population::{build_adjacency, ApproxGraph};
use spectral_ncd::probe::{assignment_accuracy, probe, LabelMatrix};
use spectral_ncd::spectral::{decompose, SpectralEmbedding};
use spectral_ncd::synth::{
    instance_rng, random_binary, random_block_approx, random_classes, random_graph, random_spec, SpecShape,
};
use spectral_ncd::toy::{build_toy, cubic, projector, r_of_lambda, t_bar, t_family_pairs, toy_residual, ToyCase};

const SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn toy_cases() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for ((ts, tc), want) in [((0.25, 0.2), [0.0, 1.0]), ((0.2, 0.25), [0.0, 0.0])] {
        for (case, w) in [ToyCase::Case1, ToyCase::Case2].into_iter().zip(want) {
            let s = build_toy(case, ts, tc, None).unwrap();
            worst = worst.max((toy_residual(&s).unwrap().numeric - w).abs());
            worst = worst.max((common::toy_residual_oracle(&s.matrix) - w).abs());
        }
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-6 && within(t, 1.0),
        format!("worst error {worst:.1e}, {t:.2?}"),
    )
}

fn threshold_sweep() -> Outcome {
    let start = Instant::now();
    let (ts, tc) = (0.25, 0.2);
    let tb = t_bar(ts, tc).unwrap();
    let mut bad = Vec::new();
    let mut prev = f64::INFINITY;
    let mut law_err = 0.0f64;
    for i in 0..200 {
        let t = ts * i as f64 / 200.0;
        let s = build_toy(ToyCase::General, ts, tc, Some(t)).unwrap();
        let r = toy_residual(&s).unwrap();
        let res = r.numeric;
        let ok = if i == 0 {
            (res - 1.0).abs() < 1e-6
        } else if t < tb {
            let e = (res - r_of_lambda(ts, tc, r.eigenvalues[0])).abs();
            law_err = law_err.max(e);
            res > 0.0 && res < 1.0 && e < 1e-6
        } else {
            res < 1e-6
        };
        if !ok || res > prev + 1e-9 {
            bad.push(t);
        }
        prev = res;
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && (tb - 0.0816497).abs() < 1e-7 && within(t, 5.0),
        format!(
            "t_bar {tb:.7}, law error {law_err:.1e}, {} bad points, {t:.2?}",
            bad.len()
        ),
    )
}

fn gray_cube() -> Outcome {
    let r3 = toy_residual(&build_toy(ToyCase::Case3, 0.2, 0.25, None).unwrap())
        .unwrap()
        .numeric;
    let r2 = toy_residual(&build_toy(ToyCase::Case2, 0.2, 0.25, None).unwrap())
        .unwrap()
        .numeric;
    let o3 = common::toy_residual_oracle(&build_toy(ToyCase::Case3, 0.2, 0.25, None).unwrap().matrix);
    let err = (r3 - r2 - 1.0).abs();
    outcome(
        err < 1e-6 && (o3 - r3).abs() < 1e-9,
        format!("difference {:.9}", r3 - r2),
    )
}

fn closed_form_grid() -> Outcome {
    let (mut ev, mut pj, mut cb) = (0.0f64, 0.0f64, 0.0f64);
    let mut points = 0;
    for a in 0..10 {
        let tc = 0.1 + 0.2 * a as f64 / 9.0;
        for b in 0..10 {
            let ts = tc * (1.0 + 0.5 * (b as f64 + 0.5) / 10.0);
            for c in 0..10 {
                let t = ts * (c as f64 + 0.5) / 10.0;
                points += 1;
                let m = common::toy_t(ts, tc, t);
                let num = sym_eigen(&m, Order::Value);
                let (jac, _) = common::jacobi_eigen(&m);
                let pairs = t_family_pairs(ts, tc, t);
                let mut i = 0;
                while i < 5 {
                    let mut j = i + 1;
                    while j < 5 && (pairs[j - 1].value - pairs[j].value).abs() < 1e-6 {
                        j += 1;
                    }
                    let mut closed = DMatrix::zeros(5, 5);
                    let mut numeric = DMatrix::zeros(5, 5);
                    for (q, p) in pairs.iter().enumerate().take(j).skip(i) {
                        closed += projector(&p.vector);
                        let v: Vec<f64> = num.vectors.column(q).iter().copied().collect();
                        numeric += projector(&v);
                    }
                    pj = pj.max((closed - numeric).amax());
                    i = j;
                }
                for (q, p) in pairs.iter().enumerate() {
                    ev = ev.max((p.value - num.values[q]).abs()).max((p.value - jac[q]).abs());
                    if p.from_cubic {
                        cb = cb.max(cubic(ts, tc, t, p.value - 1.0).abs());
                    }
                }
            }
        }
    }
    outcome(
        ev < 1e-9 && pj < 1e-8 && cb < 1e-9,
        format!("{points} points: eigenvalues {ev:.1e}, projectors {pj:.1e}, |g| {cb:.1e}"),
    )
}

fn factorization() -> Outcome {
    let start = Instant::now();
    let (mut offset, mut gram, mut grad) = (0.0f64, 0.0f64, 0.0f64);
    let mut fitted = 0;
    for i in 0..100 {
        let mut rng = instance_rng(SEED, i);
        let shape = SpecShape::random(&mut rng, 10);
        let spec = random_spec(&mut rng, shape);
        let n = shape.n_points();
        let k = rng.gen_range(1..=n.min(4));
        let x = DMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
        let f = FeatureMap::new(x.clone()).unwrap();
        let b = nscl_loss(&spec, &f).unwrap();
        let w = common::edge_weights(&spec);
        let mut big = x.clone();
        for (r, mut row) in big.row_iter_mut().enumerate() {
            row *= w.row(r).sum().sqrt();
        }
        let trunc = (common::normalize(&w) - &big * big.transpose()).norm_squared();
        offset = offset.max((b.total + b.equivalence_constant - trunc).abs() / trunc.max(1.0));

        let g = nscl_gradient(&spec, &f).unwrap();
        let fd = common::finite_difference(
            |m| nscl_loss(&spec, &FeatureMap::new(m.clone()).unwrap()).unwrap().total,
            &x,
            1e-6,
        );
        grad = grad.max((&g - &fd).norm() / g.norm().max(1e-8));

        let emb = decompose(&build_adjacency(&spec).unwrap(), k).unwrap();
        if emb.eigengap > 1e-3 {
            let fit = minimize_nscl(&spec, k, i, 20_000, 0.5).unwrap();
            gram = gram.max(equivalence_certificate(&spec, &fit.features).unwrap().gram_error);
            fitted += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        offset < 1e-8 && gram < 1e-3 && grad < 1e-4 && fitted > 0 && within(t, 60.0),
        format!("100 pairs: offset {offset:.1e}, Gram {gram:.1e} over {fitted} fits, gradient {grad:.1e}, {t:.2?}"),
    )
}

fn probe_chain() -> Outcome {
    let mut violations = 0;
    for i in 0..500 {
        let mut rng = instance_rng(SEED + 1, i);
        let shape = SpecShape::random(&mut rng, 12);
        let g = build_adjacency(&random_spec(&mut rng, shape)).unwrap();
        let c = rng.gen_range(2..=4);
        let labels = LabelMatrix::from_classes(&random_classes(&mut rng, g.n_unlabeled, c), c).unwrap();
        let k = rng.gen_range(1..=g.n());
        let p = probe(&decompose(&g, k).unwrap(), &labels).unwrap();
        if p.residual_total < 0.5 * p.zero_one_error_ls as f64 - 1e-12 {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("500 instances, {violations} violations"))
}

fn knowledge_bound() -> Outcome {
    let (mut violations, mut disagree, mut ill) = (0, 0, 0);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..500u64 {
        let mut rng = instance_rng(SEED + 2, i);
        let n = rng.gen_range(3..=12);
        let (m, nl) = if i % 2 == 0 {
            let nl = rng.gen_range(1..n);
            (random_graph(&mut rng, n, nl).normalized, nl)
        } else {
            let shape = SpecShape::random(&mut rng, 12);
            let g = build_adjacency(&random_spec(&mut rng, shape)).unwrap();
            (g.normalized, g.n_labeled)
        };
        let k = rng.gen_range(1..=m.nrows());
        let emb = SpectralEmbedding::from_symmetric(&m, nl, k).unwrap();
        let y = random_binary(&mut rng, m.nrows() - nl);
        let kd = theorem4_analysis(&emb, &y).unwrap();
        worst = worst.max(kd.residual - kd.theorem4_bound);
        if kd.residual > kd.theorem4_bound + 1e-9 {
            violations += 1;
        }
        let c = theorem4_condition(&emb, &m, &y).unwrap();
        if c.verdict == Verdict::IllPosed {
            ill += 1;
        } else if (c.verdict == Verdict::Holds) != (c.residual < 1e-8) {
            disagree += 1;
        }
    }
    outcome(
        violations == 0 && disagree == 0,
        format!("500 instances: {violations} violations (worst excess {worst:.1e}), {disagree} verdict disagreements, {ill} ill-posed"),
    )
}

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

fn block_instance(stream: u64, i: u64) -> (ApproxGraph, usize, DVector<f64>) {
    let mut rng = instance_rng(SEED + stream, i);
    let nl = rng.gen_range(1..=4);
    let nu = rng.gen_range(2..=8);
    let ap = random_block_approx(&mut rng, nl, nu, 1.0);
    let k = rng.gen_range(1..=nu);
    let y = random_binary(&mut rng, nu);
    (ap, k, y)
}

fn coverage_identity() -> Outcome {
    let (mut worst, mut kappa_err, mut constructed) = (0.0f64, 0.0f64, 0);
    for i in 0..200 {
        let (ap, k, y) = block_instance(3, i);
        let c = coverage_analysis(&ap, k, &y).unwrap();
        worst = worst.max((c.residual_approx - c.exact_identity_rhs).abs());
        if !c.warnings.is_empty() {
            worst = f64::INFINITY;
        }
        let emb = SpectralEmbedding::from_symmetric(&ap.a_bar, ap.n_labeled, k).unwrap();
        let sigmas: Vec<f64> = c.index_set.iter().map(|&j| emb.eigenvalues[j]).collect();
        if sigmas.is_empty() {
            continue;
        }
        if let Some(yeq) = equal_omega_labels(&ap, &sigmas) {
            kappa_err = kappa_err.max((coverage_analysis(&ap, k, &yeq).unwrap().kappa - 1.0).abs());
            constructed += 1;
        }
    }
    outcome(
        worst < 1e-8 && kappa_err < 1e-6 && constructed > 0,
        format!("200 instances: identity error {worst:.1e}; {constructed} equal-omega labelings, kappa error {kappa_err:.1e}"),
    )
}

fn averaged_structure() -> Outcome {
    let (mut failures, mut spread, mut orth) = (0, 0.0f64, 0.0f64);
    for i in 0..200 {
        let (ap, k, _) = block_instance(4, i);
        let s = lbar_structure_check(&ap, k).unwrap();
        spread = spread.max(s.top_spread);
        orth = orth.max(s.orthogonal_sum);
        if s.holds != Some(true) {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("200 instances: {failures} failures, row spread {spread:.1e}, trailing sums {orth:.1e}"),
    )
}

fn cosine_minimum() -> Outcome {
    let (mut worst, mut printed_gap) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let mut rng = instance_rng(SEED + 5, i);
        let n = rng.gen_range(1..=6);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let m = cosine_functional_min(&w).unwrap();
        worst = worst.max((m.min_value - m.closed_form).abs());
        printed_gap = printed_gap.max((m.min_value - m.closed_form_sqrt_denominator).abs());
    }
    outcome(
        worst < 1e-6,
        format!("50 vectors: error {worst:.1e}; square-rooted denominator variant off by up to {printed_gap:.2}"),
    )
}

fn hungarian() -> Outcome {
    let mut mismatches = 0;
    for i in 0..200 {
        let mut rng = instance_rng(SEED + 6, i);
        let k = rng.gen_range(1..=5);
        let n = rng.gen_range(1..=30);
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let acc = assignment_accuracy(&pred, &truth).unwrap();
        if (acc - common::brute_force_accuracy(&pred, &truth)).abs() > 1e-12 {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("200 instances, {mismatches} mismatches"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    let mut worst = Duration::ZERO;
    let mut all_passed = true;
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_spectral-ncd"))
            .args(["verify", "--seed", "0", "--out"])
            .arg(&out)
            .output()
            .unwrap()
            .status;
        worst = worst.max(start.elapsed());
        all_passed &= status.success();
        reports.push(std::fs::read(out.join("verify.json")).unwrap_or_default());
    }
    let same = !reports[0].is_empty() && reports[0] == reports[1];
    outcome(
        same && all_passed && within(worst, 300.0),
        format!("identical {same}, all suites passed {all_passed}, slowest run {worst:.2?}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("toy case residuals", toy_cases),
        ("threshold sweep", threshold_sweep),
        ("gray-cube harm", gray_cube),
        ("closed-form eigenpairs on a grid", closed_form_grid),
        ("contrastive loss as factorization", factorization),
        ("residual bounds probe error", probe_chain),
        ("extra-knowledge bound", knowledge_bound),
        ("coverage identity", coverage_identity),
        ("averaged-graph eigenvector structure", averaged_structure),
        ("cosine functional minimum", cosine_minimum),
        ("assignment against brute force", hungarian),
        ("deterministic verify run", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
