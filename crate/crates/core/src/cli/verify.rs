//! `verify`: seeded randomized suites for every bound, identity and
//! closed form in the crate. Output depends only on the seed.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    cosine_functional_min, coverage_analysis, lbar_structure_check, theorem4_analysis, theorem4_condition, Verdict,
};
use crate::error::{Error, Result};
use crate::linalg::{pinv, sym_eigen, Order, PINV_CUTOFF};
use crate::nscl::{equivalence_certificate, minimize_nscl, nscl_gradient, nscl_loss, FeatureMap};
use crate::population::build_adjacency;
use crate::probe::{assignment_accuracy, probe, LabelMatrix};
use crate::spectral::{decompose, SpectralEmbedding};
use crate::synth::{
    instance_rng, random_binary, random_block_approx, random_classes, random_graph, random_spec, SpecShape,
};
use crate::toy::{build_toy, cubic, projector, r_of_lambda, t_bar, t_family_pairs, toy_residual, ToyCase};

pub const SUITES: [&str; 11] = [
    "thm1",
    "lemma1",
    "thm2",
    "thm3",
    "lemma3",
    "thm4",
    "thmC2",
    "lemmaC1",
    "lemmaC6",
    "hungarian",
    "gradients",
];

/// At most this many failure descriptions are kept per suite.
const MAX_FAILURES: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: usize,
    pub passed: usize,
    /// Largest observed error per measured quantity.
    pub worst: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult {
            name: name.to_string(),
            checks: 0,
            passed: 0,
            worst: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    pub fn ok(&self) -> bool {
        self.checks == self.passed
    }

    fn check(&mut self, pass: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if pass {
            self.passed += 1;
        } else if self.failures.len() < MAX_FAILURES {
            self.failures.push(what());
        }
    }

    fn record(&mut self, key: &str, v: f64) {
        let e = self.worst.entry(key.to_string()).or_insert(0.0);
        if v > *e || v.is_nan() {
            *e = v;
        }
    }

    /// Counts one check per outcome and keeps the worst value per key.
    fn absorb(&mut self, outcomes: Vec<Outcome>) {
        for o in outcomes {
            for (k, v) in &o.metrics {
                self.record(k, *v);
            }
            for (pass, msg) in o.checks {
                self.check(pass, || msg);
            }
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{:<10} {:>5}/{:<5} {}",
            self.name,
            self.passed,
            self.checks,
            if self.ok() { "PASS" } else { "FAIL" }
        )
    }
}

/// Checks and metrics produced by one random instance.
#[derive(Default)]
struct Outcome {
    checks: Vec<(bool, String)>,
    metrics: Vec<(&'static str, f64)>,
}

impl Outcome {
    fn check(&mut self, pass: bool, msg: String) {
        self.checks.push((pass, msg));
    }

    fn metric(&mut self, key: &'static str, v: f64) {
        self.metrics.push((key, v));
    }
}

fn instances<F>(seed: u64, stream: u64, count: u64, f: F) -> Result<Vec<Outcome>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, u64) -> Result<Outcome> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed.wrapping_add(stream << 32), i);
            f(&mut rng, i)
        })
        .collect()
}

fn thm1(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("thm1");
    let out = instances(seed, 1, 100, |rng, i| {
        let shape = SpecShape::random(rng, 10);
        let spec = random_spec(rng, shape);
        let n = shape.n_points();
        let k = rng.gen_range(1..=n.min(4));
        let f = FeatureMap::new(DMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0)))?;
        let g = build_adjacency(&spec)?;
        let b = nscl_loss(&spec, &f)?;
        let big_f = f.scaled(&g.degrees);
        let trunc = (&g.normalized - &big_f * big_f.transpose()).norm_squared();
        let offset = (b.total + b.equivalence_constant - trunc).abs() / trunc.max(1.0);
        let mut o = Outcome::default();
        o.metric("offset_relative", offset);
        o.check(offset < 1e-8, format!("instance {i}: offset identity error {offset:e}"));
        let emb = decompose(&g, k)?;
        if emb.eigengap > 1e-3 {
            let fit = minimize_nscl(&spec, k, seed ^ i, 20_000, 0.5)?;
            let cert = equivalence_certificate(&spec, &fit.features)?;
            o.metric("gram_relative", cert.gram_error);
            o.check(
                cert.gram_error < 1e-3,
                format!("instance {i}: minimizer Gram error {:e}", cert.gram_error),
            );
        }
        Ok(o)
    })?;
    s.absorb(out);
    Ok(s)
}

fn gradients(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("gradients");
    let out = instances(seed, 2, 100, |rng, i| {
        let shape = SpecShape::random(rng, 10);
        let spec = random_spec(rng, shape);
        let n = shape.n_points();
        let k = rng.gen_range(1..=n.min(4));
        let x = DMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
        let g = nscl_gradient(&spec, &FeatureMap::new(x.clone())?)?;
        let h = 1e-6;
        let mut fd = DMatrix::zeros(n, k);
        for a in 0..n {
            for c in 0..k {
                let mut p = x.clone();
                p[(a, c)] += h;
                let mut m = x.clone();
                m[(a, c)] -= h;
                let lp = nscl_loss(&spec, &FeatureMap::new(p)?)?.total;
                let lm = nscl_loss(&spec, &FeatureMap::new(m)?)?.total;
                fd[(a, c)] = (lp - lm) / (2.0 * h);
            }
        }
        let rel = (&g - &fd).norm() / g.norm().max(1e-8);
        let mut o = Outcome::default();
        o.metric("gradient_relative", rel);
        o.check(rel < 1e-4, format!("instance {i}: gradient relative error {rel:e}"));
        Ok(o)
    })?;
    s.absorb(out);
    Ok(s)
}

fn lemma1(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("lemma1");
    let out = instances(seed, 3, 500, |rng, i| {
        let shape = SpecShape::random(rng, 12);
        let g = build_adjacency(&random_spec(rng, shape))?;
        let k = rng.gen_range(1..=g.n());
        let n_classes = rng.gen_range(2..=4).min(g.n_unlabeled.max(1));
        let classes = random_classes(rng, g.n_unlabeled, n_classes);
        let labels = LabelMatrix::from_classes(&classes, n_classes)?;
        let p = probe(&decompose(&g, k)?, &labels)?;
        let half = 0.5 * p.zero_one_error_ls as f64;
        let mut o = Outcome::default();
        o.metric("half_error_minus_residual", half - p.residual_total);
        o.check(
            p.residual_total >= half - 1e-12,
            format!("instance {i}: residual {} < half error {half}", p.residual_total),
        );
        Ok(o)
    })?;
    s.absorb(out);
    Ok(s)
}

fn thm2(_seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("thm2");
    for &(ts, tc) in &[(0.25, 0.2), (0.2, 0.25)] {
        for (case, expected) in [(ToyCase::Case1, 0.0), (ToyCase::Case2, if ts > tc { 1.0 } else { 0.0 })] {
            let r = toy_residual(&build_toy(case, ts, tc, None)?)?;
            let err = (r.numeric - expected).abs();
            s.record("residual_error", err);
            s.check(err < 1e-6 && r.predicted == Some(expected), || {
                format!(
                    "{case:?} tau_s={ts} tau_c={tc}: residual {} predicted {:?}",
                    r.numeric, r.predicted
                )
            });
        }
    }
    Ok(s)
}

/// Closed-form eigenpairs of `T(t)` against the numeric decomposition on a
/// grid inside the threshold regime.
fn eigen_grid(s: &mut SuiteResult) -> Result<()> {
    let mut points = Vec::new();
    for a in 0..10 {
        let tc = 0.1 + 0.2 * a as f64 / 9.0;
        for b in 0..10 {
            let ts = tc * (1.0 + 0.5 * (b as f64 + 0.5) / 10.0);
            for c in 0..10 {
                points.push((ts, tc, ts * (c as f64 + 0.5) / 10.0));
            }
        }
    }
    let out: Vec<Result<Outcome>> = points
        .par_iter()
        .map(|&(ts, tc, t)| {
            let mut o = Outcome::default();
            let toy = build_toy(ToyCase::General, ts, tc, Some(t))?;
            let num = sym_eigen(&toy.matrix, Order::Value);
            let pairs = t_family_pairs(ts, tc, t);
            let val_err = pairs
                .iter()
                .zip(num.values.iter())
                .fold(0.0f64, |m, (p, v)| m.max((p.value - v).abs()));
            o.metric("eigenvalue_error", val_err);
            o.check(
                val_err < 1e-9,
                format!("({ts}, {tc}, {t}): eigenvalue error {val_err:e}"),
            );
            let cubic_err = pairs
                .iter()
                .filter(|p| p.from_cubic)
                .fold(0.0f64, |m, p| m.max(cubic(ts, tc, t, p.value - 1.0).abs()));
            o.metric("cubic_residual", cubic_err);
            o.check(
                cubic_err < 1e-9,
                format!("({ts}, {tc}, {t}): cubic residual {cubic_err:e}"),
            );
            // clusters of nearly equal eigenvalues are compared as subspaces
            let mut start = 0;
            let mut proj_err = 0.0f64;
            while start < 5 {
                let mut end = start + 1;
                while end < 5 && (pairs[end - 1].value - pairs[end].value).abs() < 1e-6 {
                    end += 1;
                }
                let closed = (start..end).fold(DMatrix::zeros(5, 5), |acc, j| acc + projector(&pairs[j].vector));
                let numeric = (start..end).fold(DMatrix::zeros(5, 5), |acc, j| {
                    acc + projector(num.vectors.column(j).as_slice())
                });
                proj_err = proj_err.max((closed - numeric).amax());
                start = end;
            }
            o.metric("projector_error", proj_err);
            o.check(
                proj_err < 1e-8,
                format!("({ts}, {tc}, {t}): projector error {proj_err:e}"),
            );
            Ok(o)
        })
        .collect();
    s.absorb(out.into_iter().collect::<Result<Vec<_>>>()?);
    Ok(())
}

fn thm3(_seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("thm3");
    let (ts, tc) = (0.25, 0.2);
    let tb = t_bar(ts, tc).expect("tau_s < 2 tau_c");
    let grid: Vec<f64> = (0..200).map(|i| ts * i as f64 / 200.0).collect();
    let rows = crate::toy::sweep_t(ts, tc, &grid)?;
    let mut prev = f64::INFINITY;
    for r in &rows {
        let (t, res) = (r.t, r.residual_numeric);
        if t == 0.0 {
            s.check((res - 1.0).abs() < 1e-6, || format!("t = 0: residual {res}"));
        } else if t < tb {
            let law = r_of_lambda(ts, tc, r.eigenvalues[0]);
            let err = (res - law).abs();
            s.record("law_error", err);
            s.check(res > 0.0 && res < 1.0 && err < 1e-6, || {
                format!("t = {t}: residual {res} against law {law}")
            });
        } else {
            s.record("above_threshold_residual", res);
            s.check(res < 1e-6, || format!("t = {t} > t_bar: residual {res}"));
        }
        s.check(res <= prev + 1e-9, || {
            format!("t = {t}: residual rose from {prev} to {res}")
        });
        prev = res;
    }
    eigen_grid(&mut s)?;
    Ok(s)
}

fn lemma3(_seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("lemma3");
    let ts = 0.2;
    for ratio in [1.05, 1.25, 1.45] {
        let tc = ts * ratio;
        let r3 = toy_residual(&build_toy(ToyCase::Case3, ts, tc, None)?)?.numeric;
        let r2 = toy_residual(&build_toy(ToyCase::Case2, ts, tc, None)?)?.numeric;
        let err = (r3 - r2 - 1.0).abs();
        s.record("harm_error", err);
        s.check(err < 1e-6, || format!("tau_c/tau_s = {ratio}: difference {}", r3 - r2));
    }
    Ok(s)
}

fn thm4(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("thm4");
    let out = instances(seed, 4, 500, |rng, i| {
        let n = rng.gen_range(3..=12);
        let nl = rng.gen_range(1..n);
        let (m, nl) = if i % 2 == 0 {
            (random_graph(rng, n, nl).normalized, nl)
        } else {
            let shape = SpecShape::random(rng, 12);
            let g = build_adjacency(&random_spec(rng, shape))?;
            (g.normalized, g.n_labeled)
        };
        let k = rng.gen_range(1..=m.nrows());
        let emb = SpectralEmbedding::from_symmetric(&m, nl, k)?;
        let y = random_binary(rng, m.nrows() - nl);
        let kd = theorem4_analysis(&emb, &y)?;
        let cond = theorem4_condition(&emb, &m, &y)?;
        let mut o = Outcome::default();
        o.metric("residual_minus_bound", kd.residual - kd.theorem4_bound);
        o.check(
            kd.residual <= kd.theorem4_bound + 1e-9,
            format!(
                "instance {i}: residual {:e} > bound {:e}",
                kd.residual, kd.theorem4_bound
            ),
        );
        o.check(
            kd.theorem4_bound <= kd.ignorance_space.norm_squared() + 1e-10,
            format!("instance {i}: bound exceeds the ignorance norm"),
        );
        if cond.verdict != Verdict::IllPosed {
            o.check(
                cond.agrees_with_residual,
                format!(
                    "instance {i}: verdict {:?} with residual {:e}",
                    cond.verdict, cond.residual
                ),
            );
        }
        Ok(o)
    })?;
    s.absorb(out);
    Ok(s)
}

/// y with `ω_i = 1` for every i in ℐ, from the rows `((σ̄_i − A_uu)† η_u)ᵀ`.
fn equal_omega_labels(ap: &crate::population::ApproxGraph, k: usize) -> Result<Option<DVector<f64>>> {
    let nu = ap.a_uu.nrows();
    let probe_y = DVector::zeros(nu);
    let cov = coverage_analysis(ap, k, &probe_y)?;
    let emb = SpectralEmbedding::from_symmetric(&ap.a_bar, ap.n_labeled, k)?;
    if cov.index_set.is_empty() || cov.index_set.len() > nu {
        return Ok(None);
    }
    let rows: Vec<DVector<f64>> = cov
        .index_set
        .iter()
        .map(|&i| {
            pinv(
                &(DMatrix::identity(nu, nu) * emb.eigenvalues[i] - &ap.a_uu),
                PINV_CUTOFF,
            ) * &ap.eta_u
        })
        .collect();
    let r = DMatrix::from_fn(rows.len(), nu, |a, b| rows[a][b]);
    Ok(Some(pinv(&r, PINV_CUTOFF) * DVector::from_element(rows.len(), 1.0)))
}

fn thm_c2(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("thmC2");
    let out = instances(seed, 5, 200, |rng, i| {
        let nl = rng.gen_range(1..=4);
        let nu = rng.gen_range(2..=8);
        let ap = random_block_approx(rng, nl, nu, 1.0);
        let k = rng.gen_range(1..=nu);
        let y = random_binary(rng, nu);
        let c = coverage_analysis(&ap, k, &y)?;
        let mut o = Outcome::default();
        let gap = (c.residual_approx - c.exact_identity_rhs).abs();
        o.metric("identity_error", gap);
        o.check(
            gap <= 1e-8 && c.warnings.is_empty(),
            format!("instance {i}: identity error {gap:e}, warnings {:?}", c.warnings),
        );
        o.check(
            (-1.0..=1.0).contains(&c.kappa),
            format!("instance {i}: kappa {}", c.kappa),
        );
        if let Some(yeq) = equal_omega_labels(&ap, k)? {
            let c2 = coverage_analysis(&ap, k, &yeq)?;
            let err = (1.0 - c2.kappa).abs();
            o.metric("equal_omega_kappa_error", err);
            o.check(
                c2.omega_equal && err < 1e-6,
                format!("instance {i}: equal-omega construction gives kappa {}", c2.kappa),
            );
        }
        Ok(o)
    })?;
    s.absorb(out);
    Ok(s)
}

fn lemma_c1(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("lemmaC1");
    let out = instances(seed, 6, 200, |rng, i| {
        let nl = rng.gen_range(1..=4);
        let nu = rng.gen_range(2..=8);
        let ap = random_block_approx(rng, nl, nu, 1.0);
        let k = rng.gen_range(1..=nu);
        let r = lbar_structure_check(&ap, k)?;
        let mut o = Outcome::default();
        o.metric("top_spread", r.top_spread);
        o.metric("orthogonal_sum", r.orthogonal_sum);
        o.check(
            r.holds == Some(true),
            format!("instance {i}: structure {:?}, columns {:?}", r.holds, r.rest_columns),
        );
        Ok(o)
    })?;
    s.absorb(out);
    Ok(s)
}

fn lemma_c6(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("lemmaC6");
    let out = instances(seed, 7, 50, |rng, i| {
        let n = rng.gen_range(1..=6);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let m = cosine_functional_min(&w)?;
        let err = (m.min_value - m.closed_form).abs();
        let mut o = Outcome::default();
        o.metric("closed_form_error", err);
        o.metric(
            "sqrt_denominator_gap",
            (m.min_value - m.closed_form_sqrt_denominator).abs(),
        );
        o.check(
            err < 1e-6,
            format!("instance {i}: min {} against {}", m.min_value, m.closed_form),
        );
        Ok(o)
    })?;
    s.absorb(out);
    Ok(s)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn hungarian(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("hungarian");
    let out = instances(seed, 8, 200, |rng, i| {
        let k = rng.gen_range(1..=5);
        let n = rng.gen_range(1..=30);
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let acc = assignment_accuracy(&pred, &truth)?;
        let best = permutations(k)
            .iter()
            .map(|p| pred.iter().zip(&truth).filter(|(a, b)| p[**a] == **b).count())
            .max()
            .unwrap_or(0) as f64
            / n as f64;
        let mut o = Outcome::default();
        o.metric("accuracy_error", (acc - best).abs());
        o.check(
            (acc - best).abs() < 1e-12,
            format!("instance {i}: {acc} against brute force {best}"),
        );
        Ok(o)
    })?;
    s.absorb(out);
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub all_passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Resolves suite names; an empty selection means every suite.
pub fn select(names: &[String]) -> Result<Vec<&'static str>> {
    if names.is_empty() {
        return Ok(SUITES.to_vec());
    }
    names
        .iter()
        .map(|n| {
            SUITES
                .iter()
                .find(|s| **s == n.as_str())
                .copied()
                .ok_or_else(|| Error::Config(format!("unknown suite {n:?}; known: {}", SUITES.join(", "))))
        })
        .collect()
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteResult> {
    match name {
        "thm1" => thm1(seed),
        "lemma1" => lemma1(seed),
        "thm2" => thm2(seed),
        "thm3" => thm3(seed),
        "lemma3" => lemma3(seed),
        "thm4" => thm4(seed),
        "thmC2" => thm_c2(seed),
        "lemmaC1" => lemma_c1(seed),
        "lemmaC6" => lemma_c6(seed),
        "hungarian" => hungarian(seed),
        "gradients" => gradients(seed),
        other => Err(Error::Config(format!("unknown suite {other:?}"))),
    }
}

pub fn run_verify(names: &[String], seed: u64) -> Result<VerifyReport> {
    let selected = select(names)?;
    let suites = selected
        .iter()
        .map(|n| run_suite(n, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        tool: super::report::TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        all_passed: suites.iter().all(SuiteResult::ok),
        suites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_complete() {
        let p = permutations(4);
        assert_eq!(p.len(), 24);
        let mut q = p.clone();
        q.sort();
        q.dedup();
        assert_eq!(q.len(), 24);
    }

    #[test]
    fn unknown_suite_is_a_config_error() {
        assert!(matches!(select(&["thm9".into()]), Err(Error::Config(_))));
        assert_eq!(select(&[]).unwrap().len(), SUITES.len());
    }
}
