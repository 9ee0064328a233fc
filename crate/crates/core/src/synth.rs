//! Seeded random instances for property suites and demos.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::population::{ApproxGraph, PopulationSpec, WeightedGraph};

/// Generator for instance `index` of a suite run with `seed`. Streams are
/// independent, so instances can be produced in any order or in parallel.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug)]
pub struct SpecShape {
    pub n_classes: usize,
    pub per_class: usize,
    pub n_unlabeled_naturals: usize,
    pub n_labeled_points: usize,
    pub n_unlabeled_points: usize,
    /// Probability that an entry of a row is left at zero.
    pub sparsity: f64,
}

impl SpecShape {
    pub fn random<R: Rng>(rng: &mut R, max_points: usize) -> Self {
        let n = rng.gen_range(3..=max_points.max(3));
        let n_labeled_points = rng.gen_range(1..n);
        SpecShape {
            n_classes: rng.gen_range(1..=3),
            per_class: rng.gen_range(1..=2),
            n_unlabeled_naturals: rng.gen_range(1..=n),
            n_labeled_points,
            n_unlabeled_points: n - n_labeled_points,
            sparsity: rng.gen_range(0.0..0.5),
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_labeled_points + self.n_unlabeled_points
    }
}

fn distribution<R: Rng>(rng: &mut R, n: usize, sparsity: f64, anchor: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen::<f64>() < sparsity {
                0.0
            } else {
                rng.gen_range(0.05..1.0)
            }
        })
        .collect();
    row[anchor] += 1.0;
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= s);
    row
}

/// A valid population whose every augmented point has positive degree.
/// Each point is the anchor of at least one natural when naturals suffice;
/// otherwise a final dense natural covers the rest.
pub fn random_spec<R: Rng>(rng: &mut R, shape: SpecShape) -> PopulationSpec {
    let n = shape.n_points();
    let mut natural_labeled = Vec::new();
    let mut class_prior_labeled = Vec::new();
    let mut aug_prob = Vec::new();
    let mut anchor = 0usize;
    for c in 0..shape.n_classes {
        let mut w: Vec<f64> = (0..shape.per_class).map(|_| rng.gen_range(0.2..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        for (j, p) in w.into_iter().enumerate() {
            natural_labeled.push((format!("c{c}n{j}"), c));
            class_prior_labeled.push(p);
            let a = anchor % shape.n_labeled_points.max(1);
            aug_prob.push(distribution(rng, n, shape.sparsity, a));
            anchor += 1;
        }
    }
    let mut natural_unlabeled = Vec::new();
    let mut unlabeled_prior = Vec::new();
    for u in 0..shape.n_unlabeled_naturals {
        natural_unlabeled.push(format!("u{u}"));
        unlabeled_prior.push(rng.gen_range(0.2..1.0));
        let a = shape.n_labeled_points + u % shape.n_unlabeled_points.max(1);
        aug_prob.push(distribution(rng, n, shape.sparsity, a.min(n - 1)));
    }
    // a dense natural guarantees positive degrees everywhere
    natural_unlabeled.push("cover".into());
    unlabeled_prior.push(rng.gen_range(0.2..1.0));
    aug_prob.push(distribution(rng, n, 0.0, n - 1));
    let s: f64 = unlabeled_prior.iter().sum();
    unlabeled_prior.iter_mut().for_each(|v| *v /= s);
    PopulationSpec {
        natural_labeled,
        natural_unlabeled,
        augmented_points: vec![],
        n_labeled_points: shape.n_labeled_points,
        aug_prob,
        class_prior_labeled,
        unlabeled_prior,
        alpha: rng.gen_range(0.2..2.0),
        beta: rng.gen_range(0.2..2.0),
        unnormalized: false,
    }
}

/// Dense symmetric nonnegative adjacency with entries in (0, 1].
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, n_labeled: usize) -> WeightedGraph {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(0.01..1.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    WeightedGraph::from_adjacency(a, n_labeled).expect("positive adjacency")
}

/// Random positive semidefinite matrix `G Gᵀ / n` of the given rank.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, rank, |_, _| rng.gen_range(-1.0..1.0));
    &g * g.transpose() / n as f64
}

/// A 0/1 vector with at least one 1 and at least one 0 when `n >= 2`.
pub fn random_binary<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let y = DVector::from_fn(n, |_, _| if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
        let ones = y.sum() as usize;
        if n < 2 || (ones > 0 && ones < n) {
            return y;
        }
    }
}

/// Class ids `0..n_classes`, each used at least once when `n >= n_classes`.
pub fn random_classes<R: Rng>(rng: &mut R, n: usize, n_classes: usize) -> Vec<usize> {
    let mut c: Vec<usize> = (0..n)
        .map(|i| if i < n_classes { i } else { rng.gen_range(0..n_classes) })
        .collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        c.swap(i, j);
    }
    c
}

/// Block-averaged graph with a full-rank PSD unlabeled block and positive
/// labeled couplings, scaled by `1 / m` on `η_u`.
pub fn random_block_approx<R: Rng>(rng: &mut R, n_labeled: usize, n_unlabeled: usize, m: f64) -> ApproxGraph {
    let mut a_uu = random_psd(rng, n_unlabeled, n_unlabeled);
    for i in 0..n_unlabeled {
        a_uu[(i, i)] += rng.gen_range(0.05..0.5);
    }
    let eta_u = DVector::from_fn(n_unlabeled, |_, _| rng.gen_range(0.05..1.0) / m);
    let eta_l = rng.gen_range(0.1..1.0);
    ApproxGraph::from_blocks(eta_l, eta_u, a_uu, n_labeled).expect("consistent blocks")
}
