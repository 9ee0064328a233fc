//! K-means on feature rows and assignment-matched accuracy.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;

use super::hungarian::max_weight_assignment;
use crate::error::{check_dim, Error, Result};
use crate::synth::instance_rng;

pub const RESTARTS: usize = 10;
pub const ITERATIONS: usize = 100;

#[derive(Clone, Debug)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub centroids: DMatrix<f64>,
    pub inertia: f64,
}

fn nearest(x: &DVector<f64>, centroids: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.row_iter().enumerate() {
        let d = (x - row.transpose()).norm_squared();
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lloyd(points: &[DVector<f64>], mut centroids: DMatrix<f64>) -> KMeans {
    let k = centroids.nrows();
    let mut labels = vec![usize::MAX; points.len()];
    for _ in 0..ITERATIONS {
        let next: Vec<usize> = points.iter().map(|x| nearest(x, &centroids).0).collect();
        let changed = next != labels;
        labels = next;
        for c in 0..k {
            let members: Vec<&DVector<f64>> = points
                .iter()
                .zip(&labels)
                .filter(|(_, l)| **l == c)
                .map(|(x, _)| x)
                .collect();
            if !members.is_empty() {
                let mean = members.iter().fold(DVector::zeros(points[0].len()), |a, x| a + *x) / members.len() as f64;
                centroids.set_row(c, &mean.transpose());
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = points.iter().map(|x| nearest(x, &centroids).1).sum();
    let labels = points.iter().map(|x| nearest(x, &centroids).0).collect();
    KMeans {
        labels,
        centroids,
        inertia,
    }
}

/// Best-inertia K-means over seeded restarts from random data points.
pub fn kmeans(features: &DMatrix<f64>, n_clusters: usize, seed: u64) -> Result<KMeans> {
    let n = features.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("features"));
    }
    if n_clusters == 0 {
        return Err(Error::InvalidParameter("n_clusters must be at least 1".into()));
    }
    let points: Vec<DVector<f64>> = features.row_iter().map(|r| r.transpose()).collect();
    let kk = n_clusters.min(n);
    let mut best: Option<KMeans> = None;
    for r in 0..RESTARTS {
        let mut rng = instance_rng(seed, r as u64);
        let picks = sample(&mut rng, n, kk);
        let mut centroids = DMatrix::zeros(n_clusters, features.ncols());
        for (c, i) in picks.iter().enumerate() {
            centroids.set_row(c, &features.row(i));
        }
        for c in kk..n_clusters {
            centroids.set_row(c, &features.row(c % n));
        }
        let run = lloyd(&points, centroids);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// `counts[cluster][class]`.
pub fn contingency(predicted: &[usize], truth: &[usize]) -> Vec<Vec<f64>> {
    let nc = predicted.iter().max().map_or(0, |m| m + 1);
    let nt = truth.iter().max().map_or(0, |m| m + 1);
    let mut t = vec![vec![0.0; nt]; nc];
    for (p, c) in predicted.iter().zip(truth) {
        t[*p][*c] += 1.0;
    }
    t
}

/// Fraction of points correctly labeled under the best one-to-one
/// matching of clusters to classes.
pub fn assignment_accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_dim("true labels", predicted.len(), truth.len())?;
    if predicted.is_empty() {
        return Err(Error::EmptyInput("labels"));
    }
    let table = contingency(predicted, truth);
    let size = table.len().max(table[0].len());
    let square: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| table.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0))
                .collect()
        })
        .collect();
    let assign = max_weight_assignment(&square);
    let matched: f64 = assign.iter().enumerate().map(|(i, j)| square[i][*j]).sum();
    Ok(matched / predicted.len() as f64)
}

pub fn cluster_accuracy(features: &DMatrix<f64>, true_labels: &[usize], n_clusters: usize, seed: u64) -> Result<f64> {
    check_dim("true labels", features.nrows(), true_labels.len())?;
    let km = kmeans(features, n_clusters, seed)?;
    assignment_accuracy(&km.labels, true_labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_features_are_perfect() {
        let truth = vec![0, 1, 2, 1, 0, 2];
        let f = DMatrix::from_fn(6, 3, |i, j| if truth[i] == j { 1.0 } else { 0.0 });
        assert_eq!(cluster_accuracy(&f, &truth, 3, 0).unwrap(), 1.0);
    }

    #[test]
    fn identical_features_match_the_larger_class() {
        let f = DMatrix::from_element(4, 2, 0.3);
        assert_eq!(cluster_accuracy(&f, &[0, 1, 0, 1], 2, 5).unwrap(), 0.5);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(cluster_accuracy(&DMatrix::zeros(0, 2), &[], 2, 0).is_err());
    }
}
