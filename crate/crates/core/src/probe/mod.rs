//! Least-squares residuals of label vectors against an embedding, the
//! least-squares linear probe, and clustering accuracy.

mod cluster;
mod hungarian;

pub use cluster::{assignment_accuracy, cluster_accuracy, contingency, kmeans, KMeans};
pub use hungarian::max_weight_assignment;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{least_squares, pinv, PINV_CUTOFF};
use crate::spectral::SpectralEmbedding;

/// One-hot class indicators of the unlabeled points.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelMatrix {
    pub y_matrix: DMatrix<f64>,
}

impl LabelMatrix {
    pub fn from_classes(classes: &[usize], n_classes: usize) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::EmptyInput("class list"));
        }
        if let Some(c) = classes.iter().find(|c| **c >= n_classes) {
            return Err(Error::InvalidParameter(format!(
                "class id {c} out of range for {n_classes} classes"
            )));
        }
        let y_matrix = DMatrix::from_fn(classes.len(), n_classes, |i, j| if classes[i] == j { 1.0 } else { 0.0 });
        Ok(LabelMatrix { y_matrix })
    }

    pub fn n_points(&self) -> usize {
        self.y_matrix.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.y_matrix.ncols()
    }

    /// The indicator vector of class `i`.
    pub fn column(&self, i: usize) -> DVector<f64> {
        self.y_matrix.column(i).into_owned()
    }

    pub fn classes(&self) -> Vec<usize> {
        self.y_matrix
            .row_iter()
            .map(|r| r.iter().position(|v| *v == 1.0).unwrap_or(0))
            .collect()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.y_matrix.column_iter().map(|c| c.sum() as usize).collect()
    }

    pub fn is_balanced(&self) -> bool {
        let c = self.counts();
        c.iter().all(|x| *x == c[0])
    }
}

/// `min_μ ‖y − Uμ‖²` and the minimizing μ.
pub fn residual(u: &DMatrix<f64>, y: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
    check_dim("label vector length", u.nrows(), y.len())?;
    Ok(least_squares(u, y))
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeResult {
    pub residual_total: f64,
    pub residual_per_class: Vec<f64>,
    /// Rows are feature dimensions, columns are classes.
    pub m_ls: Vec<Vec<f64>>,
    /// Misclassified points under the least-squares weights; an upper
    /// bound on the best achievable linear probing error.
    pub zero_one_error_ls: usize,
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(v: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, x) in v.into_iter().enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best.0
}

/// Least-squares probe of the labels on the rows of `u`.
pub fn probe_features(u: &DMatrix<f64>, labels: &LabelMatrix) -> Result<ProbeResult> {
    check_dim("label rows", u.nrows(), labels.n_points())?;
    let m = pinv(u, PINV_CUTOFF) * &labels.y_matrix;
    let fitted = u * &m;
    let residual_per_class: Vec<f64> = (0..labels.n_classes())
        .map(|i| (labels.y_matrix.column(i) - fitted.column(i)).norm_squared())
        .collect();
    let truth = labels.classes();
    let zero_one_error_ls = fitted
        .row_iter()
        .zip(&truth)
        .filter(|(row, c)| argmax(row.iter().copied()) != **c)
        .count();
    Ok(ProbeResult {
        residual_total: residual_per_class.iter().sum(),
        residual_per_class,
        m_ls: crate::linalg::to_rows(&m),
        zero_one_error_ls,
    })
}

/// Probe on U* of an embedding.
pub fn probe(embedding: &SpectralEmbedding, labels: &LabelMatrix) -> Result<ProbeResult> {
    probe_features(&embedding.u_top(), labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_of_u_has_zero_residual() {
        let u = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 2.0, -1.0, 0.0, 3.0]);
        let (r, mu) = residual(&u, &u.column(0).into_owned()).unwrap();
        assert!(r < 1e-20);
        assert!((mu[0] - 1.0).abs() < 1e-12 && mu[1].abs() < 1e-12);
    }

    #[test]
    fn orthogonal_label_is_fully_rejected() {
        let u = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let y = DVector::from_vec(vec![0.0, 1.0, 1.0]);
        assert!((residual(&u, &y).unwrap().0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_lowest_class() {
        assert_eq!(argmax([0.5, 0.5, 0.1]), 0);
        assert_eq!(argmax([0.1, 0.5, 0.5]), 1);
    }

    #[test]
    fn single_class_with_ones_direction() {
        let labels = LabelMatrix::from_classes(&[0, 0, 0, 0], 1).unwrap();
        let u = DMatrix::from_row_slice(4, 2, &[0.5, 1.0, 0.5, -1.0, 0.5, 1.0, 0.5, -1.0]);
        let p = probe_features(&u, &labels).unwrap();
        assert!(p.residual_total < 1e-20);
        assert_eq!(p.zero_one_error_ls, 0);
    }

    #[test]
    fn label_matrix_rejects_bad_ids() {
        assert!(LabelMatrix::from_classes(&[0, 2], 2).is_err());
        assert!(LabelMatrix::from_classes(&[], 2).is_err());
        let l = LabelMatrix::from_classes(&[1, 0, 1, 0], 2).unwrap();
        assert!(l.is_balanced());
        assert_eq!(l.classes(), vec![1, 0, 1, 0]);
    }
}
