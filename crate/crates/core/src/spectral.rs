//! Spectral embeddings of a symmetric matrix: ordered eigenpairs, the
//! top-k / rest split and the labeled / unlabeled row split.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{sym_eigen, Order};
use crate::population::WeightedGraph;

/// Gaps below this mark the top-k subspace as not unique.
pub const DEGENERATE_GAP: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SpectralEmbedding {
    /// Signed eigenvalues, ordered by descending magnitude.
    pub eigenvalues: DVector<f64>,
    /// `|eigenvalues|`, descending.
    pub singular_values: DVector<f64>,
    /// All eigenvectors as columns, in the order of `eigenvalues`.
    pub vectors: DMatrix<f64>,
    pub k: usize,
    pub n_labeled: usize,
    /// `σ_k − σ_{k+1}`, with `σ_{N+1} = 0`.
    pub eigengap: f64,
    pub degenerate_gap: bool,
}

impl SpectralEmbedding {
    /// Decomposes a symmetric matrix whose first `n_labeled` rows are the
    /// labeled part.
    pub fn from_symmetric(m: &DMatrix<f64>, n_labeled: usize, k: usize) -> Result<Self> {
        Self::with_order(m, n_labeled, k, Order::Magnitude)
    }

    fn with_order(m: &DMatrix<f64>, n_labeled: usize, k: usize, order: Order) -> Result<Self> {
        let n = m.nrows();
        check_dim("matrix columns", n, m.ncols())?;
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "embedding dimension k = {k} must lie in 1..={n}"
            )));
        }
        if n_labeled > n {
            return Err(Error::InvalidParameter(format!(
                "n_labeled = {n_labeled} exceeds {n} rows"
            )));
        }
        if crate::linalg::asymmetry(m) > 1e-9 * m.amax().max(1.0) {
            return Err(Error::InvalidParameter("matrix is not symmetric".into()));
        }
        let eig = sym_eigen(m, order);
        let singular_values = eig.values.abs();
        let next = if k < n { singular_values[k] } else { 0.0 };
        let eigengap = singular_values[k - 1] - next;
        Ok(SpectralEmbedding {
            eigenvalues: eig.values,
            singular_values,
            vectors: eig.vectors,
            k,
            n_labeled,
            eigengap,
            degenerate_gap: eigengap < DEGENERATE_GAP,
        })
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn n_unlabeled(&self) -> usize {
        self.n() - self.n_labeled
    }

    /// V*.
    pub fn v_top(&self) -> DMatrix<f64> {
        self.vectors.columns(0, self.k).into_owned()
    }

    /// V♭.
    pub fn v_rest(&self) -> DMatrix<f64> {
        self.vectors.columns(self.k, self.n() - self.k).into_owned()
    }

    /// L*.
    pub fn l_top(&self) -> DMatrix<f64> {
        self.vectors.view((0, 0), (self.n_labeled, self.k)).into_owned()
    }

    /// U*.
    pub fn u_top(&self) -> DMatrix<f64> {
        self.vectors
            .view((self.n_labeled, 0), (self.n_unlabeled(), self.k))
            .into_owned()
    }

    /// L♭.
    pub fn l_rest(&self) -> DMatrix<f64> {
        self.vectors
            .view((0, self.k), (self.n_labeled, self.n() - self.k))
            .into_owned()
    }

    /// U♭.
    pub fn u_rest(&self) -> DMatrix<f64> {
        self.vectors
            .view((self.n_labeled, self.k), (self.n_unlabeled(), self.n() - self.k))
            .into_owned()
    }

    /// F* = V*√Σ_k.
    pub fn f_star(&self) -> DMatrix<f64> {
        let mut f = self.v_top();
        for (j, mut col) in f.column_iter_mut().enumerate() {
            col *= self.singular_values[j].sqrt();
        }
        f
    }

    /// The signed rank-k truncation `V* diag(λ_1..λ_k) V*ᵀ`.
    pub fn truncation(&self) -> DMatrix<f64> {
        let v = self.v_top();
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[j];
        }
        scaled * v.transpose()
    }

    /// `Σ_{i>k} σ_i²`.
    pub fn tail_energy(&self) -> f64 {
        self.singular_values.rows(self.k, self.n() - self.k).norm_squared()
    }

    /// The same embedding re-cut at a different k.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        let n = self.n();
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "embedding dimension k = {k} must lie in 1..={n}"
            )));
        }
        let next = if k < n { self.singular_values[k] } else { 0.0 };
        let eigengap = self.singular_values[k - 1] - next;
        Ok(SpectralEmbedding {
            k,
            eigengap,
            degenerate_gap: eigengap < DEGENERATE_GAP,
            ..self.clone()
        })
    }
}

/// Embedding of the normalized adjacency Ȧ.
pub fn decompose(graph: &WeightedGraph, k: usize) -> Result<SpectralEmbedding> {
    SpectralEmbedding::from_symmetric(&graph.normalized, graph.n_labeled, k)
}

/// Embedding of the unnormalized adjacency A, ordered by signed eigenvalue.
pub fn decompose_unnormalized(graph: &WeightedGraph, k: usize) -> Result<SpectralEmbedding> {
    SpectralEmbedding::with_order(&graph.adjacency, graph.n_labeled, k, Order::Value)
}

/// Eigendecomposition ordered by signed eigenvalue, used where the matrix
/// is known to be positive definite and the order of values matters.
pub fn decompose_by_value(m: &DMatrix<f64>, n_labeled: usize, k: usize) -> Result<SpectralEmbedding> {
    SpectralEmbedding::with_order(m, n_labeled, k, Order::Value)
}

/// ‖Ȧ − FFᵀ‖²_F.
pub fn truncation_loss(graph: &WeightedGraph, f: &DMatrix<f64>) -> Result<f64> {
    truncation_loss_of(&graph.normalized, f)
}

pub fn truncation_loss_of(m: &DMatrix<f64>, f: &DMatrix<f64>) -> Result<f64> {
    check_dim("feature rows", m.nrows(), f.nrows())?;
    Ok((m - f * f.transpose()).norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_case() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let e = SpectralEmbedding::from_symmetric(&m, 1, 2).unwrap();
        let f = e.f_star();
        let g = &f * f.transpose();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 0.0]));
        assert!((g - want).amax() < 1e-12);
        assert!((e.eigengap - 1.0).abs() < 1e-12);
        assert!((truncation_loss_of(&m, &f).unwrap() - 1.0).abs() < 1e-12);
        assert!((truncation_loss_of(&m, &DMatrix::zeros(3, 2)).unwrap() - 14.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_gap_is_flagged() {
        let m = DMatrix::identity(3, 3);
        let e = SpectralEmbedding::from_symmetric(&m, 0, 1).unwrap();
        assert!(e.degenerate_gap);
        let e = e.with_k(3).unwrap();
        assert!(!e.degenerate_gap);
        assert_eq!(e.eigengap, 1.0);
    }

    #[test]
    fn splits_have_expected_shapes() {
        let m = DMatrix::from_fn(5, 5, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let e = SpectralEmbedding::from_symmetric(&m, 2, 3).unwrap();
        assert_eq!(e.l_top().shape(), (2, 3));
        assert_eq!(e.u_top().shape(), (3, 3));
        assert_eq!(e.l_rest().shape(), (2, 2));
        assert_eq!(e.u_rest().shape(), (3, 2));
    }

    #[test]
    fn bad_k_rejected() {
        let m = DMatrix::identity(2, 2);
        assert!(SpectralEmbedding::from_symmetric(&m, 0, 0).is_err());
        assert!(SpectralEmbedding::from_symmetric(&m, 0, 3).is_err());
        assert!(truncation_loss_of(&m, &DMatrix::zeros(3, 1)).is_err());
    }
}
