//! Dense helpers shared by the analysis modules: ordered symmetric
//! eigendecompositions, pseudoinverse least squares and projectors.
//!
//! Matrices are nalgebra types throughout; the decompositions themselves
//! run in faer, whose solvers stay accurate on clustered spectra where
//! nalgebra's `SymmetricEigen` and `SVD` lose several digits.

use faer::{Mat, Par, Side};
use nalgebra::{DMatrix, DVector};

/// Singular values at or below this are treated as zero in every
/// pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-10;

/// Eigenpairs of a symmetric matrix with a fixed order and sign.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    /// Descending |λ|, ties broken by descending signed λ.
    Magnitude,
    /// Descending signed λ.
    Value,
}

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Callers parallelize across instances; the small decompositions here run
/// single-threaded so that results do not depend on the thread count.
fn sequential() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(Par::Seq));
}

pub fn sym_eigen(m: &DMatrix<f64>, order: Order) -> SymEigen {
    let n = m.nrows();
    if n == 0 {
        return SymEigen {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    sequential();
    let sym = to_faer(&((m + m.transpose()) * 0.5));
    let eig = sym
        .self_adjoint_eigen(Side::Lower)
        .expect("symmetric eigendecomposition");
    let lambda: Vec<f64> = (0..n).map(|i| eig.S()[i]).collect();
    let basis = from_faer(eig.U());
    let mut idx: Vec<usize> = (0..n).collect();
    let key = |i: usize| lambda[i];
    idx.sort_by(|&a, &b| {
        let (x, y) = (key(a), key(b));
        let primary = match order {
            Order::Magnitude => y.abs().total_cmp(&x.abs()),
            Order::Value => std::cmp::Ordering::Equal,
        };
        primary.then(y.total_cmp(&x)).then(a.cmp(&b))
    });
    let values = DVector::from_iterator(n, idx.iter().map(|&i| lambda[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        let mut v = basis.column(i).into_owned();
        canonical_sign(&mut v);
        vectors.set_column(c, &v);
    }
    SymEigen { values, vectors }
}

/// Flips `v` so that its first entry of largest magnitude is positive.
pub fn canonical_sign(v: &mut DVector<f64>) {
    let max = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let lead = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-9)).unwrap_or(0);
    if v[lead] < 0.0 {
        v.neg_mut();
    }
}

/// Thin SVD `m = U diag(s) Vᵀ`, singular values descending.
fn thin_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    sequential();
    let svd = to_faer(m).thin_svd().expect("singular value decomposition");
    let p = m.nrows().min(m.ncols());
    let s = DVector::from_fn(p, |i, _| svd.S()[i]);
    (from_faer(svd.U()), s, from_faer(svd.V()))
}

/// Moore-Penrose pseudoinverse with singular values `<= cutoff` dropped.
pub fn pinv(m: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let (u, s, v) = thin_svd(m);
    let mut out = DMatrix::zeros(c, r);
    for (i, &si) in s.iter().enumerate() {
        if si > cutoff {
            out += v.column(i) * u.column(i).transpose() / si;
        }
    }
    out
}

/// Least-squares fit `min_μ ‖y − Uμ‖²`, returning the squared residual and μ.
pub fn least_squares(u: &DMatrix<f64>, y: &DVector<f64>) -> (f64, DVector<f64>) {
    let mu = pinv(u, PINV_CUTOFF) * y;
    let r = y - u * &mu;
    (r.norm_squared(), mu)
}

/// Orthogonal projector onto the column space of `m`, rank decided by
/// singular values above `cutoff`.
pub fn column_projector(m: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut p = DMatrix::zeros(r, r);
    if r == 0 || c == 0 {
        return p;
    }
    let (u, s, _) = thin_svd(m);
    for (i, &si) in s.iter().enumerate() {
        if si > cutoff {
            let q = u.column(i);
            p += q * q.transpose();
        }
    }
    p
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    thin_svd(m).1.iter().fold(0.0f64, |a, &s| a.max(s))
}

pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.is_empty() {
        return DVector::zeros(0);
    }
    thin_svd(m).1
}

/// Largest absolute asymmetry `|m_ij − m_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
