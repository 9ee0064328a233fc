//! How much of a label vector the top-k embedding misses, and how much of
//! that the labeled rows of the remaining eigenvectors can absorb.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::Verdict;
use crate::error::{check_dim, Result};
use crate::linalg::{column_projector, pinv, sym_eigen, Order, PINV_CUTOFF};
use crate::probe::residual;
use crate::spectral::SpectralEmbedding;

/// Residuals below this count as zero.
pub const ZERO_RESIDUAL: f64 = 1e-8;
/// An eigenvalue this close to one of `A_uu` makes the resolvent singular.
pub const RESOLVENT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct KnowledgeDecomposition {
    /// U♭ᵀy.
    pub ignorance_space: DVector<f64>,
    /// ‖U♭ᵀy‖ / ‖y‖, zero for `y = 0`.
    pub ignorance_degree: f64,
    /// L♭.
    pub extra_knowledge: DMatrix<f64>,
    /// Projector onto the row space of L♭.
    pub projector_l_rest: DMatrix<f64>,
    /// ‖(I − P_{L♭}) U♭ᵀy‖².
    pub theorem4_bound: f64,
    /// residual(U*, y).
    pub residual: f64,
}

impl KnowledgeDecomposition {
    pub fn bound_holds(&self) -> bool {
        self.residual <= self.theorem4_bound + 1e-9
    }
}

pub fn theorem4_analysis(emb: &SpectralEmbedding, y: &DVector<f64>) -> Result<KnowledgeDecomposition> {
    check_dim("label vector length", emb.n_unlabeled(), y.len())?;
    let u_rest = emb.u_rest();
    let l_rest = emb.l_rest();
    let ignorance_space = u_rest.transpose() * y;
    let yn = y.norm();
    let ignorance_degree = if yn > 0.0 { ignorance_space.norm() / yn } else { 0.0 };
    let projector_l_rest = column_projector(&l_rest.transpose(), PINV_CUTOFF);
    let rejected = &ignorance_space - &projector_l_rest * &ignorance_space;
    let theorem4_bound = rejected.norm_squared();
    let (res, _) = residual(&emb.u_top(), y)?;
    let out = KnowledgeDecomposition {
        ignorance_space,
        ignorance_degree,
        extra_knowledge: l_rest,
        projector_l_rest,
        theorem4_bound,
        residual: res,
    };
    debug_assert!(
        out.residual <= out.theorem4_bound + 1e-9 * (1.0 + y.norm_squared()),
        "residual {} exceeds bound {}",
        out.residual,
        out.theorem4_bound
    );
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    /// `min_ω Σ_{i>k} (c_i − l_iᵀω)²` with `c_i = yᵀ(σ_i I − A_uu)†A_ul l_i`.
    pub feasibility_residual: f64,
    pub residual: f64,
    /// Rest indices whose eigenvalue coincides with one of `A_uu`.
    pub singular_indices: Vec<usize>,
    /// Singular indices with `l_i = 0`, where the resolvent identity gives
    /// no information and `u_iᵀy` is used directly.
    pub substituted_indices: Vec<usize>,
    /// Whether `holds` coincides with a zero residual.
    pub agrees_with_residual: bool,
}

/// Solvability of the zero-residual condition in the extra vector ω.
/// `matrix` is the symmetric matrix that `emb` decomposes.
pub fn theorem4_condition(emb: &SpectralEmbedding, matrix: &DMatrix<f64>, y: &DVector<f64>) -> Result<ConditionReport> {
    check_dim("label vector length", emb.n_unlabeled(), y.len())?;
    check_dim("matrix size", emb.n(), matrix.nrows())?;
    let (nl, nu, n, k) = (emb.n_labeled, emb.n_unlabeled(), emb.n(), emb.k);
    let a_uu = matrix.view((nl, nl), (nu, nu)).into_owned();
    let a_ul = matrix.view((nl, 0), (nu, nl)).into_owned();
    let d = sym_eigen(&a_uu, Order::Value).values;
    let tol = RESOLVENT_TOL * matrix.amax().max(1.0);
    let l_rest = emb.l_rest();
    let u_rest = emb.u_rest();
    let mut c = DVector::zeros(n - k);
    let mut singular_indices = Vec::new();
    let mut substituted_indices = Vec::new();
    let mut ill_posed = false;
    for r in 0..n - k {
        let sigma = emb.eigenvalues[k + r];
        let l = l_rest.column(r).into_owned();
        if d.iter().any(|dj| (sigma - dj).abs() <= tol) {
            singular_indices.push(k + r);
            if l.norm() > tol {
                ill_posed = true;
            } else {
                substituted_indices.push(k + r);
            }
            c[r] = u_rest.column(r).dot(y);
        } else {
            let shifted = DMatrix::identity(nu, nu) * sigma - &a_uu;
            c[r] = y.dot(&(pinv(&shifted, PINV_CUTOFF) * (&a_ul * &l)));
        }
    }
    let p = column_projector(&l_rest.transpose(), PINV_CUTOFF);
    let feasibility_residual = (&c - &p * &c).norm_squared();
    let (res, _) = residual(&emb.u_top(), y)?;
    let verdict = if ill_posed {
        Verdict::IllPosed
    } else if feasibility_residual < ZERO_RESIDUAL {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    let agrees_with_residual = verdict == Verdict::IllPosed || (verdict == Verdict::Holds) == (res < ZERO_RESIDUAL);
    Ok(ConditionReport {
        verdict,
        feasibility_residual,
        residual: res,
        singular_indices,
        substituted_indices,
        agrees_with_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DMatrix<f64> {
        DMatrix::from_fn(6, 6, |i, j| {
            1.0 / (1.0 + (i as f64 - j as f64).abs()) + if i == j { 0.5 } else { 0.0 }
        })
    }

    #[test]
    fn full_rank_embedding_has_zero_bound() {
        let e = SpectralEmbedding::from_symmetric(&sample(), 2, 6).unwrap();
        let y = DVector::from_vec(vec![1.0, 0.0, 1.0, 1.0]);
        let kd = theorem4_analysis(&e, &y).unwrap();
        assert!(kd.theorem4_bound < 1e-20 && kd.residual < 1e-20);
        assert_eq!(theorem4_condition(&e, &sample(), &y).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn no_labeled_rows_means_no_knowledge() {
        let e = SpectralEmbedding::from_symmetric(&sample(), 0, 2).unwrap();
        let y = DVector::from_vec(vec![1.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let kd = theorem4_analysis(&e, &y).unwrap();
        assert!((kd.theorem4_bound - kd.ignorance_space.norm_squared()).abs() < 1e-12);
        assert!((kd.theorem4_bound - kd.residual).abs() < 1e-12);
    }

    #[test]
    fn projector_is_symmetric_idempotent() {
        let e = SpectralEmbedding::from_symmetric(&sample(), 3, 2).unwrap();
        let y = DVector::from_vec(vec![1.0, 0.0, 1.0]);
        let p = theorem4_analysis(&e, &y).unwrap().projector_l_rest;
        assert!((&p * &p - &p).amax() < 1e-9);
        assert!((&p - p.transpose()).amax() < 1e-9);
    }
}
