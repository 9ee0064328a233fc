//! Coverage analysis on the block-averaged graph Ā, where every
//! eigenvector with a nonzero eigenvalue is constant on the labeled rows.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::linalg::{canonical_sign, pinv, singular_values, sym_eigen, Order, PINV_CUTOFF};
use crate::population::ApproxGraph;
use crate::probe::residual;
use crate::spectral::SpectralEmbedding;

/// Labeled-row agreement and orthogonality tolerance.
pub const STRUCTURE_TOL: f64 = 1e-8;
/// Null-space threshold for Θ, relative to ‖A_uu‖₂.
pub const THETA_TOL: f64 = 1e-9;
/// Entries of 𝔩̄♭ below this are treated as zero.
const LFRAK_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-10;
/// Eigenvalues of Ā closer than this (relative to ‖Ā‖) form one cluster.
const CLUSTER_TOL: f64 = 1e-9;

fn uniform(nl: usize) -> DVector<f64> {
    DVector::from_element(nl, 1.0)
}

/// Θ: nullity of `A_uu − η_u η_uᵀ / η_l`.
pub fn theta(approx: &ApproxGraph) -> usize {
    if approx.a_uu.is_empty() {
        return 0;
    }
    let norm = singular_values(&approx.a_uu).max();
    let schur = if approx.eta_l != 0.0 {
        &approx.a_uu - &approx.eta_u * approx.eta_u.transpose() / approx.eta_l
    } else {
        approx.a_uu.clone()
    };
    singular_values(&schur)
        .iter()
        .filter(|s| **s < THETA_TOL * norm)
        .count()
}

pub fn a_uu_is_psd(approx: &ApproxGraph) -> bool {
    let e = sym_eigen(&approx.a_uu, Order::Value).values;
    let scale = e.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    e.iter().all(|v| *v >= -PSD_TOL * scale.max(1.0))
}

/// Rotates each cluster of equal eigenvalues so that only its first vector
/// has a nonzero labeled sum. The other vectors of the cluster then have
/// labeled parts orthogonal to `1`, which fixes the otherwise arbitrary
/// basis of the zero eigenspace.
fn canonical_clusters(emb: &mut SpectralEmbedding) {
    let n = emb.n();
    let nl = emb.n_labeled;
    let scale = emb.singular_values.iter().fold(1.0f64, |a, s| a.max(*s));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (emb.eigenvalues[end] - emb.eigenvalues[start]).abs() <= CLUSTER_TOL * scale {
            end += 1;
        }
        let m = end - start;
        if m > 1 {
            let block = emb.vectors.columns(start, m).into_owned();
            let sums = block.rows(0, nl).row_sum().transpose();
            let norm = sums.norm();
            if norm > 0.0 {
                // Householder reflection taking `sums` to a multiple of e₁
                let mut v = sums.clone();
                v[0] += norm.copysign(sums[0]);
                let h = DMatrix::identity(m, m) - &v * v.transpose() * (2.0 / v.norm_squared());
                let mut rotated = block * h;
                for mut c in rotated.column_iter_mut() {
                    let mut col = c.clone_owned();
                    canonical_sign(&mut col);
                    c.copy_from(&col);
                }
                emb.vectors.columns_mut(start, m).copy_from(&rotated);
            }
        }
        start = end;
    }
}

/// Whether σ̄_k is nonzero, so that the top-k block holds no vector of the
/// zero eigenspace.
fn k_within_rank(emb: &SpectralEmbedding) -> bool {
    let scale = emb.singular_values.iter().fold(1.0f64, |a, s| a.max(*s));
    emb.k == 0 || emb.singular_values[emb.k - 1] > CLUSTER_TOL * scale
}

/// Quantities shared by the coverage, structure and ratio analyses.
struct BarSpectrum {
    emb: SpectralEmbedding,
    /// 𝔩̄♭ = L̄♭ᵀ1.
    l_frak: DVector<f64>,
    /// Rest indices (absolute, 0-based) where 𝔩̄♭ is nonzero.
    index_set: Vec<usize>,
    d: DVector<f64>,
    q: DMatrix<f64>,
}

impl BarSpectrum {
    fn new(approx: &ApproxGraph, k: usize) -> Result<Self> {
        let mut emb = SpectralEmbedding::from_symmetric(&approx.a_bar, approx.n_labeled, k)?;
        canonical_clusters(&mut emb);
        let l_frak = emb.l_rest().transpose() * uniform(approx.n_labeled);
        let index_set = (0..l_frak.len())
            .filter(|&r| l_frak[r].abs() > LFRAK_TOL)
            .map(|r| k + r)
            .collect();
        let eig = sym_eigen(&approx.a_uu, Order::Value);
        Ok(BarSpectrum {
            emb,
            l_frak,
            index_set,
            d: eig.values,
            q: eig.vectors,
        })
    }

    /// `ω_i = yᵀ(σ̄_i I − A_uu)† η_u`.
    fn omega(&self, approx: &ApproxGraph, y: &DVector<f64>, i: usize) -> f64 {
        let nu = approx.a_uu.nrows();
        let shifted = DMatrix::identity(nu, nu) * self.emb.eigenvalues[i] - &approx.a_uu;
        y.dot(&(pinv(&shifted, PINV_CUTOFF) * &approx.eta_u))
    }

    /// The `A_uu` eigenvector whose eigenvalue is nearest `σ̄_i`.
    fn matched(&self, i: usize) -> usize {
        let s = self.emb.eigenvalues[i];
        (0..self.d.len())
            .min_by(|&a, &b| (self.d[a] - s).abs().total_cmp(&(self.d[b] - s).abs()))
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    /// Failed hypotheses, listed before the values that rely on them.
    pub warnings: Vec<String>,
    pub k: usize,
    pub a_uu_psd: bool,
    pub theta: usize,
    /// ℐ as 0-based indices into the spectrum of Ā.
    pub index_set: Vec<usize>,
    pub l_frak_rest: Vec<f64>,
    /// Ū♭ᵀy.
    pub ignorance_space: Vec<f64>,
    pub ignorance_degree: f64,
    pub kappa: f64,
    /// residual(Ū*, y).
    pub residual_approx: f64,
    /// (1 − κ²)‖Ū♭ᵀy‖².
    pub exact_identity_rhs: f64,
    pub omega: Vec<f64>,
    pub omega_equal: bool,
    /// Eigenvalues d_j of A_uu, descending, and the projections of y and η_u.
    pub a_uu_eigenvalues: Vec<f64>,
    pub y_tilde: Vec<f64>,
    pub eta_tilde: Vec<f64>,
    pub kappa_lower_bound: Option<f64>,
    /// Pairs of ℐ left out of the lower bound (η̃ ≈ 0 or ratios of mixed sign).
    pub excluded_pairs: Vec<(usize, usize)>,
    pub perturbation_norm: f64,
    /// σ_k − σ_{k+1} of the averaged matrix's source.
    pub eigengap: f64,
    /// ‖Ȧ − Ā‖₂ / (σ_k − σ_{k+1}); absent for a zero gap.
    pub eigengap_term: Option<f64>,
    /// E_{i∈ℐ}(1 − ‖ū_i‖²).
    pub mean_unlabeled_deficiency: f64,
}

fn cosine(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na < 1e-14 {
        1.0
    } else if nb < 1e-14 {
        0.0
    } else {
        (a.dot(b) / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// `2√(r_i r_j) / (r_i + r_j)`.
pub fn pair_ratio(a: f64, b: f64) -> f64 {
    2.0 * (a * b).sqrt() / (a + b)
}

pub fn coverage_analysis(approx: &ApproxGraph, k: usize, y: &DVector<f64>) -> Result<CoverageReport> {
    check_dim("label vector length", approx.a_uu.nrows(), y.len())?;
    let bar = BarSpectrum::new(approx, k)?;
    let mut warnings = Vec::new();
    let a_uu_psd = a_uu_is_psd(approx);
    if !a_uu_psd {
        warnings.push("A_uu is not positive semidefinite; the labeled-row structure is not guaranteed".into());
    }
    let th = theta(approx);
    if th > 0 {
        warnings.push(format!(
            "A_uu - eta_u eta_u^T / eta_l has a {th}-dimensional null space"
        ));
    }
    if !k_within_rank(&bar.emb) {
        warnings.push(format!(
            "k = {k} exceeds the number of nonzero eigenvalues of the averaged matrix"
        ));
    } else if bar.emb.degenerate_gap {
        warnings.push(format!("eigengap of the averaged matrix at k = {k} is degenerate"));
    }
    let src = SpectralEmbedding::from_symmetric(&approx.source, approx.n_labeled, k)?;
    let perturbation_norm = approx.perturbation_norm();
    let eigengap_term = (!src.degenerate_gap).then(|| perturbation_norm / src.eigengap);
    if src.degenerate_gap {
        warnings.push(format!(
            "eigengap of the source matrix at k = {k} is degenerate; no approximation term"
        ));
    } else if perturbation_norm >= 0.5 * src.eigengap {
        warnings.push("perturbation exceeds half the eigengap; approximation term not applicable".into());
    }

    let ign = bar.emb.u_rest().transpose() * y;
    let kappa = cosine(&ign, &bar.l_frak);
    let (residual_approx, _) = residual(&bar.emb.u_top(), y)?;
    let yn = y.norm();
    let omega: Vec<f64> = bar.index_set.iter().map(|&i| bar.omega(approx, y, i)).collect();
    let omega_equal = match omega.iter().copied().reduce(f64::max) {
        Some(hi) => {
            let lo = omega.iter().copied().fold(f64::INFINITY, f64::min);
            let scale = omega.iter().fold(0.0f64, |a, w| a.max(w.abs()));
            hi - lo <= 1e-9 * scale
        }
        None => true,
    };
    let y_tilde = bar.q.transpose() * y;
    let eta_tilde = bar.q.transpose() * &approx.eta_u;

    let mut best: Option<f64> = None;
    let mut excluded_pairs = Vec::new();
    for (a, &i) in bar.index_set.iter().enumerate() {
        for &i2 in &bar.index_set[a..] {
            let (j, j2) = (bar.matched(i), bar.matched(i2));
            let ok = eta_tilde[j].abs() > 1e-12 && eta_tilde[j2].abs() > 1e-12;
            let (r, r2) = (y_tilde[j] / eta_tilde[j], y_tilde[j2] / eta_tilde[j2]);
            if ok && r * r2 > 0.0 {
                let v = pair_ratio(r.abs(), r2.abs());
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            } else {
                excluded_pairs.push((i, i2));
            }
        }
    }
    let u_rest = bar.emb.u_rest();
    let deficiency: Vec<f64> = bar
        .index_set
        .iter()
        .map(|&i| 1.0 - u_rest.column(i - k).norm_squared())
        .collect();

    Ok(CoverageReport {
        warnings,
        k,
        a_uu_psd,
        theta: th,
        index_set: bar.index_set.clone(),
        l_frak_rest: bar.l_frak.iter().copied().collect(),
        ignorance_degree: if yn > 0.0 { ign.norm() / yn } else { 0.0 },
        exact_identity_rhs: (1.0 - kappa * kappa) * ign.norm_squared(),
        ignorance_space: ign.iter().copied().collect(),
        kappa,
        residual_approx,
        omega,
        omega_equal,
        a_uu_eigenvalues: bar.d.iter().copied().collect(),
        y_tilde: y_tilde.iter().copied().collect(),
        eta_tilde: eta_tilde.iter().copied().collect(),
        kappa_lower_bound: best,
        excluded_pairs,
        perturbation_norm,
        eigengap: src.eigengap,
        eigengap_term,
        mean_unlabeled_deficiency: if deficiency.is_empty() {
            0.0
        } else {
            deficiency.iter().sum::<f64>() / deficiency.len() as f64
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    /// Identical labeled entries with a nonzero sum.
    Constant,
    /// Labeled entries summing to zero.
    Orthogonal,
    /// All labeled entries zero.
    Zero,
    /// Neither.
    Mixed,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub a_uu_psd: bool,
    /// The PSD hypothesis fails; `holds` is then not asserted.
    pub assumption_violated: bool,
    /// σ̄_k is zero, so the top-k block reaches into the zero eigenspace and
    /// `holds` is not asserted either.
    pub k_exceeds_rank: bool,
    pub theta: usize,
    /// Largest spread `max − min` within a column of L̄*.
    pub top_spread: f64,
    pub rest_columns: Vec<ColumnKind>,
    /// Largest `|1ᵀ l|` over orthogonal columns of L̄♭.
    pub orthogonal_sum: f64,
    pub holds: Option<bool>,
}

fn spread(col: nalgebra::DVectorView<'_, f64>) -> f64 {
    col.max() - col.min()
}

pub fn lbar_structure_check(approx: &ApproxGraph, k: usize) -> Result<StructureReport> {
    let bar = BarSpectrum::new(approx, k)?;
    let l_top = bar.emb.l_top();
    let top_spread = (0..k).map(|c| spread(l_top.column(c).as_view())).fold(0.0, f64::max);
    let l_rest = bar.emb.l_rest();
    let mut orthogonal_sum: f64 = 0.0;
    let rest_columns: Vec<ColumnKind> = l_rest
        .column_iter()
        .map(|col| {
            let col = col.into_owned();
            let constant = spread(col.as_view()) <= STRUCTURE_TOL;
            let orth = col.sum().abs() <= STRUCTURE_TOL;
            match (constant, orth) {
                (true, true) => ColumnKind::Zero,
                (true, false) => ColumnKind::Constant,
                (false, true) => {
                    orthogonal_sum = orthogonal_sum.max(col.sum().abs());
                    ColumnKind::Orthogonal
                }
                (false, false) => ColumnKind::Mixed,
            }
        })
        .collect();
    let last_constant = rest_columns.iter().rposition(|c| *c == ColumnKind::Constant);
    let first_orth = rest_columns.iter().position(|c| *c == ColumnKind::Orthogonal);
    let ordered = match (last_constant, first_orth) {
        (Some(a), Some(b)) => a < b,
        _ => true,
    };
    let a_uu_psd = a_uu_is_psd(approx);
    let k_exceeds_rank = !k_within_rank(&bar.emb);
    let ok = top_spread <= STRUCTURE_TOL && ordered && !rest_columns.contains(&ColumnKind::Mixed);
    Ok(StructureReport {
        a_uu_psd,
        assumption_violated: !a_uu_psd,
        k_exceeds_rank,
        theta: theta(approx),
        top_spread,
        rest_columns,
        orthogonal_sum,
        holds: (a_uu_psd && !k_exceeds_rank).then_some(ok),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ApproxErrorBound {
    /// residual(U*, y) on the source matrix.
    pub lhs: f64,
    /// residual(Ū*, y) + 2‖Ȧ − Ā‖₂/(σ_k − σ_{k+1})·‖y‖²; absent for a zero gap.
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    /// ‖Ȧ − Ā‖₂ < (σ_k − σ_{k+1}) / 2.
    pub gap_ok: bool,
    pub residual_approx: f64,
    pub perturbation_norm: f64,
    pub eigengap: f64,
}

/// Compares the residual on the source matrix of `approx` with the
/// residual on Ā plus the perturbation term.
pub fn approx_error_bound(approx: &ApproxGraph, k: usize, y: &DVector<f64>) -> Result<ApproxErrorBound> {
    check_dim("label vector length", approx.a_uu.nrows(), y.len())?;
    let src = SpectralEmbedding::from_symmetric(&approx.source, approx.n_labeled, k)?;
    let bar = SpectralEmbedding::from_symmetric(&approx.a_bar, approx.n_labeled, k)?;
    let (lhs, _) = residual(&src.u_top(), y)?;
    let (residual_approx, _) = residual(&bar.u_top(), y)?;
    let perturbation_norm = approx.perturbation_norm();
    let rhs =
        (!src.degenerate_gap).then(|| residual_approx + 2.0 * perturbation_norm / src.eigengap * y.norm_squared());
    Ok(ApproxErrorBound {
        lhs,
        rhs,
        ratio: rhs.filter(|r| *r > 0.0).map(|r| lhs / r),
        gap_ok: !src.degenerate_gap && perturbation_norm < 0.5 * src.eigengap,
        residual_approx,
        perturbation_norm,
        eigengap: src.eigengap,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OmegaRatio {
    pub i: usize,
    pub i2: usize,
    /// ω_i / ω_{i′}.
    pub exact: f64,
    /// r_j / r_{j′} for the `A_uu` eigenvectors matched to i and i′.
    pub approx: f64,
    /// `approx` times `(d_j/N_l − η_l) / (d_{j′}/N_l − η_l)`, the limit of
    /// `exact` as `max(η_u) → 0`.
    pub approx_scaled: f64,
}

pub fn omega_ratio_diagnostics(approx: &ApproxGraph, k: usize, y: &DVector<f64>) -> Result<Vec<OmegaRatio>> {
    check_dim("label vector length", approx.a_uu.nrows(), y.len())?;
    let bar = BarSpectrum::new(approx, k)?;
    let y_tilde = bar.q.transpose() * y;
    let eta_tilde = bar.q.transpose() * &approx.eta_u;
    let r = |i: usize| {
        let j = bar.matched(i);
        y_tilde[j] / eta_tilde[j]
    };
    let nl = approx.n_labeled as f64;
    let secular = |i: usize| bar.d[bar.matched(i)] / nl - approx.eta_l;
    let mut out = Vec::new();
    for (a, &i) in bar.index_set.iter().enumerate() {
        for &i2 in &bar.index_set[a + 1..] {
            out.push(OmegaRatio {
                i,
                i2,
                exact: bar.omega(approx, y, i) / bar.omega(approx, y, i2),
                approx: r(i) / r(i2),
                approx_scaled: r(i) / r(i2) * secular(i) / secular(i2),
            });
        }
    }
    Ok(out)
}
