//! Augmentation graphs built from a finite population of natural samples.
//!
//! Edge weights are exact finite sums over the natural samples:
//! the labeled term pairs two draws from the same known class, the
//! unlabeled term pairs two augmentations of one unlabeled sample.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degrees at or below this are rejected.
pub const MIN_DEGREE: f64 = 1e-12;
const SUM_TOL: f64 = 1e-9;

/// A finite population: natural samples, their augmentation kernel and
/// the mixing weights of the two positive-pair sources.
///
/// Rows of `aug_prob` list the labeled naturals first, in the order of
/// `natural_labeled`, then the unlabeled ones. Columns are augmented
/// points; the first `n_labeled_points` of them form the labeled part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub natural_labeled: Vec<(String, usize)>,
    pub natural_unlabeled: Vec<String>,
    #[serde(default)]
    pub augmented_points: Vec<String>,
    pub n_labeled_points: usize,
    pub aug_prob: Vec<Vec<f64>>,
    pub class_prior_labeled: Vec<f64>,
    pub unlabeled_prior: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Accept kernels and priors that are nonnegative weights rather than
    /// probability distributions (the toy model's `T` rows do not sum to 1).
    #[serde(default)]
    pub unnormalized: bool,
}

/// Per-source augmentation profiles over the augmented points.
#[derive(Clone, Debug)]
pub(crate) struct Mixture {
    /// `m_i = Σ_{x̄ ∈ class i} P(x̄) T(·|x̄)`, one per class in id order.
    pub class_means: Vec<DVector<f64>>,
    /// `(P_u(x̄), T(·|x̄))` for each unlabeled natural.
    pub unlabeled: Vec<(f64, DVector<f64>)>,
}

impl Mixture {
    /// `Σ_i m_i`.
    pub fn labeled_total(&self, n: usize) -> DVector<f64> {
        self.class_means.iter().fold(DVector::zeros(n), |acc, m| acc + m)
    }

    /// `Σ_u P_u T(·|x̄_u)`.
    pub fn unlabeled_mean(&self, n: usize) -> DVector<f64> {
        self.unlabeled
            .iter()
            .fold(DVector::zeros(n), |acc, (p, t)| acc + t * *p)
    }

    pub fn adjacency(&self, n: usize, alpha: f64, beta: f64) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for m in &self.class_means {
            a.ger(alpha, m, m, 1.0);
        }
        for (p, t) in &self.unlabeled {
            a.ger(beta * p, t, t, 1.0);
        }
        a
    }
}

impl PopulationSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PopulationSpec = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn n_points(&self) -> usize {
        self.aug_prob.first().map_or(0, Vec::len)
    }

    pub fn n_unlabeled_points(&self) -> usize {
        self.n_points().saturating_sub(self.n_labeled_points)
    }

    /// Distinct labeled class ids, ascending.
    pub fn classes(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.natural_labeled.iter().map(|(_, c)| *c).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn point_id(&self, x: usize) -> String {
        self.augmented_points.get(x).cloned().unwrap_or_else(|| format!("x{x}"))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        let n_nat = self.natural_labeled.len() + self.natural_unlabeled.len();
        if n_nat == 0 {
            return bad("no natural samples".into());
        }
        if self.aug_prob.len() != n_nat {
            return bad(format!(
                "aug_prob has {} rows, expected one per natural sample ({n_nat})",
                self.aug_prob.len()
            ));
        }
        let n = self.n_points();
        if n == 0 {
            return bad("aug_prob has no columns".into());
        }
        if self.n_labeled_points > n {
            return bad(format!(
                "n_labeled_points = {} exceeds the {n} augmented points",
                self.n_labeled_points
            ));
        }
        if !self.augmented_points.is_empty() && self.augmented_points.len() != n {
            return bad(format!(
                "augmented_points lists {} ids for {n} columns",
                self.augmented_points.len()
            ));
        }
        for (r, row) in self.aug_prob.iter().enumerate() {
            if row.len() != n {
                return bad(format!("aug_prob row {r} has {} entries, expected {n}", row.len()));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return bad(format!("aug_prob row {r} has invalid entry {v}"));
            }
            if !self.unnormalized {
                if row.iter().any(|v| *v > 1.0) {
                    return bad(format!("aug_prob row {r} has an entry above 1"));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > SUM_TOL {
                    return bad(format!("aug_prob row {r} sums to {s}, expected 1"));
                }
            }
        }
        if self.class_prior_labeled.len() != self.natural_labeled.len() {
            return bad(format!(
                "class_prior_labeled has {} entries for {} labeled naturals",
                self.class_prior_labeled.len(),
                self.natural_labeled.len()
            ));
        }
        if self.unlabeled_prior.len() != self.natural_unlabeled.len() {
            return bad(format!(
                "unlabeled_prior has {} entries for {} unlabeled naturals",
                self.unlabeled_prior.len(),
                self.natural_unlabeled.len()
            ));
        }
        let priors = self.class_prior_labeled.iter().chain(&self.unlabeled_prior);
        if let Some(p) = priors.clone().find(|p| !p.is_finite() || **p < 0.0) {
            return bad(format!("prior entry {p} is not a nonnegative number"));
        }
        if !self.unnormalized {
            let mut per_class: BTreeMap<usize, f64> = BTreeMap::new();
            for ((_, c), p) in self.natural_labeled.iter().zip(&self.class_prior_labeled) {
                *per_class.entry(*c).or_default() += p;
            }
            for (c, s) in per_class {
                if (s - 1.0).abs() > SUM_TOL {
                    return bad(format!("class_prior_labeled for class {c} sums to {s}"));
                }
            }
            if !self.unlabeled_prior.is_empty() {
                let s: f64 = self.unlabeled_prior.iter().sum();
                if (s - 1.0).abs() > SUM_TOL {
                    return bad(format!("unlabeled_prior sums to {s}"));
                }
            }
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) || self.alpha < 0.0 || self.beta < 0.0 {
            return bad(format!(
                "alpha = {}, beta = {} must be nonnegative",
                self.alpha, self.beta
            ));
        }
        if self.alpha == 0.0 && self.beta == 0.0 {
            return Err(Error::ZeroMixing);
        }
        Ok(())
    }

    pub(crate) fn mixture(&self) -> Mixture {
        let n = self.n_points();
        let row = |r: usize| DVector::from_column_slice(&self.aug_prob[r]);
        let classes = self.classes();
        let class_means = classes
            .iter()
            .map(|&c| {
                self.natural_labeled
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, ci))| *ci == c)
                    .fold(DVector::zeros(n), |acc, (r, _)| {
                        acc + row(r) * self.class_prior_labeled[r]
                    })
            })
            .collect();
        let off = self.natural_labeled.len();
        let unlabeled = self
            .unlabeled_prior
            .iter()
            .enumerate()
            .map(|(u, p)| (*p, row(off + u)))
            .collect();
        Mixture { class_means, unlabeled }
    }
}

/// Adjacency, degrees and normalized adjacency of an augmentation graph.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    pub adjacency: DMatrix<f64>,
    pub degrees: DVector<f64>,
    pub normalized: DMatrix<f64>,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
}

impl WeightedGraph {
    /// Normalizes an arbitrary symmetric nonnegative adjacency matrix.
    pub fn from_adjacency(adjacency: DMatrix<f64>, n_labeled: usize) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n {
            return Err(Error::DimensionMismatch {
                what: "adjacency columns",
                expected: n,
                found: adjacency.ncols(),
            });
        }
        if n_labeled > n {
            return Err(Error::InvalidParameter(format!(
                "n_labeled = {n_labeled} exceeds {n} vertices"
            )));
        }
        if crate::linalg::asymmetry(&adjacency) > 1e-12 {
            return Err(Error::InvalidParameter("adjacency is not symmetric".into()));
        }
        let degrees = DVector::from_iterator(n, adjacency.row_iter().map(|r| r.sum()));
        if let Some(x) = degrees.iter().position(|d| !d.is_finite() || *d <= MIN_DEGREE) {
            return Err(Error::ZeroDegree {
                vertex: format!("x{x}"),
            });
        }
        let s = degrees.map(|d| 1.0 / d.sqrt());
        let mut normalized = adjacency.clone();
        for i in 0..n {
            for j in 0..n {
                normalized[(i, j)] *= s[i] * s[j];
            }
        }
        Ok(WeightedGraph {
            adjacency,
            degrees,
            normalized,
            n_labeled,
            n_unlabeled: n - n_labeled,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }
}

/// Builds the augmentation graph of a validated population.
pub fn build_adjacency(spec: &PopulationSpec) -> Result<WeightedGraph> {
    spec.validate()?;
    let n = spec.n_points();
    let a = spec.mixture().adjacency(n, spec.alpha, spec.beta);
    WeightedGraph::from_adjacency(a, spec.n_labeled_points).map_err(|e| match e {
        Error::ZeroDegree { vertex } => {
            let x: usize = vertex[1..].parse().unwrap_or(0);
            Error::ZeroDegree {
                vertex: spec.point_id(x),
            }
        }
        other => other,
    })
}

/// Ȧ with its labeled rows and columns replaced by block averages.
#[derive(Clone, Debug)]
pub struct ApproxGraph {
    pub a_bar: DMatrix<f64>,
    pub eta_l: f64,
    pub eta_u: DVector<f64>,
    pub a_uu: DMatrix<f64>,
    pub a_ul: DMatrix<f64>,
    pub n_labeled: usize,
    /// The matrix that was averaged.
    pub source: DMatrix<f64>,
}

impl ApproxGraph {
    pub fn from_normalized(a: &DMatrix<f64>, n_labeled: usize) -> Result<Self> {
        let n = a.nrows();
        if n_labeled == 0 {
            return Err(Error::NoLabeledVertices);
        }
        if n_labeled > n || a.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "cannot split a {}x{} matrix at {n_labeled}",
                a.nrows(),
                a.ncols()
            )));
        }
        let nu = n - n_labeled;
        let a_ll = a.view((0, 0), (n_labeled, n_labeled));
        let eta_l = a_ll.sum() / (n_labeled * n_labeled) as f64;
        let a_ul = a.view((n_labeled, 0), (nu, n_labeled)).into_owned();
        let eta_u = DVector::from_iterator(nu, a_ul.row_iter().map(|r| r.mean()));
        let a_uu = a.view((n_labeled, n_labeled), (nu, nu)).into_owned();
        Ok(Self::assemble(eta_l, eta_u, a_uu, a_ul, n_labeled, a.clone()))
    }

    /// Builds Ā directly from its blocks; `source` is Ā itself.
    pub fn from_blocks(eta_l: f64, eta_u: DVector<f64>, a_uu: DMatrix<f64>, n_labeled: usize) -> Result<Self> {
        if n_labeled == 0 {
            return Err(Error::NoLabeledVertices);
        }
        crate::error::check_dim("a_uu size", eta_u.len(), a_uu.nrows())?;
        crate::error::check_dim("a_uu size", eta_u.len(), a_uu.ncols())?;
        let nu = eta_u.len();
        let a_ul = DMatrix::from_fn(nu, n_labeled, |i, _| eta_u[i]);
        let mut out = Self::assemble(eta_l, eta_u, a_uu, a_ul, n_labeled, DMatrix::zeros(0, 0));
        out.source = out.a_bar.clone();
        Ok(out)
    }

    fn assemble(
        eta_l: f64,
        eta_u: DVector<f64>,
        a_uu: DMatrix<f64>,
        a_ul: DMatrix<f64>,
        n_labeled: usize,
        source: DMatrix<f64>,
    ) -> Self {
        let nu = eta_u.len();
        let n = n_labeled + nu;
        let a_bar = DMatrix::from_fn(n, n, |i, j| match (i < n_labeled, j < n_labeled) {
            (true, true) => eta_l,
            (true, false) => eta_u[j - n_labeled],
            (false, true) => eta_u[i - n_labeled],
            (false, false) => a_uu[(i - n_labeled, j - n_labeled)],
        });
        ApproxGraph {
            a_bar,
            eta_l,
            eta_u,
            a_uu,
            a_ul,
            n_labeled,
            source,
        }
    }

    pub fn n(&self) -> usize {
        self.a_bar.nrows()
    }

    /// ‖Ȧ − Ā‖₂.
    pub fn perturbation_norm(&self) -> f64 {
        crate::linalg::spectral_norm(&(&self.source - &self.a_bar))
    }
}

pub fn build_approx(graph: &WeightedGraph) -> Result<ApproxGraph> {
    ApproxGraph::from_normalized(&graph.normalized, graph.n_labeled)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_point() -> PopulationSpec {
        PopulationSpec {
            natural_labeled: vec![],
            natural_unlabeled: vec!["u".into()],
            augmented_points: vec![],
            n_labeled_points: 0,
            aug_prob: vec![vec![1.0]],
            class_prior_labeled: vec![],
            unlabeled_prior: vec![1.0],
            alpha: 0.0,
            beta: 1.0,
            unnormalized: false,
        }
    }

    #[test]
    fn single_vertex_identity() {
        let g = build_adjacency(&single_point()).unwrap();
        assert_eq!(g.adjacency[(0, 0)], 1.0);
        assert_eq!(g.normalized[(0, 0)], 1.0);
    }

    #[test]
    fn both_weights_zero_rejected() {
        let mut s = single_point();
        s.beta = 0.0;
        assert!(matches!(build_adjacency(&s), Err(Error::ZeroMixing)));
    }

    #[test]
    fn zero_degree_names_the_vertex() {
        let mut s = single_point();
        s.aug_prob = vec![vec![1.0, 0.0]];
        s.augmented_points = vec!["a".into(), "lonely".into()];
        match build_adjacency(&s) {
            Err(Error::ZeroDegree { vertex }) => assert_eq!(vertex, "lonely"),
            other => panic!("expected zero degree, got {other:?}"),
        }
    }

    #[test]
    fn rows_must_be_distributions() {
        let mut s = single_point();
        s.aug_prob = vec![vec![0.5, 0.4]];
        assert!(build_adjacency(&s).is_err());
        s.unnormalized = true;
        assert!(build_adjacency(&s).is_ok());
    }

    #[test]
    fn single_labeled_row_is_fixed_by_averaging() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.2, 0.1, 0.4, 0.3, 0.2, 0.3, 0.6]);
        let ap = ApproxGraph::from_normalized(&a, 1).unwrap();
        assert_eq!(ap.a_bar, a);
        assert_eq!(ap.perturbation_norm(), 0.0);
    }

    #[test]
    fn no_labeled_rows_rejected() {
        let a = DMatrix::identity(2, 2);
        assert!(matches!(
            ApproxGraph::from_normalized(&a, 0),
            Err(Error::NoLabeledVertices)
        ));
    }

    #[test]
    fn json_roundtrip() {
        let s = single_point();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(PopulationSpec::from_json(&text).unwrap(), s);
    }
}
