//! The five-term contrastive objective over a finite population, its
//! gradient, a gradient-descent minimizer and the factorization
//! certificate tying its minimizer to the spectral embedding.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::population::{build_adjacency, Mixture, PopulationSpec, MIN_DEGREE};
use crate::spectral::decompose;

pub const DEFAULT_MAX_ITERS: usize = 5000;
pub const DEFAULT_LR: f64 = 0.1;
const ARMIJO: f64 = 1e-4;
const GRAD_TOL: f64 = 1e-10;

/// One feature vector `f(x)` per augmented point, stored as rows.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    pub values: DMatrix<f64>,
}

impl FeatureMap {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("feature map has non-finite entries".into()));
        }
        Ok(FeatureMap { values })
    }

    pub fn k(&self) -> usize {
        self.values.ncols()
    }

    /// `F_x = √w_x f(x)`.
    pub fn scaled(&self, degrees: &DVector<f64>) -> DMatrix<f64> {
        let mut f = self.values.clone();
        for (i, mut row) in f.row_iter_mut().enumerate() {
            row *= degrees[i].sqrt();
        }
        f
    }

    /// Inverse of [`FeatureMap::scaled`].
    pub fn from_scaled(f: &DMatrix<f64>, degrees: &DVector<f64>) -> Self {
        let mut v = f.clone();
        for (i, mut row) in v.row_iter_mut().enumerate() {
            row /= degrees[i].sqrt();
        }
        FeatureMap { values: v }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NsclBreakdown {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub l5: f64,
    pub total: f64,
    pub equivalence_constant: f64,
}

/// Precomputed population quantities shared by loss and gradient.
struct Objective {
    alpha: f64,
    beta: f64,
    mixture: Mixture,
    labeled: DVector<f64>,
    unlabeled: DVector<f64>,
    adjacency: DMatrix<f64>,
    degrees: DVector<f64>,
}

impl Objective {
    fn new(spec: &PopulationSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_points();
        let mixture = spec.mixture();
        let labeled = mixture.labeled_total(n);
        let unlabeled = mixture.unlabeled_mean(n);
        let adjacency = mixture.adjacency(n, spec.alpha, spec.beta);
        let degrees = &labeled * spec.alpha + &unlabeled * spec.beta;
        Ok(Objective {
            alpha: spec.alpha,
            beta: spec.beta,
            mixture,
            labeled,
            unlabeled,
            adjacency,
            degrees,
        })
    }

    fn n(&self) -> usize {
        self.degrees.len()
    }

    fn breakdown(&self, f: &DMatrix<f64>) -> NsclBreakdown {
        let proj = |v: &DVector<f64>| (f.transpose() * v).norm_squared();
        let l1: f64 = self.mixture.class_means.iter().map(proj).sum();
        let l2: f64 = self.mixture.unlabeled.iter().map(|(p, t)| p * proj(t)).sum();
        let gram = f * f.transpose();
        let sq = gram.component_mul(&gram);
        let l3 = self.labeled.dot(&(&sq * &self.labeled));
        let l4 = self.labeled.dot(&(&sq * &self.unlabeled));
        let l5 = self.unlabeled.dot(&(&sq * &self.unlabeled));
        let (a, b) = (self.alpha, self.beta);
        let total = -2.0 * a * l1 - 2.0 * b * l2 + a * a * l3 + 2.0 * a * b * l4 + b * b * l5;
        NsclBreakdown {
            l1,
            l2,
            l3,
            l4,
            l5,
            total,
            equivalence_constant: self.constant(),
        }
    }

    fn constant(&self) -> f64 {
        let n = self.n();
        let mut c = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = self.adjacency[(i, j)];
                if w != 0.0 {
                    c += w * w / (self.degrees[i] * self.degrees[j]);
                }
            }
        }
        c
    }

    fn total(&self, f: &DMatrix<f64>) -> f64 {
        let gram = f * f.transpose();
        let linear = self.adjacency.dot(&gram);
        let scaled = scale_rows(f, &self.degrees.map(f64::sqrt));
        let wgram = &scaled * scaled.transpose();
        -2.0 * linear + wgram.norm_squared()
    }

    /// `∂total/∂f = −4Af + 4 D_w f fᵀ D_w f`.
    fn gradient(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        let wf = scale_rows(f, &self.degrees);
        let inner = wf.transpose() * f;
        let quad = scale_rows(&(f * inner), &self.degrees);
        (quad - &self.adjacency * f) * 4.0
    }
}

fn scale_rows(f: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut out = f.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= w[i];
    }
    out
}

pub fn nscl_loss(spec: &PopulationSpec, f: &FeatureMap) -> Result<NsclBreakdown> {
    let obj = Objective::new(spec)?;
    check_dim("feature rows", obj.n(), f.values.nrows())?;
    Ok(obj.breakdown(&f.values))
}

pub fn nscl_gradient(spec: &PopulationSpec, f: &FeatureMap) -> Result<DMatrix<f64>> {
    let obj = Objective::new(spec)?;
    check_dim("feature rows", obj.n(), f.values.nrows())?;
    Ok(obj.gradient(&f.values))
}

#[derive(Clone, Debug)]
pub struct NsclFit {
    pub features: FeatureMap,
    pub breakdown: NsclBreakdown,
    pub converged: bool,
    pub iterations: usize,
}

/// Full-batch gradient descent with Armijo backtracking. Each iteration
/// first tries twice the previously accepted step, starting from `lr`.
pub fn minimize_nscl(spec: &PopulationSpec, k: usize, seed: u64, max_iters: usize, lr: f64) -> Result<NsclFit> {
    let obj = Objective::new(spec)?;
    let n = obj.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "feature dimension k = {k} must lie in 1..={n}"
        )));
    }
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::InvalidParameter(format!("learning rate {lr} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = DMatrix::from_fn(n, k, |_, _| rng.gen_range(-0.1..=0.1));
    let mut loss = obj.total(&f);
    let mut step = lr;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        let g = obj.gradient(&f);
        let gn2 = g.norm_squared();
        if gn2.sqrt() < GRAD_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let mut trial = step * 2.0;
        let accepted = loop {
            let cand = &f - &g * trial;
            let cl = obj.total(&cand);
            if cl <= loss - ARMIJO * trial * gn2 {
                break Some((cand, cl));
            }
            trial *= 0.5;
            if trial < 1e-30 {
                break None;
            }
        };
        match accepted {
            Some((cand, cl)) => {
                let small = loss - cl <= 1e-16 * loss.abs().max(1e-300);
                f = cand;
                loss = cl;
                step = trial;
                if small && gn2.sqrt() < 1e-7 {
                    converged = true;
                    break;
                }
            }
            None => {
                converged = gn2.sqrt() < 1e-7;
                break;
            }
        }
    }
    Ok(NsclFit {
        breakdown: obj.breakdown(&f),
        features: FeatureMap { values: f },
        converged,
        iterations,
    })
}

/// How closely a feature map realizes the spectral factorization.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EquivalenceCertificate {
    /// `|total + constant − ‖Ȧ − FFᵀ‖²_F| / max(1, ‖Ȧ − FFᵀ‖²_F)`.
    pub offset_error: f64,
    /// `‖FFᵀ − F*F*ᵀ‖_F / ‖F*F*ᵀ‖_F`.
    pub gram_error: f64,
    /// `total − (Σ_{i>k} σ_i² − constant)`; never negative beyond rounding.
    pub optimality_gap: f64,
    pub degenerate_gap: bool,
}

pub fn equivalence_certificate(spec: &PopulationSpec, f: &FeatureMap) -> Result<EquivalenceCertificate> {
    let graph = build_adjacency(spec)?;
    if graph.degrees.iter().any(|d| *d <= MIN_DEGREE) {
        return Err(Error::InvalidSpec("zero degree".into()));
    }
    let k = f.k();
    let emb = decompose(&graph, k)?;
    let b = nscl_loss(spec, f)?;
    let big_f = f.scaled(&graph.degrees);
    let trunc = (&graph.normalized - &big_f * big_f.transpose()).norm_squared();
    let fs = emb.f_star();
    let star = &fs * fs.transpose();
    let gram = &big_f * big_f.transpose();
    Ok(EquivalenceCertificate {
        offset_error: (b.total + b.equivalence_constant - trunc).abs() / trunc.max(1.0),
        gram_error: (gram - &star).norm() / star.norm().max(f64::MIN_POSITIVE),
        optimality_gap: b.total - (emb.tail_energy() - b.equivalence_constant),
        degenerate_gap: emb.degenerate_gap,
    })
}
