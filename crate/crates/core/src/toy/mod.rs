//! The five-object toy model: one labeled object and four unlabeled
//! objects (red/blue cubes and spheres), connected by augmentation
//! probabilities that depend on shared shape and color.
//!
//! Object order is `[labeled, red cube, red sphere, blue cube, blue sphere]`
//! and the label of interest is color, `y = (1, 1, 0, 0)`.

mod oracle;

pub use oracle::{
    closed_form_oracle, cubic, cubic_roots, projector, r_of_lambda, regime, t_bar, t_family_pairs, ClosedPair, Regime,
    ToyPrediction,
};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{build_adjacency, PopulationSpec};
use crate::probe::residual;
use crate::spectral::{decompose, decompose_by_value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToyCase {
    /// Red cylinder: shares color with the red objects, `t = τ_c`.
    Case1,
    /// Gray cylinder: shares nothing, `t = 0`.
    Case2,
    /// Gray cube: shares shape with both cubes.
    Case3,
    /// Free connection strength `t`.
    General,
}

#[derive(Clone, Debug, Serialize)]
pub struct ToyScenario {
    pub tau1: f64,
    pub tau_s: f64,
    pub tau_c: f64,
    pub tau0: f64,
    pub t: f64,
    pub case: ToyCase,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    #[serde(skip)]
    pub y: DVector<f64>,
    pub warnings: Vec<String>,
}

/// The `T(t)` pattern.
pub fn t_matrix(tau1: f64, tau_s: f64, tau_c: f64, tau0: f64, t: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        5,
        5,
        &[
            tau1, t, t, tau0, tau0, //
            t, tau1, tau_c, tau_s, tau0, //
            t, tau_c, tau1, tau0, tau_s, //
            tau0, tau_s, tau0, tau1, tau_c, //
            tau0, tau0, tau_s, tau_c, tau1,
        ],
    )
}

/// The gray-cube pattern: the labeled cube links to both cubes.
pub fn gray_cube_matrix(tau1: f64, tau_s: f64, tau_c: f64, tau0: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        5,
        5,
        &[
            tau1, tau_s, tau0, tau_s, tau0, //
            tau_s, tau1, tau_c, tau_s, tau0, //
            tau0, tau_c, tau1, tau0, tau_s, //
            tau_s, tau_s, tau0, tau1, tau_c, //
            tau0, tau0, tau_s, tau_c, tau1,
        ],
    )
}

impl ToyScenario {
    pub fn new(case: ToyCase, tau1: f64, tau_s: f64, tau_c: f64, tau0: f64, t: Option<f64>) -> Result<Self> {
        let all = [tau1, tau_s, tau_c, tau0];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "augmentation probabilities {all:?} must be nonnegative"
            )));
        }
        if tau_s <= 0.0 || tau_c <= 0.0 {
            return Err(Error::InvalidParameter("tau_s and tau_c must be positive".into()));
        }
        let t = match (case, t) {
            (ToyCase::General, Some(t)) => {
                if !(0.0..tau_s).contains(&t) {
                    return Err(Error::InvalidParameter(format!(
                        "t = {t} must lie in [0, tau_s = {tau_s})"
                    )));
                }
                t
            }
            (ToyCase::General, None) => return Err(Error::InvalidParameter("the general case needs t".into())),
            (_, Some(_)) => return Err(Error::InvalidParameter(format!("t is fixed by {case:?}"))),
            (ToyCase::Case1, None) => tau_c,
            (ToyCase::Case2, None) => 0.0,
            (ToyCase::Case3, None) => tau_s,
        };
        let matrix = match case {
            ToyCase::Case3 => gray_cube_matrix(tau1, tau_s, tau_c, tau0),
            _ => t_matrix(tau1, tau_s, tau_c, tau0, t),
        };
        let mut warnings = Vec::new();
        if tau1 != 1.0 || tau0 != 0.0 {
            warnings.push(format!(
                "tau1 = {tau1}, tau0 = {tau0}: closed forms assume tau1 = 1 and tau0 = 0"
            ));
        }
        if tau1 <= 2.0 * tau_s.max(tau_c) || tau_s.min(tau_c) <= 2.0 * tau0 {
            warnings.push("magnitude ordering tau1 >> max(tau_s, tau_c) >> tau0 is weak".into());
        }
        let in_b1 = tau_c < tau_s && tau_s < 1.5 * tau_c;
        let in_harm = tau_s < tau_c && tau_c < 1.5 * tau_s;
        match case {
            ToyCase::General if !in_b1 => warnings.push("threshold law needs tau_c < tau_s < 1.5 tau_c".into()),
            ToyCase::Case3 if !in_harm => warnings.push("gray-cube law needs tau_s < tau_c < 1.5 tau_s".into()),
            ToyCase::Case1 | ToyCase::Case2 if tau_s >= 1.5 * tau_c || tau_s == tau_c => {
                warnings.push("case laws need tau_s < 1.5 tau_c and tau_s != tau_c".into())
            }
            _ => {}
        }
        if tau_s + tau_c >= tau1 {
            warnings.push("T may have a non-positive eigenvalue (tau_s + tau_c >= tau1)".into());
        }
        Ok(ToyScenario {
            tau1,
            tau_s,
            tau_c,
            tau0,
            t,
            case,
            matrix,
            y: DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]),
            warnings,
        })
    }

    /// A population whose adjacency is `T²`: each object is both a natural
    /// sample and an augmented point, with unit weights throughout.
    pub fn population(&self) -> PopulationSpec {
        let names = ["labeled", "red_cube", "red_sphere", "blue_cube", "blue_sphere"];
        PopulationSpec {
            natural_labeled: vec![(names[0].into(), 0)],
            natural_unlabeled: names[1..].iter().map(|s| s.to_string()).collect(),
            augmented_points: names.iter().map(|s| s.to_string()).collect(),
            n_labeled_points: 1,
            aug_prob: crate::linalg::to_rows(&self.matrix),
            class_prior_labeled: vec![1.0],
            unlabeled_prior: vec![1.0; 4],
            alpha: 1.0,
            beta: 1.0,
            unnormalized: true,
        }
    }
}

/// Toy scenario with `τ₁ = 1`, `τ₀ = 0`.
pub fn build_toy(case: ToyCase, tau_s: f64, tau_c: f64, t: Option<f64>) -> Result<ToyScenario> {
    ToyScenario::new(case, 1.0, tau_s, tau_c, 0.0, t)
}

#[derive(Clone, Debug, Serialize)]
pub struct ToyResidual {
    pub predicted: Option<f64>,
    pub numeric: f64,
    /// Numeric eigenvalues of T, descending.
    pub eigenvalues: Vec<f64>,
    /// λ₂ and λ₃ coincide, so the top-2 span is not unique.
    pub degenerate: bool,
}

/// Residual of `y` against the unlabeled rows of T's top-2 eigenvectors,
/// next to the closed-form prediction when one applies.
pub fn toy_residual(s: &ToyScenario) -> Result<ToyResidual> {
    let emb = decompose_by_value(&s.matrix, 1, 2)?;
    let (numeric, _) = residual(&emb.u_top(), &s.y)?;
    let predicted = closed_form_oracle(s).ok().and_then(|p| p.residual_predicted);
    Ok(ToyResidual {
        predicted,
        numeric,
        eigenvalues: emb.eigenvalues.iter().copied().collect(),
        degenerate: emb.degenerate_gap,
    })
}

/// The same residual on the normalized adjacency of `A = T²`.
pub fn toy_residual_normalized(s: &ToyScenario) -> Result<f64> {
    let g = build_adjacency(&s.population())?;
    let emb = decompose(&g, 2)?;
    Ok(residual(&emb.u_top(), &s.y)?.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub residual_numeric: f64,
    pub residual_predicted: Option<f64>,
    pub t_bar: f64,
    pub eigenvalues: Vec<f64>,
}

/// Residuals along a grid of connection strengths.
pub fn sweep_t(tau_s: f64, tau_c: f64, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if !(tau_c < tau_s && tau_s < 1.5 * tau_c) {
        return Err(Error::InvalidParameter(format!(
            "sweep needs tau_c < tau_s < 1.5 tau_c, got tau_s = {tau_s}, tau_c = {tau_c}"
        )));
    }
    let tb = t_bar(tau_s, tau_c).expect("tau_s < 2 tau_c");
    grid.par_iter()
        .map(|&t| {
            let s = build_toy(ToyCase::General, tau_s, tau_c, Some(t))?;
            let r = toy_residual(&s)?;
            Ok(SweepRow {
                t,
                residual_numeric: r.numeric,
                residual_predicted: r.predicted,
                t_bar: tb,
                eigenvalues: r.eigenvalues,
            })
        })
        .collect()
}
