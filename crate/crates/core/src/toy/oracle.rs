//! Closed-form spectrum of the toy augmentation matrices.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{ToyCase, ToyScenario};
use crate::error::{Error, Result};

/// `g(z) = z³ − 2τ_c z² + (τ_c² − τ_s² − 2t²) z + 2τ_c t²`.
pub fn cubic(tau_s: f64, tau_c: f64, t: f64, z: f64) -> f64 {
    ((z - 2.0 * tau_c) * z + (tau_c * tau_c - tau_s * tau_s - 2.0 * t * t)) * z + 2.0 * tau_c * t * t
}

fn cubic_slope(tau_s: f64, tau_c: f64, t: f64, z: f64) -> f64 {
    (3.0 * z - 4.0 * tau_c) * z + (tau_c * tau_c - tau_s * tau_s - 2.0 * t * t)
}

/// Root of `g` in `[lo, hi]` where `g(lo) < 0 < g(hi)` or the reverse.
/// Newton steps are taken when they stay inside the bracket, otherwise
/// the bracket is bisected.
fn bracketed_root(tau_s: f64, tau_c: f64, t: f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = |z| cubic(tau_s, tau_c, t, z);
    let rising = g(hi) > g(lo);
    let mut z = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gz = g(z);
        if gz == 0.0 {
            return z;
        }
        if (gz > 0.0) == rising {
            hi = z;
        } else {
            lo = z;
        }
        if hi - lo <= 1e-15 * (1.0 + z.abs()) {
            break;
        }
        let d = cubic_slope(tau_s, tau_c, t, z);
        let newton = z - gz / d;
        z = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    z
}

/// The three real roots of `g` for `t > 0`, ascending.
pub fn cubic_roots(tau_s: f64, tau_c: f64, t: f64) -> [f64; 3] {
    // g(0) = 2τ_c t² > 0 and g(τ_c) = −τ_s²τ_c < 0 separate the roots
    let bound = 1.0 + 2.0 * tau_c + (tau_c * tau_c - tau_s * tau_s - 2.0 * t * t).abs() + 2.0 * tau_c * t * t;
    [
        bracketed_root(tau_s, tau_c, t, -bound, 0.0),
        bracketed_root(tau_s, tau_c, t, 0.0, tau_c),
        bracketed_root(tau_s, tau_c, t, tau_c, bound),
    ]
}

/// `√(2(τ_s−τ_c)²τ_c / (2τ_c − τ_s))`, defined for `τ_s < 2τ_c`.
pub fn t_bar(tau_s: f64, tau_c: f64) -> Option<f64> {
    let den = 2.0 * tau_c - tau_s;
    (den > 0.0).then(|| (2.0 * (tau_s - tau_c).powi(2) * tau_c / den).sqrt())
}

/// `2τ_s² / ((λ₁ − 1 − τ_c)² + τ_s²)`.
pub fn r_of_lambda(tau_s: f64, tau_c: f64, lambda1: f64) -> f64 {
    2.0 * tau_s * tau_s / ((lambda1 - 1.0 - tau_c).powi(2) + tau_s * tau_s)
}

/// Where a `T(t)` parameter triple sits relative to the eigenvalue
/// orderings of the closed-form analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `τ_c < τ_s < 1.5τ_c`, `t > t̄`: the cubic root lies above `1+τ_s−τ_c`.
    AboveThreshold,
    /// `τ_c < τ_s < 1.5τ_c`, `0 < t < t̄`.
    BelowThreshold,
    /// `τ_c < τ_s < 1.5τ_c`, `t = t̄`: a double eigenvalue.
    AtThreshold,
    /// `t = 0`.
    Disconnected,
    /// Any other parameters; closed forms hold but no ordering is claimed.
    Outside,
}

pub fn regime(tau_s: f64, tau_c: f64, t: f64) -> Regime {
    if t == 0.0 {
        return Regime::Disconnected;
    }
    if !(tau_c < tau_s && tau_s < 1.5 * tau_c) {
        return Regime::Outside;
    }
    let tb = t_bar(tau_s, tau_c).expect("τ_s < 2τ_c");
    if (t - tb).abs() <= 1e-12 * tb.max(1.0) {
        Regime::AtThreshold
    } else if t > tb {
        Regime::AboveThreshold
    } else {
        Regime::BelowThreshold
    }
}

/// An eigenpair of the closed-form analysis; `from_cubic` marks the three
/// values obtained as roots of `g`.
#[derive(Clone, Debug, Serialize)]
pub struct ClosedPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub from_cubic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ToyPrediction {
    pub t_bar: Option<f64>,
    /// Eigenpairs of T, descending by eigenvalue; vectors unnormalized.
    pub pairs: Vec<ClosedPair>,
    pub regime: Regime,
    /// None when no closed-form law covers the parameters.
    pub residual_predicted: Option<f64>,
}

impl ToyPrediction {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

/// Eigenpairs of `T(t)` with `τ₁ = 1`, `τ₀ = 0`, descending.
pub fn t_family_pairs(tau_s: f64, tau_c: f64, t: f64) -> Vec<ClosedPair> {
    let pair = |value: f64, vector: [f64; 5], from_cubic: bool| ClosedPair {
        value,
        vector: vector.to_vec(),
        from_cubic,
    };
    let mut pairs = vec![
        pair(1.0 + tau_s - tau_c, [0.0, -1.0, 1.0, -1.0, 1.0], false),
        pair(1.0 - tau_s - tau_c, [0.0, 1.0, -1.0, -1.0, 1.0], false),
    ];
    if t == 0.0 {
        pairs.push(pair(1.0 + tau_s + tau_c, [0.0, 1.0, 1.0, 1.0, 1.0], false));
        pairs.push(pair(1.0, [1.0, 0.0, 0.0, 0.0, 0.0], false));
        pairs.push(pair(1.0 - tau_s + tau_c, [0.0, 1.0, 1.0, -1.0, -1.0], false));
    } else {
        for z in cubic_roots(tau_s, tau_c, t) {
            let a = z / (2.0 * t);
            let b = tau_s * z / (2.0 * (z - tau_c) * t);
            pairs.push(pair(1.0 + z, [1.0, a, a, b, b], true));
        }
    }
    pairs.sort_by(|x, y| y.value.total_cmp(&x.value));
    pairs
}

/// Column `i` of the gray-cube matrix is column `PERM[i]` of a `T(t)`
/// matrix with the shape and color roles exchanged.
const CASE3_PERM: [usize; 5] = [0, 1, 3, 2, 4];

fn residual_law(s: &ToyScenario) -> Option<f64> {
    let (ts, tc) = (s.tau_s, s.tau_c);
    match s.case {
        ToyCase::Case1 => (ts < 1.5 * tc && ts != tc).then_some(0.0),
        ToyCase::Case2 => {
            if ts < tc {
                Some(0.0)
            } else if tc < ts && ts < 1.5 * tc {
                Some(1.0)
            } else {
                None
            }
        }
        ToyCase::Case3 => (ts < tc && tc < 1.5 * ts).then_some(1.0),
        ToyCase::General => match regime(ts, tc, s.t) {
            Regime::Disconnected if tc < ts && ts < 1.5 * tc => Some(1.0),
            Regime::AboveThreshold => Some(0.0),
            Regime::BelowThreshold => {
                let l1 = t_family_pairs(ts, tc, s.t)[0].value;
                Some(r_of_lambda(ts, tc, l1))
            }
            _ => None,
        },
    }
}

/// Closed-form eigenpairs, threshold and predicted residual.
pub fn closed_form_oracle(s: &ToyScenario) -> Result<ToyPrediction> {
    if s.tau1 != 1.0 || s.tau0 != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "closed forms need tau1 = 1 and tau0 = 0, got {} and {}",
            s.tau1, s.tau0
        )));
    }
    let (pairs, reg) = match s.case {
        ToyCase::Case3 => {
            let (ts, tc, t) = (s.tau_c, s.tau_s, s.tau_s);
            let pairs = t_family_pairs(ts, tc, t)
                .into_iter()
                .map(|p| ClosedPair {
                    vector: CASE3_PERM.iter().map(|&j| p.vector[j]).collect(),
                    ..p
                })
                .collect();
            (pairs, regime(ts, tc, t))
        }
        _ => (t_family_pairs(s.tau_s, s.tau_c, s.t), regime(s.tau_s, s.tau_c, s.t)),
    };
    Ok(ToyPrediction {
        t_bar: t_bar(s.tau_s, s.tau_c),
        pairs,
        regime: reg,
        residual_predicted: residual_law(s),
    })
}

/// Normalized outer product `vvᵀ/‖v‖²`.
pub fn projector(v: &[f64]) -> DMatrix<f64> {
    let v = DVector::from_column_slice(v);
    &v * v.transpose() / v.norm_squared()
}
