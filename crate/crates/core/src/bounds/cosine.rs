//! The minimum over nonzero 𝔩 of `g(𝔩) = 𝔩ᵀΩ𝔩 / (‖Ω𝔩‖‖𝔩‖)` for a
//! positive diagonal Ω.

use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::synth::instance_rng;

pub const STARTS: usize = 50;
const MAX_STEPS: usize = 20_000;

pub fn cosine_functional(omega: &[f64], l: &[f64]) -> f64 {
    let num: f64 = omega.iter().zip(l).map(|(w, x)| w * x * x).sum();
    let wl: f64 = omega.iter().zip(l).map(|(w, x)| (w * x).powi(2)).sum();
    let ll: f64 = l.iter().map(|x| x * x).sum();
    num / (wl.sqrt() * ll.sqrt())
}

/// Gradient of `g` at a unit vector `l`.
fn gradient(omega: &DVector<f64>, l: &DVector<f64>) -> DVector<f64> {
    let wl = omega.component_mul(l);
    let num = l.dot(&wl);
    let den2 = wl.norm_squared();
    let den = den2.sqrt();
    let w2l = omega.component_mul(&wl);
    // g = num / (den ‖l‖), evaluated at ‖l‖ = 1
    &wl * (2.0 / den) - &w2l * (num / (den * den2)) - l * (num / den)
}

#[derive(Clone, Debug, Serialize)]
pub struct CosineMinimum {
    pub min_value: f64,
    pub argmin: Vec<f64>,
    /// `min_{i,j} 2√(ω_iω_j)/(ω_i+ω_j)`.
    pub closed_form: f64,
    /// `min_{i,j} 2√(ω_iω_j)/(√ω_i+√ω_j)`, the variant with square-rooted
    /// denominators; it is not scale invariant and does not equal 1 for
    /// equal weights unless they are 1.
    pub closed_form_sqrt_denominator: f64,
}

fn descend(omega: &DVector<f64>, mut l: DVector<f64>) -> (f64, DVector<f64>) {
    let f = |v: &DVector<f64>| cosine_functional(omega.as_slice(), v.as_slice());
    l.normalize_mut();
    let mut val = f(&l);
    let mut step: f64 = 1.0;
    for _ in 0..MAX_STEPS {
        let mut g = gradient(omega, &l);
        g -= &l * l.dot(&g);
        let gn2 = g.norm_squared();
        if gn2 < 1e-30 {
            break;
        }
        let mut trial = (step * 2.0).min(1e6);
        let accepted = loop {
            let cand = (&l - &g * trial).normalize();
            let cv = f(&cand);
            if cv <= val - 1e-4 * trial * gn2 {
                break Some((cand, cv));
            }
            trial *= 0.5;
            if trial < 1e-20 {
                break None;
            }
        };
        match accepted {
            Some((cand, cv)) => {
                let done = val - cv < 1e-16;
                l = cand;
                val = cv;
                step = trial;
                if done {
                    break;
                }
            }
            None => break,
        }
    }
    (val, l)
}

pub fn cosine_functional_min(omega: &[f64]) -> Result<CosineMinimum> {
    if omega.is_empty() {
        return Err(Error::EmptyInput("omega"));
    }
    if let Some((index, &value)) = omega.iter().enumerate().find(|(_, w)| !w.is_finite() || **w <= 0.0) {
        return Err(Error::NonPositiveOmega { index, value });
    }
    let w = DVector::from_column_slice(omega);
    let n = omega.len();
    let mut best = (f64::INFINITY, DVector::zeros(n));
    for s in 0..STARTS {
        let mut rng = instance_rng(0x636f73, s as u64);
        let start = DVector::from_fn(n, |_, _| rng.gen_range(0.05..1.0));
        let (v, l) = descend(&w, start);
        if v < best.0 {
            best = (v, l);
        }
    }
    let mut closed_form = f64::INFINITY;
    let mut closed_form_sqrt_denominator = f64::INFINITY;
    for i in 0..n {
        for j in i..n {
            let num = 2.0 * (omega[i] * omega[j]).sqrt();
            closed_form = closed_form.min(num / (omega[i] + omega[j]));
            closed_form_sqrt_denominator = closed_form_sqrt_denominator.min(num / (omega[i].sqrt() + omega[j].sqrt()));
        }
    }
    Ok(CosineMinimum {
        min_value: best.0,
        argmin: best.1.iter().copied().collect(),
        closed_form,
        closed_form_sqrt_denominator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_weights_give_one() {
        let m = cosine_functional_min(&[2.0, 2.0, 2.0]).unwrap();
        assert!((m.min_value - 1.0).abs() < 1e-12);
        assert!((m.closed_form - 1.0).abs() < 1e-12);
        assert!((m.closed_form_sqrt_denominator - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn two_weights() {
        let m = cosine_functional_min(&[1.0, 4.0]).unwrap();
        assert!((m.min_value - 0.8).abs() < 1e-9, "{}", m.min_value);
    }

    #[test]
    fn extreme_pair_decides() {
        let m = cosine_functional_min(&[1.0, 1.0, 9.0]).unwrap();
        assert!((m.min_value - 0.6).abs() < 1e-9, "{}", m.min_value);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(matches!(
            cosine_functional_min(&[1.0, 0.0]),
            Err(Error::NonPositiveOmega { index: 1, .. })
        ));
    }
}
