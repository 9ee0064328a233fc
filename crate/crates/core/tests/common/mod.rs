//! Reference implementations used only by the tests. Each one is written
//! from the definitions with plain loops and shares no code with the crate.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use spectral_ncd::population::PopulationSpec;

/// Cyclic Jacobi eigensolver; eigenvalues descending, eigenvectors as columns.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let values = idx.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
    (values, vectors)
}

/// Edge weights expanded term by term over pairs of natural samples:
/// `w(x, x') = α Σ_i Σ_{x̄, x̄' ∈ i} P(x̄) P(x̄') T(x|x̄) T(x'|x̄')
///           + β Σ_u P_u T(x|x̄_u) T(x'|x̄_u)`.
pub fn edge_weights(spec: &PopulationSpec) -> DMatrix<f64> {
    let n = spec.aug_prob[0].len();
    let nl = spec.natural_labeled.len();
    let mut w = DMatrix::zeros(n, n);
    for x in 0..n {
        for xp in 0..n {
            let mut s = 0.0;
            for (a, (_, ca)) in spec.natural_labeled.iter().enumerate() {
                for (b, (_, cb)) in spec.natural_labeled.iter().enumerate() {
                    if ca == cb {
                        s += spec.alpha
                            * spec.class_prior_labeled[a]
                            * spec.class_prior_labeled[b]
                            * spec.aug_prob[a][x]
                            * spec.aug_prob[b][xp];
                    }
                }
            }
            for (u, p) in spec.unlabeled_prior.iter().enumerate() {
                s += spec.beta * p * spec.aug_prob[nl + u][x] * spec.aug_prob[nl + u][xp];
            }
            w[(x, xp)] = s;
        }
    }
    w
}

/// The five loss terms, each as an explicit sum over point pairs.
pub fn loss_terms(spec: &PopulationSpec, f: &DMatrix<f64>) -> [f64; 5] {
    let n = f.nrows();
    let nl = spec.natural_labeled.len();
    let dot = |x: usize, y: usize| (0..f.ncols()).map(|c| f[(x, c)] * f[(y, c)]).sum::<f64>();
    let mut classes: Vec<usize> = spec.natural_labeled.iter().map(|(_, c)| *c).collect();
    classes.sort();
    classes.dedup();
    let mean = |c: usize, x: usize| -> f64 {
        spec.natural_labeled
            .iter()
            .enumerate()
            .filter(|(_, (_, ci))| *ci == c)
            .map(|(a, _)| spec.class_prior_labeled[a] * spec.aug_prob[a][x])
            .sum()
    };
    let labeled = |x: usize| classes.iter().map(|&c| mean(c, x)).sum::<f64>();
    let unlabeled = |x: usize| {
        (0..spec.unlabeled_prior.len())
            .map(|u| spec.unlabeled_prior[u] * spec.aug_prob[nl + u][x])
            .sum::<f64>()
    };
    let mut l = [0.0; 5];
    for x in 0..n {
        for y in 0..n {
            let d = dot(x, y);
            for &c in &classes {
                l[0] += mean(c, x) * mean(c, y) * d;
            }
            for u in 0..spec.unlabeled_prior.len() {
                l[1] += spec.unlabeled_prior[u] * spec.aug_prob[nl + u][x] * spec.aug_prob[nl + u][y] * d;
            }
            l[2] += labeled(x) * labeled(y) * d * d;
            l[3] += labeled(x) * unlabeled(y) * d * d;
            l[4] += unlabeled(x) * unlabeled(y) * d * d;
        }
    }
    l
}

/// `‖y − Q Qᵀ y‖²` with Q an orthonormal basis of span(U) from modified
/// Gram–Schmidt with one reorthogonalization pass.
pub fn projection_residual(u: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let scale = u.column_iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    for c in u.column_iter() {
        let mut v: DVector<f64> = c.into_owned();
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&v);
                v -= q * p;
            }
        }
        let nv = v.norm();
        if nv > 1e-9 * scale {
            basis.push(v / nv);
        }
    }
    let mut r = y.clone();
    for _ in 0..2 {
        for q in &basis {
            let p = q.dot(&r);
            r -= q * p;
        }
    }
    r.norm_squared()
}

/// Best fraction of points matched under any bijection of cluster ids to
/// class ids, by enumerating permutations with Heap's algorithm.
pub fn brute_force_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let k = pred.iter().chain(truth).max().map_or(1, |m| m + 1);
    let mut perm: Vec<usize> = (0..k).collect();
    let score = |p: &[usize]| pred.iter().zip(truth).filter(|(a, b)| p[**a] == **b).count();
    let mut best = score(&perm);
    let mut c = vec![0; k];
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.max(score(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best as f64 / pred.len() as f64
}

/// Central differences of `f` at `x`, entry by entry.
pub fn finite_difference(f: impl Fn(&DMatrix<f64>) -> f64, x: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        let mut p = x.clone();
        p[(i, j)] += h;
        let mut m = x.clone();
        m[(i, j)] -= h;
        (f(&p) - f(&m)) / (2.0 * h)
    })
}

/// `T(t)` with `τ₁ = 1`, `τ₀ = 0`, objects ordered labeled, red cube, red
/// sphere, blue cube, blue sphere.
pub fn toy_t(tau_s: f64, tau_c: f64, t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(5, 5);
    let mut link = |a: usize, b: usize, v: f64| {
        m[(a, b)] = v;
        m[(b, a)] = v;
    };
    link(0, 1, t);
    link(0, 2, t);
    link(1, 2, tau_c);
    link(3, 4, tau_c);
    link(1, 3, tau_s);
    link(2, 4, tau_s);
    m
}

/// Residual of y = (1, 1, 0, 0) against the unlabeled rows of the top two
/// eigenvectors of `m`, via Jacobi and Gram–Schmidt.
pub fn toy_residual_oracle(m: &DMatrix<f64>) -> f64 {
    let (_, v) = jacobi_eigen(m);
    let u = DMatrix::from_fn(4, 2, |r, c| v[(r + 1, c)]);
    projection_residual(&u, &DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]))
}

/// Degree-normalized `D^{-1/2} W D^{-1/2}`.
pub fn normalize(w: &DMatrix<f64>) -> DMatrix<f64> {
    let d: Vec<f64> = w.row_iter().map(|r| r.sum()).collect();
    DMatrix::from_fn(w.nrows(), w.ncols(), |i, j| w[(i, j)] / (d[i] * d[j]).sqrt())
}

pub fn pets() -> PopulationSpec {
    PopulationSpec::from_json(include_str!("../../examples/configs/pets.json")).unwrap()
}

/// Columns spanning the eigenvectors of the k largest |λ|, with the gap
/// `|λ_k| − |λ_{k+1}|` (infinite when k = n).
pub fn top_span(m: &DMatrix<f64>, k: usize) -> (DMatrix<f64>, f64) {
    let (values, vectors) = jacobi_eigen(m);
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].abs().partial_cmp(&values[a].abs()).unwrap());
    let gap = if k < idx.len() {
        values[idx[k - 1]].abs() - values[idx[k]].abs()
    } else {
        f64::INFINITY
    };
    (DMatrix::from_fn(m.nrows(), k, |r, c| vectors[(r, idx[c])]), gap)
}
