//! `analyze`: one scenario in, one `report.json` out.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::config::{Labels, Mode, ScenarioConfig};
use crate::bounds::{
    approx_error_bound, coverage_analysis, lbar_structure_check, theorem4_analysis, theorem4_condition, Verdict,
};
use crate::error::{Error, Result};
use crate::nscl::{equivalence_certificate, minimize_nscl, EquivalenceCertificate};
use crate::population::{build_adjacency, build_approx, ApproxGraph, PopulationSpec};
use crate::probe::{cluster_accuracy, probe, LabelMatrix};
use crate::spectral::{decompose_by_value, SpectralEmbedding};
use crate::toy::{closed_form_oracle, toy_residual, Regime, ToyScenario};

pub const TOOL: &str = "spectral-ncd";

/// Identity checks on Ā pass within this.
const IDENTITY_TOL: f64 = 1e-8;

/// Everything needed to analyse a scenario, built from a validated config.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub mode: Mode,
    /// The symmetric matrix whose eigenvectors form the embedding.
    pub matrix: DMatrix<f64>,
    pub n_labeled: usize,
    pub k: usize,
    /// Order eigenpairs by signed value (the toy's `T`) instead of magnitude.
    pub by_value: bool,
    pub approx: ApproxGraph,
    pub columns: Vec<(String, DVector<f64>)>,
    pub classes: Option<Vec<usize>>,
    pub toy: Option<ToyScenario>,
    pub spec: Option<PopulationSpec>,
    pub warnings: Vec<String>,
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl Scenario {
    /// Builds the scenario; every failure is reported as a config error.
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        Self::build(cfg).map_err(config_error)
    }

    fn build(cfg: &ScenarioConfig) -> Result<Self> {
        let mut warnings = Vec::new();
        let (matrix, n_labeled, by_value, approx, toy, spec) = match cfg.mode {
            Mode::Toy => {
                let p = cfg.toy.as_ref().expect("validated");
                let s = ToyScenario::new(p.case, p.tau1, p.tau_s, p.tau_c, p.tau0, p.t)?;
                warnings.extend(s.warnings.iter().cloned());
                let (m, by_value) = if p.normalized {
                    warnings.push("normalized toy variant: no closed-form prediction".into());
                    (build_adjacency(&s.population())?.normalized, false)
                } else {
                    (s.matrix.clone(), true)
                };
                let approx = ApproxGraph::from_normalized(&m, 1)?;
                (m, 1, by_value, approx, Some(s), None)
            }
            Mode::Population => {
                let spec = cfg.population_spec()?.expect("validated");
                let g = build_adjacency(&spec)?;
                let approx = build_approx(&g)?;
                (g.normalized, g.n_labeled, false, approx, None, Some(spec))
            }
            Mode::Approx => {
                let approx = match (&cfg.blocks, cfg.population_spec()?) {
                    (Some(b), _) => {
                        let nu = b.eta_u.len();
                        if b.a_uu.len() != nu || b.a_uu.iter().any(|r| r.len() != nu) {
                            return Err(Error::Config(format!("blocks.a_uu: expected a {nu}x{nu} matrix")));
                        }
                        let a_uu = DMatrix::from_fn(nu, nu, |i, j| b.a_uu[i][j]);
                        if crate::linalg::asymmetry(&a_uu) > 1e-12 {
                            return Err(Error::Config("blocks.a_uu: not symmetric".into()));
                        }
                        ApproxGraph::from_blocks(b.eta_l, DVector::from_vec(b.eta_u.clone()), a_uu, b.n_labeled)?
                    }
                    (None, Some(spec)) => build_approx(&build_adjacency(&spec)?)?,
                    (None, None) => unreachable!("validated"),
                };
                (approx.a_bar.clone(), approx.n_labeled, false, approx, None, None)
            }
        };
        let n = matrix.nrows();
        let n_unlabeled = n - n_labeled;
        let k = cfg.k.unwrap_or(2);
        if k > n {
            return Err(Error::Config(format!("k: {k} exceeds the {n} points")));
        }
        let (columns, classes) = match (&cfg.labels, &toy) {
            (Some(Labels::Binary(y)), _) => {
                if y.len() != n_unlabeled {
                    return Err(Error::Config(format!(
                        "labels.binary: expected {n_unlabeled} entries, found {}",
                        y.len()
                    )));
                }
                (vec![("y".to_string(), DVector::from_vec(y.clone()))], None)
            }
            (Some(Labels::Classes(c)), _) => {
                if c.len() != n_unlabeled {
                    return Err(Error::Config(format!(
                        "labels.classes: expected {n_unlabeled} entries, found {}",
                        c.len()
                    )));
                }
                let n_classes = c.iter().max().map_or(0, |m| m + 1);
                let lm = LabelMatrix::from_classes(c, n_classes)?;
                let cols = (0..n_classes).map(|i| (format!("class{i}"), lm.column(i))).collect();
                (cols, Some(c.clone()))
            }
            (None, Some(s)) => (vec![("color".to_string(), s.y.clone())], None),
            (None, None) => unreachable!("validated"),
        };
        if n_unlabeled == 0 {
            return Err(Error::Config("scenario has no unlabeled points".into()));
        }
        Ok(Scenario {
            mode: cfg.mode,
            matrix,
            n_labeled,
            k,
            by_value,
            approx,
            columns,
            classes,
            toy,
            spec,
            warnings,
        })
    }

    pub fn embedding(&self, k: usize) -> Result<SpectralEmbedding> {
        if self.by_value {
            decompose_by_value(&self.matrix, self.n_labeled, k)
        } else {
            SpectralEmbedding::from_symmetric(&self.matrix, self.n_labeled, k)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ColumnReport {
    pub label: String,
    /// residual(U*, y).
    pub residual: f64,
    pub theorem4_bound: f64,
    pub ignorance_degree: f64,
    pub theorem4_condition: Verdict,
    pub feasibility_residual: f64,
    pub kappa: f64,
    /// residual(Ū*, y) on the averaged matrix.
    pub residual_approx: f64,
    /// (1 − κ²)‖Ū♭ᵀy‖².
    pub identity_rhs: f64,
    pub identity: Verdict,
    pub kappa_lower_bound: Option<f64>,
    /// residual(U*, y) against residual(Ū*, y) plus the perturbation term.
    pub approx_bound_rhs: Option<f64>,
    pub approx_bound: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct ToySection {
    pub case: crate::toy::ToyCase,
    pub tau1: f64,
    pub tau_s: f64,
    pub tau_c: f64,
    pub tau0: f64,
    pub t: f64,
    pub t_bar: Option<f64>,
    pub regime: Option<Regime>,
    pub residual_numeric: f64,
    pub residual_predicted: Option<f64>,
    /// Whether the numeric residual matches the prediction within 1e-6.
    pub prediction: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeSection {
    pub residual_total: f64,
    pub residual_per_class: Vec<f64>,
    pub zero_one_error_ls: usize,
    pub cluster_accuracy: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NsclSection {
    pub converged: bool,
    pub iterations: usize,
    pub loss: f64,
    pub certificate: EquivalenceCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub mode: Mode,
    /// Failed preconditions, listed before every value that depends on them.
    pub warnings: Vec<String>,
    pub n: usize,
    pub n_labeled: usize,
    pub k: usize,
    pub eigenvalues: Vec<f64>,
    pub eigengap: f64,
    pub degenerate_gap: bool,
    /// ‖Ȧ − Ā‖₂.
    pub perturbation_norm: f64,
    pub theta: usize,
    pub a_uu_psd: bool,
    pub structure: Verdict,
    pub columns: Vec<ColumnReport>,
    pub residual_total: f64,
    pub probe: Option<ProbeSection>,
    pub toy: Option<ToySection>,
    pub nscl: Option<NsclSection>,
    /// Only present when timing was requested, so default reports stay
    /// byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

fn push_unique(warnings: &mut Vec<String>, w: String) {
    if !warnings.contains(&w) {
        warnings.push(w);
    }
}

fn analyze_column(
    sc: &Scenario,
    emb: &SpectralEmbedding,
    label: &str,
    y: &DVector<f64>,
    warnings: &mut Vec<String>,
) -> Result<ColumnReport> {
    let kd = theorem4_analysis(emb, y)?;
    let cond = theorem4_condition(emb, &sc.matrix, y)?;
    let cov = coverage_analysis(&sc.approx, sc.k, y)?;
    for w in &cov.warnings {
        push_unique(warnings, w.clone());
    }
    let hypotheses_ok = cov.a_uu_psd && !cov.warnings.iter().any(|w| w.contains("exceeds the number"));
    let identity = if !hypotheses_ok {
        Verdict::NotApplicable
    } else if (cov.residual_approx - cov.exact_identity_rhs).abs() <= IDENTITY_TOL {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    let ab = approx_error_bound(&sc.approx, sc.k, y)?;
    let approx_bound = match ab.rhs {
        Some(rhs) if ab.gap_ok => {
            if ab.lhs <= rhs + 1e-12 {
                Verdict::Holds
            } else {
                Verdict::Fails
            }
        }
        _ => Verdict::NotApplicable,
    };
    Ok(ColumnReport {
        label: label.to_string(),
        residual: kd.residual,
        theorem4_bound: kd.theorem4_bound,
        ignorance_degree: kd.ignorance_degree,
        theorem4_condition: cond.verdict,
        feasibility_residual: cond.feasibility_residual,
        kappa: cov.kappa,
        residual_approx: cov.residual_approx,
        identity_rhs: cov.exact_identity_rhs,
        identity,
        kappa_lower_bound: cov.kappa_lower_bound,
        approx_bound_rhs: ab.rhs,
        approx_bound,
    })
}

fn toy_section(s: &ToyScenario, normalized: bool) -> Result<ToySection> {
    let oracle = closed_form_oracle(s).ok();
    let (numeric, predicted) = if normalized {
        (crate::toy::toy_residual_normalized(s)?, None)
    } else {
        let r = toy_residual(s)?;
        (r.numeric, r.predicted)
    };
    let prediction = match predicted {
        Some(p) if (p - numeric).abs() < 1e-6 => Verdict::Holds,
        Some(_) => Verdict::Fails,
        None => Verdict::NotApplicable,
    };
    Ok(ToySection {
        case: s.case,
        tau1: s.tau1,
        tau_s: s.tau_s,
        tau_c: s.tau_c,
        tau0: s.tau0,
        t: s.t,
        t_bar: oracle.as_ref().and_then(|o| o.t_bar),
        regime: oracle.map(|o| o.regime),
        residual_numeric: numeric,
        residual_predicted: predicted,
        prediction,
    })
}

/// Runs every analysis that applies to the scenario.
pub fn analyze(cfg: &ScenarioConfig) -> Result<AnalysisReport> {
    let sc = Scenario::from_config(cfg)?;
    let mut warnings = sc.warnings.clone();
    let emb = sc.embedding(sc.k)?;
    if emb.degenerate_gap {
        push_unique(
            &mut warnings,
            format!("eigengap at k = {} is degenerate; U* is not unique", sc.k),
        );
    }
    let structure = lbar_structure_check(&sc.approx, sc.k)?;
    if structure.assumption_violated {
        push_unique(
            &mut warnings,
            "A_uu is not positive semidefinite; the labeled-row structure is not guaranteed".into(),
        );
    }
    let mut columns = Vec::with_capacity(sc.columns.len());
    for (label, y) in &sc.columns {
        columns.push(analyze_column(&sc, &emb, label, y, &mut warnings)?);
    }
    let probe_section = match &sc.classes {
        Some(c) => {
            let n_classes = sc.columns.len();
            let lm = LabelMatrix::from_classes(c, n_classes)?;
            let p = probe(&emb, &lm)?;
            let acc = if cfg.cluster_accuracy {
                Some(cluster_accuracy(&emb.u_top(), c, n_classes, cfg.seed)?)
            } else {
                None
            };
            Some(ProbeSection {
                residual_total: p.residual_total,
                residual_per_class: p.residual_per_class,
                zero_one_error_ls: p.zero_one_error_ls,
                cluster_accuracy: acc,
            })
        }
        None => None,
    };
    let toy = match &sc.toy {
        Some(s) => {
            let normalized = cfg.toy.as_ref().is_some_and(|p| p.normalized);
            Some(toy_section(s, normalized)?)
        }
        None => None,
    };
    let nscl = match (&cfg.nscl, &sc.spec) {
        (Some(opts), Some(spec)) => {
            let fit = minimize_nscl(spec, sc.k, cfg.seed, opts.max_iters, opts.lr)?;
            if !fit.converged {
                push_unique(
                    &mut warnings,
                    format!(
                        "NSCL fit stopped after {} iterations without converging",
                        fit.iterations
                    ),
                );
            }
            Some(NsclSection {
                converged: fit.converged,
                iterations: fit.iterations,
                loss: fit.breakdown.total,
                certificate: equivalence_certificate(spec, &fit.features)?,
            })
        }
        _ => None,
    };
    let structure_verdict = match structure.holds {
        Some(true) => Verdict::Holds,
        Some(false) => Verdict::Fails,
        None => Verdict::NotApplicable,
    };
    let report = AnalysisReport {
        tool: TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        mode: sc.mode,
        warnings,
        n: emb.n(),
        n_labeled: sc.n_labeled,
        k: sc.k,
        eigenvalues: emb.eigenvalues.iter().copied().collect(),
        eigengap: emb.eigengap,
        degenerate_gap: emb.degenerate_gap,
        perturbation_norm: sc.approx.perturbation_norm(),
        theta: structure.theta,
        a_uu_psd: structure.a_uu_psd,
        structure: structure_verdict,
        residual_total: columns.iter().map(|c| c.residual).sum(),
        columns,
        probe: probe_section,
        toy,
        nscl,
        wall_clock_seconds: None,
    };
    report.check_finite()?;
    Ok(report)
}

impl AnalysisReport {
    /// Rejects reports holding NaN or infinite values, which JSON would
    /// silently turn into `null`.
    pub fn check_finite(&self) -> Result<()> {
        let mut bad = Vec::new();
        let mut chk = |name: &str, v: f64| {
            if !v.is_finite() {
                bad.push(name.to_string());
            }
        };
        chk("eigengap", self.eigengap);
        chk("perturbation_norm", self.perturbation_norm);
        chk("residual_total", self.residual_total);
        self.eigenvalues.iter().for_each(|v| chk("eigenvalues", *v));
        for c in &self.columns {
            for v in [
                c.residual,
                c.theorem4_bound,
                c.ignorance_degree,
                c.feasibility_residual,
                c.kappa,
                c.residual_approx,
                c.identity_rhs,
            ]
            .into_iter()
            .chain(c.kappa_lower_bound)
            .chain(c.approx_bound_rhs)
            {
                chk(&c.label, v);
            }
        }
        if let Some(t) = &self.toy {
            chk("toy.residual_numeric", t.residual_numeric);
        }
        if bad.is_empty() {
            Ok(())
        } else {
            bad.dedup();
            Err(Error::InvalidParameter(format!(
                "non-finite values in {}",
                bad.join(", ")
            )))
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Runs [`analyze`] and writes `report.json` into `out`.
pub fn run_analyze(cfg: &ScenarioConfig, out: &Path, timing: bool) -> Result<AnalysisReport> {
    let start = std::time::Instant::now();
    let mut report = analyze(cfg)?;
    if timing {
        report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("report.json"), report.to_json())?;
    Ok(report)
}
