//! Residual bounds: the extra-knowledge projection bound, coverage on the
//! block-averaged graph, and the cosine functional behind the coverage
//! lower bound.

mod cosine;
mod coverage;
mod knowledge;

pub use cosine::{cosine_functional, cosine_functional_min, CosineMinimum};
pub use coverage::{
    a_uu_is_psd, approx_error_bound, coverage_analysis, lbar_structure_check, omega_ratio_diagnostics, pair_ratio,
    theta, ApproxErrorBound, ColumnKind, CoverageReport, OmegaRatio, StructureReport,
};
pub use knowledge::{theorem4_analysis, theorem4_condition, ConditionReport, KnowledgeDecomposition, ZERO_RESIDUAL};

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    IllPosed,
    NotApplicable,
}
