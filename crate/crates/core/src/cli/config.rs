//! Scenario files: a versioned JSON document naming what to analyse.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::PopulationSpec;
use crate::toy::ToyCase;

/// Schema version this build reads and writes.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The five-object toy model, analysed on `T` directly.
    Toy,
    /// A population spec, analysed on its normalized adjacency.
    Population,
    /// The block-averaged matrix Ā, either from a population or given as blocks.
    Approx,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyParams {
    pub case: ToyCase,
    #[serde(default = "one")]
    pub tau1: f64,
    pub tau_s: f64,
    pub tau_c: f64,
    #[serde(default)]
    pub tau0: f64,
    #[serde(default)]
    pub t: Option<f64>,
    /// Analyse the normalized adjacency of `A = T²` instead of `T`.
    #[serde(default)]
    pub normalized: bool,
}

fn one() -> f64 {
    1.0
}

/// Ā given directly by its blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blocks {
    pub n_labeled: usize,
    pub eta_l: f64,
    pub eta_u: Vec<f64>,
    pub a_uu: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PopulationSource {
    Path(PathBuf),
    Inline(Box<PopulationSpec>),
}

/// Labels of the unlabeled points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Labels {
    /// One 0/1 vector.
    Binary(Vec<f64>),
    /// A class id per point; each class becomes an indicator column.
    Classes(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    T,
    TauS,
    TauC,
    Tau1,
    Tau0,
    K,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::T => "t",
            SweepParameter::TauS => "tau_s",
            SweepParameter::TauC => "tau_c",
            SweepParameter::Tau1 => "tau1",
            SweepParameter::Tau0 => "tau0",
            SweepParameter::K => "k",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Sweep {
    /// Evenly spaced values from `from` to `to` inclusive; a single step
    /// yields `from`.
    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.from + (self.to - self.from) * (i as f64 / last))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsclOptions {
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
}

fn default_iters() -> usize {
    20_000
}

fn default_lr() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub mode: Mode,
    #[serde(default)]
    pub toy: Option<ToyParams>,
    #[serde(default)]
    pub population: Option<PopulationSource>,
    #[serde(default)]
    pub blocks: Option<Blocks>,
    /// Embedding dimension; the toy model defaults to 2.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub labels: Option<Labels>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub seed: u64,
    /// Fit the NSCL objective and report its equivalence certificate.
    #[serde(default)]
    pub nscl: Option<NsclOptions>,
    /// Report K-means cluster accuracy on U* (needs class labels).
    #[serde(default)]
    pub cluster_accuracy: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ScenarioConfig {
    /// Parses and validates; relative population paths resolve against `base`.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        if let (Some(PopulationSource::Path(p)), Some(base)) = (&mut cfg.population, base) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(invalid(format!(
                "version: expected {CONFIG_VERSION}, found {}",
                self.version
            )));
        }
        if self.k == Some(0) {
            return Err(invalid("k: must be at least 1"));
        }
        match self.mode {
            Mode::Toy => {
                if self.toy.is_none() {
                    return Err(invalid("toy: required in toy mode"));
                }
                if self.population.is_some() || self.blocks.is_some() {
                    return Err(invalid("toy mode takes neither population nor blocks"));
                }
            }
            Mode::Population => {
                if self.population.is_none() {
                    return Err(invalid("population: required in population mode"));
                }
                if self.toy.is_some() || self.blocks.is_some() {
                    return Err(invalid("population mode takes neither toy nor blocks"));
                }
            }
            Mode::Approx => {
                if self.population.is_some() == self.blocks.is_some() {
                    return Err(invalid("approx mode takes exactly one of population or blocks"));
                }
                if self.toy.is_some() {
                    return Err(invalid("approx mode takes no toy block"));
                }
            }
        }
        if self.mode != Mode::Toy && self.labels.is_none() {
            return Err(invalid("labels: required outside toy mode"));
        }
        if self.cluster_accuracy && !matches!(self.labels, Some(Labels::Classes(_))) {
            return Err(invalid("cluster_accuracy: needs class labels"));
        }
        if self.nscl.is_some() && self.mode != Mode::Population {
            return Err(invalid("nscl: only available in population mode"));
        }
        if let Some(n) = &self.nscl {
            if !(n.lr > 0.0 && n.lr.is_finite()) || n.max_iters == 0 {
                return Err(invalid("nscl: lr must be positive and max_iters nonzero"));
            }
        }
        if let Some(s) = &self.sweep {
            if s.steps == 0 {
                return Err(invalid("sweep.steps: must be at least 1"));
            }
            if !(s.from.is_finite() && s.to.is_finite()) || s.from > s.to {
                return Err(invalid(format!(
                    "sweep: bounds must be ordered, got {} > {}",
                    s.from, s.to
                )));
            }
            let toy_param = s.parameter != SweepParameter::K;
            if toy_param != (self.mode == Mode::Toy) {
                return Err(invalid(format!(
                    "sweep.parameter: {} is not available in {:?} mode",
                    s.parameter.name(),
                    self.mode
                )));
            }
            if s.parameter == SweepParameter::K && (s.from < 1.0 || s.from.fract() != 0.0 || s.to.fract() != 0.0) {
                return Err(invalid("sweep: k bounds must be positive integers"));
            }
        }
        Ok(())
    }

    pub fn population_spec(&self) -> Result<Option<PopulationSpec>> {
        match &self.population {
            None => Ok(None),
            Some(PopulationSource::Inline(spec)) => {
                spec.validate()?;
                Ok(Some((**spec).clone()))
            }
            Some(PopulationSource::Path(p)) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| invalid(format!("cannot read population {}: {e}", p.display())))?;
                PopulationSpec::from_json(&text).map(Some)
            }
        }
    }
}
