//! `sweep`: one scenario re-run along a parameter grid, written as CSV.
//!
//! Toy sweeps produce `<parameter>,residual_numeric,residual_predicted,
//! t_bar,lambda1,…,lambda5`; `k` sweeps over a population or averaged
//! matrix produce `k,residual_total,theorem4_bound_total,eigengap,sigma_k`.
//! Values are written with 17 significant digits; unavailable values are
//! empty fields.

use std::path::Path;

use rayon::prelude::*;

use super::config::{ScenarioConfig, SweepParameter, ToyParams};
use super::report::Scenario;
use crate::bounds::theorem4_analysis;
use crate::error::{Error, Result};
use crate::toy::{t_bar, toy_residual, toy_residual_normalized, ToyCase, ToyScenario};

/// Round-trip exact: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SweepTable {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn with_value(p: &ToyParams, parameter: SweepParameter, v: f64) -> ToyParams {
    let mut q = p.clone();
    match parameter {
        SweepParameter::T => q.t = Some(v),
        SweepParameter::TauS => q.tau_s = v,
        SweepParameter::TauC => q.tau_c = v,
        SweepParameter::Tau1 => q.tau1 = v,
        SweepParameter::Tau0 => q.tau0 = v,
        SweepParameter::K => unreachable!("validated"),
    }
    q
}

fn toy_row(p: &ToyParams, value: f64) -> Result<Vec<String>> {
    let s = ToyScenario::new(p.case, p.tau1, p.tau_s, p.tau_c, p.tau0, p.t)
        .map_err(|e| Error::Config(format!("sweep point {value}: {e}")))?;
    let mut row = vec![fmt_f64(value)];
    let eigenvalues: Vec<f64> = if p.normalized {
        let r = toy_residual_normalized(&s)?;
        row.push(fmt_f64(r));
        row.push(String::new());
        let g = crate::population::build_adjacency(&s.population())?;
        crate::spectral::decompose(&g, 2)?.eigenvalues.iter().copied().collect()
    } else {
        let r = toy_residual(&s)?;
        row.push(fmt_f64(r.numeric));
        row.push(fmt_opt(r.predicted));
        r.eigenvalues
    };
    row.push(fmt_opt(t_bar(s.tau_s, s.tau_c)));
    row.extend(eigenvalues.into_iter().map(fmt_f64));
    Ok(row)
}

pub fn sweep(cfg: &ScenarioConfig) -> Result<SweepTable> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep: required for the sweep command".into()))?;
    let grid = sw.grid();
    if sw.parameter == SweepParameter::K {
        let sc = Scenario::from_config(cfg)?;
        let n = sc.matrix.nrows();
        let ks: Vec<usize> = grid.iter().map(|v| v.round() as usize).collect();
        if let Some(k) = ks.iter().find(|k| **k > n) {
            return Err(Error::Config(format!("sweep: k = {k} exceeds the {n} points")));
        }
        let rows = ks
            .par_iter()
            .map(|&k| {
                let emb = sc.embedding(k)?;
                let (mut res, mut bound) = (0.0, 0.0);
                for (_, y) in &sc.columns {
                    let kd = theorem4_analysis(&emb, y)?;
                    res += kd.residual;
                    bound += kd.theorem4_bound;
                }
                Ok(vec![
                    k.to_string(),
                    fmt_f64(res),
                    fmt_f64(bound),
                    fmt_f64(emb.eigengap),
                    fmt_f64(emb.singular_values[k - 1]),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        let header = ["k", "residual_total", "theorem4_bound_total", "eigengap", "sigma_k"];
        return Ok(SweepTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        });
    }
    let p = cfg.toy.as_ref().expect("validated");
    if sw.parameter == SweepParameter::T && p.case != ToyCase::General {
        return Err(Error::Config("sweep: t can only vary in the general case".into()));
    }
    let rows = grid
        .par_iter()
        .map(|&v| toy_row(&with_value(p, sw.parameter, v), v))
        .collect::<Result<Vec<_>>>()?;
    let mut header: Vec<String> = [sw.parameter.name(), "residual_numeric", "residual_predicted", "t_bar"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=5).map(|i| format!("lambda{i}")));
    Ok(SweepTable { header, rows })
}

/// Runs [`sweep`] and writes `sweep.csv` into `out`.
pub fn run_sweep(cfg: &ScenarioConfig, out: &Path) -> Result<SweepTable> {
    let table = sweep(cfg)?;
    std::fs::create_dir_all(out)?;
    table.write(&out.join("sweep.csv"))?;
    Ok(table)
}
