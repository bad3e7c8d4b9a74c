use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use vne_core::trace::{DSelection, Method};
use vne_core::EntropyEstimate;

use crate::input::Loaded;
use crate::Failure;

/// JSON report of the `entropy` command.
#[derive(Debug, Serialize)]
pub struct Report {
    pub matrix: String,
    pub n: usize,
    pub nnz: usize,
    pub method: String,
    pub eps_rel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colors: Option<usize>,
    #[serde(rename = "N_r", skip_serializing_if = "Option::is_none")]
    pub n_r: Option<usize>,
    #[serde(rename = "N_H", skip_serializing_if = "Option::is_none")]
    pub n_h: Option<usize>,
    pub poly_iters: usize,
    pub rat_iters: usize,
    pub factorizations: usize,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_selection: Option<String>,
    pub quadforms: usize,
    pub interval: [f64; 2],
    pub dropped_nodes: usize,
    pub solver: SolverReport,
}

#[derive(Debug, Serialize)]
pub struct SolverReport {
    pub backend: String,
    pub solves: usize,
    pub cg_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fill_in: Option<f64>,
}

impl Report {
    pub fn new(input: &Loaded, est: &EntropyEstimate, selection: DSelection, seed: u64) -> Self {
        let seeded = est.method.is_stochastic() || matches!(input.spec, Some(s) if s.to_string().starts_with("ba"));
        let d_selection = (est.method == Method::Probing).then(|| {
            match selection {
                DSelection::Fixed(_) => "fixed",
                DSelection::Apriori => "apriori",
                DSelection::Heuristic if est.fallback => "heuristic-fallback",
                DSelection::Heuristic => "heuristic",
            }
            .to_string()
        });
        Self {
            matrix: input.name.clone(),
            n: input.n(),
            nnz: input.nnz(),
            method: est.method.to_string(),
            eps_rel: est.eps_rel,
            delta: est.delta,
            value: est.value,
            d: est.d,
            colors: est.colors,
            n_r: est.n_r,
            n_h: est.n_h,
            poly_iters: est.poly_iters,
            rat_iters: est.rat_iters,
            factorizations: est.solver.factorizations,
            wall_time_s: est.wall_time,
            seed: seeded.then_some(seed),
            d_selection,
            quadforms: est.quadforms,
            interval: [est.interval.a, est.interval.b],
            dropped_nodes: input.dropped,
            solver: SolverReport {
                backend: est.solver.backend.to_string(),
                solves: est.solver.solves,
                cg_iterations: est.solver.cg_iterations,
                fill_in: est.solver.fill_in,
            },
        }
    }
}

/// Writes `text` to `path`, or to stdout without a path.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::config(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// CSV with a header row taken from the record fields.
pub fn csv<S: Serialize>(rows: &[S]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::config(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
