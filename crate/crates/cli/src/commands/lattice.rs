//! `lattice`: first eigenvalue of the flat torus of a weight vector, for a
//! single vector or exhaustively over all vectors with bounded entries.

use std::path::Path;

use glmcf_core::lattice::{exhaustive_weights, spectrum_report, SpectrumReport, WeightVector, DEFAULT_NODE_CAP};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::output::{csv, num, write_json, write_text};
use crate::RunError;

const HEADER: &str = "a;r;S;d2;lambda1;C;equality;restricted_equals_full";

fn row(a: &[i64], r: f64, rep: &SpectrumReport) -> Vec<String> {
    vec![
        a.iter().map(i64::to_string).collect::<Vec<_>>().join(","),
        num(r),
        a.iter().map(|x| x * x).sum::<i64>().to_string(),
        num(rep.d_squared),
        num(rep.lambda1),
        num(rep.c),
        rep.equality.to_string(),
        rep.restricted_equals_full.to_string(),
    ]
}

#[derive(Serialize)]
struct Single<'a> {
    a: &'a [i64],
    r: f64,
    #[serde(flatten)]
    report: &'a SpectrumReport,
}

#[derive(Serialize)]
struct Exhaustive {
    max_entry: i64,
    max_n: usize,
    r: f64,
    cases: usize,
    /// `min λ₁ / C`; at least 1 up to rounding.
    min_ratio: f64,
    all_stable: bool,
    equality_matches_repeated: usize,
    restricted_mismatches: usize,
}

pub fn run(cfg: &Config, dir: &Path) -> Result<String, RunError> {
    let r: f64 = cfg.require("r")?;
    let cap: u64 = cfg.get_or("node_cap", DEFAULT_NODE_CAP)?;
    if cfg.get_or("exhaustive", false)? {
        let max_entry: i64 = cfg.require("max_entry")?;
        let max_n: usize = cfg.require("max_n")?;
        if max_entry < 1 || max_n < 1 {
            return Err(RunError::validation("max_entry and max_n must be at least 1"));
        }
        let all = exhaustive_weights(max_entry, max_n);
        let reports = all
            .par_iter()
            .map(|a| Ok(spectrum_report(&WeightVector::new(a.clone(), r)?, cap)?))
            .collect::<Result<Vec<_>, RunError>>()?;
        let text = csv(HEADER, all.iter().zip(&reports).map(|(a, rep)| row(a, r, rep)), ";");
        write_text(dir, "lattice.csv", &text)?;
        let summary = Exhaustive {
            max_entry,
            max_n,
            r,
            cases: all.len(),
            min_ratio: reports.iter().map(|rep| rep.lambda1 / rep.c).fold(f64::INFINITY, f64::min),
            all_stable: reports.iter().all(|rep| rep.stable),
            equality_matches_repeated: reports.iter().filter(|rep| rep.equality_consistent()).count(),
            restricted_mismatches: reports.iter().filter(|rep| !rep.restricted_equals_full).count(),
        };
        write_json(dir, "summary.json", &summary)?;
        return Ok(format!(
            "cases={} min_ratio={} all_stable={} equality_matches={}/{} restricted_mismatches={}",
            summary.cases,
            summary.min_ratio,
            summary.all_stable,
            summary.equality_matches_repeated,
            summary.cases,
            summary.restricted_mismatches
        ));
    }
    let a: Vec<i64> = cfg.list("weights")?.ok_or_else(|| RunError::validation("config key 'weights' is required"))?;
    let rep = spectrum_report(&WeightVector::new(a.clone(), r)?, cap)?;
    write_text(dir, "lattice.csv", &csv(HEADER, [row(&a, r, &rep)], ";"))?;
    write_json(dir, "summary.json", &Single { a: &a, r, report: &rep })?;
    Ok(format!("lambda1={} C={} stable={} equality={}", rep.lambda1, rep.c, rep.stable, rep.equality))
}
