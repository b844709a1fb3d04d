//! `spectrum`: first eigenvalue of the weighted Laplacian on the configured
//! curve and the stability verdict against `C`.

use std::path::Path;

use glmcf_core::immersion::compute_geometry;
use glmcf_core::spectral::{first_eigenvalue, stability_verdict, WeightedLaplacian};
use serde::Serialize;

use crate::config::Config;
use crate::output::write_json;
use crate::setup::initial_curve;
use crate::RunError;

#[derive(Serialize)]
struct Report {
    lambda1: f64,
    gap: f64,
    #[serde(rename = "C")]
    c: f64,
    verdict: &'static str,
    residual: f64,
    simple: bool,
    nodes: usize,
    max_k: f64,
    ritz_values: Vec<f64>,
}

pub fn run(cfg: &Config, dir: &Path) -> Result<String, RunError> {
    let curve = initial_curve(cfg)?;
    let geom = compute_geometry(&curve)?;
    let eig = first_eigenvalue(&WeightedLaplacian::assemble(&geom))?;
    let c = geom.einstein_constant;
    let verdict = stability_verdict(eig.lambda1, c).as_str();
    write_json(
        dir,
        "spectrum.json",
        &Report {
            lambda1: eig.lambda1,
            gap: eig.gap,
            c,
            verdict,
            residual: eig.residual,
            simple: eig.simple,
            nodes: curve.len(),
            max_k: geom.max_k(),
            ritz_values: eig.ritz_values.clone(),
        },
    )?;
    Ok(format!("lambda1={} C={} verdict={} simple={}", eig.lambda1, c, verdict, eig.simple))
}
