//! `orbit`: torus orbits in weighted projective space. Evaluates the
//! generalized mean curvature at the balanced orbit and at random interior
//! polytope points with random torus angles, and optionally integrates the
//! orbit ODE.

use std::f64::consts::TAU;
use std::path::Path;

use glmcf_core::ambient::{AmbientModel, WeightedProjective};
use glmcf_core::flow::run_orbit_flow;
use glmcf_core::immersion::{orbit_generalized_mean_curvature, TorusOrbit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Config;
use crate::output::{csv, num, write_json, write_text};
use crate::setup::build_projective;
use crate::RunError;

#[derive(Serialize)]
struct Report {
    weights: Vec<i64>,
    level: f64,
    #[serde(rename = "C")]
    c: f64,
    seed: u64,
    balanced_rho: Vec<f64>,
    balanced_k_norm: f64,
    balanced_codifferential: f64,
    points: usize,
    max_codifferential: f64,
    flow_samples: usize,
    /// Largest drift of `e^{−Ct} α_K(X_j)` along the orbit flow.
    max_scaled_alpha_drift: Option<f64>,
}

/// Uniform point of the open polytope slice with coordinates bounded away from the faces.
fn random_interior(m: &WeightedProjective, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let a = m.weights();
    let raw: Vec<f64> = a.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
    let lvl: f64 = raw.iter().zip(a).map(|(r, &w)| r * w as f64).sum();
    raw.iter().map(|r| r * (-2.0 * m.level()) / lvl).collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

pub fn run(cfg: &Config, dir: &Path) -> Result<String, RunError> {
    let m = build_projective(cfg)?;
    let seed: u64 = cfg.get_or("seed", 0)?;
    let points: usize = cfg.get_or("points", 50)?;
    let total: f64 = m.weights().iter().sum::<i64>() as f64;
    let balanced = vec![-2.0 * m.level() / total; m.weights().len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles = |rng: &mut ChaCha8Rng| -> Vec<f64> { (1..balanced.len()).map(|_| rng.gen_range(0.0..TAU)).collect() };
    let k0 = orbit_generalized_mean_curvature(&TorusOrbit::new(m.clone(), balanced.clone())?, &angles(&mut rng))?;

    let mut rows = Vec::with_capacity(points);
    let mut max_codiff: f64 = 0.0;
    for p in 0..points {
        let rho = random_interior(&m, &mut rng);
        let phi = angles(&mut rng);
        let k = orbit_generalized_mean_curvature(&TorusOrbit::new(m.clone(), rho.clone())?, &phi)?;
        max_codiff = max_codiff.max(k.codifferential);
        rows.push(vec![p.to_string(), join(&rho), join(&phi), join(&k.rho_dot), num(k.k_norm), num(k.codifferential)]);
    }
    write_text(dir, "orbit.csv", &csv("point,rho,angles,rho_dot,k_norm,codifferential", rows, ","))?;

    let mut flow_samples = 0;
    let mut drift = None;
    if let Some(rho) = cfg.list::<f64>("rho")? {
        let dt: f64 = cfg.require("orbit_dt")?;
        let t_end: f64 = cfg.require("orbit_time")?;
        if !(dt > 0.0 && t_end > 0.0) {
            return Err(RunError::validation("orbit_dt and orbit_time must be positive"));
        }
        let every: usize = cfg.get_or("orbit_every", 10)?;
        let samples = run_orbit_flow(&TorusOrbit::new(m.clone(), rho)?, dt, t_end, every)?;
        let first = samples[0].scaled_alpha.clone();
        drift = samples
            .iter()
            .flat_map(|s| s.scaled_alpha.iter().zip(&first).map(|(a, b)| (a - b).abs()))
            .reduce(f64::max);
        flow_samples = samples.len();
        let rows = samples.iter().map(|s| vec![num(s.t), join(&s.rho), join(&s.alpha), join(&s.scaled_alpha)]);
        write_text(dir, "orbit_trace.csv", &csv("t,rho,alpha,scaled_alpha", rows, ","))?;
    }

    let report = Report {
        weights: m.weights().to_vec(),
        level: m.level(),
        c: m.einstein_constant(),
        seed,
        balanced_rho: balanced,
        balanced_k_norm: k0.k_norm,
        balanced_codifferential: k0.codifferential,
        points,
        max_codifferential: max_codiff,
        flow_samples,
        max_scaled_alpha_drift: drift,
    };
    write_json(dir, "orbit.json", &report)?;
    Ok(format!("balanced_k_norm={:e} max_codifferential={:e} points={points}", k0.k_norm, max_codiff))
}
