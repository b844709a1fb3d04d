//! `variation`: the first-variation identity on random Hamiltonian fields,
//! the second-variation form on a Fourier trial space, and finite-difference
//! checks of the form at f-minimal curves.

use std::path::Path;

use glmcf_core::immersion::{
    compute_geometry, fd_second_variation, first_variation_check, second_variation_form, CurveGeometry, Extension,
    HamiltonianField,
};
use glmcf_core::spectral::{first_eigenvalue, stability_verdict, Verdict, WeightedLaplacian};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Config;
use crate::output::{csv, num, write_json, write_text};
use crate::setup::{arc_parameter, initial_curve};
use crate::RunError;

/// `max|K|` below which the curve counts as f-minimal.
const F_MINIMAL_TOL: f64 = 1e-4;

#[derive(Serialize)]
struct FdCheck {
    function: String,
    closed_form: f64,
    chart_linear: f64,
    normal_exponential: f64,
    /// Worst discrepancy relative to `max(|Q(u)|, ∫(Δ_f u)² dμ_f)`.
    relative_error: f64,
}

#[derive(Serialize)]
struct Report {
    nodes: usize,
    seed: u64,
    #[serde(rename = "C")]
    c: f64,
    lambda1: f64,
    verdict: &'static str,
    max_k: f64,
    f_minimal: bool,
    trials: usize,
    max_first_variation_error: f64,
    /// `Q(φ₁) / ∫φ₁² dμ_f`.
    q_first_eigenfunction: f64,
    trial_dim: usize,
    /// Minimum of `Q(u) / ∫u² dμ_f` over the trial space.
    q_min_trial: f64,
    /// The trial-space minimum and the spectral verdict agree on instability.
    verdict_consistent: bool,
    fd_checks: Vec<FdCheck>,
    max_fd_relative_error: Option<f64>,
}

/// `cos ks, sin ks` for `k = 1, 2, …` until `dim` functions.
fn trial_space(s: &[f64], dim: usize) -> Vec<(String, Vec<f64>)> {
    (0..dim)
        .map(|j| {
            let k = (j / 2 + 1) as f64;
            if j % 2 == 0 {
                (format!("cos{}s", j / 2 + 1), s.iter().map(|x| (k * x).cos()).collect())
            } else {
                (format!("sin{}s", j / 2 + 1), s.iter().map(|x| (k * x).sin()).collect())
            }
        })
        .collect()
}

/// Smallest generalized eigenvalue of `Q` against the `L²(dμ_f)` Gram matrix.
fn trial_minimum(geom: &CurveGeometry, op: &WeightedLaplacian, basis: &[Vec<f64>]) -> Result<f64, RunError> {
    let d = basis.len();
    let comb = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    let q = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            second_variation_form(geom, &basis[i])
        } else {
            let p = second_variation_form(geom, &comb(&basis[i], &basis[j], 1.0));
            let m = second_variation_form(geom, &comb(&basis[i], &basis[j], -1.0));
            (p - m) / 4.0
        }
    });
    let g = DMatrix::from_fn(d, d, |i, j| op.inner(&basis[i], &basis[j]));
    let chol = g.cholesky().ok_or_else(|| RunError::numerical("trial space is degenerate at this resolution"))?;
    let linv = chol.l().try_inverse().ok_or_else(|| RunError::numerical("trial space is degenerate"))?;
    let a = &linv * q * linv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    Ok(SymmetricEigen::new(a).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

pub fn run(cfg: &Config, dir: &Path) -> Result<String, RunError> {
    let curve = initial_curve(cfg)?;
    let seed: u64 = cfg.get_or("seed", 0)?;
    let trials: usize = cfg.get_or("trials", 20)?;
    let max_mode: usize = cfg.get_or("max_mode", 6)?;
    let trial_dim: usize = cfg.get_or("trial_dim", 20)?;
    let fd_checks: usize = cfg.get_or("fd_checks", 3)?;
    if max_mode == 0 || trial_dim == 0 {
        return Err(RunError::validation("max_mode and trial_dim must be positive"));
    }
    let geom = compute_geometry(&curve)?;
    let op = WeightedLaplacian::assemble(&geom);
    let eig = first_eigenvalue(&op)?;
    let s = arc_parameter(&geom);
    let c = geom.einstein_constant;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(trials);
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let coef: Vec<(f64, f64)> = (0..max_mode).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let u: Vec<f64> = s
            .iter()
            .map(|x| {
                coef.iter().enumerate().map(|(k, (a, b))| {
                    let kk = (k + 1) as f64;
                    (a * (kk * x).cos() + b * (kk * x).sin()) / kk
                })
                .sum()
            })
            .collect();
        let fv = first_variation_check(&curve, &HamiltonianField::new(&geom, u)?)?;
        worst = worst.max(fv.relative_error);
        rows.push(vec![t.to_string(), num(fv.finite_difference), num(fv.predicted), num(fv.relative_error)]);
    }
    write_text(dir, "variation.csv", &csv("trial,finite_difference,predicted,relative_error", rows, ","))?;

    let norm2 = |u: &[f64]| op.inner(u, u);
    let phi = &eig.eigenfunction;
    let q_first = second_variation_form(&geom, phi) / norm2(phi);
    let space = trial_space(&s, trial_dim);
    let basis: Vec<Vec<f64>> = space.iter().map(|(_, u)| u.clone()).collect();
    let q_min = trial_minimum(&geom, &op, &basis)?;
    let verdict = stability_verdict(eig.lambda1, c);
    let tol = 1e-6 * c.abs().max(1.0);
    let verdict_consistent = (q_min < -tol) == (verdict == Verdict::Unstable);

    let f_minimal = geom.max_k() <= F_MINIMAL_TOL;
    let mut checks = Vec::new();
    if f_minimal {
        let candidates = std::iter::once(("phi1".to_string(), phi.clone())).chain(space);
        for (name, u) in candidates.take(fd_checks) {
            let closed = second_variation_form(&geom, &u);
            let lin = fd_second_variation(&curve, &u, Extension::ChartLinear)?;
            let exp = fd_second_variation(&curve, &u, Extension::NormalExponential)?;
            let lap = op.apply(&u);
            let scale = closed.abs().max(norm2(&lap));
            let err = (lin - closed).abs().max((exp - closed).abs()) / scale;
            checks.push(FdCheck { function: name, closed_form: closed, chart_linear: lin, normal_exponential: exp, relative_error: err });
        }
    }
    let max_fd = checks.iter().map(|c| c.relative_error).reduce(f64::max);
    let report = Report {
        nodes: curve.len(),
        seed,
        c,
        lambda1: eig.lambda1,
        verdict: verdict.as_str(),
        max_k: geom.max_k(),
        f_minimal,
        trials,
        max_first_variation_error: worst,
        q_first_eigenfunction: q_first,
        trial_dim,
        q_min_trial: q_min,
        verdict_consistent,
        fd_checks: checks,
        max_fd_relative_error: max_fd,
    };
    write_json(dir, "variation.json", &report)?;
    Ok(format!(
        "first_variation_max_err={:e} lambda1={} verdict={} q_min={:e} fd_max_err={}",
        worst,
        eig.lambda1,
        report.verdict,
        q_min,
        max_fd.map_or("skipped".to_string(), |e| format!("{e:e}"))
    ))
}
