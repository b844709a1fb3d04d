//! Models, curves and perturbations built from a [`Config`].

use std::f64::consts::PI;
use std::sync::Arc;

use glmcf_core::ambient::{GaussianPlane, Profile, RevolutionSurface, Surface, Vec2, WeightedProjective};
use glmcf_core::immersion::{
    compute_geometry, hamiltonian_deform, make_essential_perturbation, CurveGeometry, DiscreteCurve,
};
use glmcf_core::spectral::{first_eigenvalue, WeightedLaplacian};

use crate::config::Config;
use crate::RunError;

/// Model name as written in the config, for output headers.
pub fn model_name(cfg: &Config) -> Result<String, RunError> {
    cfg.require::<String>("model")
}

/// A real two-dimensional model for curve experiments.
pub fn build_surface(cfg: &Config) -> Result<Arc<dyn Surface>, RunError> {
    match model_name(cfg)?.as_str() {
        "gaussian_plane" => Ok(Arc::new(GaussianPlane::new(cfg.require("C")?)?)),
        "round_sphere" => Ok(Arc::new(RevolutionSurface::round())),
        "warped_sphere" => Ok(Arc::new(RevolutionSurface::warped(build_profile(cfg)?)?)),
        "weighted_projective" => Err(RunError::validation("weighted_projective supports only the orbit command")),
        other => Err(RunError::validation(format!("unknown model '{other}'"))),
    }
}

fn build_profile(cfg: &Config) -> Result<Profile, RunError> {
    match cfg.require::<String>("profile")?.as_str() {
        "sine" => Ok(Profile::Sine),
        "warp" => Ok(Profile::Warp(cfg.require("warp")?)),
        "sampled" => {
            let file: String = cfg.require("profile_file")?;
            let path = cfg.resolve(&file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| RunError::validation(format!("cannot read profile {}: {e}", path.display())))?;
            let (mut theta, mut psi) = (Vec::new(), Vec::new());
            for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
                let mut parts = line.split(',').map(str::trim);
                let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(RunError::validation(format!("profile line '{line}': expected theta,psi")));
                };
                match (a.parse::<f64>(), b.parse::<f64>()) {
                    (Ok(x), Ok(y)) => {
                        theta.push(x);
                        psi.push(y);
                    }
                    // A header row is tolerated only before the data.
                    _ if theta.is_empty() => continue,
                    _ => return Err(RunError::validation(format!("profile line '{line}' is not numeric"))),
                }
            }
            Ok(Profile::sampled(theta, psi)?)
        }
        other => Err(RunError::validation(format!("unknown profile '{other}'"))),
    }
}

/// The weighted projective model at `level`, or at the level of the
/// minimal orbit for Clifford radius `r` when no level is given.
pub fn build_projective(cfg: &Config) -> Result<WeightedProjective, RunError> {
    let a: Vec<i64> = cfg.list("weights")?.ok_or_else(|| RunError::validation("config key 'weights' is required"))?;
    match (cfg.get::<f64>("level")?, cfg.get::<f64>("r")?) {
        (Some(c), None) => Ok(WeightedProjective::new(a, c)?),
        (None, Some(r)) => Ok(WeightedProjective::at_clifford_level(a, r)?),
        (None, None) => Err(RunError::validation("weighted_projective needs 'level' or 'r'")),
        (Some(_), Some(_)) => Err(RunError::validation("give only one of 'level' and 'r'")),
    }
}

pub fn build_curve(cfg: &Config, surface: Arc<dyn Surface>) -> Result<DiscreteCurve, RunError> {
    let n: usize = cfg.require("nodes")?;
    let curve = match cfg.require::<String>("curve")?.as_str() {
        "circle" => {
            let c: Vec<f64> = cfg.list("center")?.unwrap_or_else(|| vec![0.0, 0.0]);
            if c.len() != 2 {
                return Err(RunError::validation("center needs two coordinates"));
            }
            DiscreteCurve::circle(surface, Vec2::new(c[0], c[1]), cfg.require("radius")?, n)?
        }
        "parallel" => DiscreteCurve::parallel(surface, cfg.require("theta")?, n)?,
        "graph" => {
            let theta: f64 = cfg.require("theta")?;
            let wobble: f64 = cfg.require("wobble")?;
            let mode: f64 = cfg.get_or("wobble_mode", 1.0)?;
            if !(theta - wobble.abs() > 0.0 && theta + wobble.abs() < PI) {
                return Err(RunError::validation("graph curve must avoid the poles"));
            }
            DiscreteCurve::from_chart_fn(surface, 0, n, |t| Vec2::new(theta + wobble * (mode * t).cos(), t))?
        }
        other => return Err(RunError::validation(format!("unknown curve '{other}'"))),
    };
    Ok(curve)
}

/// Node arc length rescaled to period `2π`.
pub fn arc_parameter(geom: &CurveGeometry) -> Vec<f64> {
    let total: f64 = geom.edge_len.iter().sum();
    let mut s = Vec::with_capacity(geom.len());
    let mut acc = 0.0;
    for l in &geom.edge_len {
        s.push(2.0 * PI * acc / total);
        acc += l;
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trig {
    Sin,
    Cos,
}

/// `Σ coef·trig(k s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPotential(pub Vec<(u32, Trig, f64)>);

impl FourierPotential {
    /// Terms written `k:sin:coef` or `k:cos:coef`, comma separated.
    pub fn parse(text: &str) -> Result<Self, RunError> {
        let bad = |t: &str| RunError::validation(format!("perturbation term '{t}': expected k:sin|cos:coef"));
        let terms = text
            .split(',')
            .map(|t| {
                let p: Vec<&str> = t.trim().split(':').collect();
                if p.len() != 3 {
                    return Err(bad(t));
                }
                let k = p[0].parse().map_err(|_| bad(t))?;
                let trig = match p[1] {
                    "sin" => Trig::Sin,
                    "cos" => Trig::Cos,
                    _ => return Err(bad(t)),
                };
                Ok((k, trig, p[2].parse().map_err(|_| bad(t))?))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self(terms))
    }

    pub fn eval(&self, s: &[f64]) -> Vec<f64> {
        s.iter()
            .map(|&x| {
                self.0
                    .iter()
                    .map(|&(k, trig, c)| {
                        let a = k as f64 * x;
                        c * match trig {
                            Trig::Sin => a.sin(),
                            Trig::Cos => a.cos(),
                        }
                    })
                    .sum()
            })
            .collect()
    }
}

/// The configured initial curve: the base curve deformed for unit time by
/// the Hamiltonian field of `amplitude · Σ terms`, optionally made essential.
pub fn initial_curve(cfg: &Config) -> Result<DiscreteCurve, RunError> {
    let base = build_curve(cfg, build_surface(cfg)?)?;
    match cfg.get_or::<String>("perturbation", "none".into())?.as_str() {
        "none" => Ok(base),
        "fourier" => {
            let eps: f64 = cfg.require("amplitude")?;
            let terms = FourierPotential::parse(&cfg.require::<String>("perturbation_terms")?)?;
            let geom = compute_geometry(&base)?;
            let raw: Vec<f64> = terms.eval(&arc_parameter(&geom)).iter().map(|v| eps * v).collect();
            let u = if cfg.get_or("essential", false)? {
                let eig = first_eigenvalue(&WeightedLaplacian::assemble(&geom))?;
                make_essential_perturbation(&geom, &eig, &raw)?.u
            } else {
                raw
            };
            Ok(hamiltonian_deform(&base, &u, cfg.get_or("deform_steps", 20)?)?)
        }
        other => Err(RunError::validation(format!("unknown perturbation '{other}'"))),
    }
}
