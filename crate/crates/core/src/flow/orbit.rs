//! The flow restricted to `T^n`-orbits: an ODE for the polytope point.

use serde::Serialize;

use crate::ambient::AmbientModel;
use crate::error::Result;
use crate::immersion::{orbit_velocity, TorusOrbit};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSample {
    pub t: f64,
    pub rho: Vec<f64>,
    /// `α_K(X_j)`; the periods of `α_K` are `2π` times these.
    pub alpha: Vec<f64>,
    /// `e^{−Ct} α_K(X_j)`, constant along the flow.
    pub scaled_alpha: Vec<f64>,
}

/// One RK4 step of `ρ̇ = 2 Re(z̄_j K_j)`; leaves the level set invariant.
pub fn step_orbit(orbit: &TorusOrbit, dt: f64) -> Result<TorusOrbit> {
    let shift = |base: &[f64], k: &[f64], s: f64| -> Vec<f64> { base.iter().zip(k).map(|(r, v)| r + s * v).collect() };
    let at = |rho: Vec<f64>| TorusOrbit::new(orbit.ambient().clone(), rho);
    let rho = orbit.rho();
    let (k1, _) = orbit_velocity(orbit)?;
    let (k2, _) = orbit_velocity(&at(shift(rho, &k1, 0.5 * dt))?)?;
    let (k3, _) = orbit_velocity(&at(shift(rho, &k2, 0.5 * dt))?)?;
    let (k4, _) = orbit_velocity(&at(shift(rho, &k3, dt))?)?;
    let next = (0..rho.len()).map(|j| rho[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect();
    at(next)
}

/// Integrates to `t_end` with fixed step `dt`, sampling every `every` steps.
/// Reaching the polytope boundary is a terminal error.
pub fn run_orbit_flow(orbit: &TorusOrbit, dt: f64, t_end: f64, every: usize) -> Result<Vec<OrbitSample>> {
    let c = orbit.ambient().einstein_constant();
    let steps = (t_end / dt).round() as usize;
    let mut cur = orbit.clone();
    let mut out = Vec::new();
    for k in 0..=steps {
        let t = k as f64 * dt;
        if k % every.max(1) == 0 || k == steps {
            let (_, alpha) = orbit_velocity(&cur)?;
            let decay = (-c * t).exp();
            out.push(OrbitSample { t, rho: cur.rho().to_vec(), scaled_alpha: alpha.iter().map(|a| decay * a).collect(), alpha });
        }
        if k < steps {
            cur = step_orbit(&cur, dt)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::WeightedProjective;
    use crate::error::Error;

    #[test]
    fn clifford_points_are_fixed() {
        for a in [vec![1, 1], vec![1, 2]] {
            let m = WeightedProjective::at_clifford_level(a.clone(), 1.0).unwrap();
            let o = TorusOrbit::new(m, vec![1.0; a.len()]).unwrap();
            let trace = run_orbit_flow(&o, 0.01, 1.0, 10).unwrap();
            let last = trace.last().unwrap();
            assert!(last.rho.iter().all(|r| (r - 1.0).abs() < 1e-6), "{a:?} {:?}", last.rho);
        }
    }

    #[test]
    fn scaled_periods_are_conserved() {
        let m = WeightedProjective::at_clifford_level(vec![1, 2, 3], 1.0).unwrap();
        let o = TorusOrbit::new(m, vec![1.3, 1.0, 0.9]).unwrap();
        let trace = run_orbit_flow(&o, 2e-3, 0.2, 20).unwrap();
        let first = &trace[0].scaled_alpha;
        assert!(first.iter().any(|a| a.abs() > 1e-2));
        for s in &trace {
            for (a, b) in s.scaled_alpha.iter().zip(first) {
                assert!((a - b).abs() < 1e-4 * b.abs().max(1e-2), "t={} {:?} {:?}", s.t, s.scaled_alpha, first);
            }
            let level: f64 = s.rho.iter().zip([1.0, 2.0, 3.0]).map(|(r, a)| r * a).sum();
            assert!((level - 6.0).abs() < 1e-10);
        }
    }

    #[test]
    fn unstable_orbits_reach_the_boundary() {
        let m = WeightedProjective::at_clifford_level(vec![1, 1], 1.0).unwrap();
        let o = TorusOrbit::new(m, vec![1.2, 0.8]).unwrap();
        let err = run_orbit_flow(&o, 1e-2, 50.0, 100).unwrap_err();
        assert!(matches!(err, Error::Boundary(_) | Error::InvalidInput(_)), "{err:?}");
    }
}
