//! `T^n`-orbits in weighted projective space, differentiated through the
//! horizontal lift.

use num_complex::Complex64;

use crate::ambient::projective::{axpy, dot, times_i, CVec};
use crate::ambient::{AmbientModel, WeightedProjective};
use crate::error::{Error, Result};

/// Orbits with `min ρ_i` below this fraction of `Σ ρ_i` are too close to the boundary.
pub const BOUNDARY_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TorusOrbit {
    ambient: WeightedProjective,
    rho: Vec<f64>,
}

impl TorusOrbit {
    pub fn new(ambient: WeightedProjective, rho: Vec<f64>) -> Result<Self> {
        ambient.lift_orbit_point(&rho)?;
        let total: f64 = rho.iter().sum();
        if rho.iter().any(|&r| r < BOUNDARY_FRACTION * total) {
            return Err(Error::Boundary("orbit is too close to the polytope boundary".into()));
        }
        Ok(Self { ambient, rho })
    }

    pub fn ambient(&self) -> &WeightedProjective {
        &self.ambient
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Lift `z_j = √ρ_j e^{iφ_j}` with `φ_0 = 0`.
    pub fn lift(&self, angles: &[f64]) -> CVec {
        self.rho
            .iter()
            .enumerate()
            .map(|(j, r)| Complex64::from_polar(r.sqrt(), if j == 0 { 0.0 } else { angles[j - 1] }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitCurvature {
    /// Horizontal lift of `K` at the representative point.
    pub k_lift: CVec,
    pub k_norm: f64,
    /// `ρ̇_j = 2 Re(z̄_j K_j)`, tangent to the polytope.
    pub rho_dot: Vec<f64>,
    /// `α_K(X_j)` for the generators of rotations of `z_1, …, z_n`.
    pub alpha: Vec<f64>,
    /// `|δ_f α_K|` at the representative point.
    pub codifferential: f64,
}

/// Tangent fields `Y_j = P(i z_j e_j)`, `j = 1..n`.
fn orbit_tangents(m: &WeightedProjective, z: &[Complex64]) -> Vec<CVec> {
    (1..z.len())
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); z.len()];
            e[j] = Complex64::new(0.0, 1.0) * z[j];
            m.horizontal_projection(z, &e)
        })
        .collect()
}

fn gram(ys: &[CVec]) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(ys.len(), ys.len(), |a, b| dot(&ys[a], &ys[b]))
}

struct OrbitFrame {
    tangents: Vec<CVec>,
    gram: nalgebra::DMatrix<f64>,
    gram_inv: nalgebra::DMatrix<f64>,
    k: CVec,
    weight: f64,
}

fn frame_at(m: &WeightedProjective, z: &[Complex64]) -> Result<OrbitFrame> {
    let ys = orbit_tangents(m, z);
    let g = gram(&ys);
    let ginv = g.clone().try_inverse().ok_or_else(|| Error::Boundary("orbit tangents degenerate".into()))?;
    let normal_part = |v: &CVec| -> CVec {
        let hv = m.horizontal_projection(z, v);
        let coef: Vec<f64> = ys.iter().map(|y| dot(&hv, y)).collect();
        let mut out = hv;
        for a in 0..ys.len() {
            let c: f64 = (0..ys.len()).map(|b| ginv[(a, b)] * coef[b]).sum();
            axpy(-c, &ys[a], &mut out);
        }
        out
    };
    let scale = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let h = 1e-4 * scale;
    let n = ys.len();
    let mut hvec = vec![Complex64::new(0.0, 0.0); z.len()];
    for a in 0..n {
        for b in 0..n {
            if ginv[(a, b)] == 0.0 {
                continue;
            }
            // D_{Y_a} Y_b by a Richardson-improved central difference.
            let diff = |t: f64| -> CVec {
                let mut zp = z.to_vec();
                let mut zm = z.to_vec();
                axpy(t, &ys[a], &mut zp);
                axpy(-t, &ys[a], &mut zm);
                let (yp, ym) = (&orbit_tangents(m, &zp)[b], &orbit_tangents(m, &zm)[b]);
                yp.iter().zip(ym).map(|(p, q)| (p - q) / (2.0 * t)).collect()
            };
            let (d1, d2) = (diff(h), diff(h / 2.0));
            let dy: CVec = d1.iter().zip(&d2).map(|(x, y)| (4.0 * y - x) / 3.0).collect();
            axpy(ginv[(a, b)], &normal_part(&dy), &mut hvec);
        }
    }
    let grad_f = normal_part(&m.weight_gradient_lift(z));
    let mut k = hvec;
    axpy(-(m.complex_dim() as f64), &grad_f, &mut k);
    Ok(OrbitFrame { tangents: ys, gram: g, gram_inv: ginv, k, weight: m.canonical_weight(z)? })
}

fn alpha_of(frame: &OrbitFrame) -> Vec<f64> {
    let jk = times_i(&frame.k);
    frame.tangents.iter().map(|y| dot(&jk, y)).collect()
}

/// Polytope velocity `ρ̇` and `α_K(X_j)` of the orbit, without the codifferential.
pub fn orbit_velocity(orbit: &TorusOrbit) -> Result<(Vec<f64>, Vec<f64>)> {
    let z = orbit.lift(&vec![0.0; orbit.ambient.complex_dim()]);
    let frame = frame_at(&orbit.ambient, &z)?;
    let rho_dot = z.iter().zip(&frame.k).map(|(zj, kj)| 2.0 * (zj.conj() * kj).re).collect();
    Ok((rho_dot, alpha_of(&frame)))
}

/// `K` of the orbit at the lift of `ρ` with torus angles `angles`, its
/// polytope velocity, the periods of `α_K` and the weighted codifferential
/// `δ_f α_K`. At angles `0` the lift is real and the two angle probes are
/// complex conjugates, which makes the codifferential vanish identically;
/// generic angles give a nontrivial check.
pub fn orbit_generalized_mean_curvature(orbit: &TorusOrbit, angles: &[f64]) -> Result<OrbitCurvature> {
    let m = &orbit.ambient;
    let n = m.complex_dim();
    if angles.len() != n {
        return Err(Error::InvalidInput(format!("expected {n} torus angles")));
    }
    let angles0 = angles.to_vec();
    let z = orbit.lift(&angles0);
    let frame = frame_at(m, &z)?;
    let alpha = alpha_of(&frame);
    let rho_dot = z.iter().zip(&frame.k).map(|(zj, kj)| 2.0 * (zj.conj() * kj).re).collect();
    // δ_f α = −(e^{nf}√det G)^{-1} Σ_j ∂_j(e^{nf}√det G G^{jk} α_k) over torus angles.
    let flux = |angles: &[f64], j: usize| -> Result<f64> {
        let fr = frame_at(m, &orbit.lift(angles))?;
        let a = alpha_of(&fr);
        let density = (n as f64 * fr.weight).exp() * fr.gram.determinant().sqrt();
        Ok(density * (0..n).map(|k| fr.gram_inv[(j, k)] * a[k]).sum::<f64>())
    };
    let hphi = 1e-3;
    let mut div = 0.0;
    for j in 0..n {
        let mut p = angles0.clone();
        let mut q = angles0.clone();
        p[j] += hphi;
        q[j] -= hphi;
        div += (flux(&p, j)? - flux(&q, j)?) / (2.0 * hphi);
    }
    let density = (n as f64 * frame.weight).exp() * frame.gram.determinant().sqrt();
    Ok(OrbitCurvature {
        k_norm: dot(&frame.k, &frame.k).sqrt(),
        k_lift: frame.k,
        rho_dot,
        alpha,
        codifferential: (div / density).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Polytope velocity of `K = −∇ log V_f`, where the weighted orbit volume
    /// is `log V_f = ½ Σ log ρ_j + (Σa / 4c) Σ ρ_j` and the quotient metric on
    /// the polytope is `Σ dρ_j² / 4ρ_j` restricted to `Σ a_j dρ_j = 0`.
    fn oracle_rho_dot(a: &[i64], c: f64, rho: &[f64]) -> Vec<f64> {
        let k = a.iter().sum::<i64>() as f64 / (4.0 * c);
        let dl: Vec<f64> = rho.iter().map(|r| 0.5 / r + k).collect();
        let num: f64 = (0..a.len()).map(|j| a[j] as f64 * rho[j] * dl[j]).sum();
        let den: f64 = (0..a.len()).map(|j| (a[j] * a[j]) as f64 * rho[j]).sum();
        let mu = num / den;
        (0..a.len()).map(|j| -4.0 * rho[j] * (dl[j] - mu * a[j] as f64)).collect()
    }

    fn random_rho(a: &[i64], c: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let raw: Vec<f64> = a.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let lvl: f64 = raw.iter().zip(a).map(|(r, &w)| r * w as f64).sum();
        raw.iter().map(|r| r * (-2.0 * c) / lvl).collect()
    }

    #[test]
    fn clifford_level_orbits_are_minimal() {
        for a in [vec![1, 1], vec![1, 2], vec![1, 2, 3]] {
            let m = WeightedProjective::at_clifford_level(a.clone(), 1.0).unwrap();
            let orbit = TorusOrbit::new(m, vec![1.0; a.len()]).unwrap();
            let k = orbit_generalized_mean_curvature(&orbit, &vec![0.4; a.len() - 1]).unwrap();
            assert!(k.k_norm <= 1e-4, "{a:?} {}", k.k_norm);
            assert!(k.codifferential <= 1e-6);
        }
    }

    #[test]
    fn curvature_matches_volume_gradient_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for a in [vec![1, 1], vec![1, 2], vec![1, 2, 3]] {
            let m = WeightedProjective::at_clifford_level(a.clone(), 1.0).unwrap();
            for _ in 0..5 {
                let rho = random_rho(&a, m.level(), &mut rng);
                let orbit = TorusOrbit::new(m.clone(), rho.clone()).unwrap();
                let angles: Vec<f64> = (1..a.len()).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
                let k = orbit_generalized_mean_curvature(&orbit, &angles).unwrap();
                let oracle = oracle_rho_dot(&a, m.level(), &rho);
                let scale = oracle.iter().map(|v| v.abs()).fold(1e-3, f64::max);
                for (x, y) in k.rho_dot.iter().zip(&oracle) {
                    assert!((x - y).abs() < 1e-6 * scale, "{a:?} {:?} {:?}", k.rho_dot, oracle);
                }
                assert!(k.codifferential <= 1e-6);
                let drift: f64 = k.rho_dot.iter().zip(&a).map(|(r, w)| r * *w as f64).sum();
                assert!(drift.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn boundary_points_are_rejected() {
        let m = WeightedProjective::at_clifford_level(vec![1, 2], 1.0).unwrap();
        assert!(matches!(TorusOrbit::new(m.clone(), vec![3.0 - 2e-7, 1e-7]), Err(Error::Boundary(_))));
        assert!(TorusOrbit::new(m, vec![1.0, 2.0]).is_err());
    }
}
