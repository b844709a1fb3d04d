//! Hamiltonian variations and the first and second variation of `Vol_f`.

use super::geometry::{compute_geometry, weighted_volume, CurveGeometry};
use super::DiscreteCurve;
use crate::ambient::{ChartPoint, Vec2};
use crate::error::{Error, Result};
use crate::numeric::richardson_even;
use crate::spectral::{EigenResult, WeightedLaplacian};

/// Hamiltonian potential `u` and its field `V = −J∇u = −u' ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianField {
    pub u: Vec<f64>,
    pub v: Vec<Vec2>,
}

impl HamiltonianField {
    pub fn new(geom: &CurveGeometry, u: Vec<f64>) -> Result<Self> {
        if u.len() != geom.len() {
            return Err(Error::InvalidInput("potential length differs from node count".into()));
        }
        let du = geom.arc_derivative(&u);
        let v = du.iter().zip(&geom.normal).map(|(d, nu)| -d * nu).collect();
        Ok(Self { u, v })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstVariation {
    /// Richardson-extrapolated `d/ds Vol_f` along `x + sV`.
    pub finite_difference: f64,
    /// `−∫ g(K, V) dμ_f`.
    pub predicted: f64,
    pub relative_error: f64,
}

/// Compares the finite-difference derivative of `Vol_f` with `−∫ g(K, V) dμ_f`.
/// The discrepancy is relative to `max(|predicted|, ∫|g(K,V)| dμ_f, 1)`.
pub fn first_variation_check(curve: &DiscreteCurve, field: &HamiltonianField) -> Result<FirstVariation> {
    let geom = compute_geometry(curve)?;
    let mut predicted = 0.0;
    let mut abs = 0.0;
    for i in 0..geom.len() {
        let kv = geom.mass[i] * geom.inner(i, &geom.k[i], &field.v[i]);
        predicted -= kv;
        abs += kv.abs();
    }
    let vmax = (0..geom.len()).map(|i| geom.norm(i, &field.v[i])).fold(0.0, f64::max);
    let finite_difference = if vmax == 0.0 {
        0.0
    } else {
        let s0 = 1e-3 / vmax;
        let ladder = [s0, s0 / 2.0, s0 / 4.0]
            .iter()
            .map(|&s| {
                let plus = weighted_volume(&curve.displaced(&field.v, s))?;
                let minus = weighted_volume(&curve.displaced(&field.v, -s))?;
                Ok((plus - minus) / (2.0 * s))
            })
            .collect::<Result<Vec<f64>>>()?;
        richardson_even(&ladder)
    };
    let scale = predicted.abs().max(abs).max(1.0);
    Ok(FirstVariation { finite_difference, predicted, relative_error: (finite_difference - predicted).abs() / scale })
}

/// `Q(u) = ∫ (Δ_f u)² − C|∇u|² + |∇u|²(|K|² − 2g(H, K)) dμ_f`.
pub fn second_variation_form(geom: &CurveGeometry, u: &[f64]) -> f64 {
    let op = WeightedLaplacian::assemble(geom);
    let lap = op.apply(u);
    let du = geom.arc_derivative(u);
    let mut q = -geom.einstein_constant * op.dirichlet(u);
    for i in 0..geom.len() {
        let k2 = geom.inner(i, &geom.k[i], &geom.k[i]);
        let hk = geom.inner(i, &geom.curvature[i], &geom.k[i]);
        q += geom.mass[i] * (lap[i] * lap[i] + du[i] * du[i] * (k2 - 2.0 * hk));
    }
    q
}

/// How a normal field is extended to a one-parameter family of curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// `x_i + sV_i` in the chart of each node.
    ChartLinear,
    /// `exp_{x_i}(sV_i)`.
    NormalExponential,
}

/// Richardson-extrapolated second derivative of `Vol_f` along the family
/// generated by the Hamiltonian field of `u`. Requires `max|K| ≤ 1e−4`.
pub fn fd_second_variation(curve: &DiscreteCurve, u: &[f64], extension: Extension) -> Result<f64> {
    let geom = compute_geometry(curve)?;
    let kmax = geom.max_k();
    if kmax > 1e-4 {
        return Err(Error::Precondition(format!("curve is not f-minimal (max|K| = {kmax:e})")));
    }
    let field = HamiltonianField::new(&geom, u.to_vec())?;
    let vmax = (0..geom.len()).map(|i| geom.norm(i, &field.v[i])).fold(0.0, f64::max);
    if vmax == 0.0 {
        return Ok(0.0);
    }
    let surface = curve.surface();
    let family = |s: f64| -> Result<f64> {
        let moved = match extension {
            Extension::ChartLinear => curve.displaced(&field.v, s),
            Extension::NormalExponential => {
                let nodes: Vec<ChartPoint> =
                    curve.nodes().iter().zip(&field.v).map(|(p, v)| surface.geodesic_exp(p, &(s * v), 8)).collect();
                curve.with_nodes(nodes)?
            }
        };
        weighted_volume(&moved)
    };
    let f0 = family(0.0)?;
    let s0 = 2e-2 / vmax;
    let ladder = [s0, s0 / 2.0, s0 / 4.0]
        .iter()
        .map(|&s| Ok((family(s)? - 2.0 * f0 + family(-s)?) / (s * s)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(richardson_even(&ladder))
}

/// Removes constants and the `L²(dμ_f)` projection onto the first eigenspace.
pub fn make_essential_perturbation(geom: &CurveGeometry, eigen: &EigenResult, raw: &[f64]) -> Result<HamiltonianField> {
    if raw.len() != geom.len() {
        return Err(Error::InvalidInput("potential length differs from node count".into()));
    }
    let m = &geom.mass;
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(m).map(|((x, y), w)| x * y * w).sum() };
    let total: f64 = m.iter().sum();
    let mean = dot(raw, &vec![1.0; raw.len()]) / total;
    let mut u: Vec<f64> = raw.iter().map(|x| x - mean).collect();
    for phi in &eigen.eigenspace {
        let c = dot(&u, phi) / dot(phi, phi);
        for (ui, pi) in u.iter_mut().zip(phi) {
            *ui -= c * pi;
        }
    }
    if dot(&u, &u).sqrt() < 1e-8 * dot(raw, raw).sqrt().max(f64::MIN_POSITIVE) {
        return Err(Error::ZeroRemainder);
    }
    HamiltonianField::new(geom, u)
}

/// Flows the curve for unit time along the Hamiltonian field of the node
/// potential `u`, recomputing the field at every RK4 stage.
pub fn hamiltonian_deform(curve: &DiscreteCurve, u: &[f64], steps: usize) -> Result<DiscreteCurve> {
    let velocity = |c: &DiscreteCurve| -> Result<Vec<Vec2>> {
        let geom = compute_geometry(c)?;
        Ok(HamiltonianField::new(&geom, u.to_vec())?.v)
    };
    let h = 1.0 / steps.max(1) as f64;
    let mut cur = curve.clone();
    for _ in 0..steps.max(1) {
        let k1 = velocity(&cur)?;
        let k2 = velocity(&cur.displaced(&k1, 0.5 * h))?;
        let k3 = velocity(&cur.displaced(&k2, 0.5 * h))?;
        let k4 = velocity(&cur.displaced(&k3, h))?;
        let inc: Vec<Vec2> = (0..cur.len()).map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0).collect();
        cur = cur.displaced(&inc, h).rechart();
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{GaussianPlane, Profile, RevolutionSurface, Surface};
    use crate::spectral::first_eigenvalue;
    use std::f64::consts::PI;
    use std::sync::Arc;

    /// Arc length rescaled to period `2π`.
    fn arc(geom: &CurveGeometry) -> Vec<f64> {
        let mut s = vec![0.0; geom.len()];
        for i in 1..geom.len() {
            s[i] = s[i - 1] + geom.edge_len[i - 1];
        }
        let total: f64 = geom.edge_len.iter().sum();
        s.iter().map(|x| 2.0 * PI * x / total).collect()
    }

    #[test]
    fn first_variation_identity_on_three_models() {
        let plane: Arc<dyn Surface> = Arc::new(GaussianPlane::new(2.0).unwrap());
        let sphere: Arc<dyn Surface> = Arc::new(RevolutionSurface::round());
        let warped: Arc<dyn Surface> = Arc::new(RevolutionSurface::warped(Profile::Warp(0.1)).unwrap());
        let curves = [
            DiscreteCurve::circle(plane, Vec2::new(0.1, 0.0), 1.2, 256).unwrap(),
            DiscreteCurve::parallel(sphere, PI / 2.0, 256).unwrap(),
            DiscreteCurve::from_chart_fn(warped, 0, 256, |t| Vec2::new(1.1 + 0.2 * t.cos(), t)).unwrap(),
        ];
        for c in &curves {
            let geom = compute_geometry(c).unwrap();
            let s = arc(&geom);
            for k in 1..4 {
                let u: Vec<f64> = s.iter().map(|x| (k as f64 * x + 0.3).sin()).collect();
                let field = HamiltonianField::new(&geom, u).unwrap();
                let fv = first_variation_check(c, &field).unwrap();
                assert!(fv.relative_error < 1e-8, "{fv:?}");
            }
            let field = HamiltonianField::new(&geom, vec![3.0; geom.len()]).unwrap();
            let fv = first_variation_check(c, &field).unwrap();
            assert_eq!((fv.finite_difference, fv.predicted), (0.0, 0.0));
        }
    }

    #[test]
    fn second_variation_signs() {
        let plane: Arc<dyn Surface> = Arc::new(GaussianPlane::new(2.0).unwrap());
        let c = DiscreteCurve::circle(plane, Vec2::zeros(), 1.0, 1024).unwrap();
        let geom = compute_geometry(&c).unwrap();
        let s = arc(&geom);
        let u1: Vec<f64> = s.iter().map(|x| x.sin()).collect();
        let norm: f64 = u1.iter().zip(&geom.mass).map(|(u, m)| u * u * m).sum();
        // (λ₁² − Cλ₁) with λ₁ = 1, C = 2.
        assert!((second_variation_form(&geom, &u1) / norm + 1.0).abs() < 1e-4);
        assert!(second_variation_form(&geom, &vec![1.0; 1024]).abs() < 1e-12);
        let u2: Vec<f64> = s.iter().map(|x| (2.0 * x).cos()).collect();
        let q = second_variation_form(&geom, &u2);
        for ext in [Extension::ChartLinear, Extension::NormalExponential] {
            let fd = fd_second_variation(&c, &u2, ext).unwrap();
            assert!((fd - q).abs() < 1e-4 * q.abs(), "{ext:?} fd={fd} q={q}");
        }
        assert!(fd_second_variation(&c, &vec![1.0; 1024], Extension::ChartLinear).unwrap().abs() < 1e-8);
        let off = DiscreteCurve::circle(Arc::new(GaussianPlane::new(2.0).unwrap()), Vec2::zeros(), 1.3, 64).unwrap();
        assert!(matches!(fd_second_variation(&off, &u2[..64], Extension::ChartLinear), Err(Error::Precondition(_))));
    }

    #[test]
    fn essential_projection() {
        let sphere: Arc<dyn Surface> = Arc::new(RevolutionSurface::round());
        let c = DiscreteCurve::parallel(sphere, PI / 2.0, 256).unwrap();
        let geom = compute_geometry(&c).unwrap();
        let eig = first_eigenvalue(&WeightedLaplacian::assemble(&geom)).unwrap();
        let s = arc(&geom);
        let sin1: Vec<f64> = s.iter().map(|x| x.sin()).collect();
        assert_eq!(make_essential_perturbation(&geom, &eig, &sin1), Err(Error::ZeroRemainder));
        let sin2: Vec<f64> = s.iter().map(|x| (2.0 * x).sin()).collect();
        let f = make_essential_perturbation(&geom, &eig, &sin2).unwrap();
        assert!(f.u.iter().zip(&sin2).all(|(a, b)| (a - b).abs() < 1e-10));
        let mixed: Vec<f64> = s.iter().map(|x| x.sin() + 0.5 * (3.0 * x).sin()).collect();
        let f = make_essential_perturbation(&geom, &eig, &mixed).unwrap();
        assert!(f.u.iter().zip(&s).all(|(a, x)| (a - 0.5 * (3.0 * x).sin()).abs() < 1e-8));
    }

    #[test]
    fn hamiltonian_deformation_keeps_exactness() {
        let sphere: Arc<dyn Surface> = Arc::new(RevolutionSurface::round());
        let hol = |n: usize| {
            let c = DiscreteCurve::parallel(sphere.clone(), PI / 2.0, n).unwrap();
            let geom = compute_geometry(&c).unwrap();
            let u: Vec<f64> = arc(&geom).iter().map(|x| 0.1 * (2.0 * x).sin() + 0.05 * (3.0 * x).cos()).collect();
            let g = compute_geometry(&hamiltonian_deform(&c, &u, 20).unwrap()).unwrap();
            assert!(g.max_k() > 0.1);
            g.holonomy.abs()
        };
        let (coarse, fine) = (hol(256), hol(512));
        eprintln!("hol {coarse} {fine}");
        assert!(coarse < 1e-5 && fine < coarse / 3.0, "{coarse} {fine}");
    }
}
