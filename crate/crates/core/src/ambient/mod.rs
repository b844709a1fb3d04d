//! Weighted Kähler backgrounds `(M, ω, J, g, f, C)` with `ρ = Cω + n·dd^c f`.
//!
//! Conventions: `ω(X, Y) = g(JX, Y)` and `dd^c = 2i∂∂̄`, so that in real
//! notation `dd^c f(X, Y) = −Hess_f(X, JY) + Hess_f(JX, Y)`.
//!
//! Complex-dimension-one models implement [`Surface`] on an atlas of at most
//! three charts. The weighted projective spaces are evaluated through the
//! horizontal lift in `ℂ^{n+1}` instead (see [`projective`]).

use std::fmt::Debug;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::numeric::derivative;

mod plane;
pub mod projective;
mod revolution;

pub use plane::GaussianPlane;
pub use projective::WeightedProjective;
pub use revolution::{Profile, RevolutionSurface};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Chart-relative point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: u8,
    pub x: Vec2,
}

impl ChartPoint {
    pub fn new(chart: u8, x: f64, y: f64) -> Self {
        Self { chart, x: Vec2::new(x, y) }
    }

    fn shifted(&self, d: Vec2) -> Self {
        Self { chart: self.chart, x: self.x + d }
    }
}

/// Data common to every ambient model.
pub trait AmbientModel {
    fn name(&self) -> &'static str;
    fn complex_dim(&self) -> usize;
    fn einstein_constant(&self) -> f64;
}

/// A complex-dimension-one model on a chart atlas.
pub trait Surface: AmbientModel + Debug + Send + Sync {
    fn metric(&self, p: &ChartPoint) -> Mat2;
    /// `[∂₀g, ∂₁g]` in chart coordinates.
    fn metric_derivative(&self, p: &ChartPoint) -> [Mat2; 2];
    fn weight(&self, p: &ChartPoint) -> f64;
    /// The covector `df` in chart coordinates.
    fn weight_differential(&self, p: &ChartPoint) -> Vec2;
    /// Coordinates of `p` in `chart`, if `p` lies in its domain.
    fn to_chart(&self, p: &ChartPoint, chart: u8) -> Option<Vec2>;
    /// Jacobian of the transition from `p.chart` to `chart` at `p`.
    fn transition_jacobian(&self, p: &ChartPoint, chart: u8) -> Mat2;
    /// Representation of `p` in the chart preferred by the switching policy.
    fn select_chart(&self, p: &ChartPoint) -> ChartPoint;
    /// Periodic coordinate of a chart as `(index, period)`.
    fn period(&self, _chart: u8) -> Option<(usize, f64)> {
        None
    }

    /// Coordinates of `q` in the chart of `base`, unwrapped to lie nearest `base`.
    fn express_near(&self, base: &ChartPoint, q: &ChartPoint) -> Vec2 {
        let mut x = if q.chart == base.chart {
            q.x
        } else {
            self.to_chart(q, base.chart).expect("neighbouring node outside chart domain")
        };
        if let Some((k, per)) = self.period(base.chart) {
            x[k] -= per * ((x[k] - base.x[k]) / per).round();
        }
        x
    }

    fn complex_structure(&self, p: &ChartPoint) -> Mat2 {
        let g = self.metric(p);
        let sq = g.determinant().sqrt();
        Mat2::new(-g[(0, 1)], -g[(1, 1)], g[(0, 0)], g[(0, 1)]) / sq
    }

    /// Matrix `Ω` with `ω(X, Y) = XᵀΩY`.
    fn symplectic_form(&self, p: &ChartPoint) -> Mat2 {
        self.complex_structure(p).transpose() * self.metric(p)
    }

    fn weight_gradient(&self, p: &ChartPoint) -> Vec2 {
        self.metric(p).try_inverse().expect("metric is positive definite") * self.weight_differential(p)
    }

    /// Christoffel symbols: entry `k` holds the matrix `Γᵏ_ij`.
    fn christoffel(&self, p: &ChartPoint) -> [Mat2; 2] {
        christoffel_from(&self.metric(p), &self.metric_derivative(p))
    }

    /// Gauss curvature by the Brioschi formula with finite-difference second
    /// derivatives of the metric.
    fn gauss_curvature_fd(&self, p: &ChartPoint) -> f64 {
        let g = self.metric(p);
        let dg = self.metric_derivative(p);
        let h = 1e-3;
        let second = |k: usize, l: usize, i: usize, j: usize| {
            derivative(|t| self.metric_derivative(&p.shifted(unit(l) * t))[k][(i, j)], 0.0, h)
        };
        let (e, f, gg) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
        let (eu, ev) = (dg[0][(0, 0)], dg[1][(0, 0)]);
        let (fu, fv) = (dg[0][(0, 1)], dg[1][(0, 1)]);
        let (gu, gv) = (dg[0][(1, 1)], dg[1][(1, 1)]);
        let evv = second(1, 1, 0, 0);
        let fuv = second(0, 1, 0, 1);
        let guu = second(0, 0, 1, 1);
        let m1 = nalgebra::Matrix3::new(
            -0.5 * evv + fuv - 0.5 * guu,
            0.5 * eu,
            fu - 0.5 * ev,
            fv - 0.5 * gu,
            e,
            f,
            0.5 * gv,
            f,
            gg,
        );
        let m2 = nalgebra::Matrix3::new(0.0, 0.5 * ev, 0.5 * gu, 0.5 * ev, e, f, 0.5 * gu, f, gg);
        (m1.determinant() - m2.determinant()) / (e * gg - f * f).powi(2)
    }

    /// Covariant Hessian of `f` with finite-difference second derivatives.
    fn weight_hessian_fd(&self, p: &ChartPoint) -> Mat2 {
        let h = 1e-3;
        let df = self.weight_differential(p);
        let gam = self.christoffel(p);
        let mut hess = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let dij = derivative(|t| self.weight_differential(&p.shifted(unit(j) * t))[i], 0.0, h);
                hess[(i, j)] = dij - gam[0][(i, j)] * df[0] - gam[1][(i, j)] * df[1];
            }
        }
        0.5 * (hess + hess.transpose())
    }

    fn weight_laplacian_fd(&self, p: &ChartPoint) -> f64 {
        let ginv = self.metric(p).try_inverse().expect("metric is positive definite");
        ginv.component_mul(&self.weight_hessian_fd(p)).sum()
    }

    /// `dd^c f(X, Y) = −Hess_f(X, JY) + Hess_f(JX, Y)`.
    fn ddc_weight(&self, p: &ChartPoint, x: &Vec2, y: &Vec2) -> f64 {
        let hs = self.weight_hessian_fd(p);
        let j = self.complex_structure(p);
        -(x.transpose() * hs * (j * y))[0] + ((j * x).transpose() * hs * y)[0]
    }

    /// `|K_gauss − C − Δ_g f|` at `p`.
    fn weight_residual(&self, p: &ChartPoint) -> Result<f64> {
        if self.complex_dim() != 1 {
            return Err(Error::DimensionUnsupported("residual is computed in complex dimension 1".into()));
        }
        Ok((self.gauss_curvature_fd(p) - self.einstein_constant() - self.weight_laplacian_fd(p)).abs())
    }

    /// `exp_p(v)` by RK4 on the geodesic equation in the chart of `p`.
    fn geodesic_exp(&self, p: &ChartPoint, v: &Vec2, steps: usize) -> ChartPoint {
        let (end, _) = self.transport_along_geodesic(p, v, &Vec2::zeros(), steps);
        end
    }

    /// Endpoint of `t ↦ exp_p(tv)`, `t ∈ [0, 1]`, and the parallel transport of `w`.
    fn transport_along_geodesic(&self, p: &ChartPoint, v: &Vec2, w: &Vec2, steps: usize) -> (ChartPoint, Vec2) {
        let rhs = |x: &Vec2, xd: &Vec2, wv: &Vec2| {
            let gam = self.christoffel(&ChartPoint { chart: p.chart, x: *x });
            let acc = Vec2::new(-(xd.transpose() * gam[0] * xd)[0], -(xd.transpose() * gam[1] * xd)[0]);
            let wd = Vec2::new(-(xd.transpose() * gam[0] * wv)[0], -(xd.transpose() * gam[1] * wv)[0]);
            (*xd, acc, wd)
        };
        let dt = 1.0 / steps.max(1) as f64;
        let (mut x, mut xd, mut wv) = (p.x, *v, *w);
        for _ in 0..steps.max(1) {
            let k1 = rhs(&x, &xd, &wv);
            let k2 = rhs(&(x + 0.5 * dt * k1.0), &(xd + 0.5 * dt * k1.1), &(wv + 0.5 * dt * k1.2));
            let k3 = rhs(&(x + 0.5 * dt * k2.0), &(xd + 0.5 * dt * k2.1), &(wv + 0.5 * dt * k2.2));
            let k4 = rhs(&(x + dt * k3.0), &(xd + dt * k3.1), &(wv + dt * k3.2));
            x += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            xd += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            wv += dt / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
        }
        (ChartPoint { chart: p.chart, x }, wv)
    }
}

fn unit(k: usize) -> Vec2 {
    if k == 0 {
        Vec2::new(1.0, 0.0)
    } else {
        Vec2::new(0.0, 1.0)
    }
}

pub(crate) fn christoffel_from(g: &Mat2, dg: &[Mat2; 2]) -> [Mat2; 2] {
    let ginv = g.try_inverse().expect("metric is positive definite");
    let mut out = [Mat2::zeros(); 2];
    for (k, slot) in out.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for l in 0..2 {
                    acc += ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
                slot[(i, j)] = 0.5 * acc;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn models() -> Vec<Box<dyn Surface>> {
        vec![
            Box::new(GaussianPlane::new(2.0).unwrap()),
            Box::new(RevolutionSurface::round()),
            Box::new(RevolutionSurface::warped(Profile::Warp(0.1)).unwrap()),
            Box::new(RevolutionSurface::warped(Profile::Warp(-0.3)).unwrap()),
        ]
    }

    fn random_point(rng: &mut ChaCha8Rng, m: &dyn Surface) -> ChartPoint {
        let chart: u8 = if m.name() == "gaussian_plane" { 0 } else { rng.gen_range(0..3) };
        match chart {
            0 if m.name() == "gaussian_plane" => ChartPoint::new(0, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            0 => ChartPoint::new(0, rng.gen_range(0.6..2.5), rng.gen_range(-4.0..4.0)),
            c => ChartPoint::new(c, rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)),
        }
    }

    #[test]
    fn compatibility_invariants_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in models() {
            for _ in 0..1000 {
                let p = random_point(&mut rng, m.as_ref());
                let g = m.metric(&p);
                let j = m.complex_structure(&p);
                let om = m.symplectic_form(&p);
                let x = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let y = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                assert!((j * j + Mat2::identity()).abs().max() < 1e-10);
                let gxy = (x.transpose() * g * y)[0];
                let gjj = ((j * x).transpose() * g * (j * y))[0];
                assert!((gxy - gjj).abs() < 1e-10);
                let w = (x.transpose() * om * y)[0];
                assert!((w - ((j * x).transpose() * g * y)[0]).abs() < 1e-10);
                assert!((w + (y.transpose() * om * x)[0]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ddc_matches_laplacian_times_area_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in models() {
            for _ in 0..20 {
                let p = random_point(&mut rng, m.as_ref());
                let (e1, e2) = (unit(0), unit(1));
                let ratio = m.ddc_weight(&p, &e1, &e2) / m.symplectic_form(&p)[(0, 1)];
                assert!((ratio - m.weight_laplacian_fd(&p)).abs() < 1e-6, "{}", m.name());
            }
        }
    }

    #[test]
    fn geodesic_on_round_sphere_follows_great_circle() {
        let s = RevolutionSurface::round();
        let p = ChartPoint::new(0, std::f64::consts::FRAC_PI_2, 0.0);
        let q = s.geodesic_exp(&p, &Vec2::new(0.0, 1.0), 64);
        assert!((q.x[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        assert!((q.x[1] - 1.0).abs() < 1e-10);
        let (_, w) = s.transport_along_geodesic(&p, &Vec2::new(0.3, 0.4), &Vec2::new(1.0, 0.0), 200);
        let end = s.geodesic_exp(&p, &Vec2::new(0.3, 0.4), 200);
        let norm = (w.transpose() * s.metric(&end) * w)[0];
        assert!((norm - 1.0).abs() < 1e-9);
    }
}
