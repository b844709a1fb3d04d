//! Discrete Lagrangian immersions.
//!
//! In complex dimension one every curve is Lagrangian, so a discrete
//! immersion is a closed polygon of chart points. The weighted volume
//! `Vol_f = Σ_e ½(e^{f_i} + e^{f_{i+1}}) ℓ_e` is treated as the discrete
//! functional and `K` is defined as its negative `L²(dμ_f)` gradient, which
//! makes the first variation identity hold exactly at the discrete level.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::ambient::{ChartPoint, Surface, Vec2};
use crate::error::{invalid, Error, Result};

mod geometry;
mod orbit;
mod variation;

pub use geometry::{compute_geometry, connection_curvature, vol_gradient, weighted_volume, CurveGeometry};
pub use orbit::{orbit_generalized_mean_curvature, orbit_velocity, OrbitCurvature, TorusOrbit};
pub use variation::{
    fd_second_variation, first_variation_check, hamiltonian_deform, make_essential_perturbation,
    second_variation_form, Extension, FirstVariation, HamiltonianField,
};

/// Minimum node count of a discrete curve.
pub const MIN_NODES: usize = 16;
/// Edges shorter than this are degenerate.
pub const DEGENERATE_EDGE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DiscreteCurve {
    surface: Arc<dyn Surface>,
    nodes: Vec<ChartPoint>,
}

impl DiscreteCurve {
    pub fn new(surface: Arc<dyn Surface>, nodes: Vec<ChartPoint>) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return invalid(format!("a discrete curve needs at least {MIN_NODES} nodes"));
        }
        if surface.complex_dim() != 1 {
            return Err(Error::DimensionUnsupported("discrete curves live in complex dimension 1".into()));
        }
        Ok(Self { surface, nodes })
    }

    /// Nodes `x(2πi/N)` of a parametrization in a single chart.
    pub fn from_chart_fn(surface: Arc<dyn Surface>, chart: u8, n: usize, x: impl Fn(f64) -> Vec2) -> Result<Self> {
        let nodes = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                surface.select_chart(&ChartPoint { chart, x: x(t) })
            })
            .collect();
        Self::new(surface, nodes)
    }

    /// Counterclockwise circle in a flat chart.
    pub fn circle(surface: Arc<dyn Surface>, center: Vec2, radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return invalid("radius must be positive");
        }
        Self::from_chart_fn(surface, 0, n, |t| center + radius * Vec2::new(t.cos(), t.sin()))
    }

    /// The parallel `θ = θ₀` of a surface of revolution, oriented by `φ`.
    pub fn parallel(surface: Arc<dyn Surface>, theta: f64, n: usize) -> Result<Self> {
        if !(theta > 0.0 && theta < std::f64::consts::PI) {
            return invalid("parallel must avoid the poles");
        }
        Self::from_chart_fn(surface, 0, n, |t| Vec2::new(theta, t))
    }

    pub fn surface(&self) -> &Arc<dyn Surface> {
        &self.surface
    }

    pub fn nodes(&self) -> &[ChartPoint] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same surface, new nodes (count may change).
    pub fn with_nodes(&self, nodes: Vec<ChartPoint>) -> Result<Self> {
        Self::new(self.surface.clone(), nodes)
    }

    /// Node `i + 1` and node `i − 1` in the chart of node `i`.
    pub(crate) fn neighbours(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.nodes.len();
        let base = &self.nodes[i];
        (
            self.surface.express_near(base, &self.nodes[(i + 1) % n]),
            self.surface.express_near(base, &self.nodes[(i + n - 1) % n]),
        )
    }

    /// Displaces node `i` by `s·v[i]` in its own chart.
    pub fn displaced(&self, v: &[Vec2], s: f64) -> Self {
        let nodes = self.nodes.iter().zip(v).map(|(p, d)| ChartPoint { chart: p.chart, x: p.x + s * d }).collect();
        Self { surface: self.surface.clone(), nodes }
    }

    /// Moves every node into the chart preferred by the switching policy.
    pub fn rechart(&self) -> Self {
        let nodes = self.nodes.iter().map(|p| self.surface.select_chart(p)).collect();
        Self { surface: self.surface.clone(), nodes }
    }

    /// Metric edge lengths `ℓ_i` of the edges `(i, i+1)`.
    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.nodes.len())
            .map(|i| {
                let base = &self.nodes[i];
                let (next, _) = self.neighbours(i);
                let d = next - base.x;
                let mid = ChartPoint { chart: base.chart, x: base.x + 0.5 * d };
                (d.transpose() * self.surface.metric(&mid) * d)[0].sqrt()
            })
            .collect()
    }

    /// `max ℓ / min ℓ`.
    pub fn spacing_ratio(&self) -> f64 {
        let l = self.edge_lengths();
        let max = l.iter().cloned().fold(0.0, f64::max);
        let min = l.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    /// Resamples to `n` nodes uniformly spaced in arc length, by cubic
    /// Lagrange interpolation in the chart of the nearest preceding node.
    pub fn resample(&self, n: usize) -> Result<Self> {
        let len = self.nodes.len();
        let l = self.edge_lengths();
        let mut cum = Vec::with_capacity(len + 1);
        cum.push(0.0);
        for e in &l {
            cum.push(cum.last().unwrap() + e);
        }
        let total = cum[len];
        let mut nodes = Vec::with_capacity(n);
        let mut edge = 0;
        for k in 0..n {
            let target = total * k as f64 / n as f64;
            while edge + 1 < len && cum[edge + 1] <= target {
                edge += 1;
            }
            let base = &self.nodes[edge];
            let stencil: Vec<(f64, Vec2)> = [-1i64, 0, 1, 2]
                .iter()
                .map(|&o| {
                    let j = edge as i64 + o;
                    let idx = j.rem_euclid(len as i64) as usize;
                    let s = cum[idx] + total * j.div_euclid(len as i64) as f64;
                    (s, self.surface.express_near(base, &self.nodes[idx]))
                })
                .collect();
            let mut x = Vec2::zeros();
            for (a, (sa, xa)) in stencil.iter().enumerate() {
                let mut w = 1.0;
                for (b, (sb, _)) in stencil.iter().enumerate() {
                    if a != b {
                        w *= (target - sb) / (sa - sb);
                    }
                }
                x += w * xa;
            }
            nodes.push(self.surface.select_chart(&ChartPoint { chart: base.chart, x }));
        }
        self.with_nodes(nodes)
    }

    /// Snapshot CSV `index,chart,x,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,chart,x,y\n");
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(out, "{i},{},{:.16e},{:.16e}", p.chart, p.x[0], p.x[1]).expect("write to string");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{GaussianPlane, RevolutionSurface};

    #[test]
    fn construction_and_validation() {
        let plane: Arc<dyn Surface> = Arc::new(GaussianPlane::new(0.0).unwrap());
        assert!(DiscreteCurve::circle(plane.clone(), Vec2::zeros(), 1.0, 8).is_err());
        let c = DiscreteCurve::circle(plane.clone(), Vec2::zeros(), 2.0, 64).unwrap();
        let exact = 2.0 * 2.0 * (std::f64::consts::PI / 64.0).sin();
        assert!(c.edge_lengths().iter().all(|l| (l - exact).abs() < 1e-13));
        assert!((c.spacing_ratio() - 1.0).abs() < 1e-12);
        assert!(c.to_csv().starts_with("index,chart,x,y\n0,0,2.0000000000000000e0,"));
    }

    #[test]
    fn resampling_equalizes_spacing_and_keeps_the_image() {
        let sphere: Arc<dyn Surface> = Arc::new(RevolutionSurface::round());
        // Unevenly parametrized tilted circle crossing charts.
        let c = DiscreteCurve::from_chart_fn(sphere.clone(), 0, 200, |t| {
            let s = t + 0.4 * t.sin();
            Vec2::new(0.9 + 0.5 * s.cos(), s)
        })
        .unwrap();
        assert!(c.spacing_ratio() > 2.0);
        assert!(c.nodes().iter().any(|p| p.chart != 0));
        let r = c.resample(200).unwrap();
        assert!(r.spacing_ratio() < 1.05, "{}", r.spacing_ratio());
        for p in r.nodes() {
            let q = sphere.to_chart(p, 0).unwrap();
            let phi = q[1];
            assert!((q[0] - (0.9 + 0.5 * phi.cos())).abs() < 1e-5);
        }
    }
}
