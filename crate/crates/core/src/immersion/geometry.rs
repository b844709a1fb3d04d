//! Induced geometry of a discrete curve. All per-node vectors are expressed
//! in the chart of their node.

use super::{DiscreteCurve, DEGENERATE_EDGE};
use crate::ambient::{ChartPoint, Mat2, Vec2};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CurveGeometry {
    /// Unit tangent from the centred difference.
    pub tangent: Vec<Vec2>,
    /// `ν = JT`.
    pub normal: Vec<Vec2>,
    /// Edge lengths `ℓ_i` of `(i, i+1)`.
    pub edge_len: Vec<f64>,
    /// Edge weights `½(e^{f_i} + e^{f_{i+1}})`.
    pub edge_weight: Vec<f64>,
    /// Dual arc element `ds_i = ½(ℓ_{i−1} + ℓ_i)`.
    pub ds: Vec<f64>,
    /// Node mass `e^{f_i} ds_i`; sums to `Vol_f`.
    pub mass: Vec<f64>,
    pub metric: Vec<Mat2>,
    pub weight: Vec<f64>,
    /// `(∇f)^⊥`.
    pub weight_normal: Vec<Vec2>,
    /// Curvature vector `H = K + (∇f)^⊥`.
    pub curvature: Vec<Vec2>,
    /// Generalized mean curvature `K`, normal by construction.
    pub k: Vec<Vec2>,
    /// `|B| = |H|`.
    pub b_norm: Vec<f64>,
    /// `α_K` density `g(JK, T)`.
    pub kbar: Vec<f64>,
    /// Cumulative angle with `θ_0 = 0`; `θ_{i+1} − θ_i = ½ ℓ_i (k̄_i + k̄_{i+1})`.
    pub theta: Vec<f64>,
    /// `∮ α_K`.
    pub holonomy: f64,
    pub einstein_constant: f64,
}

impl CurveGeometry {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn inner(&self, i: usize, u: &Vec2, v: &Vec2) -> f64 {
        (u.transpose() * self.metric[i] * v)[0]
    }

    pub fn norm(&self, i: usize, u: &Vec2) -> f64 {
        self.inner(i, u, u).sqrt()
    }

    pub fn weighted_volume(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// `∫ |K|² dμ_f`.
    pub fn k_l2(&self) -> f64 {
        (0..self.len()).map(|i| self.mass[i] * self.inner(i, &self.k[i], &self.k[i])).sum()
    }

    pub fn max_k(&self) -> f64 {
        (0..self.len()).map(|i| self.norm(i, &self.k[i])).fold(0.0, f64::max)
    }

    pub fn max_b(&self) -> f64 {
        self.b_norm.iter().cloned().fold(0.0, f64::max)
    }

    /// `max |B||K|` over nodes.
    pub fn max_bk(&self) -> f64 {
        (0..self.len()).map(|i| self.b_norm[i] * self.norm(i, &self.k[i])).fold(0.0, f64::max)
    }

    /// Centred difference of `|B|` in arc length.
    pub fn max_grad_b(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let (p, m) = ((i + 1) % n, (i + n - 1) % n);
                (self.b_norm[p] - self.b_norm[m]).abs() / (self.edge_len[m] + self.edge_len[i])
            })
            .fold(0.0, f64::max)
    }

    /// Centred arc-length derivative of a node function.
    pub fn arc_derivative(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let (p, m) = ((i + 1) % n, (i + n - 1) % n);
                (u[p] - u[m]) / (self.edge_len[m] + self.edge_len[i])
            })
            .collect()
    }

    pub fn min_edge(&self) -> f64 {
        self.edge_len.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `Vol_f = Σ_e ½(e^{f_i} + e^{f_{i+1}}) ℓ_e`.
pub fn weighted_volume(curve: &DiscreteCurve) -> Result<f64> {
    let s = curve.surface();
    let n = curve.len();
    let ef: Vec<f64> = curve.nodes().iter().map(|p| s.weight(p).exp()).collect();
    let l = checked_edges(curve)?;
    Ok((0..n).map(|i| 0.5 * (ef[i] + ef[(i + 1) % n]) * l[i]).sum())
}

fn checked_edges(curve: &DiscreteCurve) -> Result<Vec<f64>> {
    let l = curve.edge_lengths();
    match l.iter().position(|&v| !(v >= DEGENERATE_EDGE)) {
        Some(node) => Err(Error::DegenerateEdge { node, length: l[node] }),
        None => Ok(l),
    }
}

/// Gradient of `Vol_f` with respect to each node, as a covector in its chart.
pub fn vol_gradient(curve: &DiscreteCurve) -> Result<Vec<Vec2>> {
    let s = curve.surface();
    let nodes = curve.nodes();
    let n = nodes.len();
    let f: Vec<f64> = nodes.iter().map(|p| s.weight(p)).collect();
    let df: Vec<Vec2> = nodes.iter().map(|p| s.weight_differential(p)).collect();
    let mut grad = vec![Vec2::zeros(); n];
    for i in 0..n {
        let j = (i + 1) % n;
        let base = &nodes[i];
        let (next, _) = curve.neighbours(i);
        let d = next - base.x;
        let mid = ChartPoint { chart: base.chart, x: base.x + 0.5 * d };
        let g = s.metric(&mid);
        let dg = s.metric_derivative(&mid);
        let l = (d.transpose() * g * d)[0].sqrt();
        if !(l >= DEGENERATE_EDGE) {
            return Err(Error::DegenerateEdge { node: i, length: l });
        }
        let gd = g * d / l;
        let q = Vec2::new((d.transpose() * dg[0] * d)[0], (d.transpose() * dg[1] * d)[0]) / (4.0 * l);
        let (ei, ej) = (f[i].exp(), f[j].exp());
        let w = 0.5 * (ei + ej);
        grad[i] += w * (q - gd) + 0.5 * l * ei * df[i];
        let toward_j = w * (q + gd);
        let pulled = if nodes[j].chart == base.chart {
            toward_j
        } else {
            s.transition_jacobian(&nodes[j], base.chart).transpose() * toward_j
        };
        grad[j] += pulled + 0.5 * l * ej * df[j];
    }
    Ok(grad)
}

pub fn compute_geometry(curve: &DiscreteCurve) -> Result<CurveGeometry> {
    let s = curve.surface();
    let nodes = curve.nodes();
    let n = nodes.len();
    let edge_len = checked_edges(curve)?;
    let grad = vol_gradient(curve)?;
    let weight: Vec<f64> = nodes.iter().map(|p| s.weight(p)).collect();
    let metric: Vec<Mat2> = nodes.iter().map(|p| s.metric(p)).collect();
    let edge_weight: Vec<f64> = (0..n).map(|i| 0.5 * (weight[i].exp() + weight[(i + 1) % n].exp())).collect();
    let ds: Vec<f64> = (0..n).map(|i| 0.5 * (edge_len[(i + n - 1) % n] + edge_len[i])).collect();
    let mass: Vec<f64> = (0..n).map(|i| weight[i].exp() * ds[i]).collect();
    let mut geom = CurveGeometry {
        tangent: Vec::with_capacity(n),
        normal: Vec::with_capacity(n),
        edge_len,
        edge_weight,
        ds,
        mass,
        metric,
        weight,
        weight_normal: Vec::with_capacity(n),
        curvature: Vec::with_capacity(n),
        k: Vec::with_capacity(n),
        b_norm: Vec::with_capacity(n),
        kbar: Vec::with_capacity(n),
        theta: vec![0.0; n],
        holonomy: 0.0,
        einstein_constant: s.einstein_constant(),
    };
    for i in 0..n {
        let p = &nodes[i];
        let g = geom.metric[i];
        let (next, prev) = curve.neighbours(i);
        let d = next - prev;
        let t = d / (d.transpose() * g * d)[0].sqrt();
        let j = s.complex_structure(p);
        let nu = j * t;
        let raw_k = -(g.try_inverse().expect("metric is positive definite") * grad[i]) / geom.mass[i];
        let k = (nu.transpose() * g * raw_k)[0] * nu;
        let wn = s.weight_differential(p).dot(&nu) * nu;
        let h = k + wn;
        geom.b_norm.push((h.transpose() * g * h)[0].sqrt());
        geom.kbar.push(((j * k).transpose() * g * t)[0]);
        geom.tangent.push(t);
        geom.normal.push(nu);
        geom.weight_normal.push(wn);
        geom.curvature.push(h);
        geom.k.push(k);
    }
    for i in 0..n {
        let step = 0.5 * geom.edge_len[i] * (geom.kbar[i] + geom.kbar[(i + 1) % n]);
        if i + 1 < n {
            geom.theta[i + 1] = geom.theta[i] + step;
        }
        geom.holonomy += step;
    }
    Ok(geom)
}

/// Curvature vector from the covariant second difference of position in
/// arc length, `(x'' + Γ(x', x'))^⊥`. Independent of [`compute_geometry`].
pub fn connection_curvature(curve: &DiscreteCurve) -> Result<Vec<Vec2>> {
    let s = curve.surface();
    let l = checked_edges(curve)?;
    let n = curve.len();
    Ok((0..n)
        .map(|i| {
            let p = &curve.nodes()[i];
            let (next, prev) = curve.neighbours(i);
            let (lm, lp) = (l[(i + n - 1) % n], l[i]);
            let x1 = ((next - p.x) * lm / lp + (p.x - prev) * lp / lm) / (lm + lp);
            let x2 = 2.0 * ((next - p.x) / lp - (p.x - prev) / lm) / (lm + lp);
            let gam = s.christoffel(p);
            let acc = x2 + Vec2::new((x1.transpose() * gam[0] * x1)[0], (x1.transpose() * gam[1] * x1)[0]);
            let g = s.metric(p);
            let t = x1 / (x1.transpose() * g * x1)[0].sqrt();
            let nu = s.complex_structure(p) * t;
            (nu.transpose() * g * acc)[0] * nu
        })
        .collect())
}
