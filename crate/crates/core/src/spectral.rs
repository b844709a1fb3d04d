//! The weighted Laplacian `Δ_f u = e^{−f} div(e^{f} ∇u)` on discrete curves
//! and Hamiltonian f-stability.
//!
//! The flux-form stencil `(Δ_f u)_i = m_i^{-1} Σ_e c_e (u_j − u_i)` with edge
//! conductances `c_e = w_e / ℓ_e` and node masses `m_i = e^{f_i} ds_i` is
//! self-adjoint in `⟨u, v⟩_f = Σ m_i u_i v_i` by construction.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::immersion::CurveGeometry;
use crate::numeric::CyclicTridiagonal;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLaplacian {
    /// Conductance of edge `(i, i+1)`.
    coef: Vec<f64>,
    mass: Vec<f64>,
}

impl WeightedLaplacian {
    pub fn assemble(geom: &CurveGeometry) -> Self {
        let coef = geom.edge_weight.iter().zip(&geom.edge_len).map(|(w, l)| w / l).collect();
        Self { coef, mass: geom.mass.clone() }
    }

    pub fn from_parts(coef: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if coef.len() != mass.len() || coef.len() < 3 {
            return invalid("conductances and masses must have equal length of at least 3");
        }
        if coef.iter().chain(&mass).any(|v| !(*v > 0.0 && v.is_finite())) {
            return invalid("conductances and masses must be positive");
        }
        Ok(Self { coef, mass })
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `S u`, the stiffness matrix applied to `u`.
    pub fn stiffness(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let j = (i + 1) % n;
            let flux = self.coef[i] * (u[j] - u[i]);
            out[i] -= flux;
            out[j] += flux;
        }
        out
    }

    /// `Δ_f u = −M^{-1} S u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.stiffness(u).iter().zip(&self.mass).map(|(s, m)| -s / m).collect()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }

    /// `∫ |∇u|² dμ_f = uᵀ S u`.
    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        let n = self.len();
        (0..n).map(|i| self.coef[i] * (u[(i + 1) % n] - u[i]).powi(2)).sum()
    }

    /// `|Δ_f φ + λφ|` in `L²(dμ_f)`.
    pub fn residual(&self, lambda: f64, phi: &[f64]) -> f64 {
        let s = self.stiffness(phi);
        s.iter().zip(phi).zip(&self.mass).map(|((si, p), m)| (si - lambda * m * p).powi(2) / m).sum::<f64>().sqrt()
    }

    fn deflate_constants(&self, x: &mut [f64]) {
        let total: f64 = self.mass.iter().sum();
        let mean = self.inner(x, &vec![1.0; x.len()]) / total;
        x.iter_mut().for_each(|v| *v -= mean);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub lambda1: f64,
    /// Second Ritz value minus `λ₁`.
    pub gap: f64,
    /// Normalized by `∫ φ² dμ_f = 1`.
    pub eigenfunction: Vec<f64>,
    /// `L²(dμ_f)`-orthonormal basis of the computed first eigenspace.
    pub eigenspace: Vec<Vec<f64>>,
    pub simple: bool,
    pub residual: f64,
    /// Lowest converged nonzero eigenvalues.
    pub ritz_values: Vec<f64>,
}

const BLOCK: usize = 6;
const WANTED: usize = 3;
const MAX_ITER: usize = 500;
/// Relative width of the first eigenspace cluster and of the simplicity gap.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Smallest nonzero eigenvalue of `−Δ_f` by shifted block inverse iteration
/// with constants deflated and Rayleigh–Ritz on the block.
pub fn first_eigenvalue(op: &WeightedLaplacian) -> Result<EigenResult> {
    let n = op.len();
    if n < BLOCK + 2 {
        return invalid("too few nodes for the eigensolver");
    }
    let length: f64 = op.coef.iter().map(|c| 1.0 / c).sum::<f64>();
    let total: f64 = op.mass.iter().sum();
    // Shift well below the expected λ₁ ≈ (2π)² / (Σ 1/c · Σ m).
    let tau = 1e-3 * (2.0 * std::f64::consts::PI).powi(2) / (length * total);
    let lower: Vec<f64> = (0..n).map(|i| -op.coef[(i + n - 1) % n]).collect();
    let upper: Vec<f64> = (0..n).map(|i| -op.coef[i]).collect();
    let diag: Vec<f64> = (0..n).map(|i| op.coef[(i + n - 1) % n] + op.coef[i] + tau * op.mass[i]).collect();
    let solver = CyclicTridiagonal::new(&lower, &diag, &upper);

    // Start from low Fourier modes in cumulative mass.
    let mut cum = vec![0.0; n];
    for i in 1..n {
        cum[i] = cum[i - 1] + 0.5 * (op.mass[i - 1] + op.mass[i]);
    }
    let span = cum[n - 1] + 0.5 * (op.mass[n - 1] + op.mass[0]);
    let mut x: Vec<Vec<f64>> = (0..BLOCK)
        .map(|k| {
            let freq = (k / 2 + 1) as f64;
            (0..n)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * freq * cum[i] / span + 0.1 * k as f64;
                    if k % 2 == 0 { t.cos() } else { t.sin() }
                })
                .collect()
        })
        .collect();
    let tol = |lam: f64| 1e-9 * lam.abs().max(1.0);
    for _ in 0..MAX_ITER {
        for col in x.iter_mut() {
            let rhs: Vec<f64> = col.iter().zip(&op.mass).map(|(v, m)| v * m).collect();
            *col = solver.solve(&rhs);
            op.deflate_constants(col);
        }
        m_orthonormalize(op, &mut x)?;
        let ax: Vec<Vec<f64>> = x.iter().map(|c| op.stiffness(c)).collect();
        let small = DMatrix::from_fn(BLOCK, BLOCK, |a, b| {
            0.5 * (dot(&x[a], &ax[b]) + dot(&x[b], &ax[a]))
        });
        let eig = SymmetricEigen::new(small);
        let mut order: Vec<usize> = (0..BLOCK).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let ritz: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        x = order
            .iter()
            .map(|&k| (0..n).map(|i| (0..BLOCK).map(|b| x[b][i] * eig.eigenvectors[(b, k)]).sum()).collect())
            .collect();
        let residuals: Vec<f64> = (0..WANTED).map(|k| op.residual(ritz[k], &x[k])).collect();
        if residuals.iter().zip(&ritz).all(|(r, l)| *r <= tol(*l)) {
            let lambda1 = ritz[0];
            let eigenspace: Vec<Vec<f64>> = (0..WANTED)
                .filter(|&k| ritz[k] - lambda1 <= CLUSTER_TOL * lambda1.abs())
                .map(|k| x[k].clone())
                .collect();
            let gap = ritz[1] - lambda1;
            return Ok(EigenResult {
                lambda1,
                gap,
                eigenfunction: x[0].clone(),
                eigenspace,
                simple: gap >= CLUSTER_TOL * lambda1.abs(),
                residual: residuals[0],
                ritz_values: ritz[..WANTED].to_vec(),
            });
        }
    }
    Err(Error::NoConvergence(format!("no convergence in {MAX_ITER} block iterations")))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn m_orthonormalize(op: &WeightedLaplacian, x: &mut [Vec<f64>]) -> Result<()> {
    for k in 0..x.len() {
        for _ in 0..2 {
            for j in 0..k {
                let c = op.inner(&x[k], &x[j]);
                let (head, tail) = x.split_at_mut(k);
                for (v, w) in tail[0].iter_mut().zip(&head[j]) {
                    *v -= c * w;
                }
            }
        }
        let norm = op.inner(&x[k], &x[k]).sqrt();
        if !(norm > 0.0) {
            return Err(Error::NoConvergence("block collapsed".into()));
        }
        x[k].iter_mut().for_each(|v| *v /= norm);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Borderline,
    Unstable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Borderline => "borderline",
            Verdict::Unstable => "unstable",
        }
    }
}

/// `λ₁ ≥ C` at tolerance `1e−6·max(C, 1)`.
pub fn stability_verdict(lambda1: f64, c: f64) -> Verdict {
    let tol = 1e-6 * c.abs().max(1.0);
    if lambda1 > c + tol {
        Verdict::Stable
    } else if lambda1 < c - tol {
        Verdict::Unstable
    } else {
        Verdict::Borderline
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{GaussianPlane, RevolutionSurface, Surface, Vec2};
    use crate::immersion::{compute_geometry, DiscreteCurve};
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn circle_op(r: f64, c: f64, n: usize) -> (WeightedLaplacian, CurveGeometry) {
        let s: Arc<dyn Surface> = Arc::new(GaussianPlane::new(c).unwrap());
        let g = compute_geometry(&DiscreteCurve::circle(s, Vec2::zeros(), r, n).unwrap()).unwrap();
        (WeightedLaplacian::assemble(&g), g)
    }

    #[test]
    fn circle_spectrum() {
        let (op, _) = circle_op(2.0, 0.0, 256);
        let e = first_eigenvalue(&op).unwrap();
        // Inscribed regular polygons reproduce 1/r² exactly.
        assert!((e.lambda1 - 0.25).abs() < 1e-10);
        assert!(!e.simple && e.eigenspace.len() == 2);
        assert!((e.ritz_values[2] - 1.0).abs() < 1e-3);
        assert!(e.residual <= 1e-8);
        assert!((op.inner(&e.eigenfunction, &e.eigenfunction) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn great_circle_and_f_minimal_plane_circle() {
        let sphere: Arc<dyn Surface> = Arc::new(RevolutionSurface::round());
        let n = 512;
        let g = compute_geometry(&DiscreteCurve::parallel(sphere, PI / 2.0, n).unwrap()).unwrap();
        let h = g.edge_len[0];
        let e = first_eigenvalue(&WeightedLaplacian::assemble(&g)).unwrap();
        assert!((e.lambda1 - 1.0).abs() <= 10.0 * h * h);
        let (op, g) = circle_op(1.0, 2.0, n);
        let e = first_eigenvalue(&op).unwrap();
        assert!((e.lambda1 - 1.0).abs() <= 10.0 * g.edge_len[0].powi(2));
        assert_eq!(stability_verdict(e.lambda1, 2.0), Verdict::Unstable);
    }

    #[test]
    fn drift_term_of_a_linear_weight() {
        // Weight f = βs on an arc parametrization: Δ_f sin = −sin + β cos.
        let n = 400;
        let beta = 0.3;
        let span = 2.0 * PI;
        let h = span / n as f64;
        let s: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        // Only interior nodes, away from the weight discontinuity at the seam.
        let ef = |x: f64| (beta * x).exp();
        let coef: Vec<f64> = s.iter().map(|x| 0.5 * (ef(*x) + ef(x + h)) / h).collect();
        let mass: Vec<f64> = s.iter().map(|x| ef(*x) * h).collect();
        let op = WeightedLaplacian::from_parts(coef, mass).unwrap();
        let u: Vec<f64> = s.iter().map(|x| x.sin()).collect();
        let lap = op.apply(&u);
        for i in 10..n - 10 {
            let exact = -s[i].sin() + beta * s[i].cos();
            assert!((lap[i] - exact).abs() < 2.0 * h * h, "{i}");
        }
    }

    #[test]
    fn verdicts() {
        assert_eq!(stability_verdict(5.0, 2.0), Verdict::Stable);
        assert_eq!(stability_verdict(2.0, 2.0), Verdict::Borderline);
        assert_eq!(stability_verdict(1.0, 2.0), Verdict::Unstable);
    }

    proptest! {
        #[test]
        fn self_adjoint_and_nonpositive(
            coef in prop::collection::vec(0.1f64..10.0, 16..40),
            seed in 0u64..1000,
        ) {
            let n = coef.len();
            let mass: Vec<f64> = (0..n).map(|i| 0.5 + ((i as u64 * 7919 + seed) % 13) as f64 / 13.0).collect();
            let op = WeightedLaplacian::from_parts(coef, mass).unwrap();
            let u: Vec<f64> = (0..n).map(|i| ((i as f64 + seed as f64) * 1.3).sin()).collect();
            let v: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.7 + seed as f64).cos()).collect();
            let a = op.inner(&op.apply(&u), &v);
            let b = op.inner(&u, &op.apply(&v));
            prop_assert!((a - b).abs() <= 1e-10 * (a.abs() + b.abs() + 1.0));
            prop_assert!(op.inner(&op.apply(&u), &u) <= 1e-12);
            prop_assert!(op.apply(&vec![2.5; n]).iter().all(|x| *x == 0.0));
        }
    }
}
