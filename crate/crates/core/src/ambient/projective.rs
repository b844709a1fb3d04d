//! Weighted projective spaces `CP^n_a = μ^{-1}(c) / S¹` evaluated through
//! the horizontal lift in `ℂ^{n+1}`.
//!
//! The circle acts by `e^{iθ}·z = (e^{i a_j θ} z_j)` with moment map
//! `μ(z) = −½ Σ a_j |z_j|²`. Tangent vectors of the quotient at `[z]` are
//! represented by vectors of `ℂ^{n+1}` orthogonal to both the generator
//! `X̃ = i·(a_j z_j)` and `J X̃ = −(a_j z_j)`; `J` acts as multiplication by `i`.

use num_complex::Complex64;

use super::AmbientModel;
use crate::error::{invalid, Error, Result};
use crate::numeric::derivative;

pub type CVec = Vec<Complex64>;

/// Real inner product `Re Σ ū_j v_j`.
pub fn dot(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

pub fn axpy(alpha: f64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn times_i(u: &[Complex64]) -> CVec {
    u.iter().map(|v| Complex64::new(-v.im, v.re)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedProjective {
    a: Vec<i64>,
    c: f64,
}

impl WeightedProjective {
    pub fn new(a: Vec<i64>, c: f64) -> Result<Self> {
        if a.first() != Some(&1) {
            return invalid("weights must start with 1");
        }
        if a.len() < 2 || a.iter().any(|&v| v < 1) {
            return invalid("weights must be at least two positive integers");
        }
        if !(c.is_finite() && c < 0.0) {
            return invalid("level must be negative");
        }
        Ok(Self { a, c })
    }

    /// The level `c = −(r²/2) Σ a_j` containing the Clifford torus of radius `r`.
    pub fn at_clifford_level(a: Vec<i64>, r: f64) -> Result<Self> {
        let sum: i64 = a.iter().sum();
        Self::new(a, -0.5 * r * r * sum as f64)
    }

    pub fn weights(&self) -> &[i64] {
        &self.a
    }

    pub fn level(&self) -> f64 {
        self.c
    }

    fn af(&self, j: usize) -> f64 {
        self.a[j] as f64
    }

    fn weight_sum(&self) -> f64 {
        self.a.iter().sum::<i64>() as f64
    }

    pub fn moment_map(&self, z: &[Complex64]) -> f64 {
        -0.5 * z.iter().enumerate().map(|(j, v)| self.af(j) * v.norm_sqr()).sum::<f64>()
    }

    /// Canonical representative with `|z_j|² = ρ_j` and nonnegative real entries.
    pub fn lift_orbit_point(&self, rho: &[f64]) -> Result<CVec> {
        if rho.len() != self.a.len() {
            return invalid("polytope point has the wrong length");
        }
        if rho.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Boundary("polytope coordinates must be positive".into()));
        }
        let level: f64 = rho.iter().enumerate().map(|(j, r)| self.af(j) * r).sum();
        if (level + 2.0 * self.c).abs() > 1e-10 * (2.0 * self.c).abs() {
            return invalid("polytope point is not on the level set");
        }
        Ok(rho.iter().map(|r| Complex64::new(r.sqrt(), 0.0)).collect())
    }

    /// `|ν|² = Σ a_j² |z_j|²`.
    fn nu_sq(&self, z: &[Complex64]) -> f64 {
        z.iter().enumerate().map(|(j, v)| self.af(j).powi(2) * v.norm_sqr()).sum()
    }

    /// `f_a = (1/n){(Σa/c)|z|²/4 + log |ν|}`.
    pub fn canonical_weight(&self, z: &[Complex64]) -> Result<f64> {
        let nu = self.nu_sq(z);
        if !(nu > 0.0) {
            return Err(Error::InvalidInput("weight undefined at the origin".into()));
        }
        let norm: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let n = (self.a.len() - 1) as f64;
        Ok((self.weight_sum() / self.c * norm / 4.0 + 0.5 * nu.ln()) / n)
    }

    /// Euclidean gradient of the extension of `f_a` to `ℂ^{n+1} \ 0`.
    pub fn weight_gradient_lift(&self, z: &[Complex64]) -> CVec {
        let nu = self.nu_sq(z);
        let n = (self.a.len() - 1) as f64;
        let k = self.weight_sum() / self.c;
        z.iter()
            .enumerate()
            .map(|(j, v)| v * ((k / 2.0 + self.af(j).powi(2) / nu) / n))
            .collect()
    }

    /// The circle generator `X̃ = i·(a_j z_j)`.
    pub fn generator(&self, z: &[Complex64]) -> CVec {
        z.iter().enumerate().map(|(j, v)| Complex64::new(0.0, self.af(j)) * v).collect()
    }

    /// Projection onto the orthogonal complement of `X̃` and `JX̃` at `z`.
    pub fn horizontal_projection(&self, z: &[Complex64], u: &[Complex64]) -> CVec {
        let x = self.generator(z);
        let jx = times_i(&x);
        let nn = dot(&x, &x);
        let mut out = u.to_vec();
        axpy(-dot(u, &x) / nn, &x, &mut out);
        axpy(-dot(u, &jx) / nn, &jx, &mut out);
        out
    }

    pub fn quotient_metric(&self, z: &[Complex64], u: &[Complex64], v: &[Complex64]) -> f64 {
        dot(&self.horizontal_projection(z, u), &self.horizontal_projection(z, v))
    }

    /// `ω(u, v) = g(Ju, v)` on horizontal representatives.
    pub fn symplectic_form(&self, z: &[Complex64], u: &[Complex64], v: &[Complex64]) -> f64 {
        let hu = self.horizontal_projection(z, u);
        dot(&times_i(&hu), &self.horizontal_projection(z, v))
    }

    /// `|K_gauss − C − Δf|` for `n = 1`, where the quotient is the surface of
    /// revolution `E(t)dt² + G(t)dφ²` over `t = ρ₂ ∈ (0, −2c/a₂)`.
    pub fn weight_residual_1d(&self, t: f64) -> Result<f64> {
        if self.a.len() != 2 {
            return Err(Error::DimensionUnsupported("residual is computed in complex dimension 1".into()));
        }
        let kappa = -2.0 * self.c;
        let a2 = self.af(1);
        if !(t > 0.0 && t < kappa / a2) {
            return Err(Error::Boundary("parameter outside the polytope".into()));
        }
        let (e, g) = self.revolution_metric(t);
        let sqrt_g = |t: f64| self.revolution_metric(t).1.sqrt();
        let f = |t: f64| {
            let z = self.lift_orbit_point(&[kappa - a2 * t, t]).expect("interior point");
            self.canonical_weight(&z).expect("interior point")
        };
        let h = 1e-3 * t.min(kappa / a2 - t);
        let curv_flux = |t: f64| derivative(sqrt_g, t, h) / self.revolution_metric(t).0.sqrt();
        let weight_flux = |t: f64| sqrt_g(t) * derivative(f, t, h) / self.revolution_metric(t).0.sqrt();
        let area = (e * g).sqrt();
        let k_gauss = -derivative(curv_flux, t, h) / area;
        let lap = derivative(weight_flux, t, h) / area;
        Ok((k_gauss - self.einstein_constant() - lap).abs())
    }

    /// `(E, G)` of the `n = 1` quotient at `t = ρ₂`.
    pub fn revolution_metric(&self, t: f64) -> (f64, f64) {
        let a2 = self.af(1);
        let r1 = -2.0 * self.c - a2 * t;
        (a2 * a2 / (4.0 * r1) + 1.0 / (4.0 * t), r1 * t / (r1 + a2 * a2 * t))
    }
}

impl AmbientModel for WeightedProjective {
    fn name(&self) -> &'static str {
        "weighted_projective"
    }

    fn complex_dim(&self) -> usize {
        self.a.len() - 1
    }

    fn einstein_constant(&self) -> f64 {
        -self.weight_sum() / self.c
    }
}
