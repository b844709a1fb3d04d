use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use super::{AmbientModel, ChartPoint, Mat2, Surface, Vec2};
use crate::error::{invalid, Result};
use crate::numeric::{ClampedSpline, HermiteTable};

/// Cells of the tabulated weight.
const WEIGHT_CELLS: usize = 4096;

/// Warping profile `ψ` of the metric `dθ² + ψ(θ)² dφ²` on `θ ∈ [0, π]`.
#[derive(Debug, Clone)]
pub enum Profile {
    /// `ψ = sin θ`, the unit round sphere.
    Sine,
    /// `ψ = sin θ·(1 + ε sin²θ)`, requires `ε > −1`.
    Warp(f64),
    /// Clamped cubic spline through samples with `ψ'(0) = 1`, `ψ'(π) = −1`.
    Sampled(ClampedSpline),
}

impl Profile {
    /// Samples `(θ, ψ)` must start at `(0, 0)`, end at `(π, 0)` and be positive between.
    pub fn sampled(theta: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        if theta.len() < 4 || theta.len() != psi.len() {
            return invalid("profile needs at least four samples");
        }
        if theta[0].abs() > 1e-12 || (theta[theta.len() - 1] - PI).abs() > 1e-9 {
            return invalid("profile samples must span [0, pi]");
        }
        if theta.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("profile abscissae must increase");
        }
        let last = psi.len() - 1;
        if psi[0].abs() > 1e-12 || psi[last].abs() > 1e-9 || psi[1..last].iter().any(|&v| v <= 0.0) {
            return invalid("profile must vanish at the poles and be positive between");
        }
        Ok(Profile::Sampled(ClampedSpline::new(theta, psi, 1.0, -1.0)))
    }

    /// `(ψ, ψ', ψ'')` at `θ`.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let (s, c) = theta.sin_cos();
        match self {
            Profile::Sine => (s, c, -s),
            Profile::Warp(e) => (
                s + e * s.powi(3),
                c + 3.0 * e * s * s * c,
                -s + 3.0 * e * (2.0 * s * c * c - s.powi(3)),
            ),
            Profile::Sampled(sp) => sp.eval(theta),
        }
    }

    /// `Ψ(θ) = ∫₀^θ ψ`.
    pub fn integral(&self, theta: f64) -> f64 {
        let c = theta.cos();
        match self {
            Profile::Sine => 1.0 - c,
            Profile::Warp(e) => (1.0 - c) + e * (c.powi(3) / 3.0 - c + 2.0 / 3.0),
            Profile::Sampled(sp) => sp.integral(theta),
        }
    }
}

/// Sphere of revolution with its canonical weight.
///
/// Charts: `0` is `(θ, φ)` with `φ` unwrapped and `2π`-periodic; `1` and `2`
/// are geodesic polar charts `(π/2 ∓ (π/2 − θ))·(cos φ, ±sin φ)` around the
/// north and south poles. All three are positively oriented.
#[derive(Debug, Clone)]
pub struct RevolutionSurface {
    profile: Profile,
    area: f64,
    c: f64,
    weight: Option<HermiteTable>,
}

impl RevolutionSurface {
    /// Unit round sphere: `C = 1`, `f ≡ 0`.
    pub fn round() -> Self {
        Self { profile: Profile::Sine, area: 4.0 * PI, c: 1.0, weight: None }
    }

    pub fn warped(profile: Profile) -> Result<Self> {
        if let Profile::Warp(e) = profile {
            if !(e.is_finite() && e > -1.0) {
                return invalid("warp parameter must exceed -1");
            }
        }
        let area = 2.0 * PI * profile.integral(PI);
        let c = 4.0 * PI / area;
        let weight = Some(solve_weight(&profile, c));
        Ok(Self { profile, area, c, weight })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// `(f, f')` as a function of `θ`.
    pub fn weight_theta(&self, theta: f64) -> (f64, f64) {
        match &self.weight {
            None => (0.0, 0.0),
            Some(t) => t.eval(theta),
        }
    }

    /// `∫ K dA` by composite Simpson quadrature of `−ψ''`.
    pub fn total_curvature(&self) -> f64 {
        let m = 2 * WEIGHT_CELLS;
        let h = PI / m as f64;
        let mut acc = 0.0;
        for j in 0..=m {
            let w = if j == 0 || j == m { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * -self.profile.eval(j as f64 * h).2;
        }
        2.0 * PI * acc * h / 3.0
    }

    /// `(θ, φ)` of a chart point.
    fn polar_angles(&self, p: &ChartPoint) -> (f64, f64) {
        match p.chart {
            0 => (p.x[0], p.x[1]),
            1 => (p.x.norm(), p.x[1].atan2(p.x[0])),
            _ => (PI - p.x.norm(), (-p.x[1]).atan2(p.x[0])),
        }
    }

    /// Jacobian of `(θ, φ) ↦ chart` at `(θ, φ)`.
    fn from_angles_jacobian(chart: u8, theta: f64, phi: f64) -> Mat2 {
        let (s, c) = phi.sin_cos();
        match chart {
            0 => Mat2::identity(),
            1 => Mat2::new(c, -theta * s, s, theta * c),
            _ => {
                let sig = PI - theta;
                Mat2::new(-c, -sig * s, s, -sig * c)
            }
        }
    }

    /// Profile seen from the pole chart: `ψ_s(ρ)` and `dψ_s/dρ`.
    fn pole_profile(&self, chart: u8, rho: f64) -> (f64, f64) {
        if chart == 1 {
            let (p, dp, _) = self.profile.eval(rho);
            (p, dp)
        } else {
            let (p, dp, _) = self.profile.eval(PI - rho);
            (p, -dp)
        }
    }
}

fn solve_weight(profile: &Profile, c: f64) -> HermiteTable {
    let m = WEIGHT_CELLS;
    let h = PI / m as f64;
    let mut d1 = vec![0.0; m + 1];
    let mut d2 = vec![0.0; m + 1];
    // (ψ f')' = −ψ'' − Cψ with regular poles integrates to ψ f' = 1 − ψ' − CΨ.
    for j in 1..m {
        let th = j as f64 * h;
        let (p, dp, ddp) = profile.eval(th);
        d1[j] = (1.0 - dp - c * profile.integral(th)) / p;
        d2[j] = (-ddp - c * p - dp * d1[j]) / p;
    }
    d2[0] = 2.0 * d2[1] - d2[2];
    d2[m] = 2.0 * d2[m - 1] - d2[m - 2];
    let mut v = vec![0.0; m + 1];
    for j in 0..m {
        v[j + 1] = v[j] + h / 2.0 * (d1[j] + d1[j + 1]) + h * h / 12.0 * (d2[j] - d2[j + 1]);
    }
    // Normalise ∫ f dA = 0 (Simpson in θ with weight ψ).
    let (mut num, mut den) = (0.0, 0.0);
    for (j, vj) in v.iter().enumerate() {
        let w = if j == 0 || j == m { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
        let p = profile.eval(j as f64 * h).0;
        num += w * vj * p;
        den += w * p;
    }
    let shift = num / den;
    v.iter_mut().for_each(|x| *x -= shift);
    HermiteTable::new(0.0, PI, v, d1, d2)
}

impl AmbientModel for RevolutionSurface {
    fn name(&self) -> &'static str {
        match self.profile {
            Profile::Sine => "round_sphere",
            _ => "warped_sphere",
        }
    }

    fn complex_dim(&self) -> usize {
        1
    }

    fn einstein_constant(&self) -> f64 {
        self.c
    }
}

impl Surface for RevolutionSurface {
    fn metric(&self, p: &ChartPoint) -> Mat2 {
        if p.chart == 0 {
            let psi = self.profile.eval(p.x[0]).0;
            return Mat2::new(1.0, 0.0, 0.0, psi * psi);
        }
        let rho = p.x.norm();
        if rho < 1e-8 {
            return Mat2::identity();
        }
        let w = p.x / rho;
        let q = (self.pole_profile(p.chart, rho).0 / rho).powi(2);
        q * Mat2::identity() + (1.0 - q) * w * w.transpose()
    }

    fn metric_derivative(&self, p: &ChartPoint) -> [Mat2; 2] {
        if p.chart == 0 {
            let (psi, dpsi, _) = self.profile.eval(p.x[0]);
            return [Mat2::new(0.0, 0.0, 0.0, 2.0 * psi * dpsi), Mat2::zeros()];
        }
        let rho = p.x.norm();
        if rho < 1e-8 {
            return [Mat2::zeros(); 2];
        }
        let w = p.x / rho;
        let (ps, dps) = self.pole_profile(p.chart, rho);
        let ratio = ps / rho;
        let q = ratio * ratio;
        let dq = 2.0 * ratio * (dps * rho - ps) / (rho * rho);
        let proj = Mat2::identity() - w * w.transpose();
        let mut out = [Mat2::zeros(); 2];
        for (k, slot) in out.iter_mut().enumerate() {
            let dw = proj.column(k) / rho;
            let dww = dw * w.transpose() + w * dw.transpose();
            *slot = dq * w[k] * proj + (1.0 - q) * dww;
        }
        out
    }

    fn weight(&self, p: &ChartPoint) -> f64 {
        self.weight_theta(self.polar_angles(p).0).0
    }

    fn weight_differential(&self, p: &ChartPoint) -> Vec2 {
        if self.weight.is_none() {
            return Vec2::zeros();
        }
        let (theta, _) = self.polar_angles(p);
        let df = self.weight_theta(theta).1;
        match p.chart {
            0 => Vec2::new(df, 0.0),
            c => {
                let rho = p.x.norm();
                if rho < 1e-12 {
                    return Vec2::zeros();
                }
                let sign = if c == 1 { 1.0 } else { -1.0 };
                sign * df * p.x / rho
            }
        }
    }

    fn to_chart(&self, p: &ChartPoint, chart: u8) -> Option<Vec2> {
        if p.chart == chart {
            return Some(p.x);
        }
        let (theta, phi) = self.polar_angles(p);
        let (s, c) = phi.sin_cos();
        match chart {
            0 if theta > 1e-6 && theta < PI - 1e-6 => Some(Vec2::new(theta, phi)),
            1 if theta < PI - 1e-3 => Some(theta * Vec2::new(c, s)),
            2 if theta > 1e-3 => Some((PI - theta) * Vec2::new(c, -s)),
            _ => None,
        }
    }

    fn transition_jacobian(&self, p: &ChartPoint, chart: u8) -> Mat2 {
        if p.chart == chart {
            return Mat2::identity();
        }
        let (theta, phi) = self.polar_angles(p);
        let into = Self::from_angles_jacobian(chart, theta, phi);
        let out_of = Self::from_angles_jacobian(p.chart, theta, phi)
            .try_inverse()
            .expect("transition away from the pole");
        into * out_of
    }

    fn select_chart(&self, p: &ChartPoint) -> ChartPoint {
        let target = match p.chart {
            0 if (p.x[0] - FRAC_PI_2).abs() > FRAC_PI_3 => {
                if p.x[0] < FRAC_PI_2 {
                    1
                } else {
                    2
                }
            }
            1 | 2 if p.x.norm() > FRAC_PI_4 => 0,
            c => c,
        };
        match self.to_chart(p, target) {
            Some(x) => ChartPoint { chart: target, x },
            None => *p,
        }
    }

    fn period(&self, chart: u8) -> Option<(usize, f64)> {
        (chart == 0).then_some((1, 2.0 * PI))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_residual_and_curvature() {
        let s = RevolutionSurface::round();
        for p in [ChartPoint::new(0, 1.1, 0.3), ChartPoint::new(1, 0.2, -0.3), ChartPoint::new(2, -0.4, 0.1)] {
            assert!(s.weight_residual(&p).unwrap() <= 1e-8, "{p:?}");
            assert!((s.gauss_curvature_fd(&p) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn warped_residual_and_gauss_bonnet() {
        let s = RevolutionSurface::warped(Profile::Warp(0.1)).unwrap();
        let p = ChartPoint::new(0, PI / 3.0, 0.0);
        assert!(s.weight_residual(&p).unwrap() <= 1e-5);
        assert!((s.total_curvature() / (4.0 * PI) - 1.0).abs() < 1e-6);
        assert!((s.einstein_constant() * s.area() / (4.0 * PI) - 1.0).abs() < 1e-12);
        for j in 1..40 {
            let th = PI * j as f64 / 40.0;
            let q = ChartPoint::new(0, th, 0.0);
            let q = s.select_chart(&q);
            assert!(s.weight_residual(&q).unwrap() <= 1e-6, "theta {th}");
        }
    }

    #[test]
    fn weight_is_normalised_and_matches_ode() {
        let s = RevolutionSurface::warped(Profile::Warp(-0.3)).unwrap();
        let m = 2000;
        let h = PI / m as f64;
        let mut acc = 0.0;
        for j in 0..=m {
            let w = if j == 0 || j == m { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            let th = j as f64 * h;
            acc += w * s.weight_theta(th).0 * s.profile().eval(th).0;
        }
        assert!((acc * h / 3.0).abs() < 1e-9);
    }

    #[test]
    fn sampled_profile_tracks_analytic_one() {
        let m = 400;
        let theta: Vec<f64> = (0..=m).map(|j| PI * j as f64 / m as f64).collect();
        let psi: Vec<f64> = theta.iter().map(|&t| Profile::Warp(0.1).eval(t).0).collect();
        let sampled = RevolutionSurface::warped(Profile::sampled(theta, psi).unwrap()).unwrap();
        let exact = RevolutionSurface::warped(Profile::Warp(0.1)).unwrap();
        assert!((sampled.einstein_constant() - exact.einstein_constant()).abs() < 1e-7);
        let (a, b) = (sampled.weight_theta(1.0).0, exact.weight_theta(1.0).0);
        assert!((a - b).abs() < 1e-5);
        assert!(Profile::sampled(vec![0.0, 1.0, 2.0, PI], vec![0.0, 1.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn transitions_are_consistent() {
        let s = RevolutionSurface::warped(Profile::Warp(0.1)).unwrap();
        let p = ChartPoint::new(0, 0.4, 1.2);
        for target in [1u8, 2] {
            let x = s.to_chart(&p, target).unwrap();
            let q = ChartPoint { chart: target, x };
            let back = s.to_chart(&q, 0).unwrap();
            assert!((back - p.x).norm() < 1e-12);
            let jac = s.transition_jacobian(&p, target);
            let gp = s.metric(&p);
            let gq = s.metric(&q);
            assert!((jac.transpose() * gq * jac - gp).abs().max() < 1e-10);
            assert!(jac.determinant() > 0.0);
            assert!((s.weight(&q) - s.weight(&p)).abs() < 1e-13);
        }
        let far = ChartPoint::new(0, 0.3, 0.0);
        assert_eq!(s.select_chart(&far).chart, 1);
        let back = ChartPoint::new(1, 1.0, 0.0);
        assert_eq!(s.select_chart(&back).chart, 0);
    }
}
