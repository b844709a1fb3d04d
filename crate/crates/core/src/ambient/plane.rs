use super::{AmbientModel, ChartPoint, Mat2, Surface, Vec2};
use crate::error::{invalid, Result};

/// `ℂ` with the flat metric and the Gaussian weight `f = −C|z|²/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPlane {
    c: f64,
}

impl GaussianPlane {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return invalid("Gaussian plane constant C must be non-negative");
        }
        Ok(Self { c })
    }
}

impl AmbientModel for GaussianPlane {
    fn name(&self) -> &'static str {
        "gaussian_plane"
    }

    fn complex_dim(&self) -> usize {
        1
    }

    fn einstein_constant(&self) -> f64 {
        self.c
    }
}

impl Surface for GaussianPlane {
    fn metric(&self, _p: &ChartPoint) -> Mat2 {
        Mat2::identity()
    }

    fn metric_derivative(&self, _p: &ChartPoint) -> [Mat2; 2] {
        [Mat2::zeros(); 2]
    }

    fn weight(&self, p: &ChartPoint) -> f64 {
        -self.c * p.x.norm_squared() / 4.0
    }

    fn weight_differential(&self, p: &ChartPoint) -> Vec2 {
        -self.c * p.x / 2.0
    }

    fn to_chart(&self, p: &ChartPoint, chart: u8) -> Option<Vec2> {
        (chart == 0).then_some(p.x)
    }

    fn transition_jacobian(&self, _p: &ChartPoint, _chart: u8) -> Mat2 {
        Mat2::identity()
    }

    fn select_chart(&self, p: &ChartPoint) -> ChartPoint {
        *p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_vanishes() {
        let m = GaussianPlane::new(2.0).unwrap();
        let p = ChartPoint::new(0, 0.3, -0.7);
        assert!(m.weight_residual(&p).unwrap() <= 1e-8);
        assert!((m.weight_laplacian_fd(&p) + 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_negative_constant() {
        assert!(GaussianPlane::new(-1.0).is_err());
    }
}
