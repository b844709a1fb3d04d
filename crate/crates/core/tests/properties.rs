//! Property tests through the public API.

use std::f64::consts::PI;
use std::sync::Arc;

use glmcf_core::ambient::{GaussianPlane, Profile, RevolutionSurface, Surface, Vec2, WeightedProjective};
use glmcf_core::flow::step_curve;
use glmcf_core::immersion::{
    compute_geometry, first_variation_check, orbit_generalized_mean_curvature, weighted_volume, DiscreteCurve,
    HamiltonianField, TorusOrbit,
};
use glmcf_core::lattice::{spectrum_report, WeightVector, DEFAULT_NODE_CAP};
use glmcf_core::spectral::{first_eigenvalue, WeightedLaplacian};
use proptest::prelude::*;

fn arc(curve: &DiscreteCurve) -> Vec<f64> {
    let l = curve.edge_lengths();
    let total: f64 = l.iter().sum();
    let mut acc = 0.0;
    l.iter()
        .map(|x| {
            let s = 2.0 * PI * acc / total;
            acc += x;
            s
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn lattice_bound_and_scaling(tail in prop::collection::vec(1i64..8, 1..4), r in 0.5f64..2.0) {
        let mut a = vec![1];
        a.extend(tail);
        let rep = spectrum_report(&WeightVector::new(a.clone(), r).unwrap(), DEFAULT_NODE_CAP).unwrap();
        prop_assert!(rep.lambda1 >= rep.c * (1.0 - 1e-9));
        let mut sorted = a.clone();
        sorted.sort_unstable();
        prop_assert_eq!(rep.equality, sorted.windows(2).any(|w| w[0] == w[1]));
        let unit = spectrum_report(&WeightVector::new(a, 1.0).unwrap(), DEFAULT_NODE_CAP).unwrap();
        prop_assert!((rep.lambda1 * r * r - unit.lambda1).abs() <= 1e-12 * unit.lambda1);
    }

    #[test]
    fn first_variation_on_plane_circles(
        cx in -0.5f64..0.5, cy in -0.5f64..0.5, radius in 0.5f64..1.5,
        coef in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let s: Arc<dyn Surface> = Arc::new(GaussianPlane::new(2.0).unwrap());
        let curve = DiscreteCurve::circle(s, Vec2::new(cx, cy), radius, 128).unwrap();
        let geom = compute_geometry(&curve).unwrap();
        let u: Vec<f64> = arc(&curve)
            .iter()
            .map(|x| (0..3).map(|k| coef[2 * k] * ((k + 1) as f64 * x).cos() + coef[2 * k + 1] * ((k + 1) as f64 * x).sin()).sum())
            .collect();
        let fv = first_variation_check(&curve, &HamiltonianField::new(&geom, u).unwrap()).unwrap();
        prop_assert!(fv.relative_error <= 1e-6, "{:?}", fv);
    }

    #[test]
    fn eigenfunctions_are_weighted_mean_free(theta in 1.0f64..2.1, wobble in 0.0f64..0.3, warp in -0.3f64..0.4) {
        let s: Arc<dyn Surface> = Arc::new(RevolutionSurface::warped(Profile::Warp(warp)).unwrap());
        let curve = DiscreteCurve::from_chart_fn(s, 0, 96, |t| Vec2::new(theta + wobble * (2.0 * t).cos(), t)).unwrap();
        let geom = compute_geometry(&curve).unwrap();
        let op = WeightedLaplacian::assemble(&geom);
        let eig = first_eigenvalue(&op).unwrap();
        prop_assert!(eig.lambda1 > 0.0);
        prop_assert!(eig.residual <= 1e-8 * eig.lambda1.max(1.0));
        let ones = vec![1.0; geom.len()];
        prop_assert!(op.inner(&eig.eigenfunction, &ones).abs() <= 1e-9 * op.inner(&ones, &ones).sqrt());
        prop_assert!((op.inner(&eig.eigenfunction, &eig.eigenfunction) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn orbit_velocity_stays_on_the_level_set(raw in prop::collection::vec(0.1f64..1.0, 3), phi in prop::collection::vec(0.0f64..6.0, 2)) {
        let m = WeightedProjective::at_clifford_level(vec![1, 2, 3], 1.0).unwrap();
        let lvl: f64 = raw.iter().zip([1.0, 2.0, 3.0]).map(|(r, a)| r * a).sum();
        let rho: Vec<f64> = raw.iter().map(|r| r * 6.0 / lvl).collect();
        let k = orbit_generalized_mean_curvature(&TorusOrbit::new(m, rho).unwrap(), &phi).unwrap();
        let drift: f64 = k.rho_dot.iter().zip([1.0, 2.0, 3.0]).map(|(r, a)| r * a).sum();
        prop_assert!(drift.abs() <= 1e-10);
        prop_assert!(k.codifferential <= 1e-6);
    }
}

#[test]
fn weighted_volume_decreases_along_the_flow() {
    let s: Arc<dyn Surface> = Arc::new(RevolutionSurface::round());
    let mut curve = DiscreteCurve::from_chart_fn(s, 0, 64, |t| Vec2::new(PI / 2.0 + 0.2 * (3.0 * t).sin(), t)).unwrap();
    let mut vol = weighted_volume(&curve).unwrap();
    for _ in 0..200 {
        curve = step_curve(&curve, 1e-4).unwrap();
        let next = weighted_volume(&curve).unwrap();
        assert!(next < vol);
        vol = next;
    }
}
