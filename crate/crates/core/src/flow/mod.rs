//! The flow `∂F/∂t = K` for discrete curves, with diagnostics for each
//! evolution identity, and its `T^n`-invariant reduction for torus orbits.

use serde::Serialize;

use crate::ambient::Vec2;
use crate::error::{Error, Result};
use crate::immersion::{compute_geometry, CurveGeometry, DiscreteCurve};
use crate::numeric::linear_fit;
use crate::spectral::{first_eigenvalue, EigenResult, WeightedLaplacian};

mod orbit;

pub use orbit::{run_orbit_flow, step_orbit, OrbitSample};

/// `max|B|` above which the flow is declared singular.
pub const BLOWUP_CURVATURE: f64 = 1e6;
/// Holonomy below which a curve counts as exact for the angle diagnostic.
pub const EXACT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResamplePolicy {
    Never,
    Always,
    /// Resample when `max ℓ / min ℓ` exceeds the threshold.
    Ratio(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    /// `σ` in `dt ≤ σ h² / (1 + max|B|²)`, in `(0, 0.5]`.
    pub dt_safety: f64,
    pub dt_cap: f64,
    pub max_time: f64,
    /// Stop once `max|K|` falls to this value.
    pub stop_tol: f64,
    pub resample: ResamplePolicy,
    pub sample_interval: f64,
    /// Fraction of the qualifying samples used by the tail rate fit.
    pub tail_fraction: f64,
    /// Samples qualify for the rate fit once `∫|K|²` drops below this fraction of its initial value.
    pub tail_threshold: f64,
    /// Probe step of the diagnostics as a fraction of the current `dt`.
    pub probe_fraction: f64,
    pub diagnostics: bool,
    pub snapshot_times: Vec<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt_safety: 0.4,
            dt_cap: 1e-2,
            max_time: 10.0,
            stop_tol: 1e-6,
            resample: ResamplePolicy::Ratio(3.0),
            sample_interval: 0.05,
            tail_fraction: 0.3,
            tail_threshold: 1e-3,
            probe_fraction: 0.1,
            diagnostics: true,
            snapshot_times: Vec::new(),
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.into()));
        if !(self.dt_safety > 0.0 && self.dt_safety <= 0.5) {
            return bad("dt_safety must lie in (0, 0.5]");
        }
        if !(self.dt_cap > 0.0) || !(self.max_time > 0.0) || !(self.sample_interval > 0.0) {
            return bad("dt_cap, max_time and sample_interval must be positive");
        }
        if !(self.stop_tol >= 0.0) || !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return bad("stop_tol must be non-negative and tail_fraction in (0, 1]");
        }
        if !(self.probe_fraction > 0.0 && self.probe_fraction <= 1.0) {
            return bad("probe_fraction must lie in (0, 1]");
        }
        if let ResamplePolicy::Ratio(r) = self.resample {
            if !(r > 1.0) {
                return bad("resample threshold must exceed 1");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "converged")]
    Converged,
    #[serde(rename = "blowup")]
    Blowup,
    #[serde(rename = "maxTime")]
    MaxTime,
    #[serde(rename = "error")]
    Error,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Blowup => "blowup",
            Status::MaxTime => "maxTime",
            Status::Error => "error",
        }
    }
}

/// One diagnostic sample. Skipped checks hold `NaN`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub vol_f: f64,
    pub k_l2: f64,
    pub lambda1: f64,
    pub max_b: f64,
    pub max_grad_b: f64,
    pub hol_alpha_k: f64,
    pub angle_resid: f64,
    pub dl2_slack: f64,
    pub ef_resid: f64,
    /// `d/dt Vol_f + ∫|K|² dμ_f`, measured.
    pub vol_rate_resid: f64,
}

impl TraceRow {
    pub const CSV_HEADER: &'static str =
        "t,vol_f,k_l2,lambda1,max_b,max_grad_b,hol_alpha_k,angle_resid,dl2_slack,ef_resid";

    pub fn csv_fields(&self) -> [f64; 10] {
        [
            self.t,
            self.vol_f,
            self.k_l2,
            self.lambda1,
            self.max_b,
            self.max_grad_b,
            self.hol_alpha_k,
            self.angle_resid,
            self.dl2_slack,
            self.ef_resid,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
    pub status: Status,
    pub message: Option<String>,
    pub t_final: f64,
    pub steps: usize,
    pub resamples: usize,
    pub final_curve: DiscreteCurve,
    pub snapshots: Vec<(f64, DiscreteCurve)>,
    pub lambda1_limit: f64,
    pub max_k_final: f64,
    /// `−d/dt log ∫|K|²` fitted on the tail window.
    pub fitted_rate: Option<f64>,
    /// `2(λ₁(limit) − C)`.
    pub predicted_rate: f64,
}

/// The generalized mean curvature as a node velocity field.
pub fn velocity(curve: &DiscreteCurve) -> Result<Vec<Vec2>> {
    Ok(compute_geometry(curve)?.k)
}

/// One explicit RK4 step of signed length `dt`; nodes keep their charts
/// during the stages and are rechosen afterwards. Degenerate stages are
/// reported as blowup.
pub fn step_curve(curve: &DiscreteCurve, dt: f64) -> Result<DiscreteCurve> {
    let vel = |c: &DiscreteCurve| velocity(c).map_err(|e| Error::Blowup(e.to_string()));
    let k1 = vel(curve)?;
    let k2 = vel(&curve.displaced(&k1, 0.5 * dt))?;
    let k3 = vel(&curve.displaced(&k2, 0.5 * dt))?;
    let k4 = vel(&curve.displaced(&k3, dt))?;
    let inc: Vec<Vec2> = (0..curve.len()).map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0).collect();
    Ok(curve.displaced(&inc, dt).rechart())
}

/// `σ h_min² / (1 + max|B|²)`, capped.
pub fn stable_dt(geom: &CurveGeometry, config: &FlowConfig) -> f64 {
    let h = geom.min_edge();
    (config.dt_safety * h * h / (1.0 + geom.max_b().powi(2))).min(config.dt_cap)
}

/// Weighted-mean-free sup norm of `dθ/dt − (Δ_f θ + Cθ)` with `θ_0 = 0`.
/// `Δ_f θ` is built from the edge increments of `θ`, which are single valued.
fn angle_residual(geom: &CurveGeometry, op: &WeightedLaplacian, dtheta: &[f64]) -> f64 {
    let n = geom.len();
    let inc: Vec<f64> = (0..n).map(|i| 0.5 * geom.edge_len[i] * (geom.kbar[i] + geom.kbar[(i + 1) % n])).collect();
    let c = geom.einstein_constant;
    let r: Vec<f64> = (0..n)
        .map(|i| {
            let im = (i + n - 1) % n;
            let flux_out = geom.edge_weight[i] / geom.edge_len[i] * inc[i];
            let flux_in = geom.edge_weight[im] / geom.edge_len[im] * inc[im];
            let lap = (flux_out - flux_in) / geom.mass[i];
            dtheta[i] - lap - c * geom.theta[i]
        })
        .collect();
    let mean = op.inner(&r, &vec![1.0; n]) / geom.weighted_volume();
    r.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max)
}

/// `∫ 2φ'² g(H, K) − |K|²(φ'² − λ₁φ²) dμ_f`, the predicted `dλ₁/dt`.
fn ef_prediction(geom: &CurveGeometry, eig: &EigenResult) -> f64 {
    let phi = &eig.eigenfunction;
    let dphi = geom.arc_derivative(phi);
    (0..geom.len())
        .map(|i| {
            let k2 = geom.inner(i, &geom.k[i], &geom.k[i]);
            let hk = geom.inner(i, &geom.curvature[i], &geom.k[i]);
            geom.mass[i] * (2.0 * dphi[i] * dphi[i] * hk - k2 * (dphi[i] * dphi[i] - eig.lambda1 * phi[i] * phi[i]))
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// Diagnostic record at `curve`, using symmetric probes `step_curve(±δ)`.
pub fn diagnostics(t: f64, curve: &DiscreteCurve, probe: f64) -> Result<TraceRow> {
    let geom = compute_geometry(curve)?;
    let op = WeightedLaplacian::assemble(&geom);
    let eig = first_eigenvalue(&op)?;
    let plus = step_curve(curve, probe)?;
    let minus = step_curve(curve, -probe)?;
    let (gp, gm) = (compute_geometry(&plus)?, compute_geometry(&minus)?);
    let c = geom.einstein_constant;
    let k_l2 = geom.k_l2();
    let d_vol = (gp.weighted_volume() - gm.weighted_volume()) / (2.0 * probe);
    let d_k2 = (gp.k_l2() - gm.k_l2()) / (2.0 * probe);
    let angle_resid = if geom.holonomy.abs() <= EXACT_TOL {
        let dtheta: Vec<f64> = gp.theta.iter().zip(&gm.theta).map(|(a, b)| (a - b) / (2.0 * probe)).collect();
        angle_residual(&geom, &op, &dtheta)
    } else {
        f64::NAN
    };
    let ef_resid = if eig.simple {
        let ep = first_eigenvalue(&WeightedLaplacian::assemble(&gp))?;
        let em = first_eigenvalue(&WeightedLaplacian::assemble(&gm))?;
        if ep.simple && em.simple {
            ((ep.lambda1 - em.lambda1) / (2.0 * probe) - ef_prediction(&geom, &eig)).abs()
        } else {
            f64::NAN
        }
    } else {
        f64::NAN
    };
    Ok(TraceRow {
        t,
        vol_f: geom.weighted_volume(),
        k_l2,
        lambda1: eig.lambda1,
        max_b: geom.max_b(),
        max_grad_b: geom.max_grad_b(),
        hol_alpha_k: geom.holonomy,
        angle_resid,
        dl2_slack: 2.0 * (c + geom.max_bk() - eig.lambda1) * k_l2 - d_k2,
        ef_resid,
        vol_rate_resid: d_vol + k_l2,
    })
}

/// `−slope` of `log ∫|K|²` over the last `fraction` of the samples below
/// `threshold` times the initial value; needs at least three points.
pub fn fit_decay_rate(rows: &[TraceRow], fraction: f64, threshold: f64) -> Option<f64> {
    let first = rows.first()?.k_l2;
    let tail: Vec<&TraceRow> = rows.iter().filter(|r| r.k_l2 < threshold * first && r.k_l2 > 0.0).collect();
    let take = ((tail.len() as f64) * fraction).ceil() as usize;
    if take < 3 {
        return None;
    }
    let window = &tail[tail.len() - take..];
    let t: Vec<f64> = window.iter().map(|r| r.t).collect();
    let y: Vec<f64> = window.iter().map(|r| r.k_l2.ln()).collect();
    linear_fit(&t, &y).map(|(slope, _)| -slope)
}

/// Runs the flow until `max|K| ≤ stop_tol`, `max_time`, or a terminal error.
pub fn run_flow(initial: &DiscreteCurve, config: &FlowConfig) -> Result<FlowTrace> {
    config.validate()?;
    let c = initial.surface().einstein_constant();
    let mut cur = initial.clone();
    let mut rows = Vec::new();
    let mut snapshots = Vec::new();
    let mut pending_snapshots: Vec<f64> = config.snapshot_times.clone();
    pending_snapshots.sort_by(f64::total_cmp);
    pending_snapshots.reverse();
    let (mut t, mut steps, mut resamples, mut sample) = (0.0f64, 0usize, 0usize, 0u64);
    let mut message = None;
    let status = loop {
        let geom = match compute_geometry(&cur) {
            Ok(g) if g.max_b() <= BLOWUP_CURVATURE => g,
            Ok(g) => {
                message = Some(format!("max|B| = {:e}", g.max_b()));
                break Status::Blowup;
            }
            Err(e) => {
                message = Some(e.to_string());
                break Status::Blowup;
            }
        };
        let dt = stable_dt(&geom, config);
        let next_sample = sample as f64 * config.sample_interval;
        if t >= next_sample - 1e-12 {
            if config.diagnostics {
                match diagnostics(t, &cur, config.probe_fraction * dt) {
                    Ok(row) => rows.push(row),
                    Err(e) => {
                        message = Some(e.to_string());
                        break if matches!(e, Error::Blowup(_)) { Status::Blowup } else { Status::Error };
                    }
                }
            }
            sample += 1;
        }
        while pending_snapshots.last().is_some_and(|&s| t >= s - 1e-12) {
            snapshots.push((pending_snapshots.pop().unwrap(), cur.clone()));
        }
        if geom.max_k() <= config.stop_tol {
            break Status::Converged;
        }
        if t >= config.max_time - 1e-12 {
            break Status::MaxTime;
        }
        let mut target = (sample as f64 * config.sample_interval).min(config.max_time);
        if let Some(&s) = pending_snapshots.last() {
            target = target.min(s);
        }
        let h = dt.min(target - t);
        match step_curve(&cur, h) {
            Ok(next) => cur = next,
            Err(e) => {
                message = Some(e.to_string());
                break if matches!(e, Error::Blowup(_)) { Status::Blowup } else { Status::Error };
            }
        }
        t = if target - t <= dt { target } else { t + h };
        steps += 1;
        let resample = match config.resample {
            ResamplePolicy::Never => false,
            ResamplePolicy::Always => true,
            ResamplePolicy::Ratio(r) => cur.spacing_ratio() > r,
        };
        if resample {
            cur = cur.resample(cur.len())?;
            resamples += 1;
        }
    };
    let (lambda1_limit, max_k_final) = match compute_geometry(&cur) {
        Ok(g) => {
            let lam = first_eigenvalue(&WeightedLaplacian::assemble(&g)).map(|e| e.lambda1).unwrap_or(f64::NAN);
            (lam, g.max_k())
        }
        Err(_) => (f64::NAN, f64::NAN),
    };
    Ok(FlowTrace {
        fitted_rate: fit_decay_rate(&rows, config.tail_fraction, config.tail_threshold),
        predicted_rate: 2.0 * (lambda1_limit - c),
        rows,
        status,
        message,
        t_final: t,
        steps,
        resamples,
        final_curve: cur,
        snapshots,
        lambda1_limit,
        max_k_final,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{GaussianPlane, RevolutionSurface, Surface};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn radius(c: &DiscreteCurve) -> f64 {
        c.nodes().iter().map(|p| p.x.norm()).sum::<f64>() / c.len() as f64
    }

    /// `ṙ = −1/r + Cr/2` by RK4 at a much finer step.
    fn radius_oracle(r0: f64, cc: f64, t: f64) -> f64 {
        let f = |r: f64| -1.0 / r + cc * r / 2.0;
        let n = 20000;
        let h = t / n as f64;
        let mut r = r0;
        for _ in 0..n {
            let k1 = f(r);
            let k2 = f(r + 0.5 * h * k1);
            let k3 = f(r + 0.5 * h * k2);
            let k4 = f(r + h * k3);
            r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        r
    }

    #[test]
    fn plane_circle_follows_radius_ode() {
        let s: Arc<dyn Surface> = Arc::new(GaussianPlane::new(2.0).unwrap());
        let mut c = DiscreteCurve::circle(s, Vec2::zeros(), 0.9, 64).unwrap();
        let g = compute_geometry(&c).unwrap();
        let dt = stable_dt(&g, &FlowConfig::default());
        let mut t = 0.0;
        while t < 0.1 {
            c = step_curve(&c, dt).unwrap();
            t += dt;
        }
        let exact = radius_oracle(0.9, 2.0, t);
        assert!((radius(&c) - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn stationary_curves_stay_put() {
        let s: Arc<dyn Surface> = Arc::new(RevolutionSurface::round());
        let c = DiscreteCurve::parallel(s, PI / 2.0, 64).unwrap();
        let next = step_curve(&c, 1e-3).unwrap();
        let drift = c.nodes().iter().zip(next.nodes()).map(|(a, b)| (a.x - b.x).norm()).fold(0.0, f64::max);
        assert!(drift < 1e-12);
        let row = diagnostics(0.0, &c, 1e-4).unwrap();
        assert!(row.k_l2 < 1e-20 && row.hol_alpha_k.abs() < 1e-12);
        assert!(row.angle_resid.abs() < 1e-6 && row.dl2_slack.abs() < 1e-6);
    }

    #[test]
    fn decay_rate_fit() {
        let rows: Vec<TraceRow> = (0..100)
            .map(|i| {
                let t = i as f64 * 0.1;
                TraceRow {
                    t,
                    vol_f: 0.0,
                    k_l2: (-1.5 * t).exp(),
                    lambda1: 0.0,
                    max_b: 0.0,
                    max_grad_b: 0.0,
                    hol_alpha_k: 0.0,
                    angle_resid: 0.0,
                    dl2_slack: 0.0,
                    ef_resid: 0.0,
                    vol_rate_resid: 0.0,
                }
            })
            .collect();
        assert!((fit_decay_rate(&rows, 0.3, 1e-3).unwrap() - 1.5).abs() < 1e-10);
        assert!(fit_decay_rate(&rows[..10], 0.3, 1e-3).is_none());
    }

    #[test]
    fn config_validation() {
        assert!(FlowConfig::default().validate().is_ok());
        let bad = FlowConfig { dt_safety: 0.7, ..FlowConfig::default() };
        assert!(bad.validate().is_err());
        let bad = FlowConfig { resample: ResamplePolicy::Ratio(0.5), ..FlowConfig::default() };
        assert!(bad.validate().is_err());
    }
}
