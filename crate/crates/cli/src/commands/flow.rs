//! `flow`: one trajectory of the curve flow with its diagnostic trace.

use std::path::Path;

use glmcf_core::flow::{run_flow, FlowConfig, FlowTrace, ResamplePolicy, Status, TraceRow};
use glmcf_core::immersion::DiscreteCurve;
use serde::Serialize;

use crate::config::Config;
use crate::output::{csv, num, write_json, write_text};
use crate::setup::{initial_curve, model_name};
use crate::RunError;

pub fn flow_config(cfg: &Config) -> Result<FlowConfig, RunError> {
    let d = FlowConfig::default();
    let resample = match cfg.get_or::<String>("resample", "ratio".into())?.as_str() {
        "never" => ResamplePolicy::Never,
        "always" => ResamplePolicy::Always,
        "ratio" => ResamplePolicy::Ratio(cfg.get_or("resample_ratio", 3.0)?),
        other => return Err(RunError::validation(format!("unknown resample policy '{other}'"))),
    };
    let config = FlowConfig {
        dt_safety: cfg.get_or("dt_safety", d.dt_safety)?,
        dt_cap: cfg.get_or("dt_cap", d.dt_cap)?,
        max_time: cfg.get_or("max_time", d.max_time)?,
        stop_tol: cfg.get_or("stop_tol", d.stop_tol)?,
        resample,
        sample_interval: cfg.get_or("sample_interval", d.sample_interval)?,
        tail_fraction: cfg.get_or("tail_fraction", d.tail_fraction)?,
        tail_threshold: cfg.get_or("tail_threshold", d.tail_threshold)?,
        probe_fraction: cfg.get_or("probe_fraction", d.probe_fraction)?,
        diagnostics: cfg.get_or("diagnostics", d.diagnostics)?,
        snapshot_times: cfg.list("snapshot_times")?.unwrap_or_default(),
    };
    config.validate()?;
    Ok(config)
}

#[derive(Serialize)]
struct SnapshotHeader<'a> {
    model: &'a str,
    #[serde(rename = "N")]
    n: usize,
    time: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    status: Status,
    message: Option<&'a str>,
    model: &'a str,
    nodes: usize,
    #[serde(rename = "C")]
    c: f64,
    t_final: f64,
    steps: usize,
    resamples: usize,
    samples: usize,
    lambda1_limit: f64,
    max_k_final: f64,
    fitted_rate: Option<f64>,
    predicted_rate: f64,
    /// Largest increase of `Vol_f` between consecutive samples; `≤ 0` when monotone.
    max_vol_increase: f64,
    max_abs_holonomy: f64,
    max_angle_resid: Option<f64>,
    /// `min dl2_slack / ∫|K|²` over samples with `∫|K|² > 0`.
    min_dl2_slack_relative: Option<f64>,
    max_ef_resid: Option<f64>,
    /// `max |d/dt Vol_f + ∫|K|²|` relative to the initial `∫|K|²`.
    max_vol_rate_resid_relative: Option<f64>,
}

fn finite_max(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.filter(|v| v.is_finite()).reduce(f64::max)
}

fn write_curve(dir: &Path, stem: &str, model: &str, time: f64, curve: &DiscreteCurve) -> Result<(), RunError> {
    write_text(dir, &format!("{stem}.csv"), &curve.to_csv())?;
    write_json(dir, &format!("{stem}.json"), &SnapshotHeader { model, n: curve.len(), time })
}

fn summarize<'a>(trace: &'a FlowTrace, model: &'a str, nodes: usize, c: f64) -> Summary<'a> {
    let rows = &trace.rows;
    let k0 = rows.first().map_or(f64::NAN, |r| r.k_l2);
    Summary {
        status: trace.status,
        message: trace.message.as_deref(),
        model,
        nodes,
        c,
        t_final: trace.t_final,
        steps: trace.steps,
        resamples: trace.resamples,
        samples: rows.len(),
        lambda1_limit: trace.lambda1_limit,
        max_k_final: trace.max_k_final,
        fitted_rate: trace.fitted_rate,
        predicted_rate: trace.predicted_rate,
        max_vol_increase: rows.windows(2).map(|w| w[1].vol_f - w[0].vol_f).fold(f64::NEG_INFINITY, f64::max),
        max_abs_holonomy: rows.iter().map(|r| r.hol_alpha_k.abs()).fold(0.0, f64::max),
        max_angle_resid: finite_max(rows.iter().map(|r| r.angle_resid)),
        min_dl2_slack_relative: rows
            .iter()
            .filter(|r| r.k_l2 > 0.0 && r.dl2_slack.is_finite())
            .map(|r| r.dl2_slack / r.k_l2)
            .reduce(f64::min),
        max_ef_resid: finite_max(rows.iter().map(|r| r.ef_resid)),
        max_vol_rate_resid_relative: finite_max(rows.iter().map(|r| r.vol_rate_resid.abs() / k0)),
    }
}

pub fn run(cfg: &Config, dir: &Path) -> Result<String, RunError> {
    let config = flow_config(cfg)?;
    let model = model_name(cfg)?;
    let initial = initial_curve(cfg)?;
    let c = initial.surface().einstein_constant();
    let trace = run_flow(&initial, &config)?;

    let rows = trace.rows.iter().map(|r: &TraceRow| r.csv_fields().iter().map(|&v| num(v)).collect());
    write_text(dir, "trace.csv", &csv(TraceRow::CSV_HEADER, rows, ","))?;
    for (k, (t, curve)) in trace.snapshots.iter().enumerate() {
        write_curve(dir, &format!("snapshot_{k:03}"), &model, *t, curve)?;
    }
    write_curve(dir, "final", &model, trace.t_final, &trace.final_curve)?;
    let summary = summarize(&trace, &model, initial.len(), c);
    write_json(dir, "summary.json", &summary)?;

    let line = format!(
        "status={} t={} steps={} lambda1_limit={} fitted_rate={} predicted_rate={}",
        trace.status.as_str(),
        trace.t_final,
        trace.steps,
        trace.lambda1_limit,
        trace.fitted_rate.map_or("none".to_string(), |r| r.to_string()),
        trace.predicted_rate
    );
    match trace.status {
        Status::Blowup | Status::Error => {
            Err(RunError::numerical(format!("{}: {}", trace.status.as_str(), trace.message.as_deref().unwrap_or(""))))
        }
        Status::Converged | Status::MaxTime => Ok(line),
    }
}
