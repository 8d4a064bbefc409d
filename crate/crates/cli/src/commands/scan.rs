//! `ramsey` and `echo`: virtual delay scans and their contrast analysis.

use std::path::Path;

use qcr_core::analytic::{full_revival_period_fs, normalized_envelope, revival_times};
use qcr_core::experiments::{
    analyze_revivals, delay_grid, echo_scan, extract_contrast_with, ramsey_scan, Baseline, CollapseWindow,
    ContrastOptions,
};
use qcr_core::fitting::{fit_intensity_decay, ExpFitOptions};
use qcr_core::{ContrastEnvelope, EnsembleSpec, FitResult, FringeTrace};
use serde::Serialize;

use super::{perturb, stream_seed};
use crate::config::Config;
use crate::error::CliError;
use crate::output::{columns, write_csv, write_json};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakRow {
    pub time_fs: f64,
    pub height: f64,
    pub compensated_height: f64,
    pub order: usize,
    pub kind: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevivalSummary {
    pub full_period_fs: f64,
    pub closed_form_times_fs: Vec<f64>,
    pub n_revival_peaks: usize,
    pub peaks: Vec<PeakRow>,
    pub unmatched_peak_times_fs: Vec<f64>,
    pub t2_ps: f64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamseySummary {
    pub carrier_period_fs: f64,
    pub n_delays: usize,
    pub n_windows: usize,
    /// RMS distance of the contrast from the closed-form envelope, when all
    /// modes share one T₂.
    pub closed_form_rms: Option<f64>,
    pub revivals: Option<RevivalSummary>,
    pub t2star_ps: Option<f64>,
    pub t2star_fit: Option<FitResult>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EchoSummary {
    pub carrier_period_fs: f64,
    pub n_delays: usize,
    pub n_windows: usize,
    pub t2_ps: Option<f64>,
    pub t2_fit: Option<FitResult>,
    pub contrast_mean: f64,
    pub contrast_relative_variance: f64,
    pub notes: Vec<String>,
}

fn contrast_options(config: &Config) -> ContrastOptions {
    let baseline = match config.analysis.baseline {
        Some(b) => Baseline::Constant(b),
        None => Baseline::WindowMean,
    };
    ContrastOptions { baseline, ..ContrastOptions::default() }
}

fn fit_options(config: &Config) -> ExpFitOptions {
    ExpFitOptions { noise_floor_rel: config.analysis.noise_floor_rel }
}

fn uniform_t2(ensemble: &EnsembleSpec) -> Option<f64> {
    let t2 = ensemble.modes()[0].t2_ps();
    ensemble.modes().iter().all(|m| m.t2_ps() == t2 && m.t1_ps().is_infinite()).then_some(t2)
}

fn write_trace(out: &Path, name: &str, trace: &FringeTrace, env: &ContrastEnvelope) -> Result<(), CliError> {
    let rows = trace
        .delays_fs()
        .iter()
        .zip(trace.signal())
        .map(|(&t, &s)| [t, s, env.interpolate(t)]);
    write_csv(&out.join(format!("{name}.csv")), &columns(&["delay_fs", "signal", "contrast"]), rows)?;
    let rows = env.delays_fs().iter().zip(env.contrast()).map(|(&t, &c)| [t, c]);
    write_csv(&out.join(format!("{name}_contrast.csv")), &columns(&["delay_fs", "contrast"]), rows)
}

/// Scan, optional readout noise, and contrast extraction.
fn scan_and_extract(
    config: &Config,
    ensemble: &EnsembleSpec,
    echo: bool,
) -> Result<(FringeTrace, ContrastEnvelope), CliError> {
    let s = &config.scan;
    let delays = delay_grid(s.start_fs, s.stop_fs, s.step_fs)?;
    let scan_config = s.scan_config();
    let trace = if echo {
        echo_scan(ensemble, &scan_config, &delays)?
    } else {
        ramsey_scan(ensemble, &scan_config, &delays)?
    };
    let trace = perturb(&trace, s, stream_seed(config.seed, echo as u64))?;
    let env = extract_contrast_with(&trace, ensemble.reference_period_fs(), &contrast_options(config))?;
    if env.is_empty() {
        return Err(CliError::Config("scan range holds no complete carrier period".into()));
    }
    Ok((trace, env))
}

fn revival_summary(
    config: &Config,
    ensemble: &EnsembleSpec,
    env: &ContrastEnvelope,
) -> qcr_core::Result<RevivalSummary> {
    let period = full_revival_period_fs(ensemble)?;
    let horizon = env.delays_fs()[env.len() - 1];
    let closed_form = revival_times(ensemble, horizon)?;
    let a = analyze_revivals(env, period, config.analysis.min_prominence)?;
    Ok(RevivalSummary {
        full_period_fs: period,
        closed_form_times_fs: closed_form
            .iter()
            .filter(|r| r.time_fs >= env.delays_fs()[0])
            .map(|r| r.time_fs)
            .collect(),
        n_revival_peaks: a.peaks.len(),
        peaks: a
            .peaks
            .iter()
            .map(|p| PeakRow {
                time_fs: p.time_fs,
                height: p.height,
                compensated_height: p.compensated_height,
                order: p.order,
                kind: p.kind.as_str(),
            })
            .collect(),
        unmatched_peak_times_fs: a.unmatched.iter().map(|p| p.time_fs).collect(),
        t2_ps: a.t2_ps,
        fit: a.fit,
    })
}

pub fn ramsey(config: &Config, out: &Path) -> Result<RamseySummary, CliError> {
    let ensemble = config.ensemble.build()?;
    let (trace, env) = scan_and_extract(config, &ensemble, false)?;
    write_trace(out, "ramsey", &trace, &env)?;

    let mut notes = Vec::new();
    let closed_form_rms = uniform_t2(&ensemble).map(|t2| {
        let ss: f64 = env
            .delays_fs()
            .iter()
            .zip(env.contrast())
            .map(|(&t, &c)| (c - normalized_envelope(t, &ensemble, t2)).powi(2))
            .sum();
        (ss / env.len() as f64).sqrt()
    });
    let revivals = if ensemble.len() < 2 {
        None
    } else {
        revival_summary(config, &ensemble, &env)
            .map_err(|e| notes.push(format!("revival analysis: {e}")))
            .ok()
    };
    let window = CollapseWindow {
        min_rise_rel: config.analysis.collapse_min_rise,
        stop_below_rel: config.analysis.collapse_stop_below,
    };
    let t2star_fit = fit_intensity_decay(&window.apply(&env), 2, 1.0, &fit_options(config))
        .map_err(|e| notes.push(format!("T2* fit: {e}")))
        .ok();
    let summary = RamseySummary {
        carrier_period_fs: ensemble.reference_period_fs(),
        n_delays: trace.len(),
        n_windows: env.len(),
        closed_form_rms,
        revivals,
        t2star_ps: t2star_fit.as_ref().and_then(|f| f.param("tau_ps")),
        t2star_fit,
        notes,
    };
    write_json(&out.join("ramsey_summary.json"), &summary)?;
    Ok(summary)
}

pub fn echo(config: &Config, out: &Path) -> Result<EchoSummary, CliError> {
    let ensemble = config.ensemble.build()?;
    let (trace, env) = scan_and_extract(config, &ensemble, true)?;
    write_trace(out, "echo", &trace, &env)?;

    let mut notes = Vec::new();
    let t2_fit = fit_intensity_decay(&env, 4, 0.5, &fit_options(config))
        .map_err(|e| notes.push(format!("T2 fit: {e}")))
        .ok();
    let c = env.contrast();
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / c.len() as f64;
    let summary = EchoSummary {
        carrier_period_fs: ensemble.reference_period_fs(),
        n_delays: trace.len(),
        n_windows: env.len(),
        t2_ps: t2_fit.as_ref().and_then(|f| f.param("tau_ps")),
        t2_fit,
        contrast_mean: mean,
        contrast_relative_variance: if mean > 0.0 { var / (mean * mean) } else { 0.0 },
        notes,
    };
    write_json(&out.join("echo_summary.json"), &summary)?;
    Ok(summary)
}
