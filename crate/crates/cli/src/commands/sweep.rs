//! `sweep`: T₂ and T₂* along a bias or temperature axis from simulated
//! Ramsey and echo scans, and the scaling laws fitted through them.

use std::path::Path;

use qcr_core::experiments::{
    delay_grid, echo_scan, extract_contrast_with, ramsey_scan, Baseline, CollapseWindow, ContrastOptions,
    ScanConfig,
};
use qcr_core::fitting::{fit_exp_temperature, fit_intensity_decay, fit_power_law, ExpFitOptions};
use qcr_core::presets::{lorentzian_ensemble, MIN_DELAY_FS};
use qcr_core::units::ps_to_fs;
use qcr_core::FitResult;
use serde::Serialize;

use super::{perturb, stream_seed};
use crate::config::{Config, ScanSection, SweepAxis};
use crate::error::CliError;
use crate::output::{columns, write_csv, write_json};

/// Ramsey delays run to 600 fs plus this many T₂*, echo delays to this many T₂.
const RAMSEY_SPAN_T2STAR: f64 = 4.0;
const ECHO_SPAN_T2: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawRecovery {
    pub planted: f64,
    pub fitted: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub axis: &'static str,
    pub reference: f64,
    pub points: Vec<f64>,
    pub planted_t2_ps: Vec<f64>,
    pub planted_t2star_ps: Vec<f64>,
    pub fitted_t2_ps: Vec<f64>,
    pub fitted_t2star_ps: Vec<f64>,
    /// `beta_homo`/`beta_inhomo` for bias, `t0_homo_K`/`t0_inhomo_K` for temperature.
    pub homogeneous: LawRecovery,
    pub inhomogeneous: LawRecovery,
    pub t2_law_fit: FitResult,
    pub t2star_law_fit: FitResult,
}

/// Fitted (T₂, T₂*) of one sweep point.
fn measure_point(config: &Config, index: usize, t2: f64, t2star: f64) -> Result<(f64, f64), CliError> {
    let s = &config.sweep;
    let ensemble = lorentzian_ensemble(t2star, t2, s.n_modes, s.modes_per_hwhm, config.ensemble.reference_period_fs)?;
    let t0 = ensemble.reference_period_fs();
    let scan = ScanConfig::default();
    let noise = ScanSection { noise_rel: s.noise_rel, ..ScanSection::default() };
    let contrast = ContrastOptions { baseline: Baseline::WindowMean, ..ContrastOptions::default() };
    let fit = ExpFitOptions { noise_floor_rel: config.analysis.noise_floor_rel };
    let seed = |stream: u64| stream_seed(config.seed, 2 * index as u64 + stream);

    let delays = delay_grid(MIN_DELAY_FS, MIN_DELAY_FS + ps_to_fs(RAMSEY_SPAN_T2STAR * t2star), s.step_fs)?;
    let trace = perturb(&ramsey_scan(&ensemble, &scan, &delays)?, &noise, seed(0))?;
    let env = extract_contrast_with(&trace, t0, &contrast)?;
    // a recovery smaller than the noise is not the end of the collapse
    let window = CollapseWindow {
        min_rise_rel: config.analysis.collapse_min_rise.max(5.0 * s.noise_rel),
        stop_below_rel: config.analysis.collapse_stop_below,
    };
    let t2star_fit = fit_intensity_decay(&window.apply(&env), 2, 1.0, &fit)?;

    let delays = delay_grid(MIN_DELAY_FS, MIN_DELAY_FS + ps_to_fs(ECHO_SPAN_T2 * t2), s.step_fs)?;
    let trace = perturb(&echo_scan(&ensemble, &scan, &delays)?, &noise, seed(1))?;
    let env = extract_contrast_with(&trace, t0, &contrast)?;
    let t2_fit = fit_intensity_decay(&env, 4, 0.5, &fit)?;
    Ok((t2_fit.param("tau_ps").expect("tau_ps"), t2star_fit.param("tau_ps").expect("tau_ps")))
}

fn recovery(planted: f64, fitted: f64) -> LawRecovery {
    LawRecovery { planted, fitted, relative_error: (fitted - planted).abs() / planted }
}

pub fn run(config: &Config, out: &Path) -> Result<SweepSummary, CliError> {
    let s = &config.sweep;
    let points = s.points();
    if points.len() < 3 {
        return Err(CliError::Config(format!("a sweep needs at least 3 points, got {}", points.len())));
    }
    if points.windows(2).any(|p| !(p[1] > p[0])) || points.iter().any(|p| !p.is_finite()) {
        return Err(CliError::Config("sweep points must be finite and increasing".into()));
    }
    if s.axis == SweepAxis::Bias && points[0] <= 0.0 {
        return Err(CliError::Config("bias points must be positive".into()));
    }
    let planted: Vec<(f64, f64)> = points.iter().map(|&x| s.planted(x)).collect();
    let mut fitted = Vec::with_capacity(points.len());
    for (i, &(t2, t2star)) in planted.iter().enumerate() {
        fitted.push(measure_point(config, i, t2, t2star)?);
    }
    let fitted_t2: Vec<f64> = fitted.iter().map(|f| f.0).collect();
    let fitted_t2star: Vec<f64> = fitted.iter().map(|f| f.1).collect();

    let (axis, homogeneous, inhomogeneous, t2_law_fit, t2star_law_fit) = match s.axis {
        SweepAxis::Bias => {
            let a = fit_power_law(&points, &fitted_t2)?;
            let b = fit_power_law(&points, &fitted_t2star)?;
            let h = recovery(s.beta_homo, a.param("beta").expect("beta"));
            let i = recovery(s.beta_inhomo, b.param("beta").expect("beta"));
            ("bias", h, i, a, b)
        }
        SweepAxis::Temperature => {
            let a = fit_exp_temperature(&points, &fitted_t2)?;
            let b = fit_exp_temperature(&points, &fitted_t2star)?;
            let h = recovery(s.t0_homo_k, a.param("t0_K").expect("t0_K"));
            let i = recovery(s.t0_inhomo_k, b.param("t0_K").expect("t0_K"));
            ("temperature", h, i, a, b)
        }
    };

    let rows = (0..points.len()).map(|i| [points[i], fitted_t2[i], fitted_t2star[i]]);
    write_csv(&out.join("sweep.csv"), &columns(&["x", "T2_ps", "T2star_ps"]), rows)?;
    let summary = SweepSummary {
        axis,
        reference: s.reference(),
        points,
        planted_t2_ps: planted.iter().map(|p| p.0).collect(),
        planted_t2star_ps: planted.iter().map(|p| p.1).collect(),
        fitted_t2_ps: fitted_t2,
        fitted_t2star_ps: fitted_t2star,
        homogeneous,
        inhomogeneous,
        t2_law_fit,
        t2star_law_fit,
    };
    write_json(&out.join("sweep_summary.json"), &summary)?;
    Ok(summary)
}
