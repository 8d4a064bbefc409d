//! `propagate`: inversion and coherence maps over (slice, detuning).

use std::path::Path;

use qcr_core::presets::{channel_ensemble, SpectralProfile};
use qcr_core::propagate::{propagate_map, PropagationConfig};
use serde::Serialize;

use crate::config::{Config, ProfileKind};
use crate::error::CliError;
use crate::output::{number, write_csv, write_json};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagateSummary {
    pub delay_fs: f64,
    pub z_steps: usize,
    pub channels: usize,
    pub slice_areas_rad: Vec<f64>,
    /// 1/τ, absent at zero delay.
    pub expected_spacing_inv_fs: Option<f64>,
    pub fringe_spacing_inv_fs: Option<f64>,
    pub fringe_count: usize,
    pub dominant_coherence_maxima_inv_fs: Vec<f64>,
}

pub fn run(config: &Config, out: &Path) -> Result<PropagateSummary, CliError> {
    let p = &config.propagate;
    let profile = match p.profile {
        ProfileKind::Flat => SpectralProfile::Flat,
        ProfileKind::Lobes => SpectralProfile::lobes(p.lobe_spacing_inv_fs, p.lobe_sigma_inv_fs),
    };
    let ensemble =
        channel_ensemble(p.channels, p.span_inv_fs, config.ensemble.reference_period_fs, &profile, p.t2_ps)?;
    let cfg = PropagationConfig {
        delay_fs: p.delay_fs,
        z_steps: p.z_steps,
        gain_per_step: p.gain_per_step,
        area_rad: p.area_rad,
    };
    let map = propagate_map(&ensemble, &cfg)?;

    let mut header = vec!["z".to_string()];
    header.extend(map.detunings_inv_fs().iter().map(|&d| number(d)));
    let with_z = |rows: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        rows.into_iter()
            .enumerate()
            .map(|(z, r)| std::iter::once(z as f64).chain(r).collect())
            .collect()
    };
    write_csv(&out.join("propagate_inversion.csv"), &header, with_z(map.normalized_inversion()))?;
    write_csv(&out.join("propagate_coherence.csv"), &header, with_z(map.normalized_coherence()))?;

    let summary = PropagateSummary {
        delay_fs: p.delay_fs,
        z_steps: p.z_steps,
        channels: p.channels,
        slice_areas_rad: map.slice_areas().to_vec(),
        expected_spacing_inv_fs: (p.delay_fs > 0.0).then(|| 1.0 / p.delay_fs),
        fringe_spacing_inv_fs: map.fringe_spacing(),
        fringe_count: map.fringe_count(),
        dominant_coherence_maxima_inv_fs: map.dominant_coherence_maxima(p.min_prominence),
    };
    write_json(&out.join("propagate_summary.json"), &summary)?;
    Ok(summary)
}
