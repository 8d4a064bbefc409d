//! Reference ensembles and default parameter values.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::types::{EnsembleSpec, ModeSpec};
use crate::units::ps_to_fs;

/// Relative mode amplitudes of the five-mode revival model.
pub const COMB_WEIGHTS: [f64; 5] = [1.0 / 3.0, 0.5, 1.0, 0.5, 1.0 / 3.0];
/// Central oscillation period; mode k has period `5.109 + k·0.004` fs.
pub const CARRIER_PERIOD_FS: f64 = 5.109;
pub const COMB_PERIOD_STEP_FS: f64 = 0.004;

/// Dephasing time of the five-mode model at 7.15 kA/cm².
pub const REVIVAL_T2_PS: f64 = 4.64;
/// Collapse time at 7.15 kA/cm².
pub const REVIVAL_T2STAR_PS: f64 = 1.22;
/// Echo and Ramsey time constants at 4.7 kA/cm².
pub const ECHO_T2_PS: f64 = 5.22;
pub const ECHO_T2STAR_PS: f64 = 1.27;
/// Period step of the five-mode comb whose Ramsey collapse, fitted with the
/// default collapse window from 600 fs, gives T₂* ≈ 1.27 ps at T₂ = 5.22 ps.
pub const ECHO_PERIOD_STEP_FS: f64 = 0.00158;

pub const MIN_DELAY_FS: f64 = 600.0;
pub const DEFAULT_AREA_RAD: f64 = std::f64::consts::FRAC_PI_2;

pub const BETA_HOMO: f64 = 0.38;
pub const BETA_INHOMO: f64 = 0.48;
pub const T0_HOMO_K: f64 = 284.0;
pub const T0_INHOMO_K: f64 = 62.0;
pub const ECHO_CURRENT_DENSITY_KA_CM2: f64 = 4.7;
pub const REVIVAL_CURRENT_DENSITY_KA_CM2: f64 = 7.15;

/// Modes with periods `center + k·step`, k symmetric about zero, one per weight.
pub fn comb_ensemble(
    center_period_fs: f64,
    period_step_fs: f64,
    weights: &[f64],
    t2_ps: f64,
) -> Result<EnsembleSpec> {
    let mid = (weights.len() as f64 - 1.0) / 2.0;
    let modes = weights
        .iter()
        .enumerate()
        .map(|(i, &a)| ModeSpec::new(center_period_fs + (i as f64 - mid) * period_step_fs, a, t2_ps))
        .collect::<Result<Vec<_>>>()?;
    EnsembleSpec::new(modes, center_period_fs)
}

/// The five-mode ensemble of the revival model.
pub fn reference_ensemble(t2_ps: f64) -> Result<EnsembleSpec> {
    comb_ensemble(CARRIER_PERIOD_FS, COMB_PERIOD_STEP_FS, &COMB_WEIGHTS, t2_ps)
}

/// Five-mode ensemble with the narrower spread used for the 4.7 kA/cm² preset.
pub fn echo_ensemble(t2_ps: f64) -> Result<EnsembleSpec> {
    comb_ensemble(CARRIER_PERIOD_FS, ECHO_PERIOD_STEP_FS, &COMB_WEIGHTS, t2_ps)
}

/// Lorentzian-weighted comb whose Ramsey contrast decays as
/// `exp(−τ/T₂*)` for delays well below the comb's revival time.
///
/// The inhomogeneous half width is γ = (1/T₂* − 1/T₂)/2π; modes sit on a
/// grid of γ/`modes_per_hwhm` with `n_modes` (odd) channels.
pub fn lorentzian_ensemble(
    t2star_ps: f64,
    t2_ps: f64,
    n_modes: usize,
    modes_per_hwhm: f64,
    reference_period_fs: f64,
) -> Result<EnsembleSpec> {
    if !(t2star_ps > 0.0 && t2star_ps < t2_ps) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < T2* < T2, got T2* = {t2star_ps} ps, T2 = {t2_ps} ps"
        )));
    }
    if n_modes < 3 || n_modes.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("need an odd mode count >= 3, got {n_modes}")));
    }
    if !(modes_per_hwhm > 0.0) {
        return Err(Error::InvalidParameter("modes_per_hwhm must be positive".into()));
    }
    let hwhm = (1.0 / ps_to_fs(t2star_ps) - 1.0 / ps_to_fs(t2_ps)) / TAU;
    let step = hwhm / modes_per_hwhm;
    let half = (n_modes / 2) as i64;
    let modes = (-half..=half)
        .map(|k| {
            let f = k as f64 * step;
            let weight = 1.0 / (1.0 + (f / hwhm).powi(2));
            ModeSpec::new(1.0 / (1.0 / reference_period_fs + f), weight, t2_ps)
        })
        .collect::<Result<Vec<_>>>()?;
    EnsembleSpec::new(modes, reference_period_fs)
}

/// Channel weights over a detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralProfile {
    Flat,
    /// Gaussian lobes (centers and σ in fs⁻¹).
    Lobes { centers_inv_fs: Vec<f64>, heights: Vec<f64>, sigma_inv_fs: f64 },
}

impl SpectralProfile {
    /// Five lobes with the revival-model weights, `spacing` apart.
    pub fn lobes(spacing_inv_fs: f64, sigma_inv_fs: f64) -> Self {
        let centers = (-2..=2).map(|k| k as f64 * spacing_inv_fs).collect();
        SpectralProfile::Lobes {
            centers_inv_fs: centers,
            heights: COMB_WEIGHTS.to_vec(),
            sigma_inv_fs,
        }
    }

    pub fn weight(&self, detuning_inv_fs: f64) -> f64 {
        match self {
            SpectralProfile::Flat => 1.0,
            SpectralProfile::Lobes { centers_inv_fs, heights, sigma_inv_fs } => centers_inv_fs
                .iter()
                .zip(heights)
                .map(|(c, h)| h * (-0.5 * ((detuning_inv_fs - c) / sigma_inv_fs).powi(2)).exp())
                .sum(),
        }
    }
}

/// Smallest weight a channel may carry; far lobe tails are lifted to it
/// so every channel stays a valid mode.
pub const MIN_CHANNEL_WEIGHT: f64 = 1e-12;

/// `n_channels` modes evenly spanning `[−span/2, span/2]` in detuning.
pub fn channel_ensemble(
    n_channels: usize,
    span_inv_fs: f64,
    reference_period_fs: f64,
    profile: &SpectralProfile,
    t2_ps: f64,
) -> Result<EnsembleSpec> {
    if n_channels < 2 || !(span_inv_fs > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need >= 2 channels over a positive span, got {n_channels} over {span_inv_fs}"
        )));
    }
    let modes = (0..n_channels)
        .map(|j| {
            let f = -0.5 * span_inv_fs + span_inv_fs * j as f64 / (n_channels - 1) as f64;
            let weight = profile.weight(f).max(MIN_CHANNEL_WEIGHT);
            ModeSpec::new(1.0 / (1.0 / reference_period_fs + f), weight, t2_ps)
        })
        .collect::<Result<Vec<_>>>()?;
    EnsembleSpec::new(modes, reference_period_fs)
}
