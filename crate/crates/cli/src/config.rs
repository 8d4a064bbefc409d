//! Run configuration: a TOML document with one table per command.
//!
//! A preset supplies the starting document, a config file is merged over
//! it key by key, and missing keys fall back to the built-in defaults.

use std::path::Path;

use clap::ValueEnum;
use qcr_core::presets::{
    self, BETA_HOMO, BETA_INHOMO, REVIVAL_T2_PS, ECHO_CURRENT_DENSITY_KA_CM2, ECHO_T2STAR_PS, ECHO_T2_PS,
    MIN_DELAY_FS, CARRIER_PERIOD_FS, COMB_PERIOD_STEP_FS, COMB_WEIGHTS, T0_HOMO_K, T0_INHOMO_K,
};
use qcr_core::EnsembleSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Five-mode ensemble with T₂ = 4.64 ps, delays 0.6 to 15 ps.
    #[value(name = "paper-fig2")]
    Revival,
    /// Narrower comb with T₂ = 5.22 ps for the Ramsey/echo comparison.
    #[value(name = "paper-fig4")]
    Echo,
    /// Bias sweep with the default scaling exponents.
    #[value(name = "paper-fig5")]
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct Config {
    pub seed: u64,
    pub ensemble: EnsembleConfig,
    pub scan: ScanSection,
    pub analysis: AnalysisConfig,
    pub analytic: AnalyticConfig,
    pub propagate: PropagateConfig,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    /// Evenly stepped periods around `center_period_fs`.
    Comb,
    /// Periods listed in `periods_fs`.
    Explicit,
    /// Lorentzian-weighted comb with the inhomogeneous width of `t2star_ps`.
    Lorentzian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub kind: EnsembleKind,
    pub center_period_fs: f64,
    pub period_step_fs: f64,
    pub weights: Vec<f64>,
    pub periods_fs: Vec<f64>,
    pub reference_period_fs: f64,
    pub t2_ps: f64,
    pub t1_ps: f64,
    pub equilibrium_inversion: f64,
    pub t2star_ps: f64,
    pub n_modes: usize,
    pub modes_per_hwhm: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            kind: EnsembleKind::Comb,
            center_period_fs: CARRIER_PERIOD_FS,
            period_step_fs: COMB_PERIOD_STEP_FS,
            weights: COMB_WEIGHTS.to_vec(),
            periods_fs: Vec::new(),
            reference_period_fs: CARRIER_PERIOD_FS,
            t2_ps: REVIVAL_T2_PS,
            t1_ps: f64::INFINITY,
            equilibrium_inversion: -1.0,
            t2star_ps: ECHO_T2STAR_PS,
            n_modes: 101,
            modes_per_hwhm: 5.0,
        }
    }
}

impl EnsembleConfig {
    pub fn build(&self) -> qcr_core::Result<EnsembleSpec> {
        let base = match self.kind {
            EnsembleKind::Comb => {
                let e = presets::comb_ensemble(self.center_period_fs, self.period_step_fs, &self.weights, self.t2_ps)?;
                EnsembleSpec::new(e.modes().to_vec(), self.reference_period_fs)?
            }
            EnsembleKind::Explicit => {
                if self.periods_fs.len() != self.weights.len() {
                    return Err(qcr_core::Error::InvalidParameter(format!(
                        "{} periods but {} weights",
                        self.periods_fs.len(),
                        self.weights.len()
                    )));
                }
                let modes = self
                    .periods_fs
                    .iter()
                    .zip(&self.weights)
                    .map(|(&p, &a)| qcr_core::ModeSpec::new(p, a, self.t2_ps))
                    .collect::<qcr_core::Result<Vec<_>>>()?;
                EnsembleSpec::new(modes, self.reference_period_fs)?
            }
            EnsembleKind::Lorentzian => presets::lorentzian_ensemble(
                self.t2star_ps,
                self.t2_ps,
                self.n_modes,
                self.modes_per_hwhm,
                self.reference_period_fs,
            )?,
        };
        let modes = base
            .modes()
            .iter()
            .map(|m| qcr_core::ModeSpec::with_t1(m.period_fs(), m.weight(), m.t2_ps(), self.t1_ps))
            .collect::<qcr_core::Result<Vec<_>>>()?;
        EnsembleSpec::new(modes, base.reference_period_fs())?.with_equilibrium_inversion(self.equilibrium_inversion)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseKind {
    Delta,
    Gaussian,
    Sech,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub start_fs: f64,
    pub stop_fs: f64,
    pub step_fs: f64,
    pub min_delay_fs: f64,
    pub area_rad: f64,
    pub pulse: PulseKind,
    pub fwhm_fs: f64,
    pub dt_fs: f64,
    /// Standard deviation of additive Gaussian noise on the readout.
    pub noise_std: f64,
    /// Relative standard deviation of multiplicative Gaussian noise.
    pub noise_rel: f64,
    /// Linear baseline drift added to the readout, per ps of delay.
    pub drift_per_ps: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            start_fs: MIN_DELAY_FS,
            stop_fs: 15_000.0,
            step_fs: 0.5,
            min_delay_fs: MIN_DELAY_FS,
            area_rad: std::f64::consts::FRAC_PI_2,
            pulse: PulseKind::Delta,
            fwhm_fs: 90.0,
            dt_fs: 4.0,
            noise_std: 0.0,
            noise_rel: 0.0,
            drift_per_ps: 0.0,
        }
    }
}

impl ScanSection {
    pub fn scan_config(&self) -> qcr_core::experiments::ScanConfig {
        use qcr_core::experiments::{PulseShape, ScanConfig};
        let envelope = match self.pulse {
            PulseKind::Delta => None,
            PulseKind::Gaussian => Some(qcr_core::Envelope::Gaussian),
            PulseKind::Sech => Some(qcr_core::Envelope::Sech),
        };
        let shape = match envelope {
            None => PulseShape::Delta,
            Some(envelope) => PulseShape::Finite { envelope, fwhm_fs: self.fwhm_fs, dt_fs: self.dt_fs },
        };
        ScanConfig { area_rad: self.area_rad, shape, min_delay_fs: self.min_delay_fs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub min_prominence: f64,
    pub noise_floor_rel: f64,
    pub collapse_min_rise: f64,
    pub collapse_stop_below: f64,
    /// Contrast baseline; `None` uses the mean of each carrier-period window.
    pub baseline: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            min_prominence: 0.05,
            noise_floor_rel: 1e-3,
            collapse_min_rise: 0.01,
            collapse_stop_below: 0.05,
            baseline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticConfig {
    pub start_fs: f64,
    pub stop_fs: f64,
    pub step_fs: f64,
    /// Overrides the ensemble T₂ when set.
    pub t2_ps: Option<f64>,
}

impl Default for AnalyticConfig {
    fn default() -> Self {
        Self { start_fs: 0.0, stop_fs: 15_000.0, step_fs: 0.5, t2_ps: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Flat,
    Lobes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagateConfig {
    pub delay_fs: f64,
    pub z_steps: usize,
    pub gain_per_step: f64,
    pub area_rad: f64,
    pub channels: usize,
    pub span_inv_fs: f64,
    pub profile: ProfileKind,
    pub lobe_spacing_inv_fs: f64,
    pub lobe_sigma_inv_fs: f64,
    pub t2_ps: f64,
    pub min_prominence: f64,
}

impl Default for PropagateConfig {
    fn default() -> Self {
        Self {
            delay_fs: 1000.0,
            z_steps: 8,
            gain_per_step: 1.05,
            area_rad: 0.5,
            channels: 2048,
            span_inv_fs: 0.036,
            profile: ProfileKind::Lobes,
            lobe_spacing_inv_fs: 6e-3,
            lobe_sigma_inv_fs: 1.5e-3,
            t2_ps: f64::INFINITY,
            min_prominence: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Injection current density (kA/cm²); power laws.
    Bias,
    /// Temperature (K); exponential laws.
    Temperature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    /// Sweep points; empty selects the axis default.
    pub points: Vec<f64>,
    /// Point where the time constants equal the reference values.
    pub reference: Option<f64>,
    pub t2_ref_ps: f64,
    pub t2star_ref_ps: f64,
    pub beta_homo: f64,
    pub beta_inhomo: f64,
    pub t0_homo_k: f64,
    pub t0_inhomo_k: f64,
    /// Relative standard deviation of multiplicative noise on each trace.
    pub noise_rel: f64,
    pub n_modes: usize,
    pub modes_per_hwhm: f64,
    pub step_fs: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            axis: SweepAxis::Bias,
            points: Vec::new(),
            reference: None,
            t2_ref_ps: ECHO_T2_PS,
            t2star_ref_ps: ECHO_T2STAR_PS,
            beta_homo: BETA_HOMO,
            beta_inhomo: BETA_INHOMO,
            t0_homo_k: T0_HOMO_K,
            t0_inhomo_k: T0_INHOMO_K,
            noise_rel: 0.0,
            n_modes: 101,
            modes_per_hwhm: 5.0,
            step_fs: 0.5,
        }
    }
}

impl SweepConfig {
    pub fn points(&self) -> Vec<f64> {
        if !self.points.is_empty() {
            return self.points.clone();
        }
        match self.axis {
            SweepAxis::Bias => vec![2.5, 3.5, 4.7, 6.0, 7.5],
            SweepAxis::Temperature => vec![260.0, 280.0, 300.0, 320.0, 340.0],
        }
    }

    pub fn reference(&self) -> f64 {
        self.reference.unwrap_or(match self.axis {
            SweepAxis::Bias => ECHO_CURRENT_DENSITY_KA_CM2,
            SweepAxis::Temperature => 300.0,
        })
    }

    /// Planted (T₂, T₂*) in ps at sweep coordinate `x`.
    pub fn planted(&self, x: f64) -> (f64, f64) {
        let r = self.reference();
        match self.axis {
            SweepAxis::Bias => (
                self.t2_ref_ps * (x / r).powf(-self.beta_homo),
                self.t2star_ref_ps * (x / r).powf(-self.beta_inhomo),
            ),
            SweepAxis::Temperature => (
                self.t2_ref_ps * (-(x - r) / self.t0_homo_k).exp(),
                self.t2star_ref_ps * (-(x - r) / self.t0_inhomo_k).exp(),
            ),
        }
    }
}


impl Config {
    pub fn preset(preset: Preset) -> Self {
        let mut c = Config::default();
        match preset {
            Preset::Revival => {}
            Preset::Echo => {
                c.ensemble.period_step_fs = presets::ECHO_PERIOD_STEP_FS;
                c.ensemble.t2_ps = ECHO_T2_PS;
                c.scan.stop_fs = 8_000.0;
            }
            Preset::Sweep => {
                c.sweep.axis = SweepAxis::Bias;
            }
        }
        c
    }

    /// Preset (or defaults) with the TOML document `text` merged on top.
    pub fn from_toml_over(base: &Config, text: &str) -> Result<Config, CliError> {
        let overlay: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        let mut merged = toml::Table::try_from(base).map_err(|e| CliError::Config(e.to_string()))?;
        merge(&mut merged, overlay);
        toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    pub fn load(preset: Option<Preset>, path: Option<&Path>) -> Result<Config, CliError> {
        let base = preset.map(Config::preset).unwrap_or_default();
        match path {
            None => Ok(base),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Config::from_toml_over(&base, &text).map_err(|e| match e {
                    CliError::Config(msg) => CliError::Config(format!("{}: {msg}", p.display())),
                    other => other,
                })
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
