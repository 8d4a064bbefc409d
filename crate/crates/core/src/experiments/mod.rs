//! Virtual Ramsey and Ramsey-echo delay scans over an ensemble, and the
//! analysis chain that turns a fringe trace into time constants.
//!
//! The delay scan is done in the lab frame: a pulse arriving τ later
//! carries the carrier phase −2πτ/t₀, so every mode fringes at its own
//! transition period. The rephasing pulse of the echo is phase-locked to
//! the first pulse, which leaves fringes at the carrier period whose
//! contrast carries only the homogeneous decay.

mod contrast;
mod peaks;

pub use contrast::{extract_contrast, extract_contrast_with, Baseline, ContrastOptions};
pub use peaks::{analyze_revivals, find_revival_peaks, Peak, RevivalAnalysis, RevivalPeak};
pub(crate) use peaks::prominent_maxima;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;

use crate::bloch::{run_sequence, Damping};
use crate::error::{Error, Result};
use crate::fitting::{fit_intensity_decay, ExpFitOptions};
use crate::presets::{DEFAULT_AREA_RAD, MIN_DELAY_FS};
use crate::types::{BlochState, ContrastEnvelope, EnsembleSpec, Envelope, FitResult, FringeTrace, PulseSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    Delta,
    /// Integrated with RK4 at steps no longer than `dt_fs`.
    Finite { envelope: Envelope, fwhm_fs: f64, dt_fs: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Area of each Ramsey pulse.
    pub area_rad: f64,
    pub shape: PulseShape,
    pub min_delay_fs: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { area_rad: DEFAULT_AREA_RAD, shape: PulseShape::Delta, min_delay_fs: MIN_DELAY_FS }
    }
}

impl ScanConfig {
    fn pulse(&self, area_rad: f64, arrival_fs: f64, phase_rad: f64) -> PulseSpec {
        match self.shape {
            PulseShape::Delta => PulseSpec::delta(area_rad, arrival_fs, phase_rad),
            PulseShape::Finite { envelope, fwhm_fs, .. } => {
                PulseSpec::shaped(envelope, fwhm_fs, area_rad, arrival_fs, phase_rad)
            }
        }
    }

    fn dt_fs(&self) -> f64 {
        match self.shape {
            PulseShape::Delta => f64::INFINITY,
            PulseShape::Finite { dt_fs, .. } => dt_fs,
        }
    }
}

/// Carrier phase of a pulse delayed by `delay_fs` in the lab frame.
pub fn delay_phase(delay_fs: f64, carrier_period_fs: f64) -> f64 {
    -TAU * delay_fs / carrier_period_fs
}

pub fn ramsey_sequence(config: &ScanConfig, delay_fs: f64, carrier_period_fs: f64) -> Vec<PulseSpec> {
    vec![
        config.pulse(config.area_rad, 0.0, 0.0),
        config.pulse(config.area_rad, delay_fs, delay_phase(delay_fs, carrier_period_fs)),
    ]
}

/// π/2 at 0, π at τ/2 (phase-locked to the first pulse), π/2 at τ.
pub fn echo_sequence(config: &ScanConfig, delay_fs: f64, carrier_period_fs: f64) -> Vec<PulseSpec> {
    vec![
        config.pulse(FRAC_PI_2, 0.0, 0.0),
        config.pulse(PI, 0.5 * delay_fs, 0.0),
        config.pulse(FRAC_PI_2, delay_fs, delay_phase(delay_fs, carrier_period_fs)),
    ]
}

/// Final Bloch state of every mode after `pulses`, starting from the ground state.
pub fn mode_states(
    ensemble: &EnsembleSpec,
    pulses: &[PulseSpec],
    dt_fs: f64,
) -> Result<Vec<BlochState>> {
    ensemble
        .modes()
        .iter()
        .map(|m| {
            let damping = Damping::for_mode(m, ensemble);
            run_sequence(BlochState::GROUND, pulses, ensemble.detuning(m), &damping, dt_fs)
        })
        .collect()
}

fn weighted_inversion(ensemble: &EnsembleSpec, states: &[BlochState]) -> f64 {
    let sum: f64 = ensemble.modes().iter().zip(states).map(|(m, s)| m.weight() * s.w).sum();
    sum / ensemble.total_weight()
}

fn check_delays(delays_fs: &[f64], min_delay_fs: f64) -> Result<()> {
    if delays_fs.is_empty() {
        return Err(Error::EmptyDelays);
    }
    if let Some(i) = delays_fs.windows(2).position(|d| !(d[1] > d[0])) {
        return Err(Error::UnorderedDelays(i + 1));
    }
    if delays_fs[0] < min_delay_fs {
        return Err(Error::DelayBelowMinimum { delay_fs: delays_fs[0], min_fs: min_delay_fs });
    }
    Ok(())
}

fn scan(
    ensemble: &EnsembleSpec,
    config: &ScanConfig,
    delays_fs: &[f64],
    sequence: impl Fn(&ScanConfig, f64, f64) -> Vec<PulseSpec> + Sync,
) -> Result<FringeTrace> {
    check_delays(delays_fs, config.min_delay_fs)?;
    let t0 = ensemble.reference_period_fs();
    let signal = delays_fs
        .par_iter()
        .map(|&tau| {
            let pulses = sequence(config, tau, t0);
            let states = mode_states(ensemble, &pulses, config.dt_fs()).map_err(|e| match e {
                Error::PulseOverlap { .. } => Error::PulseOverlap { delay_fs: tau },
                other => other,
            })?;
            Ok(weighted_inversion(ensemble, &states))
        })
        .collect::<Result<Vec<f64>>>()?;
    FringeTrace::new(delays_fs.to_vec(), signal, 0.0)
}

/// Two-pulse Ramsey scan. The readout is the weight-averaged inversion
/// after the second pulse (normalized by Σ aₖ).
pub fn ramsey_scan(ensemble: &EnsembleSpec, config: &ScanConfig, delays_fs: &[f64]) -> Result<FringeTrace> {
    scan(ensemble, config, delays_fs, ramsey_sequence)
}

/// Three-pulse Ramsey-echo scan with areas π/2, π, π/2.
pub fn echo_scan(ensemble: &EnsembleSpec, config: &ScanConfig, delays_fs: &[f64]) -> Result<FringeTrace> {
    scan(ensemble, config, delays_fs, echo_sequence)
}

/// Uniform delay grid `start, start + step, …` up to and including `stop`.
pub fn delay_grid(start_fs: f64, stop_fs: f64, step_fs: f64) -> Result<Vec<f64>> {
    if !(step_fs > 0.0) || !(stop_fs >= start_fs) {
        return Err(Error::InvalidParameter(format!(
            "bad delay grid {start_fs}..{stop_fs} step {step_fs}"
        )));
    }
    let n = ((stop_fs - start_fs) / step_fs + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start_fs + i as f64 * step_fs).collect())
}

/// Where the T₂* fit window of a Ramsey collapse ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseWindow {
    /// Stop at the first minimum after which the contrast recovers by this
    /// fraction of its maximum (≤ 0 disables the rule).
    pub min_rise_rel: f64,
    /// Stop at the first sample below this fraction of the maximum (≤ 0 disables).
    pub stop_below_rel: f64,
}

impl Default for CollapseWindow {
    fn default() -> Self {
        Self { min_rise_rel: 0.01, stop_below_rel: 0.05 }
    }
}

impl CollapseWindow {
    /// Leading part of the envelope covering the initial collapse.
    pub fn apply(&self, envelope: &ContrastEnvelope) -> ContrastEnvelope {
        let c = envelope.contrast();
        let max = envelope.max();
        let mut end = c.len();
        if self.stop_below_rel > 0.0 {
            if let Some(j) = c.iter().position(|&v| v < self.stop_below_rel * max) {
                end = end.min(j);
            }
        }
        if self.min_rise_rel > 0.0 {
            let mut lowest = 0;
            for (j, &v) in c.iter().enumerate().take(end) {
                if v < c[lowest] {
                    lowest = j;
                } else if v > c[lowest] + self.min_rise_rel * max {
                    if lowest > 0 {
                        end = end.min(lowest);
                        break;
                    }
                    lowest = j;
                }
            }
        }
        let t = envelope.delays_fs();
        ContrastEnvelope::new(t[..end].to_vec(), c[..end].to_vec())
            .expect("prefix of a valid envelope")
    }
}

/// T₂* from the Ramsey collapse: `exp(−2t/T₂*)` on the squared contrast.
pub fn fit_ramsey_t2star(envelope: &ContrastEnvelope, window: &CollapseWindow) -> Result<FitResult> {
    fit_intensity_decay(&window.apply(envelope), 2, 1.0, &ExpFitOptions::default())
}

/// T₂ from the echo: `exp(−4t/T₂)` on the squared contrast, with t the
/// separation between the first and the rephasing pulse (τ/2).
pub fn fit_echo_t2(envelope: &ContrastEnvelope) -> Result<FitResult> {
    fit_intensity_decay(envelope, 4, 0.5, &ExpFitOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{reference_ensemble, REVIVAL_T2_PS};
    use crate::types::ModeSpec;
    use approx::assert_abs_diff_eq;

    fn resonant(t2_ps: f64) -> EnsembleSpec {
        EnsembleSpec::new(vec![ModeSpec::new(5.109, 1.0, t2_ps).unwrap()], 5.109).unwrap()
    }

    fn no_minimum() -> ScanConfig {
        ScanConfig { min_delay_fs: 0.0, ..ScanConfig::default() }
    }

    #[test]
    fn coincident_pulses_add_to_pi() {
        let tr = ramsey_scan(&resonant(f64::INFINITY), &no_minimum(), &[1e-9]).unwrap();
        assert_abs_diff_eq!(tr.signal()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn half_carrier_delay_cancels() {
        let tr = ramsey_scan(&resonant(f64::INFINITY), &no_minimum(), &[5.109 / 2.0]).unwrap();
        assert_abs_diff_eq!(tr.signal()[0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn ramsey_matches_cosine_of_mode_period() {
        let e = reference_ensemble(REVIVAL_T2_PS).unwrap();
        let delays = delay_grid(600.0, 700.0, 0.37).unwrap();
        let tr = ramsey_scan(&e, &ScanConfig::default(), &delays).unwrap();
        for (tau, s) in delays.iter().zip(tr.signal()) {
            let expected: f64 = e
                .modes()
                .iter()
                .map(|m| m.weight() * (TAU * tau / m.period_fs()).cos())
                .sum::<f64>()
                * (-tau / 4640.0).exp()
                / e.total_weight();
            assert_abs_diff_eq!(*s, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn scan_input_errors() {
        let e = resonant(1.0);
        let cfg = ScanConfig::default();
        assert_eq!(ramsey_scan(&e, &cfg, &[]), Err(Error::EmptyDelays));
        assert!(matches!(
            ramsey_scan(&e, &cfg, &[100.0, 700.0]),
            Err(Error::DelayBelowMinimum { .. })
        ));
        assert!(matches!(echo_scan(&e, &cfg, &[700.0, 650.0]), Err(Error::UnorderedDelays(1))));
    }

    #[test]
    fn finite_pulses_overlap_error_and_agree_with_delta() {
        let e = reference_ensemble(REVIVAL_T2_PS).unwrap();
        let finite = ScanConfig {
            shape: PulseShape::Finite { envelope: Envelope::Gaussian, fwhm_fs: 90.0, dt_fs: 4.5 },
            ..ScanConfig::default()
        };
        assert!(matches!(ramsey_scan(&e, &finite, &[650.0]), Err(Error::PulseOverlap { .. })));
        // short pulses approach the delta result
        let short = ScanConfig {
            shape: PulseShape::Finite { envelope: Envelope::Gaussian, fwhm_fs: 2.0, dt_fs: 0.05 },
            ..ScanConfig::default()
        };
        let delays = [800.0, 1234.5];
        let a = ramsey_scan(&e, &short, &delays).unwrap();
        let b = ramsey_scan(&e, &ScanConfig::default(), &delays).unwrap();
        for (x, y) in a.signal().iter().zip(b.signal()) {
            assert!((x - y).abs() < 5e-3, "{x} vs {y}");
        }
    }

    #[test]
    fn echo_single_mode_matches_ramsey_contrast() {
        let e = EnsembleSpec::new(vec![ModeSpec::new(5.113, 1.0, 3.0).unwrap()], 5.109).unwrap();
        let delays = delay_grid(600.0, 4000.0, 0.5).unwrap();
        let cfg = ScanConfig::default();
        let r = extract_contrast(&ramsey_scan(&e, &cfg, &delays).unwrap(), 5.109).unwrap();
        let s = extract_contrast(&echo_scan(&e, &cfg, &delays).unwrap(), 5.109).unwrap();
        // the Ramsey fringe runs at the mode period, slightly off the
        // carrier the extremum refinement assumes
        for (a, b) in r.contrast().iter().zip(s.contrast()) {
            assert!((a - b).abs() < 5e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn grid_helper() {
        let g = delay_grid(600.0, 15000.0, 0.5).unwrap();
        assert_eq!(g.len(), 28801);
        assert_eq!(*g.last().unwrap(), 15000.0);
        assert!(delay_grid(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn collapse_window_rules() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 10.0).collect();
        // decays, dips at index 40, recovers to a bump
        let c: Vec<f64> = t
            .iter()
            .map(|&x| if x < 400.0 { (-x / 100.0).exp() } else { 0.02 + 1e-4 * (x - 400.0) })
            .collect();
        let env = ContrastEnvelope::new(t, c).unwrap();
        let only_min = CollapseWindow { min_rise_rel: 0.01, stop_below_rel: 0.0 };
        assert_eq!(only_min.apply(&env).len(), 40);
        let only_level = CollapseWindow { min_rise_rel: 0.0, stop_below_rel: 0.05 };
        assert_eq!(only_level.apply(&env).len(), 30);
    }
}
