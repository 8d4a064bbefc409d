//! Reduced propagation map: a Ramsey pulse pair travelling through
//! `z_steps` slices of the medium, each slice holding an independent
//! ground-state copy of the detuning channels.
//!
//! Propagation only rescales the pulse area from slice to slice; a channel
//! sees that area multiplied by its spectral weight relative to the
//! strongest channel, so the pulse spectrum shapes the map.

use rayon::prelude::*;

use crate::bloch::{run_sequence, Damping};
use crate::error::{Error, Result};
use crate::experiments::{delay_phase, prominent_maxima};
use crate::types::{BlochState, EnsembleSpec, PulseSpec};

/// Fewest channels accepted for a map.
pub const MIN_CHANNELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub delay_fs: f64,
    pub z_steps: usize,
    /// Area factor applied per slice.
    pub gain_per_step: f64,
    /// Area of each pulse entering the first slice.
    pub area_rad: f64,
}

impl PropagationConfig {
    pub fn new(delay_fs: f64, z_steps: usize, gain_per_step: f64) -> Self {
        PropagationConfig { delay_fs, z_steps, gain_per_step, area_rad: std::f64::consts::FRAC_PI_2 }
    }

    fn validate(&self) -> Result<()> {
        if self.z_steps == 0 {
            return Err(Error::InvalidParameter("z_steps must be at least 1".into()));
        }
        if !(self.delay_fs >= 0.0) || !self.delay_fs.is_finite() {
            return Err(Error::NegativeDuration(self.delay_fs));
        }
        if !(self.gain_per_step >= 0.0) || !self.gain_per_step.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gain per step must be finite and non-negative, got {}",
                self.gain_per_step
            )));
        }
        if !(self.area_rad >= 0.0) || !self.area_rad.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid pulse area {}", self.area_rad)));
        }
        Ok(())
    }

    /// Pulse area entering slice `j`, clamped to [0, π].
    pub fn slice_area(&self, j: usize) -> f64 {
        (self.area_rad * self.gain_per_step.powi(j as i32)).clamp(0.0, std::f64::consts::PI)
    }
}

/// Inversion and coherence per (slice, channel); rows are slices.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationMap {
    detunings_inv_fs: Vec<f64>,
    slice_areas: Vec<f64>,
    inversion: Vec<Vec<f64>>,
    coherence: Vec<Vec<f64>>,
    delay_fs: f64,
}

/// Runs the pulse pair through every slice.
pub fn propagate_map(ensemble: &EnsembleSpec, config: &PropagationConfig) -> Result<PropagationMap> {
    config.validate()?;
    if ensemble.len() < MIN_CHANNELS {
        return Err(Error::InvalidParameter(format!(
            "need >= {MIN_CHANNELS} channels, got {}",
            ensemble.len()
        )));
    }
    let detunings = ensemble.detunings();
    if detunings.windows(2).any(|d| !(d[1] > d[0])) {
        return Err(Error::InvalidParameter("channels must be ordered by detuning".into()));
    }
    let t0 = ensemble.reference_period_fs();
    let max_weight = ensemble.modes().iter().map(|m| m.weight()).fold(0.0, f64::max);
    let phase = delay_phase(config.delay_fs, t0);

    let slice_areas: Vec<f64> = (0..config.z_steps).map(|j| config.slice_area(j)).collect();
    let rows = slice_areas
        .iter()
        .map(|&area| {
            ensemble
                .modes()
                .par_iter()
                .map(|m| {
                    let a = area * m.weight() / max_weight;
                    let pulses = [PulseSpec::delta(a, 0.0, 0.0), PulseSpec::delta(a, config.delay_fs, phase)];
                    let damping = Damping::for_mode(m, ensemble);
                    // delta pulses never take the step size
                    run_sequence(BlochState::GROUND, &pulses, ensemble.detuning(m), &damping, 1.0)
                })
                .collect::<Result<Vec<BlochState>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let inversion = rows.iter().map(|r| r.iter().map(|s| s.w).collect()).collect();
    let coherence = rows.iter().map(|r| r.iter().map(|s| s.coherence()).collect()).collect();
    Ok(PropagationMap {
        detunings_inv_fs: detunings,
        slice_areas,
        inversion,
        coherence,
        delay_fs: config.delay_fs,
    })
}

fn normalize(map: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let peak = map.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak == 0.0 {
        return map.to_vec();
    }
    map.iter().map(|r| r.iter().map(|v| v / peak).collect()).collect()
}

fn column_mean(map: &[Vec<f64>]) -> Vec<f64> {
    let n = map.len() as f64;
    (0..map[0].len()).map(|k| map.iter().map(|r| r[k]).sum::<f64>() / n).collect()
}

/// Centered moving average over `width` samples, shrinking at the ends.
fn boxcar(y: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let mut prefix = vec![0.0];
    for v in y {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..y.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(y.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

impl PropagationMap {
    pub fn detunings_inv_fs(&self) -> &[f64] {
        &self.detunings_inv_fs
    }

    pub fn slice_areas(&self) -> &[f64] {
        &self.slice_areas
    }

    pub fn delay_fs(&self) -> f64 {
        self.delay_fs
    }

    pub fn z_steps(&self) -> usize {
        self.inversion.len()
    }

    pub fn channels(&self) -> usize {
        self.detunings_inv_fs.len()
    }

    pub fn inversion(&self) -> &[Vec<f64>] {
        &self.inversion
    }

    pub fn coherence(&self) -> &[Vec<f64>] {
        &self.coherence
    }

    /// Inversion divided by its largest magnitude.
    pub fn normalized_inversion(&self) -> Vec<Vec<f64>> {
        normalize(&self.inversion)
    }

    pub fn normalized_coherence(&self) -> Vec<Vec<f64>> {
        normalize(&self.coherence)
    }

    pub fn mean_inversion(&self) -> Vec<f64> {
        column_mean(&self.inversion)
    }

    pub fn mean_coherence(&self) -> Vec<f64> {
        column_mean(&self.coherence)
    }

    /// Detunings of the spectral fringe maxima of the slice-averaged
    /// inversion. Maxima need a prominence of a quarter of the full swing.
    pub fn fringe_maxima(&self) -> Vec<f64> {
        let w = self.mean_inversion();
        let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !(hi - lo > 1e-9) {
            return Vec::new();
        }
        prominent_maxima(&w, 0.25 * (hi - lo))
            .into_iter()
            .map(|(k, _)| self.detunings_inv_fs[k])
            .collect()
    }

    pub fn fringe_count(&self) -> usize {
        self.fringe_maxima().len()
    }

    /// Mean spacing between neighbouring fringe maxima, in fs⁻¹.
    ///
    /// Gaps more than 1.5 times the median spacing are left out: they span
    /// channels too weakly driven to show fringes.
    pub fn fringe_spacing(&self) -> Option<f64> {
        let peaks = self.fringe_maxima();
        let mut gaps: Vec<f64> = peaks.windows(2).map(|p| p[1] - p[0]).collect();
        if gaps.is_empty() {
            return None;
        }
        let mut sorted = gaps.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        gaps.retain(|&g| g <= 1.5 * median);
        Some(gaps.iter().sum::<f64>() / gaps.len() as f64)
    }

    /// Maxima of the slice-averaged coherence after a moving average one
    /// fringe (1/τ) wide, keeping those with prominence ≥ `min_prominence`
    /// of the largest value. Returns their detunings.
    ///
    /// The averaged coherence follows the channel area only while that
    /// stays below about 0.95 rad; stronger pulses flatten the lobes.
    pub fn dominant_coherence_maxima(&self, min_prominence: f64) -> Vec<f64> {
        let c = self.mean_coherence();
        let step = (self.detunings_inv_fs[self.channels() - 1] - self.detunings_inv_fs[0])
            / (self.channels() - 1) as f64;
        let width = if self.delay_fs > 0.0 { (1.0 / (self.delay_fs * step)).round() as usize } else { 1 };
        let smooth = boxcar(&c, width.max(1));
        let top = smooth.iter().copied().fold(0.0, f64::max);
        prominent_maxima(&smooth, min_prominence * top)
            .into_iter()
            .map(|(k, _)| self.detunings_inv_fs[k])
            .collect()
    }
}
