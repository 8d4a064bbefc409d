//! Domain value types shared by every module.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical slack on the Bloch-vector norm.
pub const NORM_SLACK: f64 = 1e-9;

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

/// One homogeneous subgroup of emitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    period_fs: f64,
    weight: f64,
    t2_ps: f64,
    t1_ps: f64,
}

impl ModeSpec {
    /// A mode with unbounded population lifetime.
    pub fn new(period_fs: f64, weight: f64, t2_ps: f64) -> Result<Self> {
        Self::with_t1(period_fs, weight, t2_ps, f64::INFINITY)
    }

    pub fn with_t1(period_fs: f64, weight: f64, t2_ps: f64, t1_ps: f64) -> Result<Self> {
        require(period_fs.is_finite() && period_fs > 0.0, || {
            format!("mode period must be positive, got {period_fs}")
        })?;
        require(weight.is_finite() && weight > 0.0, || {
            format!("mode weight must be positive, got {weight}")
        })?;
        require(t2_ps > 0.0, || format!("T2 must be positive, got {t2_ps}"))?;
        require(t1_ps >= t2_ps / 2.0, || {
            format!("T1 = {t1_ps} ps violates T1 >= T2/2 with T2 = {t2_ps} ps")
        })?;
        Ok(Self { period_fs, weight, t2_ps, t1_ps })
    }

    pub fn period_fs(&self) -> f64 {
        self.period_fs
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn t2_ps(&self) -> f64 {
        self.t2_ps
    }

    pub fn t1_ps(&self) -> f64 {
        self.t1_ps
    }

    pub fn with_t2(self, t2_ps: f64) -> Result<Self> {
        Self::with_t1(self.period_fs, self.weight, t2_ps, self.t1_ps)
    }
}

/// A discrete inhomogeneous ensemble referenced to a carrier period.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    modes: Vec<ModeSpec>,
    reference_period_fs: f64,
    equilibrium_inversion: f64,
}

impl EnsembleSpec {
    pub fn new(modes: Vec<ModeSpec>, reference_period_fs: f64) -> Result<Self> {
        require(!modes.is_empty(), || "ensemble needs at least one mode".into())?;
        require(reference_period_fs.is_finite() && reference_period_fs > 0.0, || {
            format!("reference period must be positive, got {reference_period_fs}")
        })?;
        let mut periods: Vec<f64> = modes.iter().map(|m| m.period_fs).collect();
        periods.sort_by(f64::total_cmp);
        if let Some(pair) = periods.windows(2).find(|p| p[0] == p[1]) {
            return Err(Error::InvalidParameter(format!(
                "duplicate mode period {} fs",
                pair[0]
            )));
        }
        Ok(Self { modes, reference_period_fs, equilibrium_inversion: -1.0 })
    }

    /// Sets the inversion the populations relax towards (−1 absorber, +1 inverted gain).
    pub fn with_equilibrium_inversion(mut self, w_eq: f64) -> Result<Self> {
        require((-1.0..=1.0).contains(&w_eq), || {
            format!("equilibrium inversion must lie in [-1, 1], got {w_eq}")
        })?;
        self.equilibrium_inversion = w_eq;
        Ok(self)
    }

    pub fn with_uniform_t2(&self, t2_ps: f64) -> Result<Self> {
        let modes = self.modes.iter().map(|m| m.with_t2(t2_ps)).collect::<Result<_>>()?;
        Ok(Self { modes, ..self.clone() })
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn reference_period_fs(&self) -> f64 {
        self.reference_period_fs
    }

    pub fn equilibrium_inversion(&self) -> f64 {
        self.equilibrium_inversion
    }

    /// Rotating-frame detuning Δf = 1/period − 1/reference (fs⁻¹).
    pub fn detuning(&self, mode: &ModeSpec) -> f64 {
        1.0 / mode.period_fs - 1.0 / self.reference_period_fs
    }

    pub fn detunings(&self) -> Vec<f64> {
        self.modes.iter().map(|m| self.detuning(m)).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Envelope {
    Delta,
    Gaussian,
    Sech,
}

/// One excitation pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub area_rad: f64,
    pub arrival_fs: f64,
    pub phase_rad: f64,
    pub envelope: Envelope,
    /// Intensity FWHM; ignored for delta pulses.
    pub fwhm_fs: f64,
}

impl PulseSpec {
    pub fn delta(area_rad: f64, arrival_fs: f64, phase_rad: f64) -> Self {
        Self { area_rad, arrival_fs, phase_rad, envelope: Envelope::Delta, fwhm_fs: 0.0 }
    }

    pub fn shaped(
        envelope: Envelope,
        fwhm_fs: f64,
        area_rad: f64,
        arrival_fs: f64,
        phase_rad: f64,
    ) -> Self {
        Self { area_rad, arrival_fs, phase_rad, envelope, fwhm_fs }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.area_rad.is_finite() && self.area_rad >= 0.0, || {
            format!("pulse area must be finite and non-negative, got {}", self.area_rad)
        })?;
        require(self.arrival_fs.is_finite() && self.phase_rad.is_finite(), || {
            "pulse arrival and phase must be finite".into()
        })?;
        if self.envelope != Envelope::Delta {
            require(self.fwhm_fs.is_finite() && self.fwhm_fs > 0.0, || {
                format!("pulse FWHM must be positive, got {}", self.fwhm_fs)
            })?;
        }
        Ok(())
    }

    /// Half-width of the integration window around the arrival time.
    pub fn half_window_fs(&self) -> f64 {
        match self.envelope {
            Envelope::Delta => 0.0,
            _ => 4.0 * self.fwhm_fs,
        }
    }
}

/// Real Bloch vector. `u = 2 Re ρ₁₂`, `v = −2 Im ρ₁₂`, `w = ρ₂₂ − ρ₁₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochState {
    pub const GROUND: BlochState = BlochState { u: 0.0, v: 0.0, w: -1.0 };
    pub const EXCITED: BlochState = BlochState { u: 0.0, v: 0.0, w: 1.0 };

    pub fn new(u: f64, v: f64, w: f64) -> Self {
        Self { u, v, w }
    }

    pub fn norm(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + NORM_SLACK
    }

    /// |ρ₁₂|
    pub fn coherence(&self) -> f64 {
        0.5 * self.u.hypot(self.v)
    }

    /// ρ₁₂ as (re, im).
    pub fn rho12(&self) -> (f64, f64) {
        (0.5 * self.u, -0.5 * self.v)
    }

    /// (ρ₁₁, ρ₂₂); their sum is 1 by construction.
    pub fn populations(&self) -> (f64, f64) {
        (0.5 * (1.0 - self.w), 0.5 * (1.0 + self.w))
    }

    pub fn distance(&self, other: &BlochState) -> f64 {
        (self.u - other.u)
            .abs()
            .max((self.v - other.v).abs())
            .max((self.w - other.w).abs())
    }
}

/// Readout of a delay scan.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeTrace {
    delays_fs: Vec<f64>,
    signal: Vec<f64>,
    baseline: f64,
}

fn check_increasing(delays: &[f64]) -> Result<()> {
    if let Some(i) = delays.windows(2).position(|d| !(d[1] > d[0])) {
        return Err(Error::UnorderedDelays(i + 1));
    }
    Ok(())
}

impl FringeTrace {
    pub fn new(delays_fs: Vec<f64>, signal: Vec<f64>, baseline: f64) -> Result<Self> {
        require(delays_fs.len() == signal.len(), || {
            format!("{} delays but {} signal samples", delays_fs.len(), signal.len())
        })?;
        check_increasing(&delays_fs)?;
        Ok(Self { delays_fs, signal, baseline })
    }

    pub fn delays_fs(&self) -> &[f64] {
        &self.delays_fs
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }

    /// Same delays with the signal replaced sample by sample.
    pub fn map_signal(&self, mut f: impl FnMut(usize, f64) -> f64) -> FringeTrace {
        let signal = self.signal.iter().enumerate().map(|(i, &s)| f(i, s)).collect();
        FringeTrace { delays_fs: self.delays_fs.clone(), signal, baseline: self.baseline }
    }
}

/// Slowly varying fringe contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastEnvelope {
    delays_fs: Vec<f64>,
    contrast: Vec<f64>,
}

impl ContrastEnvelope {
    pub fn new(delays_fs: Vec<f64>, contrast: Vec<f64>) -> Result<Self> {
        require(delays_fs.len() == contrast.len(), || {
            format!("{} delays but {} contrast samples", delays_fs.len(), contrast.len())
        })?;
        if let Some((i, &c)) =
            contrast.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c >= 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "contrast must be finite and non-negative, got {c} at index {i}"
            )));
        }
        check_increasing(&delays_fs)?;
        Ok(Self { delays_fs, contrast })
    }

    pub fn delays_fs(&self) -> &[f64] {
        &self.delays_fs
    }

    pub fn contrast(&self) -> &[f64] {
        &self.contrast
    }

    pub fn len(&self) -> usize {
        self.contrast.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contrast.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.contrast.iter().copied().fold(0.0, f64::max)
    }

    /// Divided by its maximum over the window (unchanged if identically zero).
    pub fn normalized(&self) -> ContrastEnvelope {
        let m = self.max();
        if m == 0.0 {
            return self.clone();
        }
        ContrastEnvelope {
            delays_fs: self.delays_fs.clone(),
            contrast: self.contrast.iter().map(|c| c / m).collect(),
        }
    }

    /// Linear interpolation, clamped to the end values outside the grid.
    pub fn interpolate(&self, t_fs: f64) -> f64 {
        let d = &self.delays_fs;
        let c = &self.contrast;
        match d.len() {
            0 => 0.0,
            1 => c[0],
            _ if t_fs <= d[0] => c[0],
            n if t_fs >= d[n - 1] => c[n - 1],
            _ => {
                let j = d.partition_point(|&x| x <= t_fs);
                let (t0, t1) = (d[j - 1], d[j]);
                let s = (t_fs - t0) / (t1 - t0);
                c[j - 1] + s * (c[j] - c[j - 1])
            }
        }
    }

    /// Samples with `lo <= t <= hi`.
    pub fn restrict(&self, lo_fs: f64, hi_fs: f64) -> ContrastEnvelope {
        let (delays_fs, contrast) = self
            .delays_fs
            .iter()
            .zip(&self.contrast)
            .filter(|(t, _)| **t >= lo_fs && **t <= hi_fs)
            .map(|(t, c)| (*t, *c))
            .unzip();
        ContrastEnvelope { delays_fs, contrast }
    }
}

/// Fitted parameters with residual diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: BTreeMap<String, f64>,
    pub rms_residual: f64,
    pub n_points: usize,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }
}
