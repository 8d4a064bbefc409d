//! Single-mode optical Bloch dynamics in the frame rotating at the
//! reference carrier.
//!
//! Conventions: a pulse with phase φ rotates the Bloch vector about
//! `(cos φ, sin φ, 0)` by the right-hand rule, and a positive detuning
//! precesses `(u, v)` counter-clockwise (u → v).

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::types::{BlochState, EnsembleSpec, Envelope, ModeSpec, PulseSpec};
use crate::units::{decay_factor, ps_to_fs};

/// Phenomenological relaxation of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Damping {
    pub t2_ps: f64,
    pub t1_ps: f64,
    /// Inversion the populations relax towards.
    pub w_eq: f64,
}

impl Damping {
    pub const NONE: Damping = Damping { t2_ps: f64::INFINITY, t1_ps: f64::INFINITY, w_eq: -1.0 };

    pub fn new(t2_ps: f64, t1_ps: f64) -> Self {
        Self { t2_ps, t1_ps, w_eq: -1.0 }
    }

    pub fn dephasing(t2_ps: f64) -> Self {
        Self::new(t2_ps, f64::INFINITY)
    }

    pub fn for_mode(mode: &ModeSpec, ensemble: &EnsembleSpec) -> Self {
        Self {
            t2_ps: mode.t2_ps(),
            t1_ps: mode.t1_ps(),
            w_eq: ensemble.equilibrium_inversion(),
        }
    }

    fn rates_inv_fs(&self) -> (f64, f64) {
        let rate = |t_ps: f64| if t_ps.is_infinite() { 0.0 } else { 1.0 / ps_to_fs(t_ps) };
        (rate(self.t2_ps), rate(self.t1_ps))
    }
}

/// Instantaneous rotation by `area_rad` about `(cos φ, sin φ, 0)`.
pub fn apply_pulse_delta(state: BlochState, area_rad: f64, phase_rad: f64) -> BlochState {
    let (nx, ny) = (phase_rad.cos(), phase_rad.sin());
    let (s, c) = area_rad.sin_cos();
    let BlochState { u, v, w } = state;
    // Rodrigues with n_z = 0
    let dot = nx * u + ny * v;
    let cross = (ny * w, -nx * w, nx * v - ny * u);
    BlochState {
        u: u * c + cross.0 * s + nx * dot * (1.0 - c),
        v: v * c + cross.1 * s + ny * dot * (1.0 - c),
        w: w * c + cross.2 * s,
    }
}

/// Closed-form free precession and relaxation over `duration_fs`.
pub fn evolve_free(
    state: BlochState,
    duration_fs: f64,
    detuning_inv_fs: f64,
    damping: &Damping,
) -> Result<BlochState> {
    if !(duration_fs >= 0.0) {
        return Err(Error::NegativeDuration(duration_fs));
    }
    if duration_fs == 0.0 {
        return Ok(state);
    }
    Ok(free_unchecked(state, duration_fs, detuning_inv_fs, damping))
}

fn free_unchecked(state: BlochState, duration_fs: f64, detuning: f64, damping: &Damping) -> BlochState {
    let (s, c) = (TAU * detuning * duration_fs).sin_cos();
    let d2 = decay_factor(duration_fs, damping.t2_ps);
    let d1 = decay_factor(duration_fs, damping.t1_ps);
    BlochState {
        u: d2 * (state.u * c - state.v * s),
        v: d2 * (state.u * s + state.v * c),
        w: damping.w_eq + (state.w - damping.w_eq) * d1,
    }
}

/// Field (not intensity) envelope at `t` from the pulse center.
fn field_shape(envelope: Envelope, fwhm_fs: f64, t: f64) -> f64 {
    match envelope {
        Envelope::Delta => 0.0,
        Envelope::Gaussian => (-2.0 * std::f64::consts::LN_2 * (t / fwhm_fs).powi(2)).exp(),
        Envelope::Sech => 1.0 / (t / sech_width(fwhm_fs)).cosh(),
    }
}

/// sech² intensity FWHM = 2 acosh(√2) τ.
fn sech_width(fwhm_fs: f64) -> f64 {
    fwhm_fs / (2.0 * std::f64::consts::SQRT_2.acosh())
}

/// ∫ field_shape over the truncated window ±`half`.
fn truncated_integral(envelope: Envelope, fwhm_fs: f64, half: f64) -> f64 {
    match envelope {
        Envelope::Delta => 0.0,
        Envelope::Gaussian => {
            let a = 2.0 * std::f64::consts::LN_2 / (fwhm_fs * fwhm_fs);
            (std::f64::consts::PI / a).sqrt() * libm::erf(half * a.sqrt())
        }
        Envelope::Sech => {
            let tau = sech_width(fwhm_fs);
            // Gudermannian
            2.0 * tau * 2.0 * (half / tau / 2.0).tanh().atan()
        }
    }
}

/// Rabi rate Ω(t) in rad/fs, normalized so its integral over the
/// truncated window equals the pulse area.
#[derive(Debug, Clone, Copy)]
struct RabiProfile {
    envelope: Envelope,
    fwhm_fs: f64,
    arrival_fs: f64,
    peak: f64,
}

impl RabiProfile {
    fn new(pulse: &PulseSpec) -> Self {
        let norm = truncated_integral(pulse.envelope, pulse.fwhm_fs, pulse.half_window_fs());
        Self {
            envelope: pulse.envelope,
            fwhm_fs: pulse.fwhm_fs,
            arrival_fs: pulse.arrival_fs,
            peak: pulse.area_rad / norm,
        }
    }

    fn at(&self, t_fs: f64) -> f64 {
        self.peak * field_shape(self.envelope, self.fwhm_fs, t_fs - self.arrival_fs)
    }
}

#[derive(Debug, Clone, Copy)]
struct BlochRhs {
    nx: f64,
    ny: f64,
    omega_det: f64,
    gamma2: f64,
    gamma1: f64,
    w_eq: f64,
}

impl BlochRhs {
    fn eval(&self, rabi: f64, b: [f64; 3]) -> [f64; 3] {
        let [u, v, w] = b;
        [
            rabi * self.ny * w - self.omega_det * v - self.gamma2 * u,
            -rabi * self.nx * w + self.omega_det * u - self.gamma2 * v,
            rabi * (self.nx * v - self.ny * u) - self.gamma1 * (w - self.w_eq),
        ]
    }
}

fn axpy(b: [f64; 3], k: [f64; 3], h: f64) -> [f64; 3] {
    [b[0] + h * k[0], b[1] + h * k[1], b[2] + h * k[2]]
}

/// Integrates the damped Bloch equations across a finite pulse with
/// classical RK4, from `arrival − 4·FWHM` to `arrival + 4·FWHM`.
///
/// `dt_fs` is an upper bound; the window is split into an integer number
/// of equal steps no longer than it.
pub fn evolve_finite_pulse(
    state: BlochState,
    pulse: &PulseSpec,
    detuning_inv_fs: f64,
    damping: &Damping,
    dt_fs: f64,
) -> Result<BlochState> {
    pulse.validate()?;
    if pulse.envelope == Envelope::Delta {
        return Err(Error::DeltaEnvelope);
    }
    let max_fs = pulse.fwhm_fs / 20.0;
    if !(dt_fs > 0.0 && dt_fs <= max_fs) {
        return Err(Error::StepTooLarge { dt_fs, max_fs });
    }
    let half = pulse.half_window_fs();
    let steps = (2.0 * half / dt_fs).ceil() as usize;
    let h = 2.0 * half / steps as f64;
    let profile = RabiProfile::new(pulse);
    let (gamma2, gamma1) = damping.rates_inv_fs();
    let rhs = BlochRhs {
        nx: pulse.phase_rad.cos(),
        ny: pulse.phase_rad.sin(),
        omega_det: TAU * detuning_inv_fs,
        gamma2,
        gamma1,
        w_eq: damping.w_eq,
    };

    let t_start = pulse.arrival_fs - half;
    let mut b = [state.u, state.v, state.w];
    for i in 0..steps {
        let t = t_start + i as f64 * h;
        let (r0, r1, r2) = (profile.at(t), profile.at(t + 0.5 * h), profile.at(t + h));
        let k1 = rhs.eval(r0, b);
        let k2 = rhs.eval(r1, axpy(b, k1, 0.5 * h));
        let k3 = rhs.eval(r1, axpy(b, k2, 0.5 * h));
        let k4 = rhs.eval(r2, axpy(b, k3, h));
        for j in 0..3 {
            b[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    Ok(BlochState::new(b[0], b[1], b[2]))
}

/// Runs a pulse sequence on one mode and returns the state just after the
/// last pulse (at its arrival for delta pulses, at the end of its window
/// otherwise). Pulses must be ordered with non-overlapping windows.
pub fn run_sequence(
    initial: BlochState,
    pulses: &[PulseSpec],
    detuning_inv_fs: f64,
    damping: &Damping,
    dt_fs: f64,
) -> Result<BlochState> {
    let Some(first) = pulses.first() else {
        return Ok(initial);
    };
    let mut clock = first.arrival_fs - first.half_window_fs();
    let mut state = initial;
    for pulse in pulses {
        let start = pulse.arrival_fs - pulse.half_window_fs();
        let gap = start - clock;
        if gap < 0.0 {
            return Err(Error::PulseOverlap { delay_fs: pulse.arrival_fs });
        }
        state = free_unchecked(state, gap, detuning_inv_fs, damping);
        state = match pulse.envelope {
            Envelope::Delta => apply_pulse_delta(state, pulse.area_rad, pulse.phase_rad),
            _ => evolve_finite_pulse(state, pulse, detuning_inv_fs, damping, dt_fs)?,
        };
        clock = pulse.arrival_fs + pulse.half_window_fs();
        debug_assert!(state.is_physical(), "Bloch norm {} > 1", state.norm());
    }
    Ok(state)
}
