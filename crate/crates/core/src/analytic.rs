//! Closed-form revival model of uncoupled modes:
//! `exp(−t/T₂)·Σₖ aₖ sin(2πt/tₖ)` and its slowly varying magnitude.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fitting::{fit_intensity_decay, ExpFitOptions};
use crate::types::{ContrastEnvelope, EnsembleSpec};
use crate::units::{decay_factor, planck_constant_mev_ps};

/// Carrier-resolved signal at `t_fs`.
pub fn revival_signal(t_fs: f64, ensemble: &EnsembleSpec, t2_ps: f64) -> f64 {
    let sum: f64 = ensemble
        .modes()
        .iter()
        .map(|m| m.weight() * (TAU * t_fs / m.period_fs()).sin())
        .sum();
    decay_factor(t_fs, t2_ps) * sum
}

/// `exp(−t/T₂)·|Σₖ aₖ exp(i2πΔfₖt)|`, unnormalized (equals Σ aₖ at t = 0).
pub fn revival_envelope(t_fs: f64, ensemble: &EnsembleSpec, t2_ps: f64) -> f64 {
    let (re, im) = ensemble.modes().iter().fold((0.0, 0.0), |(re, im), m| {
        let (s, c) = (TAU * ensemble.detuning(m) * t_fs).sin_cos();
        (re + m.weight() * c, im + m.weight() * s)
    });
    decay_factor(t_fs, t2_ps) * re.hypot(im)
}

/// Envelope divided by its value at t = 0.
pub fn normalized_envelope(t_fs: f64, ensemble: &EnsembleSpec, t2_ps: f64) -> f64 {
    revival_envelope(t_fs, ensemble, t2_ps) / ensemble.total_weight()
}

/// Normalized envelope on a grid; parallel and bit-identical to a serial loop.
pub fn envelope_on_grid(times_fs: &[f64], ensemble: &EnsembleSpec, t2_ps: f64) -> Vec<f64> {
    times_fs.par_iter().map(|&t| normalized_envelope(t, ensemble, t2_ps)).collect()
}

pub fn signal_on_grid(times_fs: &[f64], ensemble: &EnsembleSpec, t2_ps: f64) -> Vec<f64> {
    times_fs.par_iter().map(|&t| revival_signal(t, ensemble, t2_ps)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RevivalKind {
    Full,
    Fractional,
}

impl RevivalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RevivalKind::Full => "full",
            RevivalKind::Fractional => "fractional",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Revival {
    pub time_fs: f64,
    pub kind: RevivalKind,
}

/// Mean spacing of the sorted mode detunings (fs⁻¹).
///
/// Fails when any adjacent spacing deviates from the mean by 10% or more.
pub fn mean_detuning_spacing(ensemble: &EnsembleSpec) -> Result<f64> {
    if ensemble.len() < 2 {
        return Err(Error::InvalidParameter("need at least two modes".into()));
    }
    let mut d = ensemble.detunings();
    d.sort_by(f64::total_cmp);
    let mean = (d[d.len() - 1] - d[0]) / (d.len() - 1) as f64;
    let worst = d.windows(2).map(|p| ((p[1] - p[0]) - mean).abs() / mean).fold(0.0, f64::max);
    if worst >= 0.1 {
        return Err(Error::NonUniformSpacing { deviation_pct: 100.0 * worst });
    }
    Ok(mean)
}

/// Time for all modes to rephase, 1/Δf̄.
pub fn full_revival_period_fs(ensemble: &EnsembleSpec) -> Result<f64> {
    Ok(1.0 / mean_detuning_spacing(ensemble)?)
}

/// Full revivals at multiples of 1/Δf̄ and fractional ones at odd
/// multiples of 1/(2Δf̄), up to `horizon_fs`.
///
/// A half-period point only counts as a fractional revival if the
/// undamped envelope has a local maximum there.
pub fn revival_times(ensemble: &EnsembleSpec, horizon_fs: f64) -> Result<Vec<Revival>> {
    if ensemble.len() < 2 {
        return Ok(Vec::new());
    }
    let period = full_revival_period_fs(ensemble)?;
    let half = 0.5 * period;
    let probe = period / 20.0;
    let has_fractional = {
        let at = |t| revival_envelope(t, ensemble, f64::INFINITY);
        let mid = at(half);
        mid > 1e-9 * ensemble.total_weight() && mid > at(half - probe) && mid > at(half + probe)
    };
    let mut out = Vec::new();
    let mut n = 1usize;
    while n as f64 * half <= horizon_fs {
        let kind = if n.is_multiple_of(2) { RevivalKind::Full } else { RevivalKind::Fractional };
        if kind == RevivalKind::Full || has_fractional {
            out.push(Revival { time_fs: n as f64 * half, kind });
        }
        n += 1;
    }
    Ok(out)
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive and finite, got {x}")))
    }
}

/// Homogeneous linewidth ΔE = 2h/T₂ in meV.
pub fn linewidth_from_t2(t2_ps: f64) -> Result<f64> {
    check_positive(t2_ps, "T2")?;
    Ok(2.0 * planck_constant_mev_ps() / t2_ps)
}

pub fn t2_from_linewidth(energy_mev: f64) -> Result<f64> {
    check_positive(energy_mev, "linewidth")?;
    Ok(2.0 * planck_constant_mev_ps() / energy_mev)
}

/// Effective inhomogeneous time T₂*: fits `exp(−2t/T₂*)` to the squared
/// envelope from t = 0 up to (excluding) its first local minimum.
pub fn effective_t2star(ensemble: &EnsembleSpec, t2_ps: f64) -> Result<f64> {
    if ensemble.len() < 2 {
        return Err(Error::InvalidParameter(
            "a single mode has no inhomogeneous decay".into(),
        ));
    }
    let mut d = ensemble.detunings();
    d.sort_by(f64::total_cmp);
    let spread = d[d.len() - 1] - d[0];
    let min_gap = d.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
    let step = 1.0 / (400.0 * spread);
    let horizon = 2.0 / min_gap;
    let n = (horizon / step).ceil() as usize + 1;
    let times: Vec<f64> = (0..n).map(|j| j as f64 * step).collect();
    let env = envelope_on_grid(&times, ensemble, t2_ps);
    let first_min = (1..n - 1)
        .find(|&j| env[j] < env[j - 1] && env[j] <= env[j + 1])
        .ok_or(Error::NoMinimum)?;
    let window = ContrastEnvelope::new(times[..first_min].to_vec(), env[..first_min].to_vec())?;
    let fit = fit_intensity_decay(&window, 2, 1.0, &ExpFitOptions::default())?;
    Ok(fit.param("tau_ps").expect("tau_ps is always set"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{reference_ensemble, REVIVAL_T2_PS};
    use crate::types::ModeSpec;
    use approx::assert_abs_diff_eq;

    fn two_modes(df: f64) -> EnsembleSpec {
        let t0 = 5.109;
        let modes = vec![
            ModeSpec::new(1.0 / (1.0 / t0 + 0.5 * df), 1.0, f64::INFINITY).unwrap(),
            ModeSpec::new(1.0 / (1.0 / t0 - 0.5 * df), 1.0, f64::INFINITY).unwrap(),
        ];
        EnsembleSpec::new(modes, t0).unwrap()
    }

    #[test]
    fn signal_vanishes_at_zero() {
        let e = reference_ensemble(REVIVAL_T2_PS).unwrap();
        assert_eq!(revival_signal(0.0, &e, REVIVAL_T2_PS), 0.0);
    }

    #[test]
    fn signal_at_quarter_carrier_period() {
        let e = reference_ensemble(REVIVAL_T2_PS).unwrap();
        let t = 5.109 / 4.0;
        // independent evaluation, mode by mode
        let weights = [1.0 / 3.0, 0.5, 1.0, 0.5, 1.0 / 3.0];
        let mut expected = 0.0;
        for (i, a) in weights.iter().enumerate() {
            let tk = 5.109 + (i as f64 - 2.0) * 0.004;
            expected += a * (2.0 * std::f64::consts::PI * t / tk).sin();
        }
        expected *= (-t / 4640.0).exp();
        assert_abs_diff_eq!(revival_signal(t, &e, REVIVAL_T2_PS), expected, epsilon = 1e-14);
        assert!((expected - 2.6660).abs() < 1e-3);
    }

    #[test]
    fn single_mode_half_period_zero() {
        let m = ModeSpec::new(5.109, 1.0, 4.64).unwrap();
        let e = EnsembleSpec::new(vec![m], 5.109).unwrap();
        assert!(revival_signal(5.109 / 2.0, &e, 4.64).abs() < 1e-12);
    }

    #[test]
    fn envelope_special_points() {
        let e = reference_ensemble(f64::INFINITY).unwrap();
        assert_abs_diff_eq!(revival_envelope(0.0, &e, f64::INFINITY), 8.0 / 3.0, epsilon = 1e-14);
        // exact revival times of an ideal comb ignoring the 1/(t0 + kδ) curvature
        let period = full_revival_period_fs(&e).unwrap();
        assert_abs_diff_eq!(revival_envelope(0.5 * period, &e, f64::INFINITY), 2.0 / 3.0, epsilon = 2e-3);
        assert_abs_diff_eq!(revival_envelope(period, &e, f64::INFINITY), 8.0 / 3.0, epsilon = 2e-3);
    }

    #[test]
    fn envelope_depends_only_on_detunings() {
        let e = reference_ensemble(REVIVAL_T2_PS).unwrap();
        // shift every frequency (and the reference) by the same amount
        let shift = 2e-3;
        let modes = e
            .modes()
            .iter()
            .map(|m| ModeSpec::new(1.0 / (1.0 / m.period_fs() + shift), m.weight(), m.t2_ps()).unwrap())
            .collect();
        let shifted = EnsembleSpec::new(modes, 1.0 / (1.0 / 5.109 + shift)).unwrap();
        for t in [0.0, 700.0, 3260.0, 9000.0] {
            assert_abs_diff_eq!(
                revival_envelope(t, &e, REVIVAL_T2_PS),
                revival_envelope(t, &shifted, REVIVAL_T2_PS),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn comb_revival_schedule() {
        let e = reference_ensemble(REVIVAL_T2_PS).unwrap();
        let spacing = mean_detuning_spacing(&e).unwrap();
        assert!((spacing - 0.004 / (5.109f64 * 5.109)).abs() / spacing < 1e-3);
        let r = revival_times(&e, 15000.0).unwrap();
        let times: Vec<f64> = r.iter().map(|x| x.time_fs / 1000.0).collect();
        let kinds: Vec<RevivalKind> = r.iter().map(|x| x.kind).collect();
        assert_eq!(times.len(), 4);
        for (t, want) in times.iter().zip([3.26, 6.53, 9.79, 13.05]) {
            assert!((t - want).abs() < 0.01, "{t} vs {want}");
        }
        use RevivalKind::*;
        assert_eq!(kinds, vec![Fractional, Full, Fractional, Full]);
    }

    #[test]
    fn two_mode_beat_has_only_full_revivals() {
        let r = revival_times(&two_modes(1e-3), 3500.0).unwrap();
        let times: Vec<f64> = r.iter().map(|x| x.time_fs).collect();
        assert_eq!(times.len(), 3);
        for (t, want) in times.iter().zip([1000.0, 2000.0, 3000.0]) {
            assert_abs_diff_eq!(*t, want, epsilon = 1e-6);
        }
        assert!(r.iter().all(|x| x.kind == RevivalKind::Full));
    }

    #[test]
    fn single_mode_and_non_uniform_spacing() {
        let m = ModeSpec::new(5.109, 1.0, 4.64).unwrap();
        let e = EnsembleSpec::new(vec![m], 5.109).unwrap();
        assert!(revival_times(&e, 1e4).unwrap().is_empty());
        let modes = [5.100, 5.104, 5.109]
            .iter()
            .map(|&p| ModeSpec::new(p, 1.0, 4.64).unwrap())
            .collect();
        let e = EnsembleSpec::new(modes, 5.109).unwrap();
        assert!(matches!(revival_times(&e, 1e4), Err(Error::NonUniformSpacing { .. })));
    }

    #[test]
    fn linewidth_convention() {
        assert_abs_diff_eq!(linewidth_from_t2(4.64).unwrap(), 1.783, epsilon = 5e-4);
        assert_abs_diff_eq!(linewidth_from_t2(5.22).unwrap(), 1.585, epsilon = 5e-4);
        for x in [0.1, 1.27, 4.64, 123.0] {
            let back = t2_from_linewidth(linewidth_from_t2(x).unwrap()).unwrap();
            assert!((back - x).abs() / x < 1e-12);
        }
        assert!(linewidth_from_t2(0.0).is_err());
        assert!(t2_from_linewidth(-1.0).is_err());
    }

    /// Least-squares slope of ln|cos(πx)| over the samples x = j/400 left of
    /// the node that stay above the 1e-3 amplitude floor.
    fn cosine_envelope_oracle() -> f64 {
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|j| j as f64 / 400.0)
            .map(|x| (x, (std::f64::consts::PI * x).cos()))
            .filter(|&(_, c)| c > 1e-3)
            .map(|(x, c)| (x, c.ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        // amplitude decays as exp(slope·x) → T₂*·Δf = −1/slope
        -sxx / sxy
    }

    #[test]
    fn two_mode_t2star_scales_inversely_with_beat() {
        let products: Vec<f64> = [1e-4, 2e-4, 5e-4]
            .iter()
            .map(|&df| effective_t2star(&two_modes(df), f64::INFINITY).unwrap() * 1000.0 * df)
            .collect();
        for p in &products[1..] {
            assert!((p - products[0]).abs() / products[0] < 1e-6, "{products:?}");
        }
        let oracle = cosine_envelope_oracle();
        assert!((products[0] - oracle).abs() / oracle < 1e-9, "{} vs {oracle}", products[0]);
    }

    /// Direct evaluation of the windowed fit, independent of the module's grid helpers.
    fn comb_t2star_oracle(t2_fs: f64) -> f64 {
        let t0 = 5.109;
        let weights = [1.0 / 3.0, 0.5, 1.0, 0.5, 1.0 / 3.0];
        let env = |t: f64| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, a) in weights.iter().enumerate() {
                let df = 1.0 / (t0 + (i as f64 - 2.0) * 0.004) - 1.0 / t0;
                re += a * (2.0 * std::f64::consts::PI * df * t).cos();
                im += a * (2.0 * std::f64::consts::PI * df * t).sin();
            }
            (re * re + im * im).sqrt() * (-t / t2_fs).exp()
        };
        let dt = 0.25;
        let mut pts = vec![(0.0, env(0.0))];
        loop {
            let t = pts.len() as f64 * dt;
            let v = env(t);
            if v > pts[pts.len() - 1].1 {
                pts.pop();
                break;
            }
            pts.push((t, v));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        -sxx / sxy / 1000.0
    }

    #[test]
    fn reference_ensemble_t2star() {
        for t2 in [f64::INFINITY, REVIVAL_T2_PS] {
            let e = reference_ensemble(t2).unwrap();
            let got = effective_t2star(&e, t2).unwrap();
            let oracle = comb_t2star_oracle(t2 * 1000.0);
            assert!((got - oracle).abs() / oracle < 5e-3, "{got} vs {oracle}");
            assert!(got > 0.4 && got < 0.8, "{got}");
        }
        let m = ModeSpec::new(5.109, 1.0, 4.64).unwrap();
        assert!(effective_t2star(&EnsembleSpec::new(vec![m], 5.109).unwrap(), 4.64).is_err());
    }

    #[test]
    fn parallel_grid_is_bit_identical() {
        let e = reference_ensemble(REVIVAL_T2_PS).unwrap();
        let t: Vec<f64> = (0..5000).map(|i| i as f64 * 3.0).collect();
        let serial: Vec<f64> = t.iter().map(|&x| normalized_envelope(x, &e, REVIVAL_T2_PS)).collect();
        assert_eq!(envelope_on_grid(&t, &e, REVIVAL_T2_PS), serial);
    }
}
