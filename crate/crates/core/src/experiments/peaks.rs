use crate::analytic::RevivalKind;
use crate::error::{Error, Result};
use crate::fitting::fit_grouped_exp_decay;
use crate::types::{ContrastEnvelope, FitResult};
use crate::units::ps_to_fs;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub time_fs: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Local maxima whose prominence is at least `min_prominence·max(envelope)`,
/// in time order.
///
/// The prominence of a peak is its height above the higher of the two
/// lowest points reached on either side before the envelope rises above
/// the peak again (or the trace ends).
pub fn find_revival_peaks(envelope: &ContrastEnvelope, min_prominence: f64) -> Vec<Peak> {
    let c = envelope.contrast();
    let t = envelope.delays_fs();
    prominent_maxima(c, min_prominence * envelope.max())
        .into_iter()
        .map(|(m, prominence)| Peak { time_fs: t[m], height: c[m], prominence })
        .collect()
}

/// Indices and prominences of the local maxima of `y` whose prominence is
/// at least `threshold`. A flat top counts once, at its middle sample.
pub(crate) fn prominent_maxima(y: &[f64], threshold: f64) -> Vec<(usize, f64)> {
    let n = y.len();
    let mut maxima = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                maxima.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    maxima
        .iter()
        .filter_map(|&m| {
            // lowest point on each side before the signal climbs above the peak
            let left = y[..m].iter().rev().take_while(|&&v| v <= y[m]).copied().fold(y[m], f64::min);
            let right = y[m + 1..].iter().take_while(|&&v| v <= y[m]).copied().fold(y[m], f64::min);
            let prominence = y[m] - left.max(right);
            (prominence >= threshold).then_some((m, prominence))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalPeak {
    /// Peak time of the decay-compensated envelope.
    pub time_fs: f64,
    /// Contrast at that time.
    pub height: f64,
    pub compensated_height: f64,
    /// Multiple of half the full revival period.
    pub order: usize,
    pub kind: RevivalKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevivalAnalysis {
    pub t2_ps: f64,
    pub fit: FitResult,
    pub peaks: Vec<RevivalPeak>,
    /// Compensated-envelope peaks that sit on no revival order.
    pub unmatched: Vec<Peak>,
    pub iterations: usize,
}

fn group(kind: RevivalKind) -> usize {
    match kind {
        RevivalKind::Full => 0,
        RevivalKind::Fractional => 1,
    }
}

fn classify(time_fs: f64, half_period: f64) -> Option<(usize, RevivalKind)> {
    let order = (time_fs / half_period).round();
    if order < 1.0 || (time_fs - order * half_period).abs() >= 0.25 * half_period {
        return None;
    }
    let order = order as usize;
    let kind = if order.is_multiple_of(2) { RevivalKind::Full } else { RevivalKind::Fractional };
    Some((order, kind))
}

/// Revival peaks and the homogeneous T₂ from their decay.
///
/// Damping pulls every maximum of `|F(t)|·exp(−t/T₂)` earlier than the
/// rephasing time (by σ²/T₂ for a revival of width σ), and weak late
/// revivals can drop below the prominence threshold. Peaks are therefore
/// located on the envelope multiplied by `exp(t/T₂)`, iterating T₂ to a
/// fixed point. T₂ comes from `exp(−t/T₂)` fitted to the contrast at the
/// peaks, with a separate amplitude for full and fractional revivals.
pub fn analyze_revivals(
    envelope: &ContrastEnvelope,
    full_period_fs: f64,
    min_prominence: f64,
) -> Result<RevivalAnalysis> {
    if !(full_period_fs > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "revival period must be positive, got {full_period_fs}"
        )));
    }
    let t = envelope.delays_fs();
    let c = envelope.contrast();
    if t.is_empty() {
        return Err(Error::EmptyDelays);
    }
    let half = 0.5 * full_period_fs;

    // seed: the largest sample within ±P/8 of each revival order
    let (mut ts, mut hs, mut gs) = (Vec::new(), Vec::new(), Vec::new());
    let mut order = 1usize;
    while order as f64 * half <= t[t.len() - 1] {
        let center = order as f64 * half;
        let lo = t.partition_point(|&x| x < center - 0.25 * half);
        let hi = t.partition_point(|&x| x <= center + 0.25 * half);
        if hi >= lo + 3 {
            let j = lo + (lo..hi).map(|k| k - lo).max_by(|&a, &b| c[lo + a].total_cmp(&c[lo + b])).unwrap_or(0);
            if j > lo && j + 1 < hi && c[j] > 0.0 {
                let kind = if order.is_multiple_of(2) { RevivalKind::Full } else { RevivalKind::Fractional };
                ts.push(t[j]);
                hs.push(c[j]);
                gs.push(group(kind));
            }
        }
        order += 1;
    }
    let mut fit = fit_grouped_exp_decay(&ts, &hs, &gs, 1)?;
    let mut t2_ps = fit.param("tau_ps").expect("tau_ps");

    let max_iterations = 50;
    for iteration in 1..=max_iterations {
        let t2_fs = ps_to_fs(t2_ps);
        let compensated: Vec<f64> = t.iter().zip(c).map(|(x, v)| v * (x / t2_fs).exp()).collect();
        let comp_env = ContrastEnvelope::new(t.to_vec(), compensated)?;
        let mut peaks = Vec::new();
        let mut unmatched = Vec::new();
        for p in find_revival_peaks(&comp_env, min_prominence) {
            match classify(p.time_fs, half) {
                Some((order, kind)) => {
                    let idx = t.partition_point(|&x| x < p.time_fs);
                    peaks.push(RevivalPeak {
                        time_fs: p.time_fs,
                        height: c[idx],
                        compensated_height: p.height,
                        order,
                        kind,
                    })
                }
                None => unmatched.push(p),
            }
        }
        let times: Vec<f64> = peaks.iter().map(|p| p.time_fs).collect();
        let heights: Vec<f64> = peaks.iter().map(|p| p.height).collect();
        let groups: Vec<usize> = peaks.iter().map(|p| group(p.kind)).collect();
        fit = fit_grouped_exp_decay(&times, &heights, &groups, 1)?;
        let next = fit.param("tau_ps").expect("tau_ps");
        let converged = ((next - t2_ps) / t2_ps).abs() < 1e-12;
        t2_ps = next;
        if converged || iteration == max_iterations {
            return Ok(RevivalAnalysis { t2_ps, fit, peaks, unmatched, iterations: iteration });
        }
    }
    unreachable!("loop returns on its last iteration")
}
