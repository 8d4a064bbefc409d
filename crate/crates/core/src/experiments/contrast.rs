use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::types::{ContrastEnvelope, FringeTrace};

/// Zero level the upper and lower fringe envelopes are measured from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    WindowMean,
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastOptions {
    pub baseline: Baseline,
    /// Windows with fewer samples are dropped.
    pub min_window_samples: usize,
}

impl Default for ContrastOptions {
    fn default() -> Self {
        Self { baseline: Baseline::WindowMean, min_window_samples: 4 }
    }
}

/// Fringe contrast per carrier period: the average of the upper and lower
/// envelope excursions, `(max + |min|)/2` relative to the baseline.
///
/// Averaging both envelopes cancels a slow drift of the trace to first
/// order. Each extremum is refined with the sinusoid through it and its two
/// neighbours, so the result does not depend on where the samples fall
/// within a fringe. The sample is placed midway between the crest and the
/// trough it was measured from, not at the window centre.
pub fn extract_contrast(trace: &FringeTrace, carrier_period_fs: f64) -> Result<ContrastEnvelope> {
    extract_contrast_with(trace, carrier_period_fs, &ContrastOptions::default())
}

pub fn extract_contrast_with(
    trace: &FringeTrace,
    carrier_period_fs: f64,
    options: &ContrastOptions,
) -> Result<ContrastEnvelope> {
    if !(carrier_period_fs > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "carrier period must be positive, got {carrier_period_fs}"
        )));
    }
    let t = trace.delays_fs();
    let y = trace.signal();
    if t.is_empty() {
        return Err(Error::EmptyDelays);
    }
    let max_step = t.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
    if max_step > carrier_period_fs / 8.0 * (1.0 + 1e-9) {
        return Err(Error::Undersampled { step_fs: max_step, max_fs: carrier_period_fs / 8.0 });
    }

    let start = t[0];
    let window_of = |x: f64| ((x - start) / carrier_period_fs).floor() as usize;
    let mut centers = Vec::new();
    let mut contrast = Vec::new();
    let mut lo = 0;
    while lo < t.len() {
        let w = window_of(t[lo]);
        let hi = lo + t[lo..].iter().take_while(|&&x| window_of(x) == w).count();
        if hi - lo >= options.min_window_samples {
            let slice = &y[lo..hi];
            let imax = lo + argmax(slice, |a, b| a > b);
            let imin = lo + argmax(slice, |a, b| a < b);
            let upper = refine_extremum(t, y, imax, carrier_period_fs, true);
            let lower = refine_extremum(t, y, imin, carrier_period_fs, false);
            let base = match options.baseline {
                Baseline::WindowMean => slice.iter().sum::<f64>() / slice.len() as f64,
                Baseline::Constant(b) => b,
            };
            let c = 0.5 * ((upper - base) + (lower - base).abs());
            centers.push(0.5 * (t[imax] + t[imin]));
            contrast.push(c.max(0.0));
        }
        lo = hi;
    }
    ContrastEnvelope::new(centers, contrast)
}

fn argmax(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, values[best]) {
            best = i;
        }
    }
    best
}

/// Crest (or trough) of the sinusoid at the carrier period passing through
/// samples `i−1, i, i+1` (shifted inwards at the trace ends). Falls back to
/// the raw sample on a non-uniform grid.
fn refine_extremum(t: &[f64], y: &[f64], i: usize, period: f64, upper: bool) -> f64 {
    if t.len() < 3 {
        return y[i];
    }
    let raw = y[i];
    let i = i.clamp(1, t.len() - 2);
    let h = t[i + 1] - t[i];
    if ((t[i] - t[i - 1]) - h).abs() > 1e-6 * h {
        return raw;
    }
    let wh = TAU * h / period;
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let a_cos = (y0 + y2 - 2.0 * y1) / (2.0 * (wh.cos() - 1.0));
    let a_sin = (y0 - y2) / (2.0 * wh.sin());
    let offset = y1 - a_cos;
    let amplitude = a_cos.hypot(a_sin);
    if upper {
        offset + amplitude
    } else {
        offset - amplitude
    }
}
