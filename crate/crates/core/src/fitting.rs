//! Log-linear least-squares fits for decay constants and scaling laws.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::{ContrastEnvelope, FitResult};
use crate::units::fs_to_ps;

/// Options for exponential-decay fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFitOptions {
    /// Samples below this fraction of the maximum are excluded.
    pub noise_floor_rel: f64,
}

impl Default for ExpFitOptions {
    fn default() -> Self {
        Self { noise_floor_rel: 1e-3 }
    }
}

/// Least-squares line through (x, y) with one intercept per group.
#[derive(Debug, Clone, PartialEq)]
struct GroupedLine {
    slope: f64,
    intercepts: Vec<f64>,
    rms: f64,
}

fn grouped_line(x: &[f64], y: &[f64], group: &[usize], n_groups: usize) -> Result<GroupedLine> {
    let mut n = vec![0usize; n_groups];
    let mut sx = vec![0.0; n_groups];
    let mut sy = vec![0.0; n_groups];
    for ((&xi, &yi), &g) in x.iter().zip(y).zip(group) {
        n[g] += 1;
        sx[g] += xi;
        sy[g] += yi;
    }
    let mx: Vec<f64> = sx.iter().zip(&n).map(|(s, &k)| if k > 0 { s / k as f64 } else { 0.0 }).collect();
    let my: Vec<f64> = sy.iter().zip(&n).map(|(s, &k)| if k > 0 { s / k as f64 } else { 0.0 }).collect();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for ((&xi, &yi), &g) in x.iter().zip(y).zip(group) {
        let dx = xi - mx[g];
        sxy += dx * (yi - my[g]);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("abscissae must not all coincide".into()));
    }
    let slope = sxy / sxx;
    let intercepts: Vec<f64> = mx.iter().zip(&my).map(|(x0, y0)| y0 - slope * x0).collect();
    let ss: f64 = x
        .iter()
        .zip(y)
        .zip(group)
        .map(|((&xi, &yi), &g)| (yi - intercepts[g] - slope * xi).powi(2))
        .sum();
    Ok(GroupedLine { slope, intercepts, rms: (ss / x.len() as f64).sqrt() })
}

fn line(x: &[f64], y: &[f64]) -> Result<GroupedLine> {
    grouped_line(x, y, &vec![0; x.len()], 1)
}

fn check_exponent_factor(c: u32) -> Result<f64> {
    match c {
        1 | 2 | 4 => Ok(c as f64),
        _ => Err(Error::InvalidParameter(format!("exponent factor must be 1, 2 or 4, got {c}"))),
    }
}

fn fit_result(params: &[(&str, f64)], rms_residual: f64, n_points: usize) -> FitResult {
    let params: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    FitResult { params, rms_residual, n_points }
}

fn positive_logs(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 && value.is_finite() {
                Ok(value.ln())
            } else {
                Err(Error::NonPositive { index, value })
            }
        })
        .collect()
}

/// Slope check shared by the decay fits: must fall noticeably over the window.
fn decay_slope(slope: f64, span: f64) -> Result<f64> {
    if !(slope < 0.0) || (slope * span).abs() < 1e-9 {
        return Err(Error::NoDecay);
    }
    Ok(slope)
}

/// Fits `contrast ≈ A·exp(−c·t/τ)` by least squares on ln(contrast).
///
/// Returns `tau_ps` and `amplitude`; the residual is in log space.
pub fn fit_exp_decay(envelope: &ContrastEnvelope, c: u32) -> Result<FitResult> {
    fit_exp_decay_with(envelope, c, &ExpFitOptions::default())
}

pub fn fit_exp_decay_with(
    envelope: &ContrastEnvelope,
    c: u32,
    options: &ExpFitOptions,
) -> Result<FitResult> {
    let c = check_exponent_factor(c)?;
    let floor = options.noise_floor_rel * envelope.max();
    let (t, y): (Vec<f64>, Vec<f64>) = envelope
        .delays_fs()
        .iter()
        .zip(envelope.contrast())
        .filter(|(_, &v)| options.noise_floor_rel <= 0.0 || v > floor)
        .map(|(t, v)| (*t, *v))
        .unzip();
    if t.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: t.len() });
    }
    let ln_y = positive_logs(&y)?;
    let fit = line(&t, &ln_y)?;
    let span = t[t.len() - 1] - t[0];
    let slope = decay_slope(fit.slope, span)?;
    let tau_ps = fs_to_ps(-c / slope);
    Ok(fit_result(
        &[("amplitude", fit.intercepts[0].exp()), ("tau_ps", tau_ps)],
        fit.rms,
        t.len(),
    ))
}

/// Fits the squared contrast (fringe intensity) as `A·exp(−c·t/τ)` with
/// the delay axis multiplied by `time_scale`.
///
/// Ramsey uses `time_scale = 1`, the echo uses `1/2` (separation between
/// the first and the rephasing pulse). The noise floor is squared so the
/// same samples survive as in an amplitude fit.
pub fn fit_intensity_decay(
    envelope: &ContrastEnvelope,
    c: u32,
    time_scale: f64,
    options: &ExpFitOptions,
) -> Result<FitResult> {
    if !(time_scale > 0.0) {
        return Err(Error::InvalidParameter(format!("time scale must be positive, got {time_scale}")));
    }
    let t: Vec<f64> = envelope.delays_fs().iter().map(|t| t * time_scale).collect();
    let y: Vec<f64> = envelope.contrast().iter().map(|v| v * v).collect();
    let squared = ContrastEnvelope::new(t, y)?;
    let options = ExpFitOptions { noise_floor_rel: options.noise_floor_rel.powi(2) };
    fit_exp_decay_with(&squared, c, &options)
}

/// Exponential decay with a shared time constant and one amplitude per
/// group: `y ≈ A_g·exp(−c·t/τ)`. Used for revival peaks where full and
/// fractional revivals have different undamped heights.
///
/// Parameters: `tau_ps` and `amplitude_<g>` for each group index present.
pub fn fit_grouped_exp_decay(
    times_fs: &[f64],
    values: &[f64],
    groups: &[usize],
    c: u32,
) -> Result<FitResult> {
    let c = check_exponent_factor(c)?;
    if times_fs.len() != values.len() || times_fs.len() != groups.len() {
        return Err(Error::InvalidParameter("mismatched input lengths".into()));
    }
    // relabel to dense group indices
    let mut labels: Vec<usize> = groups.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let dense: Vec<usize> =
        groups.iter().map(|g| labels.binary_search(g).expect("label present")).collect();
    let needed = labels.len() + 2;
    if times_fs.len() < needed {
        return Err(Error::TooFewPoints { needed, got: times_fs.len() });
    }
    let ln_y = positive_logs(values)?;
    let fit = grouped_line(times_fs, &ln_y, &dense, labels.len())?;
    let span = times_fs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - times_fs.iter().copied().fold(f64::INFINITY, f64::min);
    let slope = decay_slope(fit.slope, span)?;
    let mut params: BTreeMap<String, f64> = labels
        .iter()
        .zip(&fit.intercepts)
        .map(|(g, b)| (format!("amplitude_{g}"), b.exp()))
        .collect();
    params.insert("tau_ps".into(), fs_to_ps(-c / slope));
    Ok(FitResult { params, rms_residual: fit.rms, n_points: times_fs.len() })
}

fn check_xy(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "{} abscissae but {} ordinates",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: x.len() });
    }
    Ok(())
}

/// `y ≈ C·x^(−β)` by least squares on (ln x, ln y). Returns `beta`, `prefactor`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_xy(x, y)?;
    let ln_x = positive_logs(x)?;
    let ln_y = positive_logs(y)?;
    let fit = line(&ln_x, &ln_y)?;
    Ok(fit_result(
        &[("beta", -fit.slope), ("prefactor", fit.intercepts[0].exp())],
        fit.rms,
        x.len(),
    ))
}

/// `y ≈ C·exp(−T/T₀)` by least squares on (T, ln y). Returns `t0_K`, `prefactor`.
pub fn fit_exp_temperature(temperatures_k: &[f64], y: &[f64]) -> Result<FitResult> {
    check_xy(temperatures_k, y)?;
    let ln_y = positive_logs(y)?;
    let fit = line(temperatures_k, &ln_y)?;
    if fit.slope.abs() < 1e-12 {
        return Err(Error::NoTemperatureDependence);
    }
    Ok(fit_result(
        &[("prefactor", fit.intercepts[0].exp()), ("t0_K", -1.0 / fit.slope)],
        fit.rms,
        y.len(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn envelope(t: &[f64], mut f: impl FnMut(f64) -> f64) -> ContrastEnvelope {
        ContrastEnvelope::new(t.to_vec(), t.iter().map(|&x| f(x)).collect()).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exact_t2star_recovery() {
        let t = grid(600.0, 3000.0, 50);
        let env = envelope(&t, |x| 0.8 * (-2.0 * x / 1270.0).exp());
        let fit = fit_exp_decay(&env, 2).unwrap();
        assert_relative_eq!(fit.param("tau_ps").unwrap(), 1.27, max_relative = 1e-9);
        assert_relative_eq!(fit.param("amplitude").unwrap(), 0.8, max_relative = 1e-9);
        assert_eq!(fit.n_points, 50);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn noisy_t2_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let t = grid(600.0, 6000.0, 50);
        let env = envelope(&t, |x| (-4.0 * x / 5220.0).exp() * (1.0 + noise.sample(&mut rng)));
        let tau = fit_exp_decay(&env, 4).unwrap().param("tau_ps").unwrap();
        assert!((tau - 5.22).abs() / 5.22 < 0.02, "tau = {tau}");
    }

    #[test]
    fn constant_contrast_has_no_decay() {
        let t = grid(0.0, 1000.0, 10);
        assert_eq!(fit_exp_decay(&envelope(&t, |_| 0.5), 2), Err(Error::NoDecay));
        assert_eq!(fit_exp_decay(&envelope(&t, |x| 1.0 + x), 2), Err(Error::NoDecay));
    }

    #[test]
    fn floor_and_point_count() {
        let t = grid(0.0, 1000.0, 10);
        let env = envelope(&t, |x| if x < 200.0 { (-x / 100.0).exp() } else { 1e-6 });
        assert_eq!(fit_exp_decay(&env, 1), Err(Error::TooFewPoints { needed: 3, got: 2 }));
        let env = envelope(&t, |x| if x < 100.0 { 1.0 } else { 0.0 });
        assert!(matches!(fit_exp_decay(&env, 1), Err(Error::TooFewPoints { .. })));
        let no_floor = ExpFitOptions { noise_floor_rel: 0.0 };
        assert!(matches!(fit_exp_decay_with(&env, 1, &no_floor), Err(Error::NonPositive { .. })));
        assert!(fit_exp_decay(&env, 3).is_err());
    }

    #[test]
    fn exponent_factor_is_a_reparameterization() {
        let t = grid(0.0, 3000.0, 20);
        let env = envelope(&t, |x| (-x / 900.0).exp() * (1.0 + 0.01 * (x / 77.0).sin()));
        let t2 = fit_exp_decay(&env, 2).unwrap().param("tau_ps").unwrap();
        let t4 = fit_exp_decay(&env, 4).unwrap().param("tau_ps").unwrap();
        assert_eq!(t4 / t2, 2.0);
    }

    #[test]
    fn intensity_fit_matches_amplitude_fit() {
        let t = grid(0.0, 3000.0, 30);
        let env = envelope(&t, |x| (-x / 1500.0).exp());
        let amp = fit_exp_decay(&env, 1).unwrap().param("tau_ps").unwrap();
        let ramsey = fit_intensity_decay(&env, 2, 1.0, &ExpFitOptions::default()).unwrap();
        let echo = fit_intensity_decay(&env, 4, 0.5, &ExpFitOptions::default()).unwrap();
        assert_relative_eq!(ramsey.param("tau_ps").unwrap(), amp, max_relative = 1e-12);
        assert_relative_eq!(echo.param("tau_ps").unwrap(), amp, max_relative = 1e-12);
    }

    #[test]
    fn grouped_decay_shares_the_slope() {
        let t = [3260.0, 6530.0, 9790.0, 13050.0];
        let g = [1, 0, 1, 0];
        let y: Vec<f64> = t
            .iter()
            .zip(&g)
            .map(|(x, k)| (if *k == 0 { 1.0 } else { 0.25 }) * (-*x / 4640.0f64).exp())
            .collect();
        let fit = fit_grouped_exp_decay(&t, &y, &g, 1).unwrap();
        assert_relative_eq!(fit.param("tau_ps").unwrap(), 4.64, max_relative = 1e-12);
        assert_relative_eq!(fit.param("amplitude_1").unwrap(), 0.25, max_relative = 1e-12);
        assert!(matches!(
            fit_grouped_exp_decay(&t[..3], &y[..3], &g[..3], 1),
            Err(Error::TooFewPoints { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn power_law_exact_and_noisy() {
        let x = [1.0, 2.0, 3.0, 4.5, 6.0, 8.0];
        let y: Vec<f64> = x.iter().map(|n: &f64| 5.22 * n.powf(-0.38)).collect();
        assert_relative_eq!(fit_power_law(&x, &y).unwrap().param("beta").unwrap(), 0.38, epsilon = 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 0.03).unwrap();
        let y: Vec<f64> =
            x.iter().map(|n: &f64| 1.27 * n.powf(-0.48) * (1.0 + noise.sample(&mut rng))).collect();
        let beta = fit_power_law(&x, &y).unwrap().param("beta").unwrap();
        assert!((beta - 0.48).abs() < 0.05, "beta = {beta}");

        let flat = fit_power_law(&x, &[2.0; 6]).unwrap();
        assert!(flat.param("beta").unwrap().abs() < 1e-12);
    }

    #[test]
    fn power_law_errors() {
        assert!(matches!(fit_power_law(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::TooFewPoints { .. })));
        assert!(matches!(
            fit_power_law(&[1.0, 0.0, 2.0], &[1.0, 1.0, 1.0]),
            Err(Error::NonPositive { index: 1, .. })
        ));
        assert!(matches!(
            fit_power_law(&[1.0, 2.0, 3.0], &[1.0, -1.0, 1.0]),
            Err(Error::NonPositive { index: 1, .. })
        ));
    }

    #[test]
    fn temperature_law() {
        let temps = [280.0, 290.0, 300.0, 310.0, 320.0];
        let y: Vec<f64> = temps.iter().map(|t| 9.0 * (-*t / 284.0f64).exp()).collect();
        let t0 = fit_exp_temperature(&temps, &y).unwrap().param("t0_K").unwrap();
        assert!((t0 - 284.0).abs() / 284.0 < 1e-3);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.03).unwrap();
        let y: Vec<f64> =
            temps.iter().map(|t| 100.0 * (-t / 62.0f64).exp() * (1.0 + noise.sample(&mut rng))).collect();
        let t0 = fit_exp_temperature(&temps, &y).unwrap().param("t0_K").unwrap();
        assert!((t0 - 62.0).abs() / 62.0 < 0.1, "t0 = {t0}");

        assert_eq!(fit_exp_temperature(&temps, &[1.3; 5]), Err(Error::NoTemperatureDependence));
        assert!(matches!(fit_exp_temperature(&temps[..2], &[1.0; 2]), Err(Error::TooFewPoints { .. })));
    }
}
