use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use qcr_core::analytic::normalized_envelope;
use qcr_core::bloch::{apply_pulse_delta, evolve_finite_pulse, evolve_free, run_sequence, Damping};
use qcr_core::experiments::{echo_scan, extract_contrast, ramsey_scan, ScanConfig};
use qcr_core::fitting::{fit_exp_decay, fit_exp_temperature, fit_power_law};
use qcr_core::types::NORM_SLACK;
use qcr_core::{BlochState, ContrastEnvelope, Envelope, EnsembleSpec, ModeSpec, PulseSpec};

fn bloch_state() -> impl Strategy<Value = BlochState> {
    (0.0..=1.0f64, 0.0..PI, 0.0..TAU).prop_map(|(r, theta, phi)| {
        BlochState::new(r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos())
    })
}

/// T₂ in ps (possibly infinite), T₁ ≥ T₂/2 and an equilibrium inversion.
fn damping() -> impl Strategy<Value = Damping> {
    (prop_oneof![Just(f64::INFINITY), 0.05..50.0f64], 0.5..10.0f64, -1.0..=1.0f64, any::<bool>())
        .prop_map(|(t2, k, w_eq, relax)| {
            let t1 = if relax { 0.5 * t2 * k } else { f64::INFINITY };
            Damping { t2_ps: t2, t1_ps: t1, w_eq }
        })
}

/// Modes within a few hundredths of a femtosecond of 5.109 fs.
fn ensemble(t2: f64) -> impl Strategy<Value = EnsembleSpec> {
    prop::collection::vec((-0.03..0.03f64, 0.05..1.0f64), 1..=16).prop_filter_map(
        "distinct periods",
        move |modes| {
            let modes = modes
                .into_iter()
                .map(|(dp, a)| ModeSpec::new(5.109 + dp, a, t2))
                .collect::<qcr_core::Result<Vec<_>>>()
                .ok()?;
            EnsembleSpec::new(modes, 5.109).ok()
        },
    )
}

fn rms(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

proptest! {
    #[test]
    fn delta_pulses_and_free_evolution_stay_in_the_ball(
        s in bloch_state(),
        area in 0.0..TAU,
        phase in -PI..PI,
        duration in 0.0..20_000.0f64,
        det in -0.05..0.05f64,
        d in damping(),
    ) {
        let s = apply_pulse_delta(s, area, phase);
        prop_assert!(s.norm() <= 1.0 + NORM_SLACK);
        let s = evolve_free(s, duration, det, &d).unwrap();
        prop_assert!(s.norm() <= 1.0 + NORM_SLACK, "{:?} -> {}", d, s.norm());
    }

    #[test]
    fn pure_dephasing_contracts(s in bloch_state(), t in 0.0..1e4f64, det in -0.05..0.05f64, t2 in 0.05..50.0f64) {
        let out = evolve_free(s, t, det, &Damping::dephasing(t2)).unwrap();
        prop_assert!(out.norm() <= s.norm() + NORM_SLACK);
    }

    #[test]
    fn free_evolution_composes(
        s in bloch_state(),
        a in 0.0..5000.0f64,
        b in 0.0..5000.0f64,
        det in -0.05..0.05f64,
        d in damping(),
    ) {
        let two_step = evolve_free(evolve_free(s, a, det, &d).unwrap(), b, det, &d).unwrap();
        let one_step = evolve_free(s, a + b, det, &d).unwrap();
        prop_assert!(two_step.distance(&one_step) < 1e-12);
    }

    #[test]
    fn finite_pulses_stay_in_the_ball(
        s in bloch_state(),
        area in 0.0..TAU,
        phase in -PI..PI,
        fwhm in 5.0..100.0f64,
        det in -0.02..0.02f64,
        sech in any::<bool>(),
        d in damping(),
    ) {
        let env = if sech { Envelope::Sech } else { Envelope::Gaussian };
        let p = PulseSpec::shaped(env, fwhm, area, 0.0, phase);
        let out = evolve_finite_pulse(s, &p, det, &d, fwhm / 20.0).unwrap();
        prop_assert!(out.norm() <= 1.0 + NORM_SLACK, "{}", out.norm());
    }

    #[test]
    fn sequences_stay_in_the_ball(
        areas in prop::collection::vec((0.0..TAU, -PI..PI), 1..6),
        det in -0.05..0.05f64,
        d in damping(),
    ) {
        let pulses: Vec<PulseSpec> = areas
            .iter()
            .enumerate()
            .map(|(k, &(a, ph))| PulseSpec::delta(a, 700.0 * k as f64, ph))
            .collect();
        let out = run_sequence(BlochState::GROUND, &pulses, det, &d, 1.0).unwrap();
        prop_assert!(out.norm() <= 1.0 + NORM_SLACK);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ramsey_contrast_matches_closed_form(e in ensemble(4.0)) {
        let delays: Vec<f64> = (0..12_000).map(|i| 600.0 + 0.5 * i as f64).collect();
        let env = extract_contrast(&ramsey_scan(&e, &ScanConfig::default(), &delays).unwrap(), 5.109).unwrap();
        let oracle: Vec<f64> = env.delays_fs().iter().map(|&t| normalized_envelope(t, &e, 4.0)).collect();
        let r = rms(env.contrast(), &oracle);
        prop_assert!(r < 1e-3, "rms {}", r);
    }

    #[test]
    fn echo_rephases_every_ensemble(e in ensemble(f64::INFINITY)) {
        let delays: Vec<f64> = (0..6_000).map(|i| 600.0 + 1.3 * i as f64).collect();
        let tr = echo_scan(&e, &ScanConfig::default(), &delays).unwrap();
        for (tau, w) in delays.iter().zip(tr.signal()) {
            prop_assert!((w + (TAU * tau / 5.109).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn decay_fit_is_scale_equivariant(tau in 0.3..20.0f64, amp in 0.01..10.0f64, k in 0.1..10.0f64) {
        let t: Vec<f64> = (0..60).map(|i| 600.0 + 50.0 * i as f64).collect();
        let y: Vec<f64> = t.iter().map(|&x| amp * (-x / (1000.0 * tau)).exp() * (1.0 + 0.01 * (x / 37.0).sin())).collect();
        let a = fit_exp_decay(&ContrastEnvelope::new(t.clone(), y.clone()).unwrap(), 1).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| k * v).collect();
        let b = fit_exp_decay(&ContrastEnvelope::new(t, scaled).unwrap(), 1).unwrap();
        let (ta, tb) = (a.param("tau_ps").unwrap(), b.param("tau_ps").unwrap());
        prop_assert!((ta - tb).abs() / ta < 1e-9);
        prop_assert!((b.param("amplitude").unwrap() / a.param("amplitude").unwrap() - k).abs() / k < 1e-9);
    }
}

/// Seeded recovery of planted laws from ±2% uniform noise.
#[test]
fn scaling_law_recovery_under_noise() {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..50 {
        let beta = rng.random_range(0.1..1.0);
        let x: Vec<f64> = (0..40).map(|i| 0.5 * 100f64.powf(i as f64 / 39.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-beta) * (1.0 + rng.random_range(-0.02..0.02))).collect();
        let got = fit_power_law(&x, &y).unwrap().param("beta").unwrap();
        assert!((got - beta).abs() / beta < 0.05, "trial {trial}: {got} vs {beta}");

        let t0 = rng.random_range(50.0..400.0);
        let temps: Vec<f64> = (0..40).map(|i| 100.0 + 300.0 * i as f64 / 39.0).collect();
        let y: Vec<f64> =
            temps.iter().map(|t| 5.0 * (-t / t0).exp() * (1.0 + rng.random_range(-0.02..0.02))).collect();
        let got = fit_exp_temperature(&temps, &y).unwrap().param("t0_K").unwrap();
        assert!((got - t0).abs() / t0 < 0.05, "trial {trial}: {got} vs {t0}");
    }
}
