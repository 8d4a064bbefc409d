//! One module per subcommand. Each `run` writes its files into `out` and
//! returns the summary it also writes as JSON.

pub mod analytic;
pub mod fit;
pub mod propagate;
pub mod scan;
pub mod sweep;

use qcr_core::FringeTrace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::ScanSection;
use crate::error::CliError;

/// Readout perturbations of a synthetic trace: multiplicative and additive
/// Gaussian noise from a generator seeded with `seed`, plus linear drift.
pub fn perturb(trace: &FringeTrace, scan: &ScanSection, seed: u64) -> Result<FringeTrace, CliError> {
    for (name, v) in [("noise_std", scan.noise_std), ("noise_rel", scan.noise_rel)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("scan.{name} must be finite and >= 0, got {v}")));
        }
    }
    if !scan.drift_per_ps.is_finite() {
        return Err(CliError::Config("scan.drift_per_ps must be finite".into()));
    }
    if scan.noise_std == 0.0 && scan.noise_rel == 0.0 && scan.drift_per_ps == 0.0 {
        return Ok(trace.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = trace.delays_fs();
    let t_start = t[0];
    Ok(trace.map_signal(|i, y| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        y * (1.0 + scan.noise_rel * a) + scan.noise_std * b + scan.drift_per_ps * (t[i] - t_start) * 1e-3
    }))
}

/// Distinct generator streams for the traces of one run.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream)
}
