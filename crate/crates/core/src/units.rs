//! Unit conventions.
//!
//! Delays and oscillation periods are femtoseconds, relaxation times are
//! picoseconds, energies are meV and temperatures kelvin. Frequencies and
//! detunings are cycles per femtosecond (fs⁻¹), never angular.

use std::f64::consts::TAU;

/// Planck constant h in meV·ps (CODATA 2018, exact in SI).
pub const PLANCK_MEV_PS: f64 = 4.135_667_696;

pub const FS_PER_PS: f64 = 1000.0;

pub fn planck_constant_mev_ps() -> f64 {
    PLANCK_MEV_PS
}

pub fn ps_to_fs(ps: f64) -> f64 {
    ps * FS_PER_PS
}

pub fn fs_to_ps(fs: f64) -> f64 {
    fs / FS_PER_PS
}

/// Optical frequency (fs⁻¹) of a transition with the given period.
pub fn frequency_inv_fs(period_fs: f64) -> f64 {
    1.0 / period_fs
}

/// Energy (meV) of one quantum at frequency `f_inv_fs`.
pub fn frequency_to_mev(f_inv_fs: f64) -> f64 {
    PLANCK_MEV_PS * f_inv_fs * FS_PER_PS
}

pub fn mev_to_frequency(energy_mev: f64) -> f64 {
    energy_mev / (PLANCK_MEV_PS * FS_PER_PS)
}

/// Phase in radians accumulated at frequency `f_inv_fs` over `duration_fs`.
pub fn phase_rad(f_inv_fs: f64, duration_fs: f64) -> f64 {
    TAU * f_inv_fs * duration_fs
}

/// `exp(-duration/T)` for a relaxation time in ps; infinite T gives 1.
pub fn decay_factor(duration_fs: f64, time_ps: f64) -> f64 {
    if time_ps.is_infinite() {
        1.0
    } else {
        (-duration_fs / ps_to_fs(time_ps)).exp()
    }
}

/// Wavelength in nm of light with the given optical period.
pub fn period_to_wavelength_nm(period_fs: f64) -> f64 {
    const C_NM_PER_FS: f64 = 299.792_458;
    period_fs * C_NM_PER_FS
}
