//! `fit`: parameter extraction from a two-column CSV.

use std::path::Path;

use clap::ValueEnum;
use qcr_core::fitting::{fit_exp_decay_with, fit_exp_temperature, fit_power_law, ExpFitOptions};
use qcr_core::{ContrastEnvelope, FitResult};

use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    /// `A·exp(−t/τ)`, t in fs, τ reported in ps.
    Exp1,
    /// `A·exp(−2t/τ)`.
    Exp2,
    /// `A·exp(−4t/τ)`.
    Exp4,
    /// `C·x^(−β)`.
    Power,
    /// `C·exp(−T/T₀)`, T in K.
    #[value(name = "arrhenius-like", alias = "arrhenius")]
    ArrheniusLike,
}

/// Parses `x,y` rows. Blank lines and `#` comments are skipped; a
/// non-numeric first row is taken as the header.
pub fn parse_xy(text: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut seen_row = false;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 2 => {
                x.push(v[0]);
                y.push(v[1]);
            }
            Err(_) if !seen_row => {}
            _ => {
                return Err(CliError::Config(format!(
                    "line {}: expected two numeric columns, got `{line}`",
                    k + 1
                )))
            }
        }
        seen_row = true;
    }
    Ok((x, y))
}

pub fn fit_xy(x: Vec<f64>, y: Vec<f64>, model: FitModel, options: &ExpFitOptions) -> Result<FitResult, CliError> {
    let c = match model {
        FitModel::Exp1 => 1,
        FitModel::Exp2 => 2,
        FitModel::Exp4 => 4,
        FitModel::Power => return Ok(fit_power_law(&x, &y)?),
        FitModel::ArrheniusLike => return Ok(fit_exp_temperature(&x, &y)?),
    };
    let env = ContrastEnvelope::new(x, y)?;
    Ok(fit_exp_decay_with(&env, c, options)?)
}

pub fn run(config: &Config, input: &Path, model: FitModel) -> Result<FitResult, CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let (x, y) = parse_xy(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", input.display())),
        other => other,
    })?;
    fit_xy(x, y, model, &ExpFitOptions { noise_floor_rel: config.analysis.noise_floor_rel })
}
