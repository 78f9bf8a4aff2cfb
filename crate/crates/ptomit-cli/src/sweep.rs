//! Validated one-dimensional parameter sweeps and grid constructors.

use crate::CliError;

/// The quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Probe detuning from the optical resonance, rad/s.
    Detuning,
    /// Pump power, W.
    PumpPower,
    /// Gain rate in units of the loss rate, dimensionless.
    GainRatio,
}

impl SweepAxis {
    /// Axis name used in error messages and hashes.
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Detuning => "detuning",
            SweepAxis::PumpPower => "pump_power",
            SweepAxis::GainRatio => "gain_ratio",
        }
    }
}

/// A checked sweep: which quantity varies and the grid it varies over.
/// Construction guarantees the grid is nonempty, finite, and strictly
/// monotone.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// Validate a grid for `axis`.
    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Result<Self, CliError> {
        if values.is_empty() {
            return Err(CliError::Usage(format!(
                "{} sweep has no points",
                axis.name()
            )));
        }
        if let Some(bad) = values.iter().find(|value| !value.is_finite()) {
            return Err(CliError::Usage(format!(
                "{} sweep contains a non-finite value {bad}",
                axis.name()
            )));
        }
        let increasing = values.windows(2).all(|pair| pair[0] < pair[1]);
        let decreasing = values.windows(2).all(|pair| pair[0] > pair[1]);
        if values.len() > 1 && !increasing && !decreasing {
            return Err(CliError::Usage(format!(
                "{} sweep must be strictly monotone",
                axis.name()
            )));
        }
        Ok(SweepSpec { axis, values })
    }
}

/// `n` evenly spaced points covering `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!(
            "a grid needs at least 2 points, got {n}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Usage(format!(
            "grid range [{lo}, {hi}] must be finite with lo < hi"
        )));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|idx| lo + step * idx as f64).collect())
}

/// `n` logarithmically spaced points covering `[lo, hi]`, `lo > 0`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!(
            "a grid needs at least 2 points, got {n}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(CliError::Usage(format!(
            "log grid range [{lo}, {hi}] must be finite with 0 < lo < hi"
        )));
    }
    let ratio = hi / lo;
    Ok((0..n)
        .map(|idx| lo * ratio.powf(idx as f64 / (n - 1) as f64))
        .collect())
}
