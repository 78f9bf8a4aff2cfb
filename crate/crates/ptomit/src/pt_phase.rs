//! Supermode analysis of the two coupled optical modes: phase classification
//! (symmetric, broken, or at the exceptional point) and linear stability.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::SystemParams;

/// Relative tolerance (in units of γ²) inside which the discriminant is
/// treated as exactly zero.
pub const PHASE_TOL_FACTOR: f64 = 1e-9;

/// Phase of the coupled optical pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PtPhase {
    /// Tunneling dominates the gain-loss contrast: the supermodes share one
    /// decay rate and split in frequency.
    Symmetric,
    /// Gain-loss contrast dominates: the supermodes share one frequency and
    /// split in decay rate.
    Broken,
    /// Exactly at the transition: the supermodes coalesce.
    Exceptional,
}

impl fmt::Display for PtPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            PtPhase::Symmetric => "symmetric",
            PtPhase::Broken => "broken",
            PtPhase::Exceptional => "exceptional",
        };
        f.write_str(label)
    }
}

/// Result of classifying the optical pair at a pump detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtClassification {
    /// Supermode eigenvalue on the positive square-root branch, rad/s.
    #[serde(rename = "lambda_plus")]
    pub eigenvalue_plus: Complex64,
    /// Supermode eigenvalue on the negative square-root branch, rad/s.
    #[serde(rename = "lambda_minus")]
    pub eigenvalue_minus: Complex64,
    /// `J² − ((κ+γ)/2)²` in (rad/s)²; positive in the symmetric phase.
    pub discriminant: f64,
    /// Ternary phase label decided by the discriminant against the
    /// tolerance band.
    #[serde(rename = "phase_label")]
    pub label: PtPhase,
    /// True when the largest eigenvalue real part is nonnegative, i.e. the
    /// linear optical subsystem grows without bound.
    pub unstable: bool,
}

/// Classify the drive-free optical pair. The eigenvalues belong to the
/// coefficient matrix of the two field amplitudes in the pump frame, rows
/// `[−(γ+iΔ_L), iJ; iJ, κ−iΔ_L]`; the pump detuning only shifts their
/// imaginary parts rigidly and never affects the label.
pub fn classify(sys: &SystemParams, pump_detuning: f64) -> PtClassification {
    let gamma = sys.loss_rate;
    let kappa = sys.gain_rate;
    let j = sys.tunneling_rate;

    let mean_rate = 0.5 * (kappa - gamma);
    let contrast = 0.5 * (kappa + gamma);
    let discriminant = j * j - contrast * contrast;
    let tol = PHASE_TOL_FACTOR * gamma * gamma;

    let label = if discriminant > tol {
        PtPhase::Symmetric
    } else if discriminant < -tol {
        PtPhase::Broken
    } else {
        PtPhase::Exceptional
    };

    let center = Complex64::new(mean_rate, -pump_detuning);
    let (plus, minus) = if discriminant >= 0.0 {
        // Imaginary square root: frequency splitting.
        let split = Complex64::new(0.0, discriminant.sqrt());
        (center + split, center - split)
    } else {
        // Real square root: decay-rate splitting.
        let split = Complex64::new((-discriminant).sqrt(), 0.0);
        (center + split, center - split)
    };

    PtClassification {
        eigenvalue_plus: plus,
        eigenvalue_minus: minus,
        discriminant,
        label,
        unstable: plus.re.max(minus.re) >= 0.0,
    }
}

/// Gain rate at which the discriminant vanishes for the given loss and
/// tunneling rates: `κ_critical = 2J − γ`. Returns `None` when that value is
/// negative, i.e. when no gain (κ ≥ 0) can reach the boundary.
pub fn phase_boundary(loss_rate: f64, tunneling_rate: f64) -> Option<f64> {
    let critical = 2.0 * tunneling_rate - loss_rate;
    (critical >= 0.0).then_some(critical)
}
