//! Self-consistent steady state of the pumped compound resonator.
//!
//! Eliminating the optical amplitudes from the stationarity conditions turns
//! the static mechanical displacement into the root of a real cubic. The
//! physical branch is the one continuously connected to zero displacement as
//! the pump power is ramped from zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DriveParams, SystemParams};

/// Guard factor for the lasing-threshold check: the steady state is rejected
/// when the optical system determinant falls below this multiple of the
/// squared loss rate.
pub const LASING_GUARD_FACTOR: f64 = 1e-6;

/// Pump-power fractions used for the homotopy that selects the physical
/// root branch of the cubic self-consistency.
pub const HOMOTOPY_FRACTIONS: [f64; 5] = [1e-3, 1e-2, 0.1, 0.3, 1.0];

/// Largest back-substitution residual accepted for a returned steady state.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

/// Stationary operating point of the driven system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    /// Static mechanical displacement, m. Always nonnegative for positive
    /// optomechanical coupling.
    #[serde(rename = "x_s")]
    pub displacement: f64,
    /// Complex intracavity amplitude of the lossy (mechanical) resonator,
    /// in photon-flux units s^(-1/2)·s^(1/2) = dimensionless amplitude whose
    /// squared magnitude is a photon number.
    #[serde(rename = "a1_s")]
    pub lossy_amplitude: Complex64,
    /// Complex intracavity amplitude of the second (gain) resonator.
    #[serde(rename = "a2_s")]
    pub gain_amplitude: Complex64,
    /// Photon number of the lossy resonator, `|a1_s|²`.
    #[serde(rename = "n1")]
    pub lossy_photons: f64,
    /// Photon number of the gain resonator, `|a2_s|²`.
    #[serde(rename = "n2")]
    pub gain_photons: f64,
    /// Largest relative defect of the three stationarity conditions when the
    /// returned values are substituted back.
    pub residual: f64,
}

/// Real cubic `c3·x³ + c2·x² + c1·x + c0` in the static displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicPoly {
    /// Cubic coefficient, zero exactly when the optomechanical coupling (or
    /// the whole optical determinant prefactor) vanishes.
    pub c3: f64,
    /// Quadratic coefficient.
    pub c2: f64,
    /// Linear coefficient.
    pub c1: f64,
    /// Constant coefficient; proportional to pump power.
    pub c0: f64,
}

impl CubicPoly {
    /// Evaluate the polynomial at `x` by Horner's rule.
    pub fn eval(&self, x: f64) -> f64 {
        ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0
    }

    /// Evaluate the derivative at `x`.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1
    }

    /// One Newton step from `x`; returns `x` unchanged where the derivative
    /// vanishes (a multiple root, already as good as it gets).
    fn polish(&self, x: f64) -> f64 {
        let fp = self.eval_derivative(x);
        if fp == 0.0 {
            return x;
        }
        let step = self.eval(x) / fp;
        if step.is_finite() {
            x - step
        } else {
            x
        }
    }

    /// All real roots, each refined by one Newton step. Degenerate leading
    /// coefficients fall back to the quadratic / linear / constant cases,
    /// and a vanishing constant coefficient factors out the exact zero root.
    pub fn real_roots(&self) -> Vec<f64> {
        let mut roots = if self.c0 == 0.0 {
            let mut roots = quadratic_roots_of(self.c3, self.c2, self.c1);
            roots.push(0.0);
            roots
        } else if self.c3 == 0.0 {
            quadratic_roots_of(self.c2, self.c1, self.c0)
        } else {
            self.cubic_roots()
        };
        for r in &mut roots {
            *r = self.polish(*r);
        }
        roots.sort_by(|a, b| a.partial_cmp(b).expect("roots are finite"));
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(b.abs()));
        roots
    }

    /// Real roots that are nonnegative up to rounding; tiny negative values
    /// (within 1e-9 of zero relative to the root scale) are clamped to zero.
    pub fn real_nonnegative_roots(&self) -> Vec<f64> {
        let roots = self.real_roots();
        let scale = roots.iter().fold(0.0_f64, |acc, r| acc.max(r.abs()));
        roots
            .into_iter()
            .filter(|&r| r >= -1e-9 * scale)
            .map(|r| r.max(0.0))
            .collect()
    }

    fn cubic_roots(&self) -> Vec<f64> {
        // Normalize to x³ + b2·x² + b1·x + b0 and depress with x = z - b2/3.
        let b2 = self.c2 / self.c3;
        let b1 = self.c1 / self.c3;
        let b0 = self.c0 / self.c3;
        let shift = b2 / 3.0;
        let p = b1 - b2 * b2 / 3.0;
        let q = b0 - b2 * b1 / 3.0 + 2.0 * b2 * b2 * b2 / 27.0;
        let half_q = 0.5 * q;
        let third_p = p / 3.0;
        let disc = half_q * half_q + third_p * third_p * third_p;

        if disc > 0.0 {
            // One real root. Take the cube root of the larger-magnitude
            // Cardano term (no cancellation) and recover its partner from
            // the product u·v = -p/3.
            let d = disc.sqrt();
            let big = if half_q >= 0.0 { -half_q - d } else { -half_q + d };
            let u = big.cbrt();
            let z = if u == 0.0 { 0.0 } else { u - third_p / u };
            vec![z - shift]
        } else {
            // Three real roots via the trigonometric form (p ≤ 0 here).
            let mp3 = -third_p;
            if mp3 == 0.0 {
                // p = q = 0: triple root at the shift point.
                return vec![-shift];
            }
            let amp = 2.0 * mp3.sqrt();
            let cos_arg = (-half_q / (mp3 * mp3.sqrt())).clamp(-1.0, 1.0);
            let phi = cos_arg.acos() / 3.0;
            (0..3)
                .map(|k| {
                    amp * (phi - 2.0 * std::f64::consts::PI * f64::from(k) / 3.0).cos() - shift
                })
                .collect()
        }
    }
}

fn quadratic_roots_of(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            // Constant polynomial: identically zero has every x as a root;
            // report the origin as the representative root.
            return if c == 0.0 { vec![0.0] } else { vec![] };
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    // Numerically stable quadratic formula: avoid subtracting nearly equal
    // quantities by forming the larger-magnitude root first.
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Determinant of the 2x2 optical subsystem at displacement `x`; the common
/// denominator of both stationary amplitudes.
fn optical_determinant(sys: &SystemParams, pump_detuning: f64, x: f64) -> Complex64 {
    let i = Complex64::I;
    let det_l = Complex64::new(0.0, pump_detuning);
    (det_l - sys.gain_rate)
        * (sys.loss_rate + det_l - i * sys.om_coupling * x)
        + sys.tunneling_rate * sys.tunneling_rate
}

/// Coefficients of the real cubic satisfied by the static displacement,
/// obtained by eliminating the optical amplitudes from the stationarity
/// conditions: `x·|D(x)|² = (g/(m̃ω_m²))·E_L²·(Δ_L² + κ²)`.
pub fn cubic_coefficients(sys: &SystemParams, drive: &DriveParams) -> CubicPoly {
    let g = sys.om_coupling;
    let delta = drive.pump_detuning;
    let kappa = sys.gain_rate;
    let gamma = sys.loss_rate;
    let j2 = sys.tunneling_rate * sys.tunneling_rate;
    let drive_sq = drive.pump_amplitude * drive.pump_amplitude;
    let radiation_pressure = g / (sys.scaled_mass() * sys.mech_freq * sys.mech_freq);

    let delta_sq = delta * delta;
    let kappa_sq = kappa * kappa;
    CubicPoly {
        c3: g * g * (delta_sq + kappa_sq),
        c2: 2.0 * g * delta * (j2 - delta_sq - kappa_sq),
        c1: {
            let re = j2 - kappa * gamma - delta_sq;
            let im = delta * (gamma - kappa);
            re * re + im * im
        },
        c0: -radiation_pressure * drive_sq * (delta_sq + kappa_sq),
    }
}

/// All real roots of the full-power cubic, for diagnostics (bistability
/// inspection). The physical branch returned by [`solve_steady_state`] is
/// one of these.
pub fn steady_state_branches(sys: &SystemParams, drive: &DriveParams) -> Vec<f64> {
    cubic_coefficients(sys, drive).real_roots()
}

fn relative_defect(defect: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        defect / scale
    } else if defect == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Solve for the stationary operating point at the drive's pump power.
///
/// The cubic self-consistency may have up to three real roots; the branch
/// continuously connected to zero displacement at zero power is selected by
/// re-solving at a fixed ladder of pump-power fractions and tracking the
/// nearest root. Near the lasing threshold (vanishing optical determinant)
/// no stationary solution exists and an error is returned.
pub fn solve_steady_state(sys: &SystemParams, drive: &DriveParams) -> Result<SteadyState> {
    let full = cubic_coefficients(sys, drive);

    let mut x = 0.0_f64;
    for fraction in HOMOTOPY_FRACTIONS {
        let staged = CubicPoly {
            c0: full.c0 * fraction,
            ..full
        };
        let roots = staged.real_nonnegative_roots();
        x = roots
            .into_iter()
            .min_by(|a, b| {
                (a - x)
                    .abs()
                    .partial_cmp(&(b - x).abs())
                    .expect("roots are finite")
            })
            .ok_or_else(|| {
                Error::Internal(format!(
                    "cubic has no real nonnegative root at power fraction {fraction}"
                ))
            })?;
    }

    let det = optical_determinant(sys, drive.pump_detuning, x);
    let guard = LASING_GUARD_FACTOR * sys.loss_rate * sys.loss_rate;
    if det.norm() < guard {
        return Err(Error::LasingThreshold {
            denominator: det.norm(),
            guard,
        });
    }

    let i = Complex64::I;
    let pump = Complex64::new(drive.pump_amplitude, 0.0);
    let det_l = Complex64::new(0.0, drive.pump_detuning);
    let lossy = pump * (det_l - sys.gain_rate) / det;
    let gain = i * sys.tunneling_rate * pump / det;
    let n1 = lossy.norm_sqr();
    let n2 = gain.norm_sqr();

    // Back-substitution defects of the three stationarity conditions, each
    // relative to the largest term entering that condition.
    let g = sys.om_coupling;
    let j = sys.tunneling_rate;
    let defect1 = ((-det_l + i * g * x - sys.loss_rate) * lossy + i * j * gain + pump).norm();
    let scale1 = ((det_l - i * g * x + sys.loss_rate) * lossy)
        .norm()
        .max((j * gain).norm())
        .max(drive.pump_amplitude);
    let defect2 = ((-det_l + sys.gain_rate) * gain + i * j * lossy).norm();
    let scale2 = ((det_l - sys.gain_rate) * gain).norm().max((j * lossy).norm());
    let spring = sys.scaled_mass() * sys.mech_freq * sys.mech_freq;
    let defect3 = (spring * x - g * n1).abs();
    let scale3 = (spring * x).abs().max((g * n1).abs());
    let residual = relative_defect(defect1, scale1)
        .max(relative_defect(defect2, scale2))
        .max(relative_defect(defect3, scale3));

    if !residual.is_finite() || residual > RESIDUAL_LIMIT {
        return Err(Error::Internal(format!(
            "steady-state residual {residual:.3e} exceeds {RESIDUAL_LIMIT:.1e}"
        )));
    }

    Ok(SteadyState {
        displacement: x,
        lossy_amplitude: lossy,
        gain_amplitude: gain,
        lossy_photons: n1,
        gain_photons: n2,
        residual,
    })
}
