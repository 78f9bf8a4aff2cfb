//! Linearized probe response: first-order sideband amplitudes, probe
//! transmission and transmittance spectra, and the optical group delay.
//!
//! The pump establishes the steady state; the weak probe beats against it at
//! the detuning `ξ` and drives first-order sidebands of the displacement and
//! of both cavity fields. Closed forms for all six sideband amplitudes come
//! from eliminating the linear system by hand; an independently coded
//! elimination path is kept for cross-checking.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{DriveParams, SystemParams};
use crate::steady_state::{solve_steady_state, SteadyState};

/// Relative step of the first finite-difference stencil used for the group
/// delay, as a fraction of the loss rate.
pub const DELAY_STEP_FACTOR: f64 = 1e-6;

/// Relative agreement required between successive Richardson levels of the
/// group-delay derivative.
pub const DELAY_RELATIVE_TOL: f64 = 1e-6;

/// Absolute agreement (seconds) that also accepts the derivative; guards the
/// relative test against spurious failure where the delay crosses zero.
pub const DELAY_ABSOLUTE_TOL: f64 = 1e-13;

/// Maximum number of step halvings attempted by the group-delay loop.
pub const DELAY_MAX_HALVINGS: usize = 10;

/// Guard factor for the response-singularity check, relative to the natural
/// scale `m̃·ω_m²·γ⁴` of the common denominator.
pub const SINGULARITY_GUARD_FACTOR: f64 = 1e-12;

/// First-order response of the system to the probe at one detuning.
///
/// "Probe" components oscillate at the probe frequency (the `e^{-iξt}`
/// sideband in the pump frame); "idler" components are the four-wave-mixing
/// partners at the mirrored frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResponse {
    /// Gain-cavity response rate at the probe sideband, rad/s.
    pub gain_mode_rate_probe: Complex64,
    /// Gain-cavity response rate at the idler sideband, rad/s.
    pub gain_mode_rate_idler: Complex64,
    /// Composite optical determinant entering the probe sideband, (rad/s)².
    pub optical_det_probe: Complex64,
    /// Composite optical determinant entering the idler sideband, (rad/s)².
    pub optical_det_idler: Complex64,
    /// Mechanical sideband amplitude at the probe frequency, m.
    pub displacement_probe: Complex64,
    /// Mechanical sideband amplitude at the idler frequency, m; the complex
    /// conjugate of the probe amplitude because the displacement is real.
    pub displacement_idler: Complex64,
    /// Lossy-cavity field sideband at the probe frequency.
    pub lossy_probe: Complex64,
    /// Lossy-cavity field sideband at the idler frequency.
    pub lossy_idler: Complex64,
    /// Gain-cavity field sideband at the probe frequency.
    pub gain_probe: Complex64,
    /// Gain-cavity field sideband at the idler frequency.
    pub gain_idler: Complex64,
    /// Complex transmission amplitude of the probe, dimensionless.
    pub transmission: Complex64,
    /// Power transmittance `|transmission|²`.
    pub transmittance: f64,
    /// Principal-value phase of the transmission, in (-π, π].
    pub phase: f64,
}

/// One row of a transmission spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    /// Probe detuning from the optical resonance, rad/s.
    pub probe_detuning: f64,
    /// Complex transmission amplitude.
    pub transmission: Complex64,
    /// Power transmittance.
    pub transmittance: f64,
    /// Transmission phase; principal value at construction, possibly
    /// unwrapped afterwards for continuous spectra.
    pub phase: f64,
}

/// Building blocks of the closed-form response shared by both code paths.
struct ResponseKernel {
    mech: Complex64,
    rate_probe: Complex64,
    rate_idler: Complex64,
    det_probe: Complex64,
    det_idler: Complex64,
    denominator: Complex64,
    scaled_mass: f64,
    coupling_sq_photons: f64,
}

fn response_kernel(sys: &SystemParams, drive: &DriveParams, ss: &SteadyState) -> ResponseKernel {
    let i = Complex64::I;
    let gamma = sys.loss_rate;
    let kappa = sys.gain_rate;
    let j2 = sys.tunneling_rate * sys.tunneling_rate;
    let g = sys.om_coupling;
    let xi = drive.beat_detuning;
    let delta_l = drive.pump_detuning;
    let scaled_mass = sys.scaled_mass();

    // Mechanical susceptibility denominator (ω_m² - ξ² - iξΓ_m).
    let mech = Complex64::new(
        sys.mech_freq * sys.mech_freq - xi * xi,
        -xi * sys.mech_damping,
    );
    // Gain-cavity rates at the two sidebands: -κ - iξ ± iΔ_L.
    let rate_probe = Complex64::new(-kappa, delta_l - xi);
    let rate_idler = Complex64::new(-kappa, -delta_l - xi);
    // Composite determinants coupling the two cavities at each sideband.
    let shift = g * ss.displacement;
    let det_probe = Complex64::new(gamma, delta_l - shift - xi) * rate_probe + j2;
    let det_idler = Complex64::new(gamma, -delta_l + shift - xi) * rate_idler + j2;

    let coupling_sq_photons = g * g * ss.lossy_photons;
    let denominator = mech * det_probe * det_idler * scaled_mass
        - i * coupling_sq_photons * (det_idler * rate_probe - det_probe * rate_idler);

    ResponseKernel {
        mech,
        rate_probe,
        rate_idler,
        det_probe,
        det_idler,
        denominator,
        scaled_mass,
        coupling_sq_photons,
    }
}

fn singularity_guard(sys: &SystemParams) -> f64 {
    let gamma_sq = sys.loss_rate * sys.loss_rate;
    SINGULARITY_GUARD_FACTOR * sys.scaled_mass() * sys.mech_freq * sys.mech_freq * gamma_sq
        * gamma_sq
}

/// Closed-form first-order response at the drive's probe detuning.
///
/// The steady state must belong to the same system and pump; only its
/// displacement and lossy-cavity amplitude enter. Errors when the common
/// response denominator is numerically singular at this detuning.
pub fn probe_response(
    sys: &SystemParams,
    drive: &DriveParams,
    ss: &SteadyState,
) -> Result<ProbeResponse> {
    let kernel = response_kernel(sys, drive, ss);
    let guard = singularity_guard(sys);
    if kernel.denominator.norm() < guard {
        return Err(Error::ResponseSingularity {
            probe_detuning: drive.probe_detuning,
            denominator: kernel.denominator.norm(),
        });
    }

    let i = Complex64::I;
    let g = sys.om_coupling;
    let j = sys.tunneling_rate;
    let a1 = ss.lossy_amplitude;
    let den = kernel.denominator;
    let den_conj = den.conj();

    // All sideband amplitudes are linear in the probe amplitude; compute the
    // per-unit-probe responses first so the transmission stays well defined
    // even for a vanishing probe.
    let probe_bracket =
        kernel.mech * kernel.det_idler * kernel.scaled_mass
            + i * kernel.coupling_sq_photons * kernel.rate_idler;
    let lossy_probe_unit = probe_bracket * kernel.rate_probe / den;
    let displacement_probe_unit = g * a1.conj() * kernel.det_idler * kernel.rate_probe / den;
    let gain_probe_unit = i * j * probe_bracket / den;

    let idler_core = i * g * g * a1 * a1 * kernel.rate_probe.conj() / den_conj;
    let lossy_idler_unit = idler_core * kernel.rate_idler.conj();
    let gain_idler_unit = i * j * idler_core;

    let eps = drive.probe_amplitude;
    let transmission = Complex64::new(1.0, 0.0) - 2.0 * sys.loss_rate * lossy_probe_unit;

    Ok(ProbeResponse {
        gain_mode_rate_probe: kernel.rate_probe,
        gain_mode_rate_idler: kernel.rate_idler,
        optical_det_probe: kernel.det_probe,
        optical_det_idler: kernel.det_idler,
        displacement_probe: displacement_probe_unit * eps,
        displacement_idler: (displacement_probe_unit * eps).conj(),
        lossy_probe: lossy_probe_unit * eps,
        lossy_idler: lossy_idler_unit * eps,
        gain_probe: gain_probe_unit * eps,
        gain_idler: gain_idler_unit * eps,
        transmission,
        transmittance: transmission.norm_sqr(),
        phase: transmission.arg(),
    })
}

/// Independent evaluation of the lossy-cavity probe sideband by sequential
/// elimination (nested fractions) instead of the expanded closed form; used
/// to cross-check [`probe_response`].
pub fn probe_sideband_eliminated(
    sys: &SystemParams,
    drive: &DriveParams,
    ss: &SteadyState,
) -> Result<Complex64> {
    let kernel = response_kernel(sys, drive, ss);
    let i = Complex64::I;

    let inner = kernel.scaled_mass * kernel.mech * kernel.det_idler
        + i * kernel.coupling_sq_photons * kernel.rate_idler;
    if inner.norm() == 0.0 {
        return Err(Error::ResponseSingularity {
            probe_detuning: drive.probe_detuning,
            denominator: 0.0,
        });
    }
    let outer = kernel.det_probe
        - i * kernel.coupling_sq_photons * kernel.rate_probe * kernel.det_idler / inner;
    if outer.norm() == 0.0 {
        return Err(Error::ResponseSingularity {
            probe_detuning: drive.probe_detuning,
            denominator: 0.0,
        });
    }
    Ok(drive.probe_amplitude * kernel.rate_probe / outer)
}

/// Lossy-cavity probe sideband for a system with no tunneling, derived by
/// setting the coupling to the second cavity to zero symbolically before
/// solving; an independent reduction used in tests.
pub fn single_cavity_probe_sideband(
    sys: &SystemParams,
    drive: &DriveParams,
    ss: &SteadyState,
) -> Result<Complex64> {
    let i = Complex64::I;
    let g = sys.om_coupling;
    let shift = g * ss.displacement;
    let xi = drive.beat_detuning;
    let mech = Complex64::new(
        sys.mech_freq * sys.mech_freq - xi * xi,
        -xi * sys.mech_damping,
    );
    let s_probe = Complex64::new(sys.loss_rate, drive.pump_detuning - shift - xi);
    let s_idler = Complex64::new(sys.loss_rate, -drive.pump_detuning + shift - xi);
    let scaled_mass = sys.scaled_mass();
    let coupling_sq_photons = g * g * ss.lossy_photons;

    let numerator = mech * scaled_mass * s_idler + i * coupling_sq_photons;
    let denominator = mech * scaled_mass * s_probe * s_idler
        - i * coupling_sq_photons * (s_idler - s_probe);
    // Natural scale of this reduced denominator: two rate factors instead of
    // the four in the full two-cavity denominator.
    let gamma_sq = sys.loss_rate * sys.loss_rate;
    let guard =
        SINGULARITY_GUARD_FACTOR * scaled_mass * sys.mech_freq * sys.mech_freq * gamma_sq;
    if denominator.norm() < guard {
        return Err(Error::ResponseSingularity {
            probe_detuning: drive.probe_detuning,
            denominator: denominator.norm(),
        });
    }
    Ok(numerator * drive.probe_amplitude / denominator)
}

/// Relative defects of the six linearized sideband equations when the
/// closed-form response is substituted back. Used as an internal-consistency
/// oracle: every entry should sit at rounding level.
pub fn sideband_equation_defects(
    sys: &SystemParams,
    drive: &DriveParams,
    ss: &SteadyState,
    resp: &ProbeResponse,
) -> [f64; 6] {
    let i = Complex64::I;
    let g = sys.om_coupling;
    let j = sys.tunneling_rate;
    let gamma = sys.loss_rate;
    let xi = drive.beat_detuning;
    let delta_l = drive.pump_detuning;
    let shift = g * ss.displacement;
    let a1 = ss.lossy_amplitude;
    let scaled_mass = sys.scaled_mass();
    let mech = Complex64::new(
        sys.mech_freq * sys.mech_freq - xi * xi,
        -xi * sys.mech_damping,
    );

    let rel = |defect: f64, scale: f64| -> f64 {
        if scale > 0.0 {
            defect / scale
        } else if defect == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };

    let lossy_probe_rate = Complex64::new(gamma, delta_l - shift - xi);
    let lossy_idler_rate = Complex64::new(gamma, -delta_l + shift - xi);
    let eps = Complex64::new(drive.probe_amplitude, 0.0);

    // Lossy cavity, probe sideband.
    let t1 = lossy_probe_rate * resp.lossy_probe;
    let t2 = i * g * a1 * resp.displacement_probe;
    let t3 = i * j * resp.gain_probe;
    let d1 = rel(
        (t1 - t2 - t3 - eps).norm(),
        t1.norm().max(t2.norm()).max(t3.norm()).max(eps.norm()),
    );

    // Lossy cavity, idler sideband (conjugated equation).
    let t1 = lossy_idler_rate * resp.lossy_idler.conj();
    let t2 = i * g * a1.conj() * resp.displacement_probe;
    let t3 = i * j * resp.gain_idler.conj();
    let d2 = rel(
        (t1 + t2 + t3).norm(),
        t1.norm().max(t2.norm()).max(t3.norm()),
    );

    // Gain cavity, probe sideband.
    let t1 = resp.gain_mode_rate_probe * resp.gain_probe;
    let t2 = i * j * resp.lossy_probe;
    let d3 = rel((t1 - t2).norm(), t1.norm().max(t2.norm()));

    // Gain cavity, idler sideband (conjugated equation).
    let t1 = resp.gain_mode_rate_idler * resp.gain_idler.conj();
    let t2 = i * j * resp.lossy_idler.conj();
    let d4 = rel((t1 + t2).norm(), t1.norm().max(t2.norm()));

    // Mechanical sideband.
    let t1 = mech * resp.displacement_probe;
    let t2 = (g / scaled_mass) * (a1.conj() * resp.lossy_probe + a1 * resp.lossy_idler.conj());
    let d5 = rel((t1 - t2).norm(), t1.norm().max(t2.norm()));

    // Reality of the displacement.
    let d6 = rel(
        (resp.displacement_idler - resp.displacement_probe.conj()).norm(),
        resp.displacement_probe.norm(),
    );

    [d1, d2, d3, d4, d5, d6]
}

impl SpectrumPoint {
    fn from_response(probe_detuning: f64, resp: &ProbeResponse) -> Self {
        SpectrumPoint {
            probe_detuning,
            transmission: resp.transmission,
            transmittance: resp.transmittance,
            phase: resp.phase,
        }
    }
}

/// Transmission spectrum over a probe-detuning grid. The pump steady state
/// is solved once and reused; the first singular grid point aborts the whole
/// sweep (use [`spectrum_lenient`] to keep going).
pub fn spectrum(
    sys: &SystemParams,
    drive_base: &DriveParams,
    probe_detunings: &[f64],
) -> Result<Vec<SpectrumPoint>> {
    if probe_detunings.is_empty() {
        return Err(Error::InvalidParameter {
            field: "Delta_p",
            message: "detuning grid must be nonempty".into(),
        });
    }
    let ss = solve_steady_state(sys, drive_base)?;
    probe_detunings
        .iter()
        .map(|&detuning| {
            let drive = drive_base.with_probe_detuning(detuning, sys)?;
            let resp = probe_response(sys, &drive, &ss)?;
            Ok(SpectrumPoint::from_response(detuning, &resp))
        })
        .collect()
}

/// Like [`spectrum`], but singular grid points are reported per point
/// instead of aborting the sweep. The outer error covers failures that sink
/// every point (invalid grid or no steady state).
pub fn spectrum_lenient(
    sys: &SystemParams,
    drive_base: &DriveParams,
    probe_detunings: &[f64],
) -> Result<Vec<(f64, Result<SpectrumPoint>)>> {
    if probe_detunings.is_empty() {
        return Err(Error::InvalidParameter {
            field: "Delta_p",
            message: "detuning grid must be nonempty".into(),
        });
    }
    let ss = solve_steady_state(sys, drive_base)?;
    Ok(probe_detunings
        .iter()
        .map(|&detuning| {
            let point = drive_base
                .with_probe_detuning(detuning, sys)
                .and_then(|drive| probe_response(sys, &drive, &ss))
                .map(|resp| SpectrumPoint::from_response(detuning, &resp));
            (detuning, point)
        })
        .collect())
}

/// Unwrap a phase series in place so it is continuous along the grid,
/// keeping the value at `anchor` fixed at its principal value.
pub fn unwrap_phase_series(phases: &mut [f64], anchor: usize) {
    use std::f64::consts::TAU;
    if phases.is_empty() {
        return;
    }
    let anchor = anchor.min(phases.len() - 1);
    for idx in (anchor + 1)..phases.len() {
        let jump = ((phases[idx] - phases[idx - 1]) / TAU).round();
        phases[idx] -= TAU * jump;
    }
    for idx in (0..anchor).rev() {
        let jump = ((phases[idx] - phases[idx + 1]) / TAU).round();
        phases[idx] -= TAU * jump;
    }
}

/// Indices of strict local maxima by three-point comparison.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect()
}

/// Indices of strict local minima by three-point comparison.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] < values[i - 1] && values[i] < values[i + 1])
        .collect()
}

/// Header of the spectrum CSV serialization.
pub const SPECTRUM_CSV_HEADER: &str = "delta_p_over_omega_m,eta,phase_rad,t_re,t_im";

/// Serialize a spectrum as CSV: detuning in mechanical-frequency units, the
/// transmittance, the (already unwrapped) phase, and the complex
/// transmission, all at 17 significant digits.
pub fn spectrum_csv(points: &[SpectrumPoint], mech_freq: f64) -> String {
    let mut out = String::with_capacity(32 + 96 * points.len());
    out.push_str(SPECTRUM_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            p.probe_detuning / mech_freq,
            p.transmittance,
            p.phase,
            p.transmission.re,
            p.transmission.im,
        ));
    }
    out
}

fn phase_at(
    sys: &SystemParams,
    drive: &DriveParams,
    ss: &SteadyState,
    probe_detuning: f64,
) -> Result<f64> {
    let shifted = drive.with_probe_detuning(probe_detuning, sys)?;
    Ok(probe_response(sys, &shifted, ss)?.phase)
}

fn stencil_derivative(
    sys: &SystemParams,
    drive: &DriveParams,
    ss: &SteadyState,
    center: f64,
    center_phase: f64,
    h: f64,
) -> Result<f64> {
    use std::f64::consts::TAU;
    let offsets = [-2.0, -1.0, 1.0, 2.0];
    let mut phases = [0.0_f64; 4];
    for (phase, offset) in phases.iter_mut().zip(offsets) {
        let mut p = phase_at(sys, drive, ss, center + offset * h)?;
        // Unwrap each stencil phase onto the branch of the center value.
        p -= TAU * ((p - center_phase) / TAU).round();
        *phase = p;
    }
    Ok((phases[0] - 8.0 * phases[1] + 8.0 * phases[2] - phases[3]) / (12.0 * h))
}

/// Optical group delay `dφ/dω_p` (seconds) at the drive's probe detuning.
///
/// Five-point centered differences with step-halving verification: the
/// stencil starts at a fixed fraction of the loss rate and is halved until
/// two successive estimates agree to [`DELAY_RELATIVE_TOL`] (relative) or
/// [`DELAY_ABSOLUTE_TOL`] (absolute), returning the finer estimate.
pub fn group_delay(sys: &SystemParams, drive: &DriveParams) -> Result<f64> {
    let ss = solve_steady_state(sys, drive)?;
    let center = drive.probe_detuning;
    let center_phase = phase_at(sys, drive, &ss, center)?;

    let mut h = DELAY_STEP_FACTOR * sys.loss_rate;
    let mut coarse = stencil_derivative(sys, drive, &ss, center, center_phase, h)?;
    for _ in 0..DELAY_MAX_HALVINGS {
        let fine = stencil_derivative(sys, drive, &ss, center, center_phase, h / 2.0)?;
        let diff = (coarse - fine).abs();
        if diff <= DELAY_RELATIVE_TOL * fine.abs() || diff <= DELAY_ABSOLUTE_TOL {
            return Ok(fine);
        }
        h /= 2.0;
        coarse = fine;
    }
    Err(Error::DerivativeUnstable { step: h })
}

/// Closed-form approximation to the resonant transmittance (zero pump
/// detuning, zero beat detuning, negligible static displacement): the
/// balance of tunneling against the loss-gain product controls the peak.
/// Errors at the exact pole where the tunneling rate squared equals that
/// product.
pub fn resonant_transmittance_approx(sys: &SystemParams, ss: &SteadyState) -> Result<f64> {
    let gamma = sys.loss_rate;
    let kappa = sys.gain_rate;
    let balance = sys.tunneling_rate * sys.tunneling_rate - kappa * gamma;
    if balance == 0.0 {
        return Err(Error::ApproxPole);
    }
    let spring = sys.scaled_mass() * sys.mech_freq * sys.mech_freq;
    let bracket = Complex64::new(
        spring * balance,
        -sys.om_coupling * sys.om_coupling * ss.lossy_photons * kappa,
    );
    let t = 1.0 + 2.0 * kappa * gamma * bracket / (spring * balance * balance);
    Ok(t.norm_sqr())
}
