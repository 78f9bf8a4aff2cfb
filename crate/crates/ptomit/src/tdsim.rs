//! Time-domain oracle: direct integration of the mean-field equations of
//! motion in the pump rotating frame, plus demodulation of the probe
//! sideband. Everything here exists to cross-check the frequency-domain
//! response through a completely independent numerical route.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{derive_params, DriveParams, SystemParams};
use crate::pt_phase::classify;
use crate::response::probe_response;
use crate::steady_state::solve_steady_state;

/// Any state magnitude beyond this aborts the integration as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Largest accepted relative drift of the demodulated amplitude between the
/// two halves of the averaging window.
pub const DRIFT_LIMIT: f64 = 1e-4;

/// Instantaneous state of the four dynamical variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryState {
    /// Mechanical displacement, m.
    pub displacement: f64,
    /// Mechanical velocity, m/s.
    pub velocity: f64,
    /// Lossy-cavity field amplitude in the pump frame.
    pub lossy: Complex64,
    /// Gain-cavity field amplitude in the pump frame.
    pub gain: Complex64,
}

impl TrajectoryState {
    /// The all-zero initial state.
    pub const ZERO: TrajectoryState = TrajectoryState {
        displacement: 0.0,
        velocity: 0.0,
        lossy: Complex64::new(0.0, 0.0),
        gain: Complex64::new(0.0, 0.0),
    };

    fn max_magnitude(&self) -> f64 {
        self.displacement
            .abs()
            .max(self.velocity.abs())
            .max(self.lossy.norm())
            .max(self.gain.norm())
    }

    fn is_finite(&self) -> bool {
        self.displacement.is_finite()
            && self.velocity.is_finite()
            && self.lossy.is_finite()
            && self.gain.is_finite()
    }
}

/// Sampled integration output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Integration step, s.
    pub step: f64,
    /// Number of steps between recorded samples.
    pub stride: usize,
    /// Sample times, s.
    pub times: Vec<f64>,
    /// Sampled states, aligned with `times`.
    pub states: Vec<TrajectoryState>,
}

impl Trajectory {
    /// Sample spacing, s.
    pub fn sample_spacing(&self) -> f64 {
        self.step * self.stride as f64
    }
}

/// Demodulated probe sideband and its comparison with the frequency-domain
/// response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemodResult {
    /// Estimated lossy-cavity probe sideband amplitude.
    pub probe_component: Complex64,
    /// Transmission inferred from the sideband; exactly one when the probe
    /// amplitude is zero (no probe, nothing transmitted or absorbed).
    pub transmission_est: Complex64,
    /// `|transmission_est|²`.
    pub transmittance_est: f64,
    /// Relative deviation of the sideband estimate from the closed-form
    /// response at the same drive (absolute deviation when the closed form
    /// is exactly zero).
    pub rel_err_vs_freq_domain: f64,
}

struct Derivative {
    displacement: f64,
    velocity: f64,
    lossy: Complex64,
    gain: Complex64,
}

struct Dynamics {
    mech_damping: f64,
    spring: f64,
    radiation_pressure: f64,
    lossy_coeff: Complex64,
    gain_coeff: Complex64,
    tunneling: Complex64,
    coupling: f64,
    pump: Complex64,
    probe: Complex64,
    beat: f64,
}

impl Dynamics {
    fn new(sys: &SystemParams, drive: &DriveParams) -> Dynamics {
        Dynamics {
            mech_damping: sys.mech_damping,
            spring: sys.mech_freq * sys.mech_freq,
            radiation_pressure: sys.om_coupling / sys.scaled_mass(),
            lossy_coeff: Complex64::new(-sys.loss_rate, -drive.pump_detuning),
            gain_coeff: Complex64::new(sys.gain_rate, -drive.pump_detuning),
            tunneling: Complex64::new(0.0, sys.tunneling_rate),
            coupling: sys.om_coupling,
            pump: Complex64::new(drive.pump_amplitude, 0.0),
            probe: Complex64::new(drive.probe_amplitude, 0.0),
            beat: drive.beat_detuning,
        }
    }

    fn eval(&self, t: f64, s: &TrajectoryState) -> Derivative {
        let (sin, cos) = (-self.beat * t).sin_cos();
        let probe_drive = self.probe * Complex64::new(cos, sin);
        let photon = s.lossy.norm_sqr();
        Derivative {
            displacement: s.velocity,
            velocity: -self.mech_damping * s.velocity - self.spring * s.displacement
                + self.radiation_pressure * photon,
            lossy: (self.lossy_coeff + Complex64::new(0.0, self.coupling * s.displacement))
                * s.lossy
                + self.tunneling * s.gain
                + self.pump
                + probe_drive,
            gain: self.gain_coeff * s.gain + self.tunneling * s.lossy,
        }
    }
}

fn advanced(s: &TrajectoryState, d: &Derivative, h: f64) -> TrajectoryState {
    TrajectoryState {
        displacement: s.displacement + h * d.displacement,
        velocity: s.velocity + h * d.velocity,
        lossy: s.lossy + h * d.lossy,
        gain: s.gain + h * d.gain,
    }
}

/// Largest angular frequency present in the dynamics; the step-size
/// precondition is expressed against this.
pub fn max_dynamic_frequency(sys: &SystemParams, drive: &DriveParams) -> f64 {
    sys.mech_freq
        .max(drive.beat_detuning.abs())
        .max(sys.tunneling_rate)
        .max(sys.loss_rate)
        .max(sys.gain_rate.abs())
}

/// Integration step that divides the probe beat period (or the mechanical
/// period when the beat detuning is zero) into an integer number of steps
/// while resolving the fastest dynamical period with at least
/// `steps_per_period` samples.
pub fn aligned_step(sys: &SystemParams, drive: &DriveParams, steps_per_period: usize) -> f64 {
    use std::f64::consts::TAU;
    let target = TAU / (max_dynamic_frequency(sys, drive) * steps_per_period as f64);
    let reference = if drive.beat_detuning != 0.0 {
        TAU / drive.beat_detuning.abs()
    } else {
        TAU / sys.mech_freq
    };
    let per_reference = (reference / target).round().max(1.0);
    reference / per_reference
}

/// Time for initial transients to decay to numerical irrelevance: forty
/// lifetimes of the slowest decaying mode (optical supermodes and the
/// mechanical envelope).
pub fn transient_time(sys: &SystemParams) -> f64 {
    let pt = classify(sys, 0.0);
    let mut slowest = sys.mech_damping;
    for decay in [-pt.eigenvalue_plus.re, -pt.eigenvalue_minus.re] {
        if decay > 0.0 {
            slowest = slowest.min(decay);
        }
    }
    40.0 / slowest
}

/// Fixed-step classical RK4 integration of the mean-field equations in the
/// pump rotating frame, sampling every `stride` steps (the initial state is
/// sample zero). The step must resolve the fastest dynamical frequency with
/// at least 50 steps per period. Divergence (non-finite values or any
/// magnitude beyond [`DIVERGENCE_LIMIT`]) aborts with the first bad time.
pub fn integrate(
    sys: &SystemParams,
    drive: &DriveParams,
    t_end: f64,
    dt: f64,
    initial: TrajectoryState,
    stride: usize,
) -> Result<Trajectory> {
    use std::f64::consts::TAU;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "dt",
            message: format!("must be positive and finite, got {dt}"),
        });
    }
    // Tiny relative slack so a step of exactly one-fiftieth of the fastest
    // period is not rejected over the rounding of the bound itself.
    let limit = TAU / (50.0 * max_dynamic_frequency(sys, drive)) * (1.0 + 1e-9);
    if dt > limit {
        return Err(Error::InvalidParameter {
            field: "dt",
            message: format!(
                "step {dt:.6e} s exceeds the resolution bound {limit:.6e} s \
                 (50 steps per fastest period)"
            ),
        });
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "t_end",
            message: format!("must be positive and finite, got {t_end}"),
        });
    }
    if stride == 0 {
        return Err(Error::InvalidParameter {
            field: "stride",
            message: "must be at least 1".into(),
        });
    }

    let dynamics = Dynamics::new(sys, drive);
    let steps = (t_end / dt).ceil() as usize;
    let mut state = initial;
    let mut times = Vec::with_capacity(steps / stride + 2);
    let mut states = Vec::with_capacity(steps / stride + 2);
    times.push(0.0);
    states.push(state);

    for step_index in 0..steps {
        let t = step_index as f64 * dt;
        let k1 = dynamics.eval(t, &state);
        let mid1 = advanced(&state, &k1, 0.5 * dt);
        let k2 = dynamics.eval(t + 0.5 * dt, &mid1);
        let mid2 = advanced(&state, &k2, 0.5 * dt);
        let k3 = dynamics.eval(t + 0.5 * dt, &mid2);
        let end = advanced(&state, &k3, dt);
        let k4 = dynamics.eval(t + dt, &end);

        let sixth = dt / 6.0;
        state = TrajectoryState {
            displacement: state.displacement
                + sixth
                    * (k1.displacement
                        + 2.0 * k2.displacement
                        + 2.0 * k3.displacement
                        + k4.displacement),
            velocity: state.velocity
                + sixth * (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity),
            lossy: state.lossy + sixth * (k1.lossy + 2.0 * k2.lossy + 2.0 * k3.lossy + k4.lossy),
            gain: state.gain + sixth * (k1.gain + 2.0 * k2.gain + 2.0 * k3.gain + k4.gain),
        };

        let t_next = (step_index + 1) as f64 * dt;
        if !state.is_finite() || state.max_magnitude() > DIVERGENCE_LIMIT {
            return Err(Error::Unstable {
                first_bad_time: t_next,
            });
        }
        if (step_index + 1) % stride == 0 {
            times.push(t_next);
            states.push(state);
        }
    }

    Ok(Trajectory {
        step: dt,
        stride,
        times,
        states,
    })
}

fn window_mean(traj: &Trajectory, count: usize) -> Complex64 {
    let start = traj.states.len() - count;
    let sum: Complex64 = traj.states[start..].iter().map(|s| s.lossy).sum();
    sum / count as f64
}

fn demod_sum(traj: &Trajectory, range: std::ops::Range<usize>, mean: Complex64, beat: f64)
    -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for idx in range.clone() {
        let t = traj.times[idx];
        let (sin, cos) = (beat * t).sin_cos();
        sum += (traj.states[idx].lossy - mean) * Complex64::new(cos, sin);
    }
    sum / range.len() as f64
}

fn freq_domain_reference(sys: &SystemParams, drive: &DriveParams) -> Result<Complex64> {
    let ss = solve_steady_state(sys, drive)?;
    Ok(probe_response(sys, drive, &ss)?.lossy_probe)
}

fn build_result(
    sys: &SystemParams,
    drive: &DriveParams,
    estimate: Complex64,
) -> Result<DemodResult> {
    let transmission_est = if drive.probe_amplitude > 0.0 {
        1.0 - 2.0 * sys.loss_rate * estimate / drive.probe_amplitude
    } else {
        Complex64::new(1.0, 0.0)
    };
    let reference = freq_domain_reference(sys, drive)?;
    let rel_err = if reference.norm() > 0.0 {
        (estimate - reference).norm() / reference.norm()
    } else {
        estimate.norm()
    };
    Ok(DemodResult {
        probe_component: estimate,
        transmission_est,
        transmittance_est: transmission_est.norm_sqr(),
        rel_err_vs_freq_domain: rel_err,
    })
}

fn drift_check(
    first_half: Complex64,
    second_half: Complex64,
    estimate: Complex64,
    noise_floor: f64,
) -> Result<()> {
    let drift = (first_half - second_half).norm();
    if drift <= DRIFT_LIMIT * estimate.norm() + noise_floor {
        Ok(())
    } else {
        Err(Error::NotConverged {
            drift: drift / estimate.norm().max(noise_floor).max(f64::MIN_POSITIVE),
            limit: DRIFT_LIMIT,
        })
    }
}

/// Demodulate the probe sideband of the lossy-cavity field over the last
/// `window_periods` beat periods: subtract the window mean, rotate at the
/// beat frequency, and average. The window must hold an even number of
/// periods so the drift gate can compare its two halves.
pub fn demodulate(
    traj: &Trajectory,
    sys: &SystemParams,
    drive: &DriveParams,
    window_periods: usize,
) -> Result<DemodResult> {
    use std::f64::consts::TAU;
    let beat = drive.beat_detuning;
    if beat == 0.0 {
        return Err(Error::InvalidParameter {
            field: "xi",
            message: "beat detuning is zero; use demodulate_static".into(),
        });
    }
    if window_periods < 2 || !window_periods.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            field: "window",
            message: format!("window must be an even period count >= 2, got {window_periods}"),
        });
    }
    let spacing = traj.sample_spacing();
    let beat_period = TAU / beat.abs();
    let count = (window_periods as f64 * beat_period / spacing).round() as usize;
    if count < 8 || count > traj.states.len() {
        return Err(Error::InvalidParameter {
            field: "window",
            message: format!(
                "window of {count} samples is outside the trajectory ({} samples)",
                traj.states.len()
            ),
        });
    }

    let len = traj.states.len();
    let start = len - count;
    let half = count / 2;
    let mean = window_mean(traj, count);
    let estimate = demod_sum(traj, start..len, mean, beat);
    let first_half = demod_sum(traj, start..start + half, mean, beat);
    let second_half = demod_sum(traj, start + half..start + 2 * half, mean, beat);

    let noise_floor = 1e-10 * mean.norm();
    drift_check(first_half, second_half, estimate, noise_floor)?;
    build_result(sys, drive, estimate)
}

/// Demodulate a zero-beat-detuning probe: the probe only shifts the DC
/// operating point, so the sideband amplitude is the difference between the
/// window means of a probed run and a pump-only baseline run over the same
/// window length (seconds).
pub fn demodulate_static(
    traj: &Trajectory,
    baseline: &Trajectory,
    sys: &SystemParams,
    drive: &DriveParams,
    window: f64,
) -> Result<DemodResult> {
    let count_of = |t: &Trajectory| -> Result<usize> {
        let count = (window / t.sample_spacing()).round() as usize;
        if count < 8 || count > t.states.len() {
            return Err(Error::InvalidParameter {
                field: "window",
                message: format!(
                    "window of {count} samples is outside the trajectory ({} samples)",
                    t.states.len()
                ),
            });
        }
        Ok(count)
    };
    let count = count_of(traj)?;
    let base_count = count_of(baseline)?;

    let half_mean = |t: &Trajectory, n: usize, which: usize| -> Complex64 {
        let start = t.states.len() - n + which * (n / 2);
        let end = start + n / 2;
        let sum: Complex64 = t.states[start..end].iter().map(|s| s.lossy).sum();
        sum / (n / 2) as f64
    };

    let estimate = window_mean(traj, count) - window_mean(baseline, base_count);
    let first_half = half_mean(traj, count, 0) - half_mean(baseline, base_count, 0);
    let second_half = half_mean(traj, count, 1) - half_mean(baseline, base_count, 1);

    let noise_floor = 1e-10 * window_mean(traj, count).norm();
    drift_check(first_half, second_half, estimate, noise_floor)?;
    build_result(sys, drive, estimate)
}

/// A parameter point mapped to dimensionless desk-scale units, together
/// with the scales that make the mapping bijective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessPoint {
    /// System with unit loss rate: all rates in units of γ, displacement in
    /// units of the zero-point length.
    pub system: SystemParams,
    /// Drive with field amplitudes in units of γ.
    pub drive: DriveParams,
    /// Seconds per dimensionless time unit (1/γ).
    pub time_scale: f64,
    /// Meters per dimensionless displacement unit (the zero-point length).
    pub length_scale: f64,
}

/// Map a parameter point to dimensionless units: time in 1/γ, rates in γ,
/// displacement in zero-point lengths. The probe transmission is invariant
/// under this mapping, which makes desk-scale oracle runs equivalent to the
/// SI point.
pub fn to_dimensionless(sys: &SystemParams, drive: &DriveParams) -> Result<DimensionlessPoint> {
    let gamma = sys.loss_rate;
    let mech_freq = sys.mech_freq / gamma;
    let raw = SystemParams {
        optical_freq: sys.optical_freq / gamma,
        radius: None,
        mech_freq,
        // Chosen so the scaled mass is 1/(2·mech_freq), which makes the
        // zero-point length exactly one displacement unit.
        effective_mass: crate::params::REDUCED_PLANCK / (2.0 * mech_freq),
        loss_rate: 1.0,
        gain_rate: sys.gain_rate / gamma,
        mech_damping: sys.mech_damping / gamma,
        tunneling_rate: sys.tunneling_rate / gamma,
        optical_quality: None,
        mech_quality: None,
        om_coupling: sys.om_coupling * sys.zero_point_length / gamma,
        zero_point_length: 0.0,
    };
    let system = derive_params(raw)?;
    let drive = DriveParams::from_amplitudes(
        drive.pump_amplitude / gamma,
        drive.probe_amplitude / gamma,
        drive.pump_detuning / gamma,
        drive.probe_detuning / gamma,
        &system,
    )?;
    Ok(DimensionlessPoint {
        system,
        drive,
        time_scale: 1.0 / gamma,
        length_scale: sys.zero_point_length,
    })
}

/// Full oracle protocol for one operating point: map to dimensionless
/// units, integrate through the transient, then demodulate the probe
/// sideband over `window_periods` beat periods. When the beat frequency
/// vanishes the probe is a static drive offset instead, and the sideband is
/// the difference against a pump-only baseline over the same duration
/// measured in mechanical periods.
pub fn oracle_transmittance(
    sys: &SystemParams,
    drive: &DriveParams,
    steps_per_period: usize,
    window_periods: usize,
) -> Result<DemodResult> {
    use std::f64::consts::TAU;

    let map = to_dimensionless(sys, drive)?;
    let (dsys, ddrive) = (&map.system, &map.drive);
    let dt = aligned_step(dsys, ddrive, steps_per_period);
    let settle = transient_time(dsys);
    let beat = ddrive.beat_detuning;

    if beat != 0.0 {
        let window = window_periods as f64 * TAU / beat.abs();
        let t_end = settle + window + dt;
        let traj = integrate(dsys, ddrive, t_end, dt, TrajectoryState::ZERO, 1)?;
        demodulate(&traj, dsys, ddrive, window_periods)
    } else {
        let window = window_periods as f64 * TAU / dsys.mech_freq;
        let t_end = settle + window + dt;
        let traj = integrate(dsys, ddrive, t_end, dt, TrajectoryState::ZERO, 1)?;
        let pump_only = DriveParams::from_amplitudes(
            ddrive.pump_amplitude,
            0.0,
            ddrive.pump_detuning,
            ddrive.probe_detuning,
            dsys,
        )?;
        let baseline = integrate(dsys, &pump_only, t_end, dt, TrajectoryState::ZERO, 1)?;
        demodulate_static(&traj, &baseline, dsys, ddrive, window)
    }
}
