//! System and drive parameters.
//!
//! All rates and frequencies are angular frequencies in rad/s, powers are in
//! watts, lengths in meters, and masses in kilograms. Field amplitudes carry
//! units of s^(-1/2) so that `|amplitude|^2` is a photon flux.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in J·s (2019 SI exact value). The dynamics are
/// written in a rotating frame where this only enters through photon-flux
/// conversions and the scaled mass; it is deliberately not configurable.
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;

/// Fixed parameters of the compound resonator: one lossy optomechanical
/// cavity coupled by photon tunneling to a second cavity that may provide
/// gain or extra loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Optical resonance angular frequency of both cavities, rad/s.
    #[serde(rename = "omega_c")]
    pub optical_freq: f64,
    /// Resonator radius, m. When present, the optomechanical coupling is
    /// derived from it; when absent, `om_coupling` must be given directly.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Mechanical angular frequency, rad/s.
    #[serde(rename = "omega_m")]
    pub mech_freq: f64,
    /// Effective mass of the mechanical mode, kg.
    #[serde(rename = "m_eff")]
    pub effective_mass: f64,
    /// Loss rate of the mechanical (first) cavity, rad/s. Must be positive.
    #[serde(rename = "gamma")]
    pub loss_rate: f64,
    /// Gain (>0) or loss (<0) rate of the second cavity, rad/s.
    #[serde(rename = "kappa")]
    pub gain_rate: f64,
    /// Mechanical damping rate, rad/s.
    #[serde(rename = "Gamma_m")]
    pub mech_damping: f64,
    /// Photon tunneling rate between the two cavities, rad/s.
    #[serde(rename = "J_coupling")]
    pub tunneling_rate: f64,
    /// Optical quality factor. Stored for bookkeeping; never used in the
    /// dynamics, which take `loss_rate` directly.
    #[serde(rename = "Q_c", default, skip_serializing_if = "Option::is_none")]
    pub optical_quality: Option<f64>,
    /// Mechanical quality factor. Stored for bookkeeping; never used in the
    /// dynamics, which take `mech_damping` directly.
    #[serde(rename = "Q_m", default, skip_serializing_if = "Option::is_none")]
    pub mech_quality: Option<f64>,
    /// Optomechanical coupling, rad/(s·m): cavity frequency pulled per meter
    /// of mechanical displacement. Derived as `optical_freq / radius` when a
    /// radius is given.
    #[serde(rename = "g_om", default)]
    pub om_coupling: f64,
    /// Zero-point length of the mechanical mode, m. Always derived.
    #[serde(rename = "x_zpf", default)]
    pub zero_point_length: f64,
}

impl SystemParams {
    /// Mass rescaled by the reduced Planck constant, in s·kg/(J·s) = s²/m²·
    /// (rad/s units absorbed). The equations of motion for the classical
    /// field amplitudes use this combination exclusively, which keeps
    /// `|a|^2` a photon number.
    pub fn scaled_mass(&self) -> f64 {
        self.effective_mass / REDUCED_PLANCK
    }
}

fn require_finite(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            message: format!("must be finite, got {value}"),
        })
    }
}

fn require_positive(field: &'static str, value: f64) -> Result<()> {
    require_finite(field, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            message: format!("must be positive, got {value}"),
        })
    }
}

fn require_nonnegative(field: &'static str, value: f64) -> Result<()> {
    require_finite(field, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            message: format!("must be nonnegative, got {value}"),
        })
    }
}

/// Validate raw system parameters and fill in the derived fields
/// (`om_coupling` from the radius when one is given, and the zero-point
/// length from the mass and mechanical frequency). All other fields pass
/// through unchanged.
pub fn derive_params(raw: SystemParams) -> Result<SystemParams> {
    require_positive("omega_c", raw.optical_freq)?;
    require_positive("omega_m", raw.mech_freq)?;
    require_positive("m_eff", raw.effective_mass)?;
    require_positive("gamma", raw.loss_rate)?;
    require_finite("kappa", raw.gain_rate)?;
    require_nonnegative("Gamma_m", raw.mech_damping)?;
    require_nonnegative("J_coupling", raw.tunneling_rate)?;

    let mut params = raw;
    match raw.radius {
        Some(radius) => {
            require_positive("R", radius)?;
            params.om_coupling = raw.optical_freq / radius;
        }
        None => require_nonnegative("g_om", raw.om_coupling)?,
    }
    params.zero_point_length =
        (REDUCED_PLANCK / (2.0 * raw.effective_mass * raw.mech_freq)).sqrt();
    Ok(params)
}

/// Raw drive description: laser powers and absolute laser frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveInput {
    /// Pump (control) laser power, W.
    #[serde(rename = "P_L")]
    pub pump_power: f64,
    /// Probe laser power, W.
    #[serde(rename = "P_in")]
    pub probe_power: f64,
    /// Pump angular frequency, rad/s.
    #[serde(rename = "omega_L")]
    pub pump_freq: f64,
    /// Probe angular frequency, rad/s.
    #[serde(rename = "omega_p")]
    pub probe_freq: f64,
}

/// Fully derived drive parameters: powers, frequencies, detunings, and the
/// corresponding intracavity field amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Pump (control) laser power, W.
    #[serde(rename = "P_L")]
    pub pump_power: f64,
    /// Probe laser power, W.
    #[serde(rename = "P_in")]
    pub probe_power: f64,
    /// Pump angular frequency, rad/s.
    #[serde(rename = "omega_L")]
    pub pump_freq: f64,
    /// Probe angular frequency, rad/s.
    #[serde(rename = "omega_p")]
    pub probe_freq: f64,
    /// Pump detuning from the cavity: optical resonance minus pump
    /// frequency, rad/s. Positive means a red-detuned pump.
    #[serde(rename = "Delta_L")]
    pub pump_detuning: f64,
    /// Probe detuning from the cavity: probe frequency minus optical
    /// resonance, rad/s.
    #[serde(rename = "Delta_p")]
    pub probe_detuning: f64,
    /// Probe-pump beat frequency, rad/s. Always stored as the exact
    /// floating-point sum `pump_detuning + probe_detuning`.
    #[serde(rename = "xi")]
    pub beat_detuning: f64,
    /// Pump field amplitude, s^(-1/2); real and nonnegative.
    #[serde(rename = "E_L")]
    pub pump_amplitude: f64,
    /// Probe field amplitude, s^(-1/2); real and nonnegative.
    #[serde(rename = "eps_p")]
    pub probe_amplitude: f64,
}

fn amplitude_from_power(power: f64, loss_rate: f64, laser_freq: f64) -> f64 {
    (2.0 * power * loss_rate / (REDUCED_PLANCK * laser_freq)).sqrt()
}

fn power_from_amplitude(amplitude: f64, loss_rate: f64, laser_freq: f64) -> f64 {
    amplitude * amplitude * REDUCED_PLANCK * laser_freq / (2.0 * loss_rate)
}

/// Convert laser powers and absolute frequencies into the derived drive
/// parameters (detunings, beat frequency, and field amplitudes).
pub fn drive_amplitudes(input: DriveInput, sys: &SystemParams) -> Result<DriveParams> {
    require_nonnegative("P_L", input.pump_power)?;
    require_nonnegative("P_in", input.probe_power)?;
    require_positive("omega_L", input.pump_freq)?;
    require_positive("omega_p", input.probe_freq)?;

    let pump_detuning = sys.optical_freq - input.pump_freq;
    let probe_detuning = input.probe_freq - sys.optical_freq;
    Ok(DriveParams {
        pump_power: input.pump_power,
        probe_power: input.probe_power,
        pump_freq: input.pump_freq,
        probe_freq: input.probe_freq,
        pump_detuning,
        probe_detuning,
        beat_detuning: pump_detuning + probe_detuning,
        pump_amplitude: amplitude_from_power(input.pump_power, sys.loss_rate, input.pump_freq),
        probe_amplitude: amplitude_from_power(input.probe_power, sys.loss_rate, input.probe_freq),
    })
}

impl DriveParams {
    /// Build drive parameters from powers and detunings. The stored beat
    /// frequency is the exact floating-point sum of the two detunings.
    pub fn from_detunings(
        pump_power: f64,
        probe_power: f64,
        pump_detuning: f64,
        probe_detuning: f64,
        sys: &SystemParams,
    ) -> Result<Self> {
        require_nonnegative("P_L", pump_power)?;
        require_nonnegative("P_in", probe_power)?;
        require_finite("Delta_L", pump_detuning)?;
        require_finite("Delta_p", probe_detuning)?;

        let pump_freq = sys.optical_freq - pump_detuning;
        let probe_freq = sys.optical_freq + probe_detuning;
        require_positive("omega_L", pump_freq)?;
        require_positive("omega_p", probe_freq)?;
        Ok(DriveParams {
            pump_power,
            probe_power,
            pump_freq,
            probe_freq,
            pump_detuning,
            probe_detuning,
            beat_detuning: pump_detuning + probe_detuning,
            pump_amplitude: amplitude_from_power(pump_power, sys.loss_rate, pump_freq),
            probe_amplitude: amplitude_from_power(probe_power, sys.loss_rate, probe_freq),
        })
    }

    /// Build drive parameters from field amplitudes and detunings, backing
    /// out the laser powers that would produce those amplitudes.
    pub fn from_amplitudes(
        pump_amplitude: f64,
        probe_amplitude: f64,
        pump_detuning: f64,
        probe_detuning: f64,
        sys: &SystemParams,
    ) -> Result<Self> {
        require_nonnegative("E_L", pump_amplitude)?;
        require_nonnegative("eps_p", probe_amplitude)?;
        require_finite("Delta_L", pump_detuning)?;
        require_finite("Delta_p", probe_detuning)?;

        let pump_freq = sys.optical_freq - pump_detuning;
        let probe_freq = sys.optical_freq + probe_detuning;
        require_positive("omega_L", pump_freq)?;
        require_positive("omega_p", probe_freq)?;
        Ok(DriveParams {
            pump_power: power_from_amplitude(pump_amplitude, sys.loss_rate, pump_freq),
            probe_power: power_from_amplitude(probe_amplitude, sys.loss_rate, probe_freq),
            pump_freq,
            probe_freq,
            pump_detuning,
            probe_detuning,
            beat_detuning: pump_detuning + probe_detuning,
            pump_amplitude,
            probe_amplitude,
        })
    }

    /// Same powers and pump detuning, new probe detuning. The probe
    /// amplitude is re-derived because it depends (very weakly) on the
    /// absolute probe frequency.
    pub fn with_probe_detuning(&self, probe_detuning: f64, sys: &SystemParams) -> Result<Self> {
        Self::from_detunings(
            self.pump_power,
            self.probe_power,
            self.pump_detuning,
            probe_detuning,
            sys,
        )
    }
}

/// Pump power of the default operating point, W.
pub const DEFAULT_PUMP_POWER: f64 = 10e-6;

/// Probe power as a fraction of pump power in the default operating point.
pub const DEFAULT_PROBE_FRACTION: f64 = 1e-4;

/// Built-in system preset: a 34.5 µm microresonator pair with a 23.4 MHz
/// mechanical mode. `gain_to_loss` sets the second cavity's rate as a
/// multiple of the first cavity's loss rate (negative for a lossy second
/// cavity).
pub fn paper_system(gain_to_loss: f64) -> SystemParams {
    let loss_rate = 6.43e6;
    let raw = SystemParams {
        optical_freq: 1.93e14,
        radius: Some(34.5e-6),
        mech_freq: 2.0 * std::f64::consts::PI * 23.4e6,
        effective_mass: 5e-11,
        loss_rate,
        gain_rate: gain_to_loss * loss_rate,
        mech_damping: 2.4e5,
        tunneling_rate: loss_rate,
        optical_quality: Some(3e7),
        mech_quality: Some(150.0),
        om_coupling: 0.0,
        zero_point_length: 0.0,
    };
    derive_params(raw).expect("built-in preset parameters are valid")
}

/// Drive for the built-in preset: pump red-detuned by exactly the
/// mechanical frequency, probe power a fixed fraction of pump power.
pub fn paper_drive(
    sys: &SystemParams,
    pump_power: f64,
    probe_detuning: f64,
) -> Result<DriveParams> {
    DriveParams::from_detunings(
        pump_power,
        DEFAULT_PROBE_FRACTION * pump_power,
        sys.mech_freq,
        probe_detuning,
        sys,
    )
}

/// Full default operating point: preset system plus the default drive at
/// zero probe detuning.
pub fn paper_preset(gain_to_loss: f64) -> (SystemParams, DriveParams) {
    let sys = paper_system(gain_to_loss);
    let drive = paper_drive(&sys, DEFAULT_PUMP_POWER, 0.0)
        .expect("built-in preset drive parameters are valid");
    (sys, drive)
}
