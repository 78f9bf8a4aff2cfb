//! Operating-point resolution and hashing.
//!
//! Parameters resolve in three layers: the named preset supplies every
//! value, an optional JSON file overrides individual fields, and
//! command-line flags override both. The resolved point is hashed together
//! with the command's grids so that equal hashes guarantee byte-identical
//! data files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use ptomit::{
    derive_params, paper_system, DriveParams, SystemParams, DEFAULT_PROBE_FRACTION,
    DEFAULT_PUMP_POWER,
};

use crate::CliError;

/// JSON overlay for the preset. All values are SI; field names match the
/// serialized parameter structs. The zero-point length is always derived
/// from the mass and mechanical frequency and deliberately not accepted
/// here; unknown fields are rejected.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Optical resonance angular frequency, rad/s.
    pub omega_c: Option<f64>,
    /// Resonator radius, m; sets the optomechanical coupling
    /// geometrically. Mutually exclusive with `g_om`.
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    /// Mechanical angular frequency, rad/s.
    pub omega_m: Option<f64>,
    /// Effective mass of the mechanical mode, kg.
    pub m_eff: Option<f64>,
    /// Loss rate of the mechanical (first) cavity, rad/s.
    pub gamma: Option<f64>,
    /// Gain (>0) or loss (<0) rate of the second cavity, rad/s.
    pub kappa: Option<f64>,
    /// Mechanical damping rate, rad/s.
    #[serde(rename = "Gamma_m")]
    pub mech_damping: Option<f64>,
    /// Photon tunneling rate between the cavities, rad/s.
    #[serde(rename = "J_coupling")]
    pub tunneling_rate: Option<f64>,
    /// Optical quality factor (bookkeeping only).
    #[serde(rename = "Q_c")]
    pub optical_quality: Option<f64>,
    /// Mechanical quality factor (bookkeeping only).
    #[serde(rename = "Q_m")]
    pub mech_quality: Option<f64>,
    /// Optomechanical coupling, rad/(s·m). Mutually exclusive with `R`.
    #[serde(rename = "g_om")]
    pub om_coupling: Option<f64>,
    /// Pump power, W.
    #[serde(rename = "P_L")]
    pub pump_power: Option<f64>,
    /// Probe power, W; defaults to a fixed fraction of the pump power.
    #[serde(rename = "P_in")]
    pub probe_power: Option<f64>,
    /// Pump detuning, rad/s; defaults to the mechanical frequency
    /// (red-sideband pumping).
    #[serde(rename = "Delta_L")]
    pub pump_detuning: Option<f64>,
    /// Probe detuning, rad/s; defaults to zero (on resonance).
    #[serde(rename = "Delta_p")]
    pub probe_detuning: Option<f64>,
}

/// A fully resolved operating point: validated system parameters plus the
/// drive settings the sweeps start from.
#[derive(Debug, Clone, Copy)]
pub struct Resolved {
    pub system: SystemParams,
    /// Pump power, W.
    pub pump_power: f64,
    /// Probe power, W.
    pub probe_power: f64,
    /// Pump detuning, rad/s.
    pub pump_detuning: f64,
    /// Probe detuning, rad/s.
    pub probe_detuning: f64,
}

impl Resolved {
    /// Drive parameters of this operating point.
    pub fn drive(&self) -> Result<DriveParams, CliError> {
        DriveParams::from_detunings(
            self.pump_power,
            self.probe_power,
            self.pump_detuning,
            self.probe_detuning,
            &self.system,
        )
        .map_err(|err| CliError::Usage(format!("invalid drive parameters: {err}")))
    }

    /// Gain rate in units of the loss rate.
    pub fn gain_ratio(&self) -> f64 {
        self.system.gain_rate / self.system.loss_rate
    }

    /// Same point with the gain rate set to `ratio` times the loss rate.
    pub fn with_gain_ratio(mut self, ratio: f64) -> Resolved {
        self.system.gain_rate = ratio * self.system.loss_rate;
        self
    }

    /// Same point at a different pump power. The probe power scales along
    /// so the probe stays the same fraction of the pump.
    pub fn with_pump_power(mut self, power: f64) -> Resolved {
        let fraction = if self.pump_power > 0.0 {
            self.probe_power / self.pump_power
        } else {
            DEFAULT_PROBE_FRACTION
        };
        self.pump_power = power;
        self.probe_power = fraction * power;
        self
    }

    /// Same point at a different probe detuning (rad/s).
    pub fn with_probe_detuning(mut self, probe_detuning: f64) -> Resolved {
        self.probe_detuning = probe_detuning;
        self
    }
}

/// Resolve the operating point from the preset name and an optional JSON
/// overlay file. Flag overrides are applied afterwards by each command.
pub fn resolve(preset: &str, config_path: Option<&Path>) -> Result<Resolved, CliError> {
    if preset != "paper" {
        return Err(CliError::Usage(format!(
            "unknown preset '{preset}'; available presets: paper"
        )));
    }
    let overlay = match config_path {
        None => ConfigFile::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|err| {
                CliError::Usage(format!("cannot read config file {}: {err}", path.display()))
            })?;
            serde_json::from_str(&text).map_err(|err| {
                CliError::Usage(format!("invalid config file {}: {err}", path.display()))
            })?
        }
    };
    apply_overlay(paper_system(-1.0), overlay)
}

fn apply_overlay(base: SystemParams, overlay: ConfigFile) -> Result<Resolved, CliError> {
    if overlay.radius.is_some() && overlay.om_coupling.is_some() {
        return Err(CliError::Usage(
            "config sets both R and g_om; give one, the other side is derived".into(),
        ));
    }

    let mut raw = base;
    if let Some(value) = overlay.omega_c {
        raw.optical_freq = value;
    }
    if let Some(value) = overlay.radius {
        raw.radius = Some(value);
    }
    if let Some(value) = overlay.omega_m {
        raw.mech_freq = value;
    }
    if let Some(value) = overlay.m_eff {
        raw.effective_mass = value;
    }
    if let Some(value) = overlay.gamma {
        raw.loss_rate = value;
    }
    if let Some(value) = overlay.kappa {
        raw.gain_rate = value;
    }
    if let Some(value) = overlay.mech_damping {
        raw.mech_damping = value;
    }
    if let Some(value) = overlay.tunneling_rate {
        raw.tunneling_rate = value;
    }
    if let Some(value) = overlay.optical_quality {
        raw.optical_quality = Some(value);
    }
    if let Some(value) = overlay.mech_quality {
        raw.mech_quality = Some(value);
    }
    if let Some(value) = overlay.om_coupling {
        raw.om_coupling = value;
        raw.radius = None;
    }

    let system =
        derive_params(raw).map_err(|err| CliError::Usage(format!("invalid parameters: {err}")))?;

    let pump_power = overlay.pump_power.unwrap_or(DEFAULT_PUMP_POWER);
    Ok(Resolved {
        system,
        pump_power,
        probe_power: overlay
            .probe_power
            .unwrap_or(DEFAULT_PROBE_FRACTION * pump_power),
        pump_detuning: overlay.pump_detuning.unwrap_or(system.mech_freq),
        probe_detuning: overlay.probe_detuning.unwrap_or(0.0),
    })
}

/// Content hash of everything that determines the numbers in the written
/// files: the resolved parameters, the subcommand, and its grids. The
/// fields are rendered at full precision into a key-sorted JSON object and
/// hashed with SHA-256.
pub fn config_hash(point: &Resolved, command: &str, extras: &[(&str, String)]) -> String {
    let full = |value: f64| format!("{value:.16e}");
    let optional = |value: Option<f64>| value.map(full).unwrap_or_else(|| "none".to_string());

    let sys = &point.system;
    let mut fields = BTreeMap::new();
    fields.insert("command".to_string(), command.to_string());
    fields.insert("omega_c".to_string(), full(sys.optical_freq));
    fields.insert("R".to_string(), optional(sys.radius));
    fields.insert("omega_m".to_string(), full(sys.mech_freq));
    fields.insert("m_eff".to_string(), full(sys.effective_mass));
    fields.insert("gamma".to_string(), full(sys.loss_rate));
    fields.insert("kappa".to_string(), full(sys.gain_rate));
    fields.insert("Gamma_m".to_string(), full(sys.mech_damping));
    fields.insert("J_coupling".to_string(), full(sys.tunneling_rate));
    fields.insert("Q_c".to_string(), optional(sys.optical_quality));
    fields.insert("Q_m".to_string(), optional(sys.mech_quality));
    fields.insert("g_om".to_string(), full(sys.om_coupling));
    fields.insert("x_zpf".to_string(), full(sys.zero_point_length));
    fields.insert("P_L".to_string(), full(point.pump_power));
    fields.insert("P_in".to_string(), full(point.probe_power));
    fields.insert("Delta_L".to_string(), full(point.pump_detuning));
    fields.insert("Delta_p".to_string(), full(point.probe_detuning));
    for (key, value) in extras {
        fields.insert((*key).to_string(), value.clone());
    }

    let canonical = serde_json::to_string(&fields).expect("a map of strings serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    format!("{:x}", hasher.finalize())
}

/// Render a numeric list at full precision for hashing.
pub fn hash_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|value| format!("{value:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}
