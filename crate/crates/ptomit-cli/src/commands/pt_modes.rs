//! `pt-modes`: supermode eigenvalues and phase label of the linear
//! optical pair, written as JSON and echoed to stdout.

use clap::Args;
use ptomit::{classify, phase_boundary};

use crate::config::{self, config_hash};
use crate::output::RunWriter;
use crate::{CliError, GlobalArgs};

#[derive(Debug, Args)]
pub struct PtModesArgs {
    /// Gain-to-loss ratio kappa/gamma; defaults to the resolved operating
    /// point.
    #[arg(long, allow_hyphen_values = true, value_name = "RATIO")]
    pub gain_ratio: Option<f64>,

    /// Pump detuning for the eigenvalue problem, in mechanical
    /// frequencies; defaults to the resolved operating point.
    #[arg(long, allow_hyphen_values = true, value_name = "X")]
    pub detuning: Option<f64>,
}

pub fn run(global: &GlobalArgs, args: &PtModesArgs) -> Result<(), CliError> {
    let mut point = config::resolve(&global.preset, global.config.as_deref())?;
    if let Some(ratio) = args.gain_ratio {
        if !ratio.is_finite() {
            return Err(CliError::Usage(format!(
                "--gain-ratio must be finite, got {ratio}"
            )));
        }
        point = point.with_gain_ratio(ratio);
    }
    if let Some(fraction) = args.detuning {
        if !fraction.is_finite() {
            return Err(CliError::Usage(format!(
                "--detuning must be finite, got {fraction}"
            )));
        }
        point.pump_detuning = fraction * point.system.mech_freq;
    }

    let class = classify(&point.system, point.pump_detuning);
    if class.unstable {
        eprintln!(
            "warning: pt-modes: the optical pair is linearly unstable at \
             kappa/gamma = {:.3}",
            point.gain_ratio()
        );
    }

    let document = serde_json::json!({
        "kappa_over_gamma": point.gain_ratio(),
        "Delta_L": point.pump_detuning,
        "classification": class,
        // Gain rate at which the phases meet for this loss and tunneling
        // rate; absent when no nonnegative gain rate reaches the boundary.
        "kappa_at_boundary": phase_boundary(point.system.loss_rate, point.system.tunneling_rate),
    });

    let text = format!("{}\n", serde_json::to_string_pretty(&document)?);
    let mut writer = RunWriter::create(&global.out)?;
    writer.write("pt_modes.json", &text)?;
    print!("{text}");

    let hash = config_hash(&point, "pt-modes", &[]);
    writer.finish(&hash, Some(document))?;
    Ok(())
}
