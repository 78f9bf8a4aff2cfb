//! `steady-state`: solve the operating point once and write it as JSON.

use clap::Args;
use ptomit::solve_steady_state;
use serde_json::json;

use crate::commands::warn_if_unstable;
use crate::config::{self, config_hash};
use crate::output::RunWriter;
use crate::{CliError, GlobalArgs};

#[derive(Debug, Args)]
pub struct SteadyArgs {
    /// Gain-to-loss ratio kappa/gamma; defaults to the resolved operating
    /// point.
    #[arg(long, allow_hyphen_values = true, value_name = "RATIO")]
    pub gain_ratio: Option<f64>,

    /// Pump power in microwatts; defaults to the resolved operating point.
    #[arg(long, value_name = "UW")]
    pub pump_uw: Option<f64>,
}

pub fn run(global: &GlobalArgs, args: &SteadyArgs) -> Result<(), CliError> {
    let mut point = config::resolve(&global.preset, global.config.as_deref())?;
    if let Some(ratio) = args.gain_ratio {
        if !ratio.is_finite() {
            return Err(CliError::Usage(format!(
                "--gain-ratio must be finite, got {ratio}"
            )));
        }
        point = point.with_gain_ratio(ratio);
    }
    if let Some(micro_watts) = args.pump_uw {
        if !(micro_watts.is_finite() && micro_watts >= 0.0) {
            return Err(CliError::Usage(format!(
                "--pump-uw must be finite and nonnegative, got {micro_watts}"
            )));
        }
        point = point.with_pump_power(micro_watts * 1e-6);
    }
    warn_if_unstable(&point, "steady-state");

    let drive = point.drive()?;
    let ss = solve_steady_state(&point.system, &drive)
        .map_err(|err| CliError::AllPointsFailed(format!("steady state failed: {err}")))?;

    let document = json!({
        "system": point.system,
        "drive": drive,
        "steady_state": ss,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&document)?);
    let mut writer = RunWriter::create(&global.out)?;
    writer.write("steady_state.json", &text)?;
    print!("{text}");

    let hash = config_hash(&point, "steady-state", &[]);
    writer.finish(
        &hash,
        Some(json!({
            "x_s": ss.displacement,
            "n1": ss.lossy_photons,
            "n2": ss.gain_photons,
        })),
    )?;
    Ok(())
}
