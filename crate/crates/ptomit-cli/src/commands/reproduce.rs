//! `reproduce`: canned dataset bundles with fixed operating points,
//! grids, and filenames, written under `<out>/<figure_id>/`.

use clap::Args;
use ptomit::classify;

use crate::commands::{
    append_delay_rows, delay_rows, spectrum_series, thread_pool, warn_if_unstable, PointTally,
    DELAY_CSV_HEADER,
};
use crate::config::{self, config_hash};
use crate::output::RunWriter;
use crate::sweep::{linear_grid, log_grid};
use crate::{CliError, GlobalArgs};

/// The bundle ids this command knows how to produce.
const VALID_IDS: [&str; 8] = [
    "fig2a", "fig2b", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6",
];

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Bundle id; run with an unknown id to get the list of valid ones.
    #[arg(value_name = "FIGURE_ID")]
    pub figure_id: String,
}

/// One file of a bundle.
enum Series {
    /// Probe spectrum on the standard detuning grid at one
    /// (gain ratio, pump power) point.
    Spectrum { file: String, ratio: f64, power: f64 },
    /// Group delay against pump power on the standard log grid at one
    /// gain ratio.
    Delay { file: String, ratio: f64 },
}

fn spectra_at_default_power(ratios: &[f64]) -> Vec<Series> {
    ratios
        .iter()
        .map(|&ratio| Series::Spectrum {
            file: format!("kappa_{ratio:.2}.csv"),
            ratio,
            power: 10e-6,
        })
        .collect()
}

fn spectra_power_pair(ratio: f64) -> Vec<Series> {
    [10e-6, 20e-6]
        .iter()
        .map(|&power| Series::Spectrum {
            file: format!("kappa_{ratio:.2}_P_{:.1}uW.csv", power * 1e6),
            ratio,
            power,
        })
        .collect()
}

fn delays(ratios: &[f64]) -> Vec<Series> {
    ratios
        .iter()
        .map(|&ratio| Series::Delay {
            file: format!("kappa_{ratio:.2}.csv"),
            ratio,
        })
        .collect()
}

fn bundle(id: &str) -> Option<Vec<Series>> {
    match id {
        "fig2a" => Some(spectra_at_default_power(&[-1.0, -0.5, 0.0])),
        "fig2b" => Some(spectra_at_default_power(&[0.5, 1.0, 1.5])),
        "fig3" => Some(spectra_at_default_power(&[0.01, 0.05, 0.2, 0.5, 1.0, 1.5])),
        "fig4a" => Some(spectra_power_pair(-1.0)),
        "fig4b" => Some(spectra_power_pair(1.5)),
        "fig5a" => Some(delays(&[0.3, 0.5, 0.7])),
        "fig5b" => Some(delays(&[1.0, 1.5, 2.0])),
        "fig6" => {
            let mut series = Vec::new();
            let power_scans = [("a", 0.5), ("b", 1.5)];
            for (panel, ratio) in power_scans {
                for power in [1e-6, 10e-6, 20e-6] {
                    series.push(Series::Spectrum {
                        file: format!("{panel}_kappa_{ratio:.2}_P_{:.1}uW.csv", power * 1e6),
                        ratio,
                        power,
                    });
                }
            }
            for ratio in [0.5, 1.0, 1.5] {
                series.push(Series::Spectrum {
                    file: format!("c_kappa_{ratio:.2}_P_10.0uW.csv"),
                    ratio,
                    power: 10e-6,
                });
            }
            for power in [1e-6, 10e-6, 20e-6] {
                series.push(Series::Spectrum {
                    file: format!("d_kappa_-1.00_P_{:.1}uW.csv", power * 1e6),
                    ratio: -1.0,
                    power,
                });
            }
            Some(series)
        }
        _ => None,
    }
}

pub fn run(global: &GlobalArgs, args: &ReproduceArgs) -> Result<(), CliError> {
    let Some(series) = bundle(&args.figure_id) else {
        return Err(CliError::Usage(format!(
            "unknown figure id '{}'; valid ids: {}",
            args.figure_id,
            VALID_IDS.join(", ")
        )));
    };
    let base = config::resolve(&global.preset, global.config.as_deref())?;
    let pool = thread_pool(global.jobs)?;
    let mut writer = RunWriter::create(&global.out)?;
    let mut tally = PointTally::default();

    let detunings: Vec<f64> = linear_grid(-2.0, 2.0, 2001)?
        .iter()
        .map(|x| x * base.system.mech_freq)
        .collect();
    let powers = log_grid(0.5e-6, 20e-6, 200)?;

    for item in &series {
        match item {
            Series::Spectrum { file, ratio, power } => {
                let point = base
                    .with_gain_ratio(*ratio)
                    .with_pump_power(*power)
                    .with_probe_detuning(0.0);
                warn_if_unstable(&point, "reproduce");
                let spectrum = spectrum_series(&pool, &point, &detunings, global.verify)?;
                tally.absorb(spectrum.tally);
                writer.write(&format!("{}/{file}", args.figure_id), &spectrum.csv)?;
            }
            Series::Delay { file, ratio } => {
                let point = base.with_gain_ratio(*ratio).with_probe_detuning(0.0);
                warn_if_unstable(&point, "reproduce");
                let label = classify(&point.system, point.pump_detuning).label;
                let rows = delay_rows(&pool, &point, &powers);
                let mut csv = format!("{DELAY_CSV_HEADER}\n");
                append_delay_rows(&mut csv, *ratio, label, &rows, &mut tally);
                writer.write(&format!("{}/{file}", args.figure_id), &csv)?;
            }
        }
    }

    tally.ensure_some_point_computed()?;
    let hash = config_hash(&base, &format!("reproduce {}", args.figure_id), &[]);
    writer.finish(
        &hash,
        Some(serde_json::json!({ "figure_id": args.figure_id })),
    )?;
    Ok(())
}
