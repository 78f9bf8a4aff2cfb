//! `spectrum`: probe transmission over a detuning grid, one CSV per
//! (gain ratio, pump power) pair.

use clap::Args;

use crate::commands::{check_finite, spectrum_series, thread_pool, warn_if_unstable, PointTally};
use crate::config::{self, config_hash, hash_list};
use crate::output::RunWriter;
use crate::sweep::{linear_grid, SweepAxis, SweepSpec};
use crate::{CliError, GlobalArgs};

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Gain-to-loss ratios kappa/gamma, comma separated; defaults to the
    /// resolved operating point.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        value_name = "RATIO"
    )]
    pub gain_ratio: Option<Vec<f64>>,

    /// Pump powers in microwatts, comma separated; defaults to the
    /// resolved operating point.
    #[arg(long, value_delimiter = ',', value_name = "UW")]
    pub pump_uw: Option<Vec<f64>>,

    /// Lower edge of the probe-detuning grid, in mechanical frequencies.
    #[arg(
        long,
        default_value_t = -2.0,
        allow_hyphen_values = true,
        value_name = "X"
    )]
    pub det_min: f64,

    /// Upper edge of the probe-detuning grid, in mechanical frequencies.
    #[arg(
        long,
        default_value_t = 2.0,
        allow_hyphen_values = true,
        value_name = "X"
    )]
    pub det_max: f64,

    /// Number of detuning grid points.
    #[arg(long, default_value_t = 2001, value_name = "N")]
    pub points: usize,
}

pub fn run(global: &GlobalArgs, args: &SpectrumArgs) -> Result<(), CliError> {
    let base = config::resolve(&global.preset, global.config.as_deref())?;
    let ratios = args
        .gain_ratio
        .clone()
        .unwrap_or_else(|| vec![base.gain_ratio()]);
    let powers_uw = args
        .pump_uw
        .clone()
        .unwrap_or_else(|| vec![base.pump_power * 1e6]);
    check_finite("--gain-ratio", &ratios)?;
    check_finite("--pump-uw", &powers_uw)?;

    let fractions = linear_grid(args.det_min, args.det_max, args.points)?;
    let detunings: Vec<f64> = fractions
        .iter()
        .map(|x| x * base.system.mech_freq)
        .collect();
    let sweep = SweepSpec::new(SweepAxis::Detuning, detunings)?;

    let pool = thread_pool(global.jobs)?;
    let mut writer = RunWriter::create(&global.out)?;
    let mut tally = PointTally::default();

    for &ratio in &ratios {
        for &micro_watts in &powers_uw {
            let point = base
                .with_gain_ratio(ratio)
                .with_pump_power(micro_watts * 1e-6);
            warn_if_unstable(&point, "spectrum");
            let series = spectrum_series(&pool, &point, &sweep.values, global.verify)?;
            tally.absorb(series.tally);
            writer.write(
                &format!("kappa_{ratio:.2}_P_{micro_watts:.1}uW.csv"),
                &series.csv,
            )?;
        }
    }

    tally.ensure_some_point_computed()?;
    let hash = config_hash(
        &base,
        "spectrum",
        &[
            ("gain_ratios", hash_list(&ratios)),
            ("pump_uw", hash_list(&powers_uw)),
            (sweep.axis.name(), hash_list(&sweep.values)),
        ],
    );
    writer.finish(&hash, None)?;
    Ok(())
}
