//! `delay-sweep`: on-resonance group delay against pump power on a
//! logarithmic grid, one CSV covering every requested gain ratio.

use clap::Args;
use ptomit::classify;

use crate::commands::{
    append_delay_rows, check_finite, delay_rows, thread_pool, warn_if_unstable, PointTally,
    DELAY_CSV_HEADER,
};
use crate::config::{self, config_hash, hash_list};
use crate::output::RunWriter;
use crate::sweep::{log_grid, SweepAxis, SweepSpec};
use crate::{CliError, GlobalArgs};

/// Delays below this magnitude (seconds) count as zero when looking for
/// slow/fast-light transitions, so numerical noise around a zero crossing
/// is not reported as extra crossings.
const DELAY_DEADBAND_S: f64 = 1e-9;

#[derive(Debug, Args)]
pub struct DelayArgs {
    /// Gain-to-loss ratios kappa/gamma, comma separated; defaults to the
    /// resolved operating point.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        value_name = "RATIO"
    )]
    pub gain_ratio: Option<Vec<f64>>,

    /// Lowest pump power, microwatts.
    #[arg(long, default_value_t = 0.5, value_name = "UW")]
    pub p_min_uw: f64,

    /// Highest pump power, microwatts.
    #[arg(long, default_value_t = 20.0, value_name = "UW")]
    pub p_max_uw: f64,

    /// Number of logarithmically spaced power points.
    #[arg(long, default_value_t = 200, value_name = "N")]
    pub points: usize,
}

pub fn run(global: &GlobalArgs, args: &DelayArgs) -> Result<(), CliError> {
    let mut base = config::resolve(&global.preset, global.config.as_deref())?;
    if base.probe_detuning != 0.0 {
        eprintln!(
            "warning: delay-sweep evaluates the delay at zero probe detuning; \
             ignoring the configured Delta_p"
        );
        base = base.with_probe_detuning(0.0);
    }
    let ratios = args
        .gain_ratio
        .clone()
        .unwrap_or_else(|| vec![base.gain_ratio()]);
    check_finite("--gain-ratio", &ratios)?;
    let powers = log_grid(args.p_min_uw * 1e-6, args.p_max_uw * 1e-6, args.points)?;
    let sweep = SweepSpec::new(SweepAxis::PumpPower, powers)?;

    let pool = thread_pool(global.jobs)?;
    let mut writer = RunWriter::create(&global.out)?;
    let mut tally = PointTally::default();
    let mut csv = format!("{DELAY_CSV_HEADER}\n");
    let mut sign_changes = Vec::new();

    for &ratio in &ratios {
        let at_ratio = base.with_gain_ratio(ratio);
        warn_if_unstable(&at_ratio, "delay-sweep");
        let label = classify(&at_ratio.system, at_ratio.pump_detuning).label;
        let rows = delay_rows(&pool, &at_ratio, &sweep.values);
        append_delay_rows(&mut csv, ratio, label, &rows, &mut tally);
        sign_changes.extend(delay_sign_changes(ratio, &rows));
    }

    writer.write("delay.csv", &csv)?;
    tally.ensure_some_point_computed()?;
    let hash = config_hash(
        &base,
        "delay-sweep",
        &[
            ("gain_ratios", hash_list(&ratios)),
            (sweep.axis.name(), hash_list(&sweep.values)),
        ],
    );
    writer.finish(
        &hash,
        Some(serde_json::json!({ "delay_sign_changes": sign_changes })),
    )?;
    Ok(())
}

/// Bracketed sign changes of the delay along the power axis, skipping the
/// deadband around zero.
fn delay_sign_changes(
    ratio: f64,
    rows: &[(f64, Result<f64, String>)],
) -> Vec<serde_json::Value> {
    let resolved: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|(power, row)| match row {
            Ok(delay) if delay.abs() > DELAY_DEADBAND_S => Some((*power, *delay)),
            _ => None,
        })
        .collect();
    resolved
        .windows(2)
        .filter(|pair| pair[0].1.signum() != pair[1].1.signum())
        .map(|pair| {
            serde_json::json!({
                "kappa_over_gamma": ratio,
                "P_low_uW": pair[0].0 * 1e6,
                "P_high_uW": pair[1].0 * 1e6,
                "direction": if pair[0].1 > 0.0 { "slow_to_fast" } else { "fast_to_slow" },
            })
        })
        .collect()
}
