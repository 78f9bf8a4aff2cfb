//! `oracle-check`: integrate the full equations of motion in time,
//! demodulate the probe sideband, and compare against the closed-form
//! response at the same operating points.

use clap::Args;
use ptomit::{oracle_transmittance, probe_response, solve_steady_state};
use rayon::prelude::*;
use serde_json::json;

use crate::commands::{check_finite, thread_pool};
use crate::config::{self, config_hash, hash_list, Resolved};
use crate::output::RunWriter;
use crate::{CliError, GlobalArgs};

/// Largest relative disagreement between the two code paths that still
/// counts as agreement.
const AGREEMENT_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Gain-to-loss ratios to check, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "-1.0,0.2,0.5",
        allow_hyphen_values = true,
        value_name = "RATIO"
    )]
    pub gain_ratio: Vec<f64>,

    /// Probe detunings in mechanical frequencies, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "-1.0,-0.5,0.0,0.5,1.0",
        allow_hyphen_values = true,
        value_name = "X"
    )]
    pub detunings: Vec<f64>,

    /// Integration steps per period of the fastest dynamical frequency.
    #[arg(long, default_value_t = 100, value_name = "N")]
    pub steps_per_period: usize,

    /// Averaging window length in probe-pump beat periods.
    #[arg(long, default_value_t = 200, value_name = "N")]
    pub window_periods: usize,
}

pub fn run(global: &GlobalArgs, args: &OracleArgs) -> Result<(), CliError> {
    let base = config::resolve(&global.preset, global.config.as_deref())?;
    check_finite("--gain-ratio", &args.gain_ratio)?;
    check_finite("--detunings", &args.detunings)?;
    if args.steps_per_period == 0 || args.window_periods == 0 {
        return Err(CliError::Usage(
            "--steps-per-period and --window-periods must be at least 1".into(),
        ));
    }

    let grid: Vec<(f64, f64)> = args
        .gain_ratio
        .iter()
        .flat_map(|&ratio| args.detunings.iter().map(move |&frac| (ratio, frac)))
        .collect();

    let pool = thread_pool(global.jobs)?;
    let reports: Vec<serde_json::Value> = pool.install(|| {
        grid.par_iter()
            .map(|&(ratio, frac)| check_point(&base, ratio, frac, args))
            .collect()
    });

    let errored = reports
        .iter()
        .filter(|report| report.get("error").is_some())
        .count();
    let passed = reports
        .iter()
        .filter(|report| report.get("pass").and_then(serde_json::Value::as_bool) == Some(true))
        .count();
    let max_rel_err = reports
        .iter()
        .filter_map(|report| report.get("rel_err").and_then(serde_json::Value::as_f64))
        .fold(0.0_f64, f64::max);
    let overall = errored == 0 && passed == reports.len();

    let document = json!({
        "threshold": AGREEMENT_THRESHOLD,
        "steps_per_period": args.steps_per_period,
        "window_periods": args.window_periods,
        "points": reports,
        "checked": reports.len(),
        "passed": passed,
        "errored": errored,
        "max_rel_err": max_rel_err,
        "pass": overall,
    });

    let mut writer = RunWriter::create(&global.out)?;
    writer.write(
        "oracle_check.json",
        &format!("{}\n", serde_json::to_string_pretty(&document)?),
    )?;
    println!(
        "oracle check: {passed}/{} points within {AGREEMENT_THRESHOLD:.0e} \
         (max rel err {max_rel_err:.3e}){}",
        reports.len(),
        if overall { "" } else { " — DISAGREEMENT" },
    );
    if !overall {
        eprintln!(
            "warning: time-domain and closed-form responses disagree; see oracle_check.json"
        );
    }

    let hash = config_hash(
        &base,
        "oracle-check",
        &[
            ("gain_ratios", hash_list(&args.gain_ratio)),
            ("detunings", hash_list(&args.detunings)),
            ("steps_per_period", args.steps_per_period.to_string()),
            ("window_periods", args.window_periods.to_string()),
        ],
    );
    writer.finish(
        &hash,
        Some(json!({ "pass": overall, "max_rel_err": max_rel_err })),
    )?;

    if !reports.is_empty() && errored == reports.len() {
        return Err(CliError::AllPointsFailed(
            "every oracle point failed to integrate".into(),
        ));
    }
    Ok(())
}

/// Compare the two code paths at one (gain ratio, probe detuning) point.
fn check_point(base: &Resolved, ratio: f64, frac: f64, args: &OracleArgs) -> serde_json::Value {
    let point = base
        .with_gain_ratio(ratio)
        .with_probe_detuning(frac * base.system.mech_freq);
    let outcome = (|| -> Result<serde_json::Value, String> {
        let drive = point.drive().map_err(|err| err.to_string())?;
        let ss = solve_steady_state(&point.system, &drive).map_err(|err| err.to_string())?;
        let resp = probe_response(&point.system, &drive, &ss).map_err(|err| err.to_string())?;
        let td = oracle_transmittance(
            &point.system,
            &drive,
            args.steps_per_period,
            args.window_periods,
        )
        .map_err(|err| err.to_string())?;
        let rel_err = (td.transmittance_est - resp.transmittance).abs()
            / resp.transmittance.abs().max(f64::MIN_POSITIVE);
        Ok(json!({
            "kappa_over_gamma": ratio,
            "Delta_p_over_omega_m": frac,
            "eta_freq": resp.transmittance,
            "eta_td": td.transmittance_est,
            "rel_err": rel_err,
            "rel_err_amplitude": td.rel_err_vs_freq_domain,
            "pass": rel_err <= AGREEMENT_THRESHOLD,
        }))
    })();
    match outcome {
        Ok(report) => report,
        Err(message) => json!({
            "kappa_over_gamma": ratio,
            "Delta_p_over_omega_m": frac,
            "error": message,
        }),
    }
}
