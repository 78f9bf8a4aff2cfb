//! `gain-sweep`: response and steady state against the gain-to-loss
//! ratio at fixed pump power and probe detuning. The grid is a fixed set
//! of named ratios plus a fine scan across the lasing threshold.

use clap::Args;
use ptomit::{classify, group_delay, probe_response, solve_steady_state, PtPhase};
use rayon::prelude::*;

use crate::commands::{thread_pool, PointTally};
use crate::config::{self, config_hash, hash_list, Resolved};
use crate::output::{csv_safe, RunWriter};
use crate::sweep::{SweepAxis, SweepSpec};
use crate::{CliError, GlobalArgs};

/// Gain ratios reported individually in the written datasets.
const NAMED_RATIOS: [f64; 9] = [-1.0, -0.5, 0.0, 0.01, 0.05, 0.2, 0.5, 1.0, 1.5];

/// Relative disagreement allowed when `--verify` recomputes a row.
const VERIFY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Args)]
pub struct GainArgs {
    /// Pump power in microwatts; defaults to the resolved operating point.
    #[arg(long, value_name = "UW")]
    pub pump_uw: Option<f64>,

    /// Probe detuning in mechanical frequencies; defaults to the resolved
    /// operating point.
    #[arg(long, allow_hyphen_values = true, value_name = "X")]
    pub detuning: Option<f64>,
}

/// Named ratios plus a fine grid of step 0.01 across [0.9, 1.1], sorted
/// and deduplicated.
fn gain_grid() -> Vec<f64> {
    let mut values: Vec<f64> = NAMED_RATIOS.to_vec();
    for step in 0..=20 {
        values.push(0.9 + 0.01 * step as f64);
    }
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    values
}

/// Everything reported per ratio when the point computes.
struct GainRow {
    eta: f64,
    phase: f64,
    delay: f64,
    displacement: f64,
    lossy_photons: f64,
    gain_photons: f64,
}

struct RatioRow {
    ratio: f64,
    label: PtPhase,
    unstable: bool,
    data: Result<GainRow, String>,
}

fn compute_row(point: &Resolved) -> Result<GainRow, String> {
    let drive = point.drive().map_err(|err| err.to_string())?;
    let ss = solve_steady_state(&point.system, &drive).map_err(|err| err.to_string())?;
    let resp = probe_response(&point.system, &drive, &ss).map_err(|err| err.to_string())?;
    let delay = group_delay(&point.system, &drive).map_err(|err| err.to_string())?;
    Ok(GainRow {
        eta: resp.transmittance,
        phase: resp.phase,
        delay,
        displacement: ss.displacement,
        lossy_photons: ss.lossy_photons,
        gain_photons: ss.gain_photons,
    })
}

pub fn run(global: &GlobalArgs, args: &GainArgs) -> Result<(), CliError> {
    let mut base = config::resolve(&global.preset, global.config.as_deref())?;
    if let Some(micro_watts) = args.pump_uw {
        if !(micro_watts.is_finite() && micro_watts >= 0.0) {
            return Err(CliError::Usage(format!(
                "--pump-uw must be finite and nonnegative, got {micro_watts}"
            )));
        }
        base = base.with_pump_power(micro_watts * 1e-6);
    }
    if let Some(fraction) = args.detuning {
        if !fraction.is_finite() {
            return Err(CliError::Usage(format!(
                "--detuning must be finite, got {fraction}"
            )));
        }
        base = base.with_probe_detuning(fraction * base.system.mech_freq);
    }
    let sweep = SweepSpec::new(SweepAxis::GainRatio, gain_grid())?;

    let pool = thread_pool(global.jobs)?;
    let rows: Vec<RatioRow> = pool.install(|| {
        sweep
            .values
            .par_iter()
            .map(|&ratio| {
                let point = base.with_gain_ratio(ratio);
                let class = classify(&point.system, point.pump_detuning);
                RatioRow {
                    ratio,
                    label: class.label,
                    unstable: class.unstable,
                    data: compute_row(&point),
                }
            })
            .collect()
    });

    let unstable_count = rows.iter().filter(|row| row.unstable).count();
    if unstable_count > 0 {
        let first = rows
            .iter()
            .find(|row| row.unstable)
            .expect("count is positive");
        eprintln!(
            "warning: gain-sweep: {unstable_count} of {} ratios are linearly unstable \
             (first at kappa/gamma = {:.3}); their rows describe the stationary point",
            rows.len(),
            first.ratio
        );
    }

    if global.verify {
        verify_gain_rows(&base, &rows)?;
    }

    let mut tally = PointTally::default();
    let mut csv =
        String::from("kappa_over_gamma,eta,phase_rad,tau_g_s,x_s_m,n1,n2,pt_label,error\n");
    for row in &rows {
        match &row.data {
            Ok(data) => {
                tally.ok += 1;
                csv.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},\n",
                    row.ratio,
                    data.eta,
                    data.phase,
                    data.delay,
                    data.displacement,
                    data.lossy_photons,
                    data.gain_photons,
                    row.label
                ));
            }
            Err(message) => {
                tally.failed += 1;
                csv.push_str(&format!(
                    "{:.16e},nan,nan,nan,nan,nan,nan,{},{}\n",
                    row.ratio,
                    row.label,
                    csv_safe(message)
                ));
            }
        }
    }

    let mut writer = RunWriter::create(&global.out)?;
    writer.write("gain_sweep.csv", &csv)?;
    tally.ensure_some_point_computed()?;
    let hash = config_hash(
        &base,
        "gain-sweep",
        &[(sweep.axis.name(), hash_list(&sweep.values))],
    );
    writer.finish(
        &hash,
        Some(serde_json::json!({ "unstable_ratios": unstable_count })),
    )?;
    Ok(())
}

/// Recompute transmittance and phase for every successful row; backs the
/// `--verify` flag.
fn verify_gain_rows(base: &Resolved, rows: &[RatioRow]) -> Result<(), CliError> {
    for row in rows {
        let Ok(data) = &row.data else { continue };
        let again = compute_row(&base.with_gain_ratio(row.ratio)).map_err(|message| {
            CliError::Internal(format!(
                "verification recomputation failed at kappa/gamma = {}: {message}",
                row.ratio
            ))
        })?;
        let eta_err = (data.eta - again.eta).abs();
        let eta_tol = VERIFY_TOLERANCE * again.eta.abs().max(f64::MIN_POSITIVE);
        let phase_err = (data.phase - again.phase).abs();
        let phase_tol = VERIFY_TOLERANCE * again.phase.abs().max(1.0);
        if eta_err > eta_tol || phase_err > phase_tol {
            return Err(CliError::Internal(format!(
                "verification mismatch at kappa/gamma = {}: \
                 eta {:.17e} vs {:.17e}, phase {:.17e} vs {:.17e}",
                row.ratio, data.eta, again.eta, data.phase, again.phase
            )));
        }
    }
    Ok(())
}
