//! Subcommand implementations and the helpers they share.

pub mod delay;
pub mod gain;
pub mod oracle;
pub mod pt_modes;
pub mod reproduce;
pub mod spectrum;
pub mod steady;

use std::f64::consts::TAU;

use ptomit::{
    classify, group_delay, probe_response, solve_steady_state, unwrap_phase_series, DriveParams,
    PtPhase, SpectrumPoint, SystemParams, SPECTRUM_CSV_HEADER,
};
use rayon::prelude::*;

use crate::config::Resolved;
use crate::output::csv_safe;
use crate::CliError;

/// Relative disagreement allowed when `--verify` recomputes a row.
const VERIFY_TOLERANCE: f64 = 1e-12;

/// Counts of computed and failed sweep points, for exit-code decisions.
#[derive(Debug, Default, Clone, Copy)]
pub struct PointTally {
    pub ok: usize,
    pub failed: usize,
}

impl PointTally {
    pub fn absorb(&mut self, other: PointTally) {
        self.ok += other.ok;
        self.failed += other.failed;
    }

    /// Error (exit code 3) when points were requested and none computed.
    pub fn ensure_some_point_computed(&self) -> Result<(), CliError> {
        if self.ok == 0 && self.failed > 0 {
            Err(CliError::AllPointsFailed(format!(
                "all {} requested points failed; see the error column of the written files",
                self.failed
            )))
        } else {
            Ok(())
        }
    }
}

/// Build the worker pool honoring `--jobs`.
pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = jobs {
        if threads == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|err| CliError::Internal(format!("cannot build thread pool: {err}")))
}

/// Reject empty or non-finite flag value lists.
pub fn check_finite(flag: &str, values: &[f64]) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Usage(format!("{flag} needs at least one value")));
    }
    if let Some(bad) = values.iter().find(|value| !value.is_finite()) {
        return Err(CliError::Usage(format!(
            "{flag} contains a non-finite value {bad}"
        )));
    }
    Ok(())
}

/// Warn when the optical pair is linearly unstable at this operating
/// point. The sweep still runs: the written numbers describe the
/// stationary solution, which above the lasing threshold is not what the
/// physical system relaxes to.
pub fn warn_if_unstable(point: &Resolved, context: &str) {
    let class = classify(&point.system, point.pump_detuning);
    if class.unstable {
        eprintln!(
            "warning: {context}: optical pair is linearly unstable at kappa/gamma = {:.3}; \
             output describes the stationary point, not the long-time behavior",
            point.gain_ratio()
        );
    }
}

/// One spectrum series, rendered and tallied.
pub struct SpectrumSeries {
    pub csv: String,
    pub tally: PointTally,
}

/// Compute the probe spectrum of `point` over `detunings` (rad/s) and
/// render it as CSV with the detuning in mechanical-frequency units. Rows
/// that fail carry NaNs plus the error message in the last column; the
/// phase column is unwrapped across successful rows, anchored at the
/// successful row nearest zero detuning.
pub fn spectrum_series(
    pool: &rayon::ThreadPool,
    point: &Resolved,
    detunings: &[f64],
    verify: bool,
) -> Result<SpectrumSeries, CliError> {
    let sys = point.system;
    let drive = point.drive()?;

    let mut rows: Vec<(f64, Result<SpectrumPoint, String>)> =
        match solve_steady_state(&sys, &drive) {
            Err(err) => {
                let message = err.to_string();
                detunings
                    .iter()
                    .map(|&detuning| (detuning, Err(message.clone())))
                    .collect()
            }
            Ok(ss) => pool.install(|| {
                detunings
                    .par_iter()
                    .map(|&detuning| {
                        let outcome = drive
                            .with_probe_detuning(detuning, &sys)
                            .and_then(|probe_drive| probe_response(&sys, &probe_drive, &ss))
                            .map(|resp| SpectrumPoint {
                                probe_detuning: detuning,
                                transmission: resp.transmission,
                                transmittance: resp.transmittance,
                                phase: resp.phase,
                            });
                        (detuning, outcome.map_err(|err| err.to_string()))
                    })
                    .collect()
            }),
        };

    unwrap_ok_phases(&mut rows);
    if verify {
        verify_spectrum_rows(&sys, &drive, &rows)?;
    }

    let mut tally = PointTally::default();
    let mut csv = String::with_capacity(64 + 112 * rows.len());
    csv.push_str(SPECTRUM_CSV_HEADER);
    csv.push_str(",error\n");
    for (detuning, row) in &rows {
        let scaled = detuning / sys.mech_freq;
        match row {
            Ok(p) => {
                tally.ok += 1;
                csv.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},\n",
                    scaled, p.transmittance, p.phase, p.transmission.re, p.transmission.im
                ));
            }
            Err(message) => {
                tally.failed += 1;
                csv.push_str(&format!(
                    "{scaled:.16e},nan,nan,nan,nan,{}\n",
                    csv_safe(message)
                ));
            }
        }
    }
    Ok(SpectrumSeries { csv, tally })
}

/// Unwrap the phases of the successful rows as one continuous series,
/// anchored at the successful row nearest zero detuning.
fn unwrap_ok_phases(rows: &mut [(f64, Result<SpectrumPoint, String>)]) {
    let ok_indices: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter_map(|(idx, (_, row))| row.is_ok().then_some(idx))
        .collect();
    if ok_indices.is_empty() {
        return;
    }
    let mut phases: Vec<f64> = ok_indices
        .iter()
        .map(|&idx| rows[idx].1.as_ref().expect("index of an ok row").phase)
        .collect();
    let anchor = ok_indices
        .iter()
        .enumerate()
        .min_by(|(_, &a), (_, &b)| rows[a].0.abs().total_cmp(&rows[b].0.abs()))
        .map(|(position, _)| position)
        .expect("ok_indices is nonempty");
    unwrap_phase_series(&mut phases, anchor);
    for (position, &idx) in ok_indices.iter().enumerate() {
        if let Ok(point) = &mut rows[idx].1 {
            point.phase = phases[position];
        }
    }
}

/// Recompute every successful row and compare transmittance and phase;
/// backs the `--verify` flag.
fn verify_spectrum_rows(
    sys: &SystemParams,
    drive: &DriveParams,
    rows: &[(f64, Result<SpectrumPoint, String>)],
) -> Result<(), CliError> {
    let ss = match solve_steady_state(sys, drive) {
        Ok(ss) => ss,
        // The first pass already failed every row; nothing to verify.
        Err(_) => return Ok(()),
    };
    for (detuning, row) in rows {
        let Ok(point) = row else { continue };
        let again = drive
            .with_probe_detuning(*detuning, sys)
            .and_then(|probe_drive| probe_response(sys, &probe_drive, &ss))
            .map_err(|err| {
                CliError::Internal(format!(
                    "verification recomputation failed at detuning {detuning}: {err}"
                ))
            })?;
        let eta_err = (point.transmittance - again.transmittance).abs();
        let eta_tol = VERIFY_TOLERANCE * again.transmittance.abs().max(f64::MIN_POSITIVE);
        // The stored phase may be unwrapped; compare modulo full turns.
        let mut phase_err = point.phase - again.phase;
        phase_err -= TAU * (phase_err / TAU).round();
        let phase_tol = VERIFY_TOLERANCE * again.phase.abs().max(1.0);
        if eta_err > eta_tol || phase_err.abs() > phase_tol {
            return Err(CliError::Internal(format!(
                "verification mismatch at detuning {detuning}: \
                 eta {:.17e} vs {:.17e}, phase {:.17e} vs {:.17e}",
                point.transmittance, again.transmittance, point.phase, again.phase
            )));
        }
    }
    Ok(())
}

/// Header of all group-delay CSV files.
pub const DELAY_CSV_HEADER: &str = "P_L_uW,kappa_over_gamma,tau_g_s,pt_label,error";

/// Group delay at zero probe detuning for each pump power, in input order.
pub fn delay_rows(
    pool: &rayon::ThreadPool,
    point: &Resolved,
    powers: &[f64],
) -> Vec<(f64, Result<f64, String>)> {
    pool.install(|| {
        powers
            .par_iter()
            .map(|&power| {
                let at_power = point.with_pump_power(power);
                let delay = at_power
                    .drive()
                    .map_err(|err| err.to_string())
                    .and_then(|drive| {
                        group_delay(&at_power.system, &drive).map_err(|err| err.to_string())
                    });
                (power, delay)
            })
            .collect()
    })
}

/// Append delay rows for one gain ratio to a CSV body and update the tally.
pub fn append_delay_rows(
    csv: &mut String,
    ratio: f64,
    label: PtPhase,
    rows: &[(f64, Result<f64, String>)],
    tally: &mut PointTally,
) {
    for (power, row) in rows {
        match row {
            Ok(delay) => {
                tally.ok += 1;
                csv.push_str(&format!(
                    "{:.16e},{ratio:.16e},{delay:.16e},{label},\n",
                    power * 1e6
                ));
            }
            Err(message) => {
                tally.failed += 1;
                csv.push_str(&format!(
                    "{:.16e},{ratio:.16e},nan,{label},{}\n",
                    power * 1e6,
                    csv_safe(message)
                ));
            }
        }
    }
}
