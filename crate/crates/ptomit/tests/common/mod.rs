//! Helpers shared by the integration-test suites.

#![allow(dead_code)] // each test binary uses a different subset

use num_complex::Complex64;
use ptomit::{
    oracle_transmittance, probe_response, solve_steady_state, to_dimensionless, DriveParams,
    SystemParams,
};

/// Relative difference of `actual` from `expected`, falling back to the
/// absolute difference when the expected value is exactly zero.
pub fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        (actual - expected).abs() / expected.abs()
    }
}

/// Relative deviation of a complex value from a reference, falling back to
/// the absolute deviation when the reference is exactly zero.
pub fn rel_err_c(actual: Complex64, expected: Complex64) -> f64 {
    if expected == Complex64::new(0.0, 0.0) {
        actual.norm()
    } else {
        (actual - expected).norm() / expected.norm()
    }
}

/// Assert that `actual` is within `tol` relative of `expected`, with a
/// message that carries both values.
pub fn assert_rel(label: &str, actual: f64, expected: f64, tol: f64) {
    let err = rel_err(actual, expected);
    assert!(
        err <= tol,
        "{label}: actual {actual:.17e}, expected {expected:.17e}, rel err {err:.3e} > {tol:.1e}"
    );
}

/// Complex counterpart of [`assert_rel`].
pub fn assert_rel_c(label: &str, actual: Complex64, expected: Complex64, tol: f64) {
    let err = rel_err_c(actual, expected);
    assert!(
        err <= tol,
        "{label}: actual {actual:.17}, expected {expected:.17}, rel err {err:.3e} > {tol:.1e}"
    );
}

/// One time-domain versus frequency-domain comparison point.
#[derive(Debug, Clone, Copy)]
pub struct TdComparison {
    /// Transmittance demodulated from the simulated trajectory.
    pub transmittance_td: f64,
    /// Closed-form transmittance at the same operating point.
    pub transmittance_fd: f64,
    /// Relative deviation between the two.
    pub rel_err: f64,
}

/// Run the time-domain oracle on the dimensionless image of an operating
/// point and compare its demodulated transmittance against the closed form.
pub fn td_comparison(
    sys: &SystemParams,
    drive: &DriveParams,
    steps_per_period: usize,
    window_periods: usize,
) -> ptomit::Result<TdComparison> {
    let map = to_dimensionless(sys, drive)?;
    let ss = solve_steady_state(&map.system, &map.drive)?;
    let fd = probe_response(&map.system, &map.drive, &ss)?;
    let demod = oracle_transmittance(sys, drive, steps_per_period, window_periods)?;

    Ok(TdComparison {
        transmittance_td: demod.transmittance_est,
        transmittance_fd: fd.transmittance,
        rel_err: rel_err(demod.transmittance_est, fd.transmittance),
    })
}
