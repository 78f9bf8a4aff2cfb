//! Steady state, probe spectra, and group delay of a compound
//! optomechanical system: a lossy microresonator hosting a mechanical mode,
//! coupled by photon tunneling to a second resonator that can supply optical
//! gain or extra loss.
//!
//! A strong pump drives the lossy cavity on its red sideband and a weak
//! probe scans across the resonance. The crate computes:
//!
//! - the self-consistent operating point ([`steady_state`]),
//! - the linearized probe transmission spectrum, its phase, and the optical
//!   group delay ([`response`]),
//! - the phase of the coupled optical pair — symmetric, broken, or at the
//!   exceptional point — and its linear stability ([`pt_phase`]),
//! - an independent time-domain cross-check of the frequency-domain
//!   response ([`tdsim`]).
//!
//! # Example
//!
//! ```
//! use ptomit::params::{paper_preset, paper_system, paper_drive};
//! use ptomit::steady_state::solve_steady_state;
//! use ptomit::response::{probe_response, group_delay};
//!
//! // Passive-passive pair: second cavity as lossy as the first.
//! let (sys, drive) = paper_preset(-1.0);
//! let ss = solve_steady_state(&sys, &drive).unwrap();
//! let resp = probe_response(&sys, &drive, &ss).unwrap();
//! assert!(resp.transmittance > 0.0);
//!
//! // Slow light on resonance for the passive pair.
//! let tau = group_delay(&sys, &drive).unwrap();
//! assert!(tau > 0.0);
//! ```

pub mod error;
pub mod params;
pub mod pt_phase;
pub mod response;
pub mod steady_state;
pub mod tdsim;

pub use error::{Error, Result};
pub use params::{
    derive_params, drive_amplitudes, paper_drive, paper_preset, paper_system, DriveInput,
    DriveParams, SystemParams, DEFAULT_PROBE_FRACTION, DEFAULT_PUMP_POWER, REDUCED_PLANCK,
};
pub use pt_phase::{classify, phase_boundary, PtClassification, PtPhase};
pub use response::{
    group_delay, local_maxima, local_minima, probe_response, probe_sideband_eliminated,
    resonant_transmittance_approx, sideband_equation_defects, single_cavity_probe_sideband,
    spectrum, spectrum_csv, spectrum_lenient, unwrap_phase_series, ProbeResponse, SpectrumPoint,
    SPECTRUM_CSV_HEADER,
};
pub use steady_state::{
    cubic_coefficients, solve_steady_state, steady_state_branches, CubicPoly, SteadyState,
    RESIDUAL_LIMIT,
};
pub use tdsim::{
    aligned_step, demodulate, demodulate_static, integrate, max_dynamic_frequency,
    oracle_transmittance, to_dimensionless, transient_time, DemodResult, DimensionlessPoint,
    Trajectory, TrajectoryState,
};
