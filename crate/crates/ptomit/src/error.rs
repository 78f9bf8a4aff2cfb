//! Error types shared by every module in this crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while deriving parameters, solving for the
/// steady state, evaluating the probe response, or integrating in time.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A supplied parameter is out of its physical domain (for example a
    /// non-positive frequency, mass, or power).
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter {
        /// Name of the offending field, matching the JSON key.
        field: &'static str,
        /// Human-readable description of the constraint that was violated.
        message: String,
    },

    /// The linear steady-state system is (numerically) singular: the coupled
    /// cavities sit at the lasing threshold and no stationary intracavity
    /// amplitude exists.
    #[error(
        "steady-state denominator magnitude {denominator:.6e} is below the \
         lasing-threshold guard {guard:.6e}; no stationary solution"
    )]
    LasingThreshold {
        /// Magnitude of the 2x2 optical system determinant, in (rad/s)^2.
        denominator: f64,
        /// Guard threshold the magnitude was compared against, in (rad/s)^2.
        guard: f64,
    },

    /// The linear-response denominator vanished at the requested probe
    /// detuning, so the first-order sideband amplitudes are undefined there.
    #[error(
        "probe response is singular at probe detuning {probe_detuning:.6e} rad/s \
         (denominator magnitude {denominator:.6e})"
    )]
    ResponseSingularity {
        /// Probe detuning from the cavity resonance, in rad/s.
        probe_detuning: f64,
        /// Magnitude of the response denominator at that detuning.
        denominator: f64,
    },

    /// The centered phase-derivative estimate did not settle while the
    /// finite-difference step was repeatedly halved.
    #[error(
        "group-delay derivative did not stabilize; last finite-difference \
         step was {step:.6e} rad/s"
    )]
    DerivativeUnstable {
        /// Final finite-difference step size, in rad/s.
        step: f64,
    },

    /// The closed-form resonant-transmittance approximation has a pole at
    /// this operating point (tunneling exactly balances the loss-gain
    /// product) and is meaningless there.
    #[error("resonant-transmittance approximation has a pole at this operating point")]
    ApproxPole,

    /// A demodulated amplitude was still drifting between averaging windows,
    /// i.e. the trajectory had not reached its periodic steady state.
    #[error(
        "demodulated amplitude still drifting: relative change {drift:.3e} \
         exceeds limit {limit:.3e}"
    )]
    NotConverged {
        /// Observed relative change between the two half-windows.
        drift: f64,
        /// Largest drift accepted as converged.
        limit: f64,
    },

    /// The time-domain trajectory diverged (the operating point is
    /// dynamically unstable, or the step size was far too large).
    #[error("trajectory diverged at t = {first_bad_time:.6e} s")]
    Unstable {
        /// Time of the first non-finite or runaway sample, in seconds.
        first_bad_time: f64,
    },

    /// An internal invariant was violated; this indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}
