//! Statistics engine for a tamper-indicating entangled-photon seal.
//!
//! The seal transmits polarization-entangled photon pairs through a monitored
//! fiber loop and verifies on return that they are still entangled. This
//! crate holds everything that does not touch the network or the filesystem:
//!
//! - [`photonics`]: Bell-state analyzer detection statistics and the
//!   polarization-correlation parameter, including the triangular
//!   two-photon-interference envelope under relative delay;
//! - [`attack`]: tamper scenarios (intercept-resend, redirection, short-time
//!   injection, blackout) as transformations of the source statistics;
//! - [`sim`]: seeded Monte-Carlo generation of timestamped detector clicks;
//! - [`wire`]: the event datagram codec and the reduction from click streams
//!   to corrected coincidence-type totals;
//! - [`estimator`]: the Bayesian correlation estimate with its
//!   hypergeometric closed form and an independent quadrature oracle;
//! - [`decision`]: thresholding, ROC analysis, and alarm semantics.
//!
//! The crate is `no_std` (with `alloc`); transport, file formats, and the
//! command-line tools live in the companion `qseal` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod attack;
pub mod decision;
pub mod estimator;
pub mod photonics;
pub mod sim;
pub mod special;
pub mod wire;

pub use num_complex::Complex64;

pub use attack::{
    effective_statistics, min_spoof_duration, mixed_correlation, thermal_drift,
    EffectiveStatistics, TamperScenario,
};
pub use decision::{
    decide, detection_stats, roc_curve, threshold_for_far, DecisionConfig, Outcome, RocPoint,
    Verdict,
};
pub use estimator::{
    estimate_correlation, gaussian_model, oracle_estimate, posterior_density, Estimate,
};
pub use photonics::{
    bell_overlap, bsa_probabilities, correlation, multimode_correlation,
    multimode_probabilities, separable_state, triangle, BellState, CoincidenceProbabilities,
    Pathway, TemporalModel, TwoPhotonState,
};
pub use sim::{simulate_window, ChannelLabel, DetectionEvent, SourceConfig};
pub use wire::{
    correct_counts, decode_packet, encode_packets, find_coincidences, reduce_to_kappa,
    EventPacket, KappaTotals, RawCounts,
};
