//! Tampering scenarios as transformations of the source statistics.
//!
//! Each scenario maps to the detection probabilities the monitor would see:
//! an intercept-resend attack replaces the state with an unentangled replica,
//! redirection adds a relative delay that suppresses two-photon interference,
//! a short-time injection mixes tampered and authentic statistics within one
//! sampling window, and a blackout removes the pair flux entirely.

use alloc::boxed::Box;

use crate::photonics::{
    bsa_probabilities, multimode_probabilities, CoincidenceProbabilities, TemporalModel,
    TwoPhotonState,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackError {
    /// ShortTimeInjection nested inside ShortTimeInjection.
    InvalidNesting,
    /// Injection duration outside [0, T].
    DurationOutOfRange { t: f64, window: f64 },
    /// Threshold/means ordering violated for the spoof-duration formula.
    DomainError,
}

impl core::fmt::Display for AttackError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::InvalidNesting => write!(f, "short-time injection cannot nest"),
            Self::DurationOutOfRange { t, window } => {
                write!(f, "injection duration {t} outside [0, {window}]")
            }
            Self::DomainError => write!(f, "spoof-duration formula requires e0 <= eps < e1"),
        }
    }
}

/// Channel condition during a sampling window.
#[derive(Debug, Clone, PartialEq)]
pub enum TamperScenario {
    /// Untampered source at relative phase `phase` (π is Ψ+, 0 is Ψ-).
    Authentic { phase: f64 },
    /// The active photon is measured and replaced with `state`.
    InterceptResend { state: TwoPhotonState },
    /// The active path length is changed, delaying the photon by `t_d`.
    Redirection { t_d: f64 },
    /// `inner` statistics for the first `duration` seconds of each window,
    /// authentic at `baseline_phase` for the remainder.
    ShortTimeInjection {
        inner: Box<TamperScenario>,
        duration: f64,
        baseline_phase: f64,
    },
    /// Optical continuity broken: no pairs at all.
    Blackout,
}

impl TamperScenario {
    pub fn validate(&self, window_seconds: f64) -> Result<(), AttackError> {
        if let TamperScenario::ShortTimeInjection { inner, duration, .. } = self {
            if matches!(**inner, TamperScenario::ShortTimeInjection { .. }) {
                return Err(AttackError::InvalidNesting);
            }
            if !(0.0..=window_seconds).contains(duration) {
                return Err(AttackError::DurationOutOfRange {
                    t: *duration,
                    window: window_seconds,
                });
            }
        }
        Ok(())
    }

    /// Timestamp delay imposed on the active photon, if any.
    pub fn delay_seconds(&self) -> f64 {
        match self {
            TamperScenario::Redirection { t_d } => *t_d,
            TamperScenario::ShortTimeInjection { inner, .. } => inner.delay_seconds(),
            _ => 0.0,
        }
    }
}

/// What the detector statistics look like under a scenario: coincidence
/// probabilities plus a scale factor on the pair rate (zero for blackout).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveStatistics {
    pub probs: CoincidenceProbabilities,
    pub pair_rate_scale: f64,
}

/// Detection statistics for a scenario, evaluated for a window of
/// `window_seconds` (used only by the short-time mixing weights).
pub fn effective_statistics(
    scenario: &TamperScenario,
    temporal: &TemporalModel,
    window_seconds: f64,
) -> Result<EffectiveStatistics, AttackError> {
    scenario.validate(window_seconds)?;
    let zero_delay = TemporalModel {
        t_d: 0.0,
        delta_t: temporal.delta_t,
    };
    Ok(match scenario {
        TamperScenario::Authentic { phase } => EffectiveStatistics {
            probs: multimode_probabilities(*phase, &zero_delay),
            pair_rate_scale: 1.0,
        },
        TamperScenario::InterceptResend { state } => EffectiveStatistics {
            probs: bsa_probabilities(state),
            pair_rate_scale: 1.0,
        },
        TamperScenario::Redirection { t_d } => EffectiveStatistics {
            probs: multimode_probabilities(
                core::f64::consts::PI,
                &TemporalModel {
                    t_d: *t_d,
                    delta_t: temporal.delta_t,
                },
            ),
            pair_rate_scale: 1.0,
        },
        TamperScenario::ShortTimeInjection {
            inner,
            duration,
            baseline_phase,
        } => {
            let tampered = effective_statistics(inner, temporal, window_seconds)?;
            let authentic = multimode_probabilities(*baseline_phase, &zero_delay);
            // Rate-weighted mixture: segments contribute events in proportion
            // to their duration times their pair-rate scale.
            let w_in = duration * tampered.pair_rate_scale;
            let w_auth = window_seconds - duration;
            let total = w_in + w_auth;
            if total <= 0.0 {
                EffectiveStatistics {
                    probs: authentic,
                    pair_rate_scale: 0.0,
                }
            } else {
                EffectiveStatistics {
                    probs: tampered.probs.mix(&authentic, w_in / total),
                    pair_rate_scale: total / window_seconds,
                }
            }
        }
        TamperScenario::Blackout => EffectiveStatistics {
            probs: multimode_probabilities(core::f64::consts::PI, &zero_delay),
            pair_rate_scale: 0.0,
        },
    })
}

/// Correlation observed when tampered statistics (`e0`) are present for
/// `t` seconds of a `window` seconds estimate that is otherwise authentic
/// (`e1`): the duration-weighted average.
pub fn mixed_correlation(t: f64, window: f64, e0: f64, e1: f64) -> Result<f64, AttackError> {
    if !(window > 0.0) || !(0.0..=window).contains(&t) {
        return Err(AttackError::DurationOutOfRange { t, window });
    }
    Ok((t / window) * e0 + ((window - t) / window) * e1)
}

/// Minimum injection duration that drags the windowed estimate below the
/// threshold `epsilon` in expectation: t > (e1 - eps)/(e1 - e0) · T.
pub fn min_spoof_duration(e1: f64, e0: f64, epsilon: f64, window: f64) -> Result<f64, AttackError> {
    if !(e1 > e0) || !(e0 <= epsilon && epsilon < e1) {
        return Err(AttackError::DomainError);
    }
    Ok((e1 - epsilon) / (e1 - e0) * window)
}

/// One-way fiber length change from a temperature swing: ΔL = α L₀ ΔT.
/// Round-trip figures are twice this.
pub fn thermal_drift(length_m: f64, delta_temp_c: f64, alpha_per_c: f64) -> f64 {
    alpha_per_c * length_m * delta_temp_c
}
