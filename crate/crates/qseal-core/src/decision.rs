//! Binary tamper detection on windowed correlation estimates.
//!
//! Discrimination of two constant signals in Gaussian noise: the authentic
//! baseline sits at e1, tampering at e0 (at most 1/2 by the separable bound),
//! both with standard deviation sigma. An estimate at or below the threshold
//! epsilon raises a tamper alarm; a window starved of coincidences raises a
//! blackout alarm instead, since it indicates loss of optical continuity
//! rather than a statistical anomaly.

use alloc::vec::Vec;

use crate::estimator::Estimate;
use crate::special::{erfc, erfc_inv};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionError {
    /// Requires e0 <= epsilon < e1 <= 1 and |e0| <= 1/2.
    InvalidConfig,
    /// target false-alarm rate outside (0, 0.5).
    TargetOutOfRange(f64),
}

impl core::fmt::Display for DecisionError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::InvalidConfig => {
                write!(f, "config must satisfy e0 <= epsilon < e1 <= 1, |e0| <= 1/2")
            }
            Self::TargetOutOfRange(t) => write!(f, "target FAR {t} outside (0, 0.5)"),
        }
    }
}

/// Operating point of the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionConfig {
    /// Alarm threshold on the correlation estimate.
    pub epsilon: f64,
    /// Expected correlation under tampering (separable bound caps it at 1/2).
    pub e0: f64,
    /// Authentic baseline correlation.
    pub e1: f64,
    /// Operating standard deviation of the windowed estimate.
    pub sigma: f64,
    /// Windows with fewer total coincidences than this raise a blackout alarm.
    pub min_coincidences: f64,
}

impl DecisionConfig {
    pub fn validate(&self) -> Result<(), DecisionError> {
        let ok = self.e0 <= self.epsilon
            && self.epsilon < self.e1
            && self.e1 <= 1.0
            && libm::fabs(self.e0) <= 0.5
            && self.sigma > 0.0;
        if ok {
            Ok(())
        } else {
            Err(DecisionError::InvalidConfig)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Authentic,
    TamperAlarm,
    BlackoutAlarm,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::Authentic => "authentic",
            Outcome::TamperAlarm => "tamper_alarm",
            Outcome::BlackoutAlarm => "blackout_alarm",
        }
    }
}

/// Per-window decision record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub window_id: u32,
    pub e_kappa: f64,
    pub sigma_kappa: f64,
    pub outcome: Outcome,
    pub threshold_used: f64,
}

/// Classify one windowed estimate. Count starvation is checked before
/// thresholding: an empty window says nothing about entanglement.
pub fn decide(est: &Estimate, cfg: &DecisionConfig) -> Verdict {
    let outcome = if est.n < cfg.min_coincidences {
        Outcome::BlackoutAlarm
    } else if est.e_kappa <= cfg.epsilon {
        Outcome::TamperAlarm
    } else {
        Outcome::Authentic
    };
    Verdict {
        window_id: est.window_id,
        e_kappa: est.e_kappa,
        sigma_kappa: est.sigma_kappa,
        outcome,
        threshold_used: cfg.epsilon,
    }
}

/// Detection, false-alarm, and spoof-success probabilities at an operating
/// point:
///
/// ```text
/// P_D   = erfc((e0 - eps) / (sqrt(2) sigma)) / 2
/// P_FAR = erfc((e1 - eps) / (sqrt(2) sigma)) / 2
/// P_S   = 1 - P_D
/// ```
pub fn detection_stats(cfg: &DecisionConfig) -> (f64, f64, f64) {
    let denom = libm::sqrt(2.0) * cfg.sigma;
    let p_d = 0.5 * erfc((cfg.e0 - cfg.epsilon) / denom);
    let p_far = 0.5 * erfc((cfg.e1 - cfg.epsilon) / denom);
    (p_d, p_far, 1.0 - p_d)
}

/// Threshold achieving a target false-alarm rate:
/// eps = e1 - sqrt(2) sigma erfc_inv(2 target).
pub fn threshold_for_far(e1: f64, sigma: f64, target_far: f64) -> Result<f64, DecisionError> {
    if !(target_far > 0.0 && target_far < 0.5) {
        return Err(DecisionError::TargetOutOfRange(target_far));
    }
    Ok(e1 - libm::sqrt(2.0) * sigma * erfc_inv(2.0 * target_far))
}

/// One ROC sample: the threshold and the operating probabilities there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub epsilon: f64,
    pub p_far: f64,
    pub p_d: f64,
}

/// Parametric ROC sweep of the threshold over [e0 - 6σ, e1 + 6σ].
pub fn roc_curve(cfg: &DecisionConfig, n_points: usize) -> Vec<RocPoint> {
    assert!(n_points >= 2);
    let lo = cfg.e0 - 6.0 * cfg.sigma;
    let hi = cfg.e1 + 6.0 * cfg.sigma;
    (0..n_points)
        .map(|i| {
            // raising the threshold raises both probabilities, so an
            // ascending sweep yields an ascending-FAR curve
            let eps = lo + (hi - lo) * i as f64 / (n_points - 1) as f64;
            let point = DecisionConfig { epsilon: eps, ..*cfg };
            let (p_d, p_far, _) = detection_stats(&point);
            RocPoint {
                epsilon: eps,
                p_far,
                p_d,
            }
        })
        .collect()
}
