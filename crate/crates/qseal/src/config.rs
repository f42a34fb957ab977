//! JSON run configuration shared by the source and monitor processes.

use qseal_core::{
    Complex64, SourceConfig, TamperScenario, TemporalModel, TwoPhotonState,
};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::Error;

/// Top-level configuration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub source: SourceCfg,
    #[serde(default)]
    pub scenario: ScenarioCfg,
    /// Scenario switch points: from `start_window` on, use `scenario`.
    #[serde(default)]
    pub schedule: Vec<ScheduleEntry>,
    #[serde(default)]
    pub temporal: TemporalCfg,
    #[serde(default)]
    pub wire: WireCfg,
    #[serde(default)]
    pub decision: DecisionCfg,
    #[serde(default)]
    pub output: OutputCfg,
    /// Number of windows to simulate or monitor. Zero means run until idle.
    #[serde(default = "default_windows")]
    pub windows: u32,
}

fn default_windows() -> u32 {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub start_window: u32,
    pub scenario: ScenarioCfg,
}

/// Serializable mirror of the source parameters; window duration comes from
/// the wire section so both processes agree on it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceCfg {
    pub pair_rate: f64,
    pub pathway_efficiency: [f64; 10],
    pub dark_rate: f64,
    pub background_ratio: f64,
    pub jitter_sigma: f64,
    pub clock_tick: f64,
    pub seed: u64,
}

impl Default for SourceCfg {
    fn default() -> Self {
        let d = SourceConfig::desk_scale();
        Self {
            pair_rate: d.pair_rate,
            pathway_efficiency: d.pathway_efficiency,
            dark_rate: d.dark_rate,
            background_ratio: d.background_ratio,
            jitter_sigma: d.jitter_sigma,
            clock_tick: d.clock_tick,
            seed: d.seed,
        }
    }
}

/// Channel condition, JSON-tagged by `type`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioCfg {
    Authentic {
        phase: f64,
    },
    InterceptResend {
        /// Complex amplitudes (hh, hv, vh, vv) as [re, im] pairs.
        state: [[f64; 2]; 4],
    },
    Redirection {
        t_d: f64,
    },
    ShortTimeInjection {
        inner: Box<ScenarioCfg>,
        duration: f64,
        #[serde(default = "default_phase")]
        baseline_phase: f64,
    },
    Blackout,
}

fn default_phase() -> f64 {
    std::f64::consts::PI
}

impl Default for ScenarioCfg {
    fn default() -> Self {
        ScenarioCfg::Authentic {
            phase: default_phase(),
        }
    }
}

impl ScenarioCfg {
    pub fn to_scenario(&self) -> Result<TamperScenario, Error> {
        Ok(match self {
            ScenarioCfg::Authentic { phase } => TamperScenario::Authentic { phase: *phase },
            ScenarioCfg::InterceptResend { state } => {
                let c = |p: [f64; 2]| Complex64::new(p[0], p[1]);
                TamperScenario::InterceptResend {
                    state: TwoPhotonState::new(
                        c(state[0]),
                        c(state[1]),
                        c(state[2]),
                        c(state[3]),
                    )
                    .map_err(|e| Error::Config(e.to_string()))?,
                }
            }
            ScenarioCfg::Redirection { t_d } => TamperScenario::Redirection { t_d: *t_d },
            ScenarioCfg::ShortTimeInjection {
                inner,
                duration,
                baseline_phase,
            } => TamperScenario::ShortTimeInjection {
                inner: Box::new(inner.to_scenario()?),
                duration: *duration,
                baseline_phase: *baseline_phase,
            },
            ScenarioCfg::Blackout => TamperScenario::Blackout,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemporalCfg {
    pub t_d: f64,
    pub delta_t: f64,
}

impl Default for TemporalCfg {
    fn default() -> Self {
        Self {
            t_d: 0.0,
            delta_t: 8e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WireCfg {
    pub host: String,
    pub port: u16,
    /// Sampling window length T, seconds.
    pub window_seconds: f64,
    pub node_id: u8,
    /// Transmit retry policy.
    pub max_attempts: u32,
    pub retry_ms: u64,
    /// Coincidence acceptance half-width, clock ticks.
    pub coincidence_ticks: u64,
    /// Shift used by the delayed-window accidental estimate, clock ticks.
    pub accidental_offset_ticks: u64,
}

impl Default for WireCfg {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 47474,
            window_seconds: 10.0,
            node_id: 0,
            max_attempts: 3,
            retry_ms: 100,
            coincidence_ticks: 2,
            accidental_offset_ticks: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionCfg {
    pub epsilon: f64,
    pub e0: f64,
    pub e1: f64,
    pub sigma: f64,
    pub min_coincidences: f64,
}

impl Default for DecisionCfg {
    fn default() -> Self {
        Self {
            epsilon: 0.62,
            e0: 0.5,
            e1: 0.8,
            sigma: 0.03,
            min_coincidences: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputCfg {
    pub alarm_log: String,
}

impl Default for OutputCfg {
    fn default() -> Self {
        Self {
            alarm_log: "alarm_log.jsonl".into(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.wire.window_seconds > 0.0) {
            return Err(Error::Config("wire.window_seconds must be > 0".into()));
        }
        if self
            .schedule
            .windows(2)
            .any(|w| w[0].start_window >= w[1].start_window)
        {
            return Err(Error::Config(
                "schedule start_window values must be strictly increasing".into(),
            ));
        }
        self.source_config(0)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.temporal()?;
        Ok(())
    }

    pub fn temporal(&self) -> Result<TemporalModel, Error> {
        TemporalModel::new(self.temporal.t_d, self.temporal.delta_t)
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Source parameters for one window. Each window advances the seed so
    /// successive windows are independent but the whole run stays a pure
    /// function of the configured seed.
    pub fn source_config(&self, window_id: u32) -> SourceConfig {
        let s = &self.source;
        SourceConfig {
            pair_rate: s.pair_rate,
            pathway_efficiency: s.pathway_efficiency,
            dark_rate: s.dark_rate,
            background_ratio: s.background_ratio,
            jitter_sigma: s.jitter_sigma,
            clock_tick: s.clock_tick,
            duration: self.wire.window_seconds,
            seed: s.seed.wrapping_add(window_id as u64),
        }
    }

    /// Scenario in force for a window, honoring the switch schedule.
    pub fn scenario_for_window(&self, window_id: u32) -> Result<TamperScenario, Error> {
        let mut current = &self.scenario;
        for entry in &self.schedule {
            if entry.start_window <= window_id {
                current = &entry.scenario;
            }
        }
        current.to_scenario()
    }
}
