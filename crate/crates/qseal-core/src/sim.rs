//! Monte-Carlo generation of timestamped detection events.
//!
//! Pairs are emitted as a homogeneous Poisson process, assigned a pathway by
//! sampling the scenario's effective statistics, thinned by the joint pathway
//! efficiency, and routed to physical detector channels. Port-2 polarization
//! outputs pass a 50/50 splitter (channels a/b), so same-port
//! same-polarization pairs land on one channel half the time and produce a
//! single click; the port-3 arm has one detector per polarization and its
//! same-polarization pairs are never seen as coincidences. Dark counts and a
//! background singles floor are added per channel, Gaussian jitter is applied,
//! and everything is quantized to the acquisition clock.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::attack::{effective_statistics, AttackError, EffectiveStatistics, TamperScenario};
use crate::photonics::{Pathway, TemporalModel};

/// Photon polarization at a detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    H,
    V,
}

/// Physical detector channels. Channels 6 and 7 of the acquisition card are
/// reserved and never emit events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelLabel {
    H2A,
    H2B,
    V2A,
    V2B,
    H3,
    V3,
}

impl ChannelLabel {
    pub const ALL: [ChannelLabel; 6] = [
        ChannelLabel::H2A,
        ChannelLabel::H2B,
        ChannelLabel::V2A,
        ChannelLabel::V2B,
        ChannelLabel::H3,
        ChannelLabel::V3,
    ];

    pub fn id(self) -> u8 {
        match self {
            ChannelLabel::H2A => 0,
            ChannelLabel::H2B => 1,
            ChannelLabel::V2A => 2,
            ChannelLabel::V2B => 3,
            ChannelLabel::H3 => 4,
            ChannelLabel::V3 => 5,
        }
    }

    pub fn from_id(id: u8) -> Option<ChannelLabel> {
        ChannelLabel::ALL.get(id as usize).copied()
    }

    pub fn polarization(self) -> Pol {
        match self {
            ChannelLabel::H2A | ChannelLabel::H2B | ChannelLabel::H3 => Pol::H,
            _ => Pol::V,
        }
    }

    pub fn port(self) -> u8 {
        match self {
            ChannelLabel::H3 | ChannelLabel::V3 => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelLabel::H2A => "h2a",
            ChannelLabel::H2B => "h2b",
            ChannelLabel::V2A => "v2a",
            ChannelLabel::V2B => "v2b",
            ChannelLabel::H3 => "h3",
            ChannelLabel::V3 => "v3",
        }
    }
}

/// One detector click, timestamped in acquisition clock ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DetectionEvent {
    pub tick: u64,
    pub channel: u8,
}

/// Source and acquisition parameters for one simulated window.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    /// Generated pairs per second before any loss.
    pub pair_rate: f64,
    /// Joint pathway efficiency per pathway, in (0, 1].
    pub pathway_efficiency: [f64; 10],
    /// Dark counts per second per channel.
    pub dark_rate: f64,
    /// Background singles per channel, as a fraction of the pair rate.
    /// Stands in for the singles flux from pairs that lost one photon.
    pub background_ratio: f64,
    /// Gaussian timing jitter (seconds, 1 sigma) before quantization.
    pub jitter_sigma: f64,
    /// Acquisition clock period in seconds.
    pub clock_tick: f64,
    /// Window duration in seconds.
    pub duration: f64,
    pub seed: u64,
}

impl SourceConfig {
    /// Desk-scale defaults: modest rate so statistical tests run in seconds,
    /// pathway efficiencies in the 5-6e-3 band, 10 ns clock.
    pub fn desk_scale() -> Self {
        let mut eta = [0.0; 10];
        for (i, e) in eta.iter_mut().enumerate() {
            *e = 5.0e-3 + 1.0e-3 * (i as f64 / 9.0);
        }
        Self {
            pair_rate: 1.0e4,
            pathway_efficiency: eta,
            dark_rate: 100.0,
            background_ratio: 3.3e-3,
            jitter_sigma: 0.0,
            clock_tick: 10e-9,
            duration: 10.0,
            seed: 1,
        }
    }

    /// Joint efficiency per monitored pathway, for the count correction
    /// step. Deliberately excludes the extra same-port same-polarization
    /// splitter loss: the estimator's posterior absorbs those known losses
    /// through its quarter-observability model instead.
    pub fn monitored_efficiencies(&self) -> [f64; 8] {
        let mut eta = [0.0; 8];
        for (i, &pw) in Pathway::MONITORED.iter().enumerate() {
            eta[i] = self.pathway_efficiency[pw.index()];
        }
        eta
    }

    pub fn eta_min(&self) -> f64 {
        let mut m = f64::INFINITY;
        for &pw in &Pathway::MONITORED {
            m = m.min(self.pathway_efficiency[pw.index()]);
        }
        m
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.pair_rate >= 0.0) {
            return Err(SimError::BadConfig("pair_rate must be >= 0"));
        }
        if !(self.clock_tick > 0.0) {
            return Err(SimError::BadConfig("clock_tick must be > 0"));
        }
        if self
            .pathway_efficiency
            .iter()
            .any(|&e| !(e > 0.0 && e <= 1.0))
        {
            return Err(SimError::BadConfig("pathway efficiencies must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimError {
    BadConfig(&'static str),
    Scenario(AttackError),
}

impl core::fmt::Display for SimError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::BadConfig(msg) => write!(f, "invalid source config: {msg}"),
            Self::Scenario(e) => write!(f, "invalid scenario: {e}"),
        }
    }
}

impl From<AttackError> for SimError {
    fn from(e: AttackError) -> Self {
        SimError::Scenario(e)
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    // 53-bit mantissa uniform in [0, 1)
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    -libm::log(1.0 - uniform(rng)) / rate
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; one draw per call keeps the stream layout simple.
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// Simulate one window for a tamper scenario.
///
/// The returned events are sorted by tick and the whole stream is a pure
/// function of the seed and configuration.
pub fn simulate_window(
    scenario: &TamperScenario,
    source: &SourceConfig,
    temporal: &TemporalModel,
) -> Result<Vec<DetectionEvent>, SimError> {
    source.validate()?;
    let stats = effective_statistics(scenario, temporal, source.duration)?;
    let delay_ticks = libm::round(scenario.delay_seconds() / source.clock_tick) as i64;
    Ok(simulate_window_with(&stats, delay_ticks, source))
}

/// Simulation core over explicit effective statistics. Exposed so tests can
/// drive single pathways directly.
pub fn simulate_window_with(
    stats: &EffectiveStatistics,
    active_delay_ticks: i64,
    source: &SourceConfig,
) -> Vec<DetectionEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(source.seed);
    let mut clicks: Vec<(f64, ChannelLabel, i64)> = Vec::new();

    let rate = source.pair_rate * stats.pair_rate_scale;
    if rate > 0.0 {
        // cumulative pathway distribution
        let probs = stats.probs.pathways();
        let mut cdf = [0.0f64; 10];
        let mut acc = 0.0;
        for i in 0..10 {
            acc += probs[i];
            cdf[i] = acc;
        }
        let mut t = exponential(&mut rng, rate);
        while t < source.duration {
            let u = uniform(&mut rng) * acc;
            let idx = cdf.iter().position(|&c| u < c).unwrap_or(9);
            let pathway = Pathway::ALL[idx];
            if uniform(&mut rng) <= source.pathway_efficiency[idx] {
                emit_pair_clicks(pathway, t, active_delay_ticks, &mut rng, &mut clicks);
            }
            t += exponential(&mut rng, rate);
        }
    }

    // dark counts and background singles, per channel
    let single_rate = source.dark_rate + source.background_ratio * rate;
    if single_rate > 0.0 {
        for ch in ChannelLabel::ALL {
            let mut t = exponential(&mut rng, single_rate);
            while t < source.duration {
                clicks.push((t, ch, 0));
                t += exponential(&mut rng, single_rate);
            }
        }
    }

    let mut events: Vec<DetectionEvent> = clicks
        .iter()
        .map(|&(t, ch, shift)| {
            let t = if source.jitter_sigma > 0.0 {
                t + source.jitter_sigma * gaussian(&mut rng)
            } else {
                t
            };
            let tick = (libm::round(t / source.clock_tick) as i64 + shift).max(0) as u64;
            DetectionEvent {
                tick,
                channel: ch.id(),
            }
        })
        .collect();
    events.sort_unstable();
    events
}

/// Route the two photons of a surviving pair to physical channels.
fn emit_pair_clicks(
    pathway: Pathway,
    t: f64,
    delay: i64,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<(f64, ChannelLabel, i64)>,
) {
    use ChannelLabel::*;
    let split_h2 = |rng: &mut ChaCha8Rng| if uniform(rng) < 0.5 { H2A } else { H2B };
    let split_v2 = |rng: &mut ChaCha8Rng| if uniform(rng) < 0.5 { V2A } else { V2B };
    match pathway {
        Pathway::H2H3 => {
            out.push((t, split_h2(rng), delay));
            out.push((t, H3, 0));
        }
        Pathway::V2V3 => {
            out.push((t, split_v2(rng), delay));
            out.push((t, V3, 0));
        }
        Pathway::H2H2 => {
            let (x, y) = (split_h2(rng), split_h2(rng));
            out.push((t, x, delay));
            if y != x {
                out.push((t, y, 0));
            }
        }
        Pathway::V2V2 => {
            let (x, y) = (split_v2(rng), split_v2(rng));
            out.push((t, x, delay));
            if y != x {
                out.push((t, y, 0));
            }
        }
        // one arm, non-number-resolving: both photons on one detector
        Pathway::H3H3 => out.push((t, H3, delay)),
        Pathway::V3V3 => out.push((t, V3, delay)),
        Pathway::H2V2 => {
            out.push((t, split_h2(rng), delay));
            out.push((t, split_v2(rng), 0));
        }
        Pathway::H3V3 => {
            out.push((t, H3, delay));
            out.push((t, V3, 0));
        }
        Pathway::H2V3 => {
            out.push((t, split_h2(rng), delay));
            out.push((t, V3, 0));
        }
        Pathway::V2H3 => {
            out.push((t, split_v2(rng), delay));
            out.push((t, H3, 0));
        }
    }
}
