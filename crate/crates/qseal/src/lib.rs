//! Transport, file formats, and runnable processes for the entanglement
//! seal: a detector-node simulator that streams event datagrams, a monitor
//! that estimates and decides per window, and offline estimate/ROC tools.
//!
//! All statistics live in `qseal-core`; this crate only moves bytes and
//! writes files.

pub mod config;
pub mod monitor;
pub mod source;
pub mod tools;

pub use config::{RunConfig, ScenarioCfg};
pub use monitor::{run_monitor, Monitor, WindowRecord};
pub use source::{run_source, window_packets};

/// Anything a runner can fail with.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("simulation failed: {0}")]
    Sim(String),
    #[error("estimation failed: {0}")]
    Estimate(String),
    #[error("transport endpoint unreachable after {attempts} attempts: {last}")]
    Unreachable { attempts: u32, last: std::io::Error },
}
