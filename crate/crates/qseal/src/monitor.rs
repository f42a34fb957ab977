//! Monitor node: reassembles event windows from UDP datagrams, runs the
//! coincidence pipeline, and appends one decision record per window to the
//! alarm log.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::net::UdpSocket;
use std::time::{Duration, Instant};

use qseal_core::{
    correct_counts, decode_packet, estimate_correlation, find_coincidences, reduce_to_kappa,
    DecisionConfig, DetectionEvent, Estimate, EventPacket, KappaTotals,
};
use serde::{Deserialize, Serialize};

use crate::{Error, RunConfig};

/// One alarm-log line.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WindowRecord {
    pub window_id: u32,
    pub k_sd: f64,
    pub k_ss: f64,
    pub k_ds: f64,
    pub k_dd: f64,
    pub e_kappa: f64,
    pub sigma_kappa: f64,
    pub outcome: String,
}

/// End-of-run counters.
#[derive(Debug, Default)]
pub struct MonitorSummary {
    pub records: Vec<WindowRecord>,
    pub malformed_packets: u64,
}

struct OpenWindow {
    packets: Vec<EventPacket>,
    complete: bool,
}

/// Window reassembly and decision state, independent of the socket so tests
/// can feed datagrams directly.
pub struct Monitor {
    config: RunConfig,
    decision: DecisionConfig,
    eta: [f64; 8],
    open: BTreeMap<u32, OpenWindow>,
    next_window: u32,
    pub summary: MonitorSummary,
    log: Option<Box<dyn Write + Send>>,
}

impl Monitor {
    pub fn new(config: RunConfig) -> Result<Self, Error> {
        config.validate()?;
        let d = &config.decision;
        let decision = DecisionConfig {
            epsilon: d.epsilon,
            e0: d.e0,
            e1: d.e1,
            sigma: d.sigma,
            min_coincidences: d.min_coincidences,
        };
        decision
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let eta = config.source_config(0).monitored_efficiencies();
        Ok(Self {
            config,
            decision,
            eta,
            open: BTreeMap::new(),
            next_window: 0,
            summary: MonitorSummary::default(),
            log: None,
        })
    }

    /// Append decision records to the configured alarm log.
    pub fn with_log_file(mut self) -> Result<Self, Error> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.config.output.alarm_log)?;
        self.log = Some(Box::new(file));
        Ok(self)
    }

    /// Ingest one datagram. Malformed input is counted, never fatal.
    pub fn handle_datagram(&mut self, bytes: &[u8]) -> Result<(), Error> {
        let packet = match decode_packet(bytes) {
            Ok(p) => p,
            Err(_) => {
                self.summary.malformed_packets += 1;
                return Ok(());
            }
        };
        let id = packet.window_id;
        let entry = self.open.entry(id).or_insert(OpenWindow {
            packets: Vec::new(),
            complete: false,
        });
        entry.complete |= packet.end_of_window();
        entry.packets.push(packet);
        if self.open[&id].complete {
            self.close_window(id)?;
        }
        Ok(())
    }

    /// Close every window currently under assembly (timeout path).
    pub fn close_all(&mut self) -> Result<(), Error> {
        let ids: Vec<u32> = self.open.keys().copied().collect();
        for id in ids {
            self.close_window(id)?;
        }
        Ok(())
    }

    /// Record a window that produced no packets at all.
    pub fn record_silent_window(&mut self, window_id: u32) -> Result<(), Error> {
        self.emit(window_id, KappaTotals::new(0.0, 0.0, 0.0, 0.0))
    }

    pub fn windows_processed(&self) -> usize {
        self.summary.records.len()
    }

    fn close_window(&mut self, window_id: u32) -> Result<(), Error> {
        let mut win = self.open.remove(&window_id).expect("window is open");
        win.packets.sort_by_key(|p| p.sequence);
        let mut events: Vec<DetectionEvent> = win
            .packets
            .iter()
            .flat_map(|p| p.records.iter().copied())
            .collect();
        events.sort_unstable();
        let raw = find_coincidences(
            &events,
            self.config.wire.coincidence_ticks,
            self.config.wire.accidental_offset_ticks,
        )
        .map_err(|e| Error::Estimate(e.to_string()))?;
        let corrected =
            correct_counts(&raw, &self.eta).map_err(|e| Error::Estimate(e.to_string()))?;
        self.emit(window_id, reduce_to_kappa(&corrected))
    }

    fn emit(&mut self, window_id: u32, kappa: KappaTotals) -> Result<(), Error> {
        let est: Estimate = estimate_correlation(&kappa)
            .map_err(|e| Error::Estimate(e.to_string()))?
            .with_window(window_id);
        let verdict = qseal_core::decide(&est, &self.decision);
        let record = WindowRecord {
            window_id,
            k_sd: kappa.k_sd,
            k_ss: kappa.k_ss,
            k_ds: kappa.k_ds,
            k_dd: kappa.k_dd,
            e_kappa: est.e_kappa,
            sigma_kappa: est.sigma_kappa,
            outcome: verdict.outcome.label().into(),
        };
        if let Some(log) = &mut self.log {
            serde_json::to_writer(&mut *log, &record)?;
            log.write_all(b"\n")?;
            log.flush()?;
        }
        self.next_window = self.next_window.max(record.window_id.saturating_add(1));
        self.summary.records.push(record);
        Ok(())
    }
}

/// Receive datagrams on `socket` until `config.windows` windows have been
/// processed (or, with `windows == 0`, until the line has been idle for two
/// window lengths). A fully silent run still yields one blackout record.
pub fn run_monitor_on(socket: &UdpSocket, config: RunConfig) -> Result<MonitorSummary, Error> {
    let target = config.windows;
    let idle_limit = Duration::from_secs_f64(2.0 * config.wire.window_seconds);
    let mut monitor = Monitor::new(config)?.with_log_file()?;
    socket.set_read_timeout(Some(Duration::from_millis(20)))?;
    let mut buf = [0u8; 65_536];
    let mut last_packet = Instant::now();
    loop {
        if target > 0 && monitor.windows_processed() >= target as usize {
            break;
        }
        match socket.recv(&mut buf) {
            Ok(n) => {
                last_packet = Instant::now();
                monitor.handle_datagram(&buf[..n])?;
            }
            Err(e)
                if e.kind() == std::io::ErrorKind::WouldBlock
                    || e.kind() == std::io::ErrorKind::TimedOut =>
            {
                if last_packet.elapsed() >= idle_limit {
                    monitor.close_all()?;
                    if monitor.windows_processed() == 0
                        || (target > 0 && monitor.windows_processed() < target as usize)
                    {
                        // silence past the timeout is loss of continuity
                        let id = monitor.next_window;
                        monitor.record_silent_window(id)?;
                        last_packet = Instant::now();
                        continue;
                    }
                    break;
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(monitor.summary)
}

/// Bind the configured endpoint and run the monitor there.
pub fn run_monitor(config: RunConfig) -> Result<MonitorSummary, Error> {
    let socket = UdpSocket::bind((config.wire.host.as_str(), config.wire.port))?;
    run_monitor_on(&socket, config)
}
