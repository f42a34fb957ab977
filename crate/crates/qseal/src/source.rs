//! Detector-node simulator: generates windows of clicks and streams them as
//! UDP datagrams, one packet per datagram.

use std::io::Write;
use std::net::UdpSocket;
use std::thread;
use std::time::Duration;

use qseal_core::{encode_packets, simulate_window, EventPacket};
use serde::Serialize;

use crate::{Error, RunConfig};

/// Per-window stdout log line.
#[derive(Debug, Serialize)]
struct SourceLog {
    window_id: u32,
    events: usize,
    packets: usize,
}

/// Packets for one window of the configured run. Pure function of the
/// config, shared by the live source and the loopback-equivalence tests.
pub fn window_packets(config: &RunConfig, window_id: u32) -> Result<Vec<EventPacket>, Error> {
    let scenario = config.scenario_for_window(window_id)?;
    let source = config.source_config(window_id);
    let temporal = config.temporal()?;
    let events =
        simulate_window(&scenario, &source, &temporal).map_err(|e| Error::Sim(e.to_string()))?;
    // sequence numbers keep counting across windows
    let first_sequence = window_id.wrapping_mul(1 << 16);
    Ok(encode_packets(
        &events,
        config.wire.node_id,
        window_id,
        first_sequence,
    ))
}

fn send_with_retry(socket: &UdpSocket, bytes: &[u8], config: &RunConfig) -> Result<(), Error> {
    let attempts = config.wire.max_attempts.max(1);
    let mut last = None;
    for i in 0..attempts {
        match socket.send(bytes) {
            Ok(_) => return Ok(()),
            Err(e) => last = Some(e),
        }
        if i + 1 < attempts {
            thread::sleep(Duration::from_millis(config.wire.retry_ms));
        }
    }
    Err(Error::Unreachable {
        attempts,
        last: last.expect("at least one attempt"),
    })
}

/// Run the source to completion: simulate `config.windows` windows, encode
/// and transmit them, and log per-window counts as JSONL on `log`.
pub fn run_source_to(config: &RunConfig, log: &mut dyn Write) -> Result<(), Error> {
    config.validate()?;
    let socket = UdpSocket::bind(("0.0.0.0", 0))?;
    socket.connect((config.wire.host.as_str(), config.wire.port))?;
    for window_id in 0..config.windows {
        let packets = window_packets(config, window_id)?;
        let mut events = 0;
        for p in &packets {
            events += p.records.len();
            let bytes = p.encode().map_err(|e| Error::Sim(e.to_string()))?;
            send_with_retry(&socket, &bytes, config)?;
        }
        let line = SourceLog {
            window_id,
            events,
            packets: packets.len(),
        };
        serde_json::to_writer(&mut *log, &line)?;
        log.write_all(b"\n")?;
    }
    Ok(())
}

/// [`run_source_to`] with the log on standard output.
pub fn run_source(config: &RunConfig) -> Result<(), Error> {
    let stdout = std::io::stdout();
    run_source_to(config, &mut stdout.lock())
}
