//! Datagram framing for detection events and reduction of event streams to
//! coincidence-type totals.
//!
//! Packet layout (all multi-byte fields big-endian):
//!
//! ```text
//! magic   4  "QSL1"
//! version 1  (= 1)
//! node_id 1
//! flags   1  bit 0: end-of-window marker
//! count   2  number of records (<= 1000)
//! seq     4  per-node monotone sequence number
//! window  4  window identifier
//! records count * (channel 1, tick 8)
//! ```
//!
//! A full packet is 17 + 9000 = 9017 bytes. The transport is unreliable and
//! unordered; the monitor tolerates drops and reordering, so decoding is
//! stateless and sequence gaps are the caller's concern.

use alloc::vec::Vec;

use crate::photonics::Pathway;
use crate::sim::{ChannelLabel, DetectionEvent, Pol};

pub const MAGIC: [u8; 4] = *b"QSL1";
pub const VERSION: u8 = 1;
pub const MAX_RECORDS: usize = 1000;
pub const HEADER_LEN: usize = 17;
pub const RECORD_LEN: usize = 9;
pub const FLAG_END_OF_WINDOW: u8 = 0x01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireError {
    BadMagic,
    BadVersion(u8),
    /// Datagram shorter than its header or declared records.
    Truncated { expected: usize, got: usize },
    /// Datagram longer than header plus declared records.
    TrailingBytes { expected: usize, got: usize },
    /// Events handed to the coincidence finder were not tick-sorted.
    UnsortedEvents,
    /// A pathway efficiency outside (0, 1].
    BadEfficiency(usize),
    TooManyRecords(usize),
}

impl core::fmt::Display for WireError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::BadMagic => write!(f, "bad packet magic"),
            Self::BadVersion(v) => write!(f, "unsupported packet version {v}"),
            Self::Truncated { expected, got } => {
                write!(f, "truncated packet: expected {expected} bytes, got {got}")
            }
            Self::TrailingBytes { expected, got } => {
                write!(f, "oversized packet: expected {expected} bytes, got {got}")
            }
            Self::UnsortedEvents => write!(f, "events must be sorted by tick"),
            Self::BadEfficiency(i) => write!(f, "pathway efficiency {i} outside (0, 1]"),
            Self::TooManyRecords(n) => write!(f, "{n} records exceeds the {MAX_RECORDS} cap"),
        }
    }
}

/// One datagram's worth of detection events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventPacket {
    pub node_id: u8,
    pub flags: u8,
    pub sequence: u32,
    pub window_id: u32,
    pub records: Vec<DetectionEvent>,
}

impl EventPacket {
    pub fn end_of_window(&self) -> bool {
        self.flags & FLAG_END_OF_WINDOW != 0
    }

    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        if self.records.len() > MAX_RECORDS {
            return Err(WireError::TooManyRecords(self.records.len()));
        }
        let mut buf = Vec::with_capacity(HEADER_LEN + RECORD_LEN * self.records.len());
        buf.extend_from_slice(&MAGIC);
        buf.push(VERSION);
        buf.push(self.node_id);
        buf.push(self.flags);
        buf.extend_from_slice(&(self.records.len() as u16).to_be_bytes());
        buf.extend_from_slice(&self.sequence.to_be_bytes());
        buf.extend_from_slice(&self.window_id.to_be_bytes());
        for r in &self.records {
            buf.push(r.channel);
            buf.extend_from_slice(&r.tick.to_be_bytes());
        }
        Ok(buf)
    }
}

/// Parse one datagram.
pub fn decode_packet(bytes: &[u8]) -> Result<EventPacket, WireError> {
    if bytes.len() < HEADER_LEN {
        return Err(if bytes.len() >= 4 && bytes[..4] != MAGIC {
            WireError::BadMagic
        } else {
            WireError::Truncated {
                expected: HEADER_LEN,
                got: bytes.len(),
            }
        });
    }
    if bytes[..4] != MAGIC {
        return Err(WireError::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(WireError::BadVersion(bytes[4]));
    }
    let node_id = bytes[5];
    let flags = bytes[6];
    let count = u16::from_be_bytes([bytes[7], bytes[8]]) as usize;
    if count > MAX_RECORDS {
        return Err(WireError::TooManyRecords(count));
    }
    let sequence = u32::from_be_bytes([bytes[9], bytes[10], bytes[11], bytes[12]]);
    let window_id = u32::from_be_bytes([bytes[13], bytes[14], bytes[15], bytes[16]]);
    let expected = HEADER_LEN + RECORD_LEN * count;
    if bytes.len() < expected {
        return Err(WireError::Truncated {
            expected,
            got: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(WireError::TrailingBytes {
            expected,
            got: bytes.len(),
        });
    }
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let off = HEADER_LEN + RECORD_LEN * i;
        let channel = bytes[off];
        let mut tick_bytes = [0u8; 8];
        tick_bytes.copy_from_slice(&bytes[off + 1..off + 9]);
        records.push(DetectionEvent {
            channel,
            tick: u64::from_be_bytes(tick_bytes),
        });
    }
    Ok(EventPacket {
        node_id,
        flags,
        sequence,
        window_id,
        records,
    })
}

/// Split a time-ordered event stream into packets. The final packet carries
/// the end-of-window flag; an empty stream still produces one flagged packet
/// so the monitor can frame the window.
pub fn encode_packets(
    events: &[DetectionEvent],
    node_id: u8,
    window_id: u32,
    first_sequence: u32,
) -> Vec<EventPacket> {
    let mut packets = Vec::new();
    let mut seq = first_sequence;
    let chunks: Vec<&[DetectionEvent]> = if events.is_empty() {
        alloc::vec![&events[..]]
    } else {
        events.chunks(MAX_RECORDS).collect()
    };
    let last = chunks.len() - 1;
    for (i, chunk) in chunks.into_iter().enumerate() {
        packets.push(EventPacket {
            node_id,
            flags: if i == last { FLAG_END_OF_WINDOW } else { 0 },
            sequence: seq,
            window_id,
            records: chunk.to_vec(),
        });
        seq = seq.wrapping_add(1);
    }
    packets
}

/// Position of a monitored pathway within [`Pathway::MONITORED`].
pub fn monitored_index(pw: Pathway) -> Option<usize> {
    Pathway::MONITORED.iter().position(|&p| p == pw)
}

/// Raw coincidence counts and per-pathway accidental estimates over the
/// eight monitored pathways.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RawCounts {
    pub counts: [u64; 8],
    pub accidentals: [f64; 8],
}

impl RawCounts {
    pub fn count(&self, pw: Pathway) -> u64 {
        self.counts[monitored_index(pw).expect("unmonitored pathway")]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Efficiency-corrected, accidental-subtracted counts per monitored pathway.
pub type CorrectedCounts = [f64; 8];

/// Accidental-free coincidence-type totals, the sufficient statistics for
/// the correlation estimate. Real-valued because the efficiency correction
/// is fractional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaTotals {
    pub k_sd: f64,
    pub k_ss: f64,
    pub k_ds: f64,
    pub k_dd: f64,
}

impl KappaTotals {
    pub fn new(k_sd: f64, k_ss: f64, k_ds: f64, k_dd: f64) -> Self {
        Self { k_sd, k_ss, k_ds, k_dd }
    }

    pub fn total(&self) -> f64 {
        self.k_sd + self.k_ss + self.k_ds + self.k_dd
    }
}

fn classify(a: ChannelLabel, b: ChannelLabel) -> Pathway {
    debug_assert_ne!(a, b);
    // order so port 2 comes first, h before v within a port
    let (x, y) = if (a.port(), a.polarization() == Pol::V) <= (b.port(), b.polarization() == Pol::V)
    {
        (a, b)
    } else {
        (b, a)
    };
    match (x.port(), x.polarization(), y.port(), y.polarization()) {
        (2, Pol::H, 2, Pol::H) => Pathway::H2H2,
        (2, Pol::V, 2, Pol::V) => Pathway::V2V2,
        (2, Pol::H, 2, Pol::V) => Pathway::H2V2,
        (2, Pol::H, 3, Pol::H) => Pathway::H2H3,
        (2, Pol::V, 3, Pol::V) => Pathway::V2V3,
        (2, Pol::H, 3, Pol::V) => Pathway::H2V3,
        (2, Pol::V, 3, Pol::H) => Pathway::V2H3,
        (3, Pol::H, 3, Pol::V) => Pathway::H3V3,
        _ => unreachable!("same-channel pairs are filtered before classification"),
    }
}

/// Greedy earliest-first pairing: walk the sorted stream, pair each unpaired
/// click with the earliest later unpaired click on a different channel within
/// the window. Each click joins at most one coincidence.
fn pair_events<F: FnMut(ChannelLabel, ChannelLabel)>(
    events: &[DetectionEvent],
    window_w: u64,
    mut on_pair: F,
) {
    let mut paired = alloc::vec![false; events.len()];
    for i in 0..events.len() {
        if paired[i] {
            continue;
        }
        let Some(ch_i) = ChannelLabel::from_id(events[i].channel) else {
            continue;
        };
        for j in i + 1..events.len() {
            if events[j].tick - events[i].tick > window_w {
                break;
            }
            if paired[j] || events[j].channel == events[i].channel {
                continue;
            }
            let Some(ch_j) = ChannelLabel::from_id(events[j].channel) else {
                continue;
            };
            paired[i] = true;
            paired[j] = true;
            on_pair(ch_i, ch_j);
            break;
        }
    }
}

/// The two channel groups whose cross-coincidences form a pathway.
fn pathway_groups(pw: Pathway) -> (&'static [ChannelLabel], &'static [ChannelLabel]) {
    use ChannelLabel::*;
    const H2: &[ChannelLabel] = &[H2A, H2B];
    const V2: &[ChannelLabel] = &[V2A, V2B];
    match pw {
        Pathway::H2H3 => (H2, &[H3]),
        Pathway::V2V3 => (V2, &[V3]),
        Pathway::H2H2 => (&[H2A], &[H2B]),
        Pathway::V2V2 => (&[V2A], &[V2B]),
        Pathway::H2V2 => (H2, V2),
        Pathway::H3V3 => (&[H3], &[V3]),
        Pathway::H2V3 => (H2, &[V3]),
        Pathway::V2H3 => (V2, &[H3]),
        _ => (&[], &[]),
    }
}

/// Find coincidences in a tick-sorted stream and estimate accidentals per
/// pathway by the delayed-window method: for each pathway, the second channel
/// group's stream is shifted by `acc_offset` ticks and the pairing re-run, so
/// only uncorrelated clicks can still line up.
pub fn find_coincidences(
    events: &[DetectionEvent],
    window_w: u64,
    acc_offset: u64,
) -> Result<RawCounts, WireError> {
    if events.windows(2).any(|w| w[0].tick > w[1].tick) {
        return Err(WireError::UnsortedEvents);
    }
    let mut raw = RawCounts::default();
    pair_events(events, window_w, |a, b| {
        if let Some(idx) = monitored_index(classify(a, b)) {
            raw.counts[idx] += 1;
        }
    });

    for (idx, &pw) in Pathway::MONITORED.iter().enumerate() {
        let (ga, gb) = pathway_groups(pw);
        let mut shifted: Vec<DetectionEvent> = events
            .iter()
            .filter_map(|e| {
                let ch = ChannelLabel::from_id(e.channel)?;
                if ga.contains(&ch) {
                    Some(*e)
                } else if gb.contains(&ch) {
                    Some(DetectionEvent {
                        tick: e.tick + acc_offset,
                        channel: e.channel,
                    })
                } else {
                    None
                }
            })
            .collect();
        shifted.sort_unstable();
        let mut acc = 0u64;
        pair_events(&shifted, window_w, |a, b| {
            // only cross-group pairs estimate this pathway's accidentals
            let cross = (ga.contains(&a) && gb.contains(&b)) || (ga.contains(&b) && gb.contains(&a));
            if cross {
                acc += 1;
            }
        });
        raw.accidentals[idx] = acc as f64;
    }
    Ok(raw)
}

/// Accidental subtraction and joint-efficiency normalization:
/// c' = (η_min / η_i)(c_i - c_acc). η_min is taken over the supplied
/// monitored efficiencies. Results may be negative here; clamping happens at
/// the κ reduction.
pub fn correct_counts(raw: &RawCounts, eta: &[f64; 8]) -> Result<CorrectedCounts, WireError> {
    for (i, &e) in eta.iter().enumerate() {
        if !(e > 0.0 && e <= 1.0) {
            return Err(WireError::BadEfficiency(i));
        }
    }
    let eta_min = eta.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut out = [0.0; 8];
    for i in 0..8 {
        out[i] = eta_min / eta[i] * (raw.counts[i] as f64 - raw.accidentals[i]);
    }
    Ok(out)
}

/// Sum corrected pathway counts into coincidence-type totals, clamping
/// negative values (possible when accidentals exceed a sparse window's
/// counts) to zero.
pub fn reduce_to_kappa(corrected: &CorrectedCounts) -> KappaTotals {
    let at = |pw: Pathway| corrected[monitored_index(pw).unwrap()];
    let clamp = |x: f64| if x > 0.0 { x } else { 0.0 };
    KappaTotals {
        k_sd: clamp(at(Pathway::H2H3) + at(Pathway::V2V3)),
        k_ss: clamp(at(Pathway::H2H2) + at(Pathway::V2V2)),
        k_ds: clamp(at(Pathway::H2V2) + at(Pathway::H3V3)),
        k_dd: clamp(at(Pathway::H2V3) + at(Pathway::V2H3)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(channel: u8, tick: u64) -> DetectionEvent {
        DetectionEvent { channel, tick }
    }

    #[test]
    fn packet_round_trip() {
        let packet = EventPacket {
            node_id: 3,
            flags: FLAG_END_OF_WINDOW,
            sequence: 42,
            window_id: 7,
            records: alloc::vec![ev(0, 1000), ev(5, u64::MAX)],
        };
        let bytes = packet.encode().unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 2 * RECORD_LEN);
        assert_eq!(decode_packet(&bytes).unwrap(), packet);
    }

    #[test]
    fn decode_error_paths() {
        let packet = EventPacket {
            node_id: 0,
            flags: 0,
            sequence: 0,
            window_id: 0,
            records: alloc::vec![ev(1, 5)],
        };
        let bytes = packet.encode().unwrap();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(decode_packet(&bad), Err(WireError::BadMagic));

        let mut bad = bytes.clone();
        bad[4] = 9;
        assert_eq!(decode_packet(&bad), Err(WireError::BadVersion(9)));

        assert!(matches!(
            decode_packet(&bytes[..bytes.len() - 3]),
            Err(WireError::Truncated { .. })
        ));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(
            decode_packet(&long),
            Err(WireError::TrailingBytes { .. })
        ));
        assert!(matches!(
            decode_packet(&bytes[..5]),
            Err(WireError::Truncated { .. })
        ));
    }

    #[test]
    fn encode_packets_chunks_and_flags() {
        let events: Vec<DetectionEvent> = (0..1500u64).map(|i| ev(0, i)).collect();
        let packets = encode_packets(&events, 1, 9, 100);
        assert_eq!(packets.len(), 2);
        assert_eq!(packets[0].records.len(), 1000);
        assert_eq!(packets[1].records.len(), 500);
        assert!(!packets[0].end_of_window());
        assert!(packets[1].end_of_window());
        assert_eq!(packets[0].sequence, 100);
        assert_eq!(packets[1].sequence, 101);

        let empty = encode_packets(&[], 1, 9, 0);
        assert_eq!(empty.len(), 1);
        assert!(empty[0].records.is_empty());
        assert!(empty[0].end_of_window());
    }

    #[test]
    fn simple_coincidence_classification() {
        // h2a@1000 with v3@1001 inside w=2 -> one h2v3
        let events = [ev(0, 1000), ev(5, 1001)];
        let raw = find_coincidences(&events, 2, 10_000).unwrap();
        assert_eq!(raw.count(Pathway::H2V3), 1);
        assert_eq!(raw.total(), 1);

        // outside the window -> nothing
        let events = [ev(0, 1000), ev(5, 1005)];
        let raw = find_coincidences(&events, 2, 10_000).unwrap();
        assert_eq!(raw.total(), 0);

        // h2a + h2b is a same-port same-polarization coincidence
        let events = [ev(0, 500), ev(1, 500)];
        let raw = find_coincidences(&events, 2, 10_000).unwrap();
        assert_eq!(raw.count(Pathway::H2H2), 1);
    }

    #[test]
    fn unsorted_input_rejected() {
        let events = [ev(0, 10), ev(5, 5)];
        assert_eq!(
            find_coincidences(&events, 2, 1000),
            Err(WireError::UnsortedEvents)
        );
    }

    #[test]
    fn greedy_pairing_uses_each_click_once() {
        // three clicks inside one window: only one pair forms
        let events = [ev(0, 100), ev(5, 101), ev(2, 102)];
        let raw = find_coincidences(&events, 5, 10_000).unwrap();
        assert_eq!(raw.total(), 1);
        assert_eq!(raw.count(Pathway::H2V3), 1);
    }

    #[test]
    fn correct_counts_examples() {
        let mut raw = RawCounts::default();
        let idx = monitored_index(Pathway::H2V3).unwrap();
        raw.counts[idx] = 100;
        raw.accidentals[idx] = 10.0;
        let mut eta = [0.005f64; 8];
        eta[idx] = 0.006;
        let corrected = correct_counts(&raw, &eta).unwrap();
        assert!((corrected[idx] - 75.0).abs() < 1e-12);

        // c = c_acc -> 0
        raw.counts[idx] = 10;
        let corrected = correct_counts(&raw, &eta).unwrap();
        assert_eq!(corrected[idx], 0.0);

        // uniform eta: correction is plain subtraction
        raw.counts[idx] = 30;
        let corrected = correct_counts(&raw, &[0.005; 8]).unwrap();
        assert!((corrected[idx] - 20.0).abs() < 1e-12);

        assert!(correct_counts(&raw, &[0.0; 8]).is_err());
    }

    #[test]
    fn reduce_examples() {
        let zero = reduce_to_kappa(&[0.0; 8]);
        assert_eq!(zero.total(), 0.0);

        let mut corrected = [0.0; 8];
        corrected[monitored_index(Pathway::H2V3).unwrap()] = 50.0;
        corrected[monitored_index(Pathway::V2H3).unwrap()] = 50.0;
        corrected[monitored_index(Pathway::H2H2).unwrap()] = 3.0;
        corrected[monitored_index(Pathway::V2V2).unwrap()] = 4.0;
        let k = reduce_to_kappa(&corrected);
        assert_eq!(k.k_dd, 100.0);
        assert_eq!(k.k_ss, 7.0);
        assert_eq!(k.k_sd, 0.0);

        corrected[monitored_index(Pathway::H2V2).unwrap()] = -5.0;
        let k = reduce_to_kappa(&corrected);
        assert_eq!(k.k_ds, 0.0);
    }

    #[test]
    fn classification_covers_all_distinct_pairs() {
        for a in ChannelLabel::ALL {
            for b in ChannelLabel::ALL {
                if a != b {
                    let pw = classify(a, b);
                    assert_eq!(classify(b, a), pw);
                }
            }
        }
    }
}
