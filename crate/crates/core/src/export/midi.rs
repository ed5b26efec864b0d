//! Standard MIDI File (type 0) rendition of a timeline.
//!
//! Impact tones become notes on channel 1 at their mapped note number. The
//! whoosh is a closed hi-hat on the percussion channel (10) and the
//! open-access drop a low E1 on channel 2. Class markers are text events
//! `class:N`; external inserts are marker events naming the file.

use crate::sequencing::{EventKind, Timeline};

pub const TICKS_PER_QUARTER: u16 = 480;
/// Microseconds per quarter note (120 BPM).
pub const TEMPO_US_PER_QUARTER: u32 = 500_000;
pub const MELODIC_CHANNEL: u8 = 0;
pub const OA_CHANNEL: u8 = 1;
pub const PERCUSSION_CHANNEL: u8 = 9;
pub const WHOOSH_NOTE: u8 = 42;
pub const OA_NOTE: u8 = 28;

const TICKS_PER_SECOND: f64 = TICKS_PER_QUARTER as f64 * 1_000_000.0 / TEMPO_US_PER_QUARTER as f64;

/// Seconds to ticks, halves rounded away from zero.
pub fn seconds_to_ticks(seconds: f64) -> u32 {
    (seconds * TICKS_PER_SECOND).round() as u32
}

fn velocity(gain: f64) -> u8 {
    ((gain * 100.0).round() as i64).clamp(1, 127) as u8
}

fn push_vlq(buf: &mut Vec<u8>, value: u32) {
    debug_assert!(value < 1 << 28);
    for shift in [21u32, 14, 7] {
        if value >> shift != 0 {
            buf.push(((value >> shift) & 0x7f) as u8 | 0x80);
        }
    }
    buf.push((value & 0x7f) as u8);
}

fn meta(kind: u8, data: &[u8]) -> Vec<u8> {
    let mut out = vec![0xff, kind];
    push_vlq(&mut out, data.len() as u32);
    out.extend_from_slice(data);
    out
}

/// A message placed at an absolute tick. Note-offs sort before meta events,
/// which sort before note-ons at the same tick.
struct Placed {
    tick: u32,
    order: u8,
    seq: usize,
    bytes: Vec<u8>,
}

pub fn write_midi(timeline: &Timeline) -> Vec<u8> {
    let mut placed = Vec::new();
    let mut seq = 0;
    let mut put = |tick: u32, order: u8, bytes: Vec<u8>| {
        placed.push(Placed {
            tick,
            order,
            seq,
            bytes,
        });
        seq += 1;
    };

    for event in &timeline.events {
        let on = seconds_to_ticks(event.onset);
        let off = seconds_to_ticks(event.end()).max(on + 1);
        let note = match &event.kind {
            EventKind::ImpactTone { note, .. } => Some((MELODIC_CHANNEL, *note)),
            EventKind::PubWhoosh => Some((PERCUSSION_CHANNEL, WHOOSH_NOTE)),
            EventKind::OaDrop => Some((OA_CHANNEL, OA_NOTE)),
            EventKind::ClassMarker { class } => {
                put(on, 1, meta(0x01, format!("class:{class}").as_bytes()));
                None
            }
            EventKind::ExternalInsert { path } => {
                let name = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                put(on, 1, meta(0x06, format!("insert:{name}").as_bytes()));
                None
            }
        };
        if let Some((channel, key)) = note {
            put(
                on,
                2,
                vec![0x90 | channel, key & 0x7f, velocity(event.gain)],
            );
            put(off, 0, vec![0x80 | channel, key & 0x7f, 0]);
        }
    }
    placed.sort_by_key(|p| (p.tick, p.order, p.seq));

    let mut track = Vec::new();
    if !placed.is_empty() {
        track.push(0);
        track.extend(meta(0x51, &TEMPO_US_PER_QUARTER.to_be_bytes()[1..]));
    }
    let mut now = 0;
    for p in placed {
        push_vlq(&mut track, p.tick - now);
        track.extend(p.bytes);
        now = p.tick;
    }
    track.push(0);
    track.extend(meta(0x2f, &[]));

    let mut out = Vec::with_capacity(22 + track.len());
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes()); // format 0
    out.extend_from_slice(&1u16.to_be_bytes()); // one track
    out.extend_from_slice(&TICKS_PER_QUARTER.to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend(track);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequencing::SonicEvent;

    #[test]
    fn vlq_encoding() {
        let enc = |v| {
            let mut b = Vec::new();
            push_vlq(&mut b, v);
            b
        };
        assert_eq!(enc(0), [0x00]);
        assert_eq!(enc(0x7f), [0x7f]);
        assert_eq!(enc(0x80), [0x81, 0x00]);
        assert_eq!(enc(0x3fff), [0xff, 0x7f]);
        assert_eq!(enc(0x0fff_ffff), [0xff, 0xff, 0xff, 0x7f]);
    }

    #[test]
    fn tick_conversion() {
        assert_eq!(seconds_to_ticks(0.0), 0);
        assert_eq!(seconds_to_ticks(0.5), 480);
        assert_eq!(seconds_to_ticks(1.0), 960);
        assert_eq!(seconds_to_ticks(1.3), 1248);
        // 0.5 / 960 s is exactly half a tick.
        assert_eq!(seconds_to_ticks(0.5 / 960.0), 1);
    }

    #[test]
    fn empty_timeline_is_bare_track() {
        let bytes = write_midi(&Timeline::empty(44_100));
        assert_eq!(
            bytes,
            [
                b'M', b'T', b'h', b'd', 0, 0, 0, 6, 0, 0, 0, 1, 0x01, 0xe0, b'M', b'T', b'r', b'k',
                0, 0, 0, 4, 0, 0xff, 0x2f, 0
            ]
        );
    }

    #[test]
    fn single_tone() {
        let t = Timeline::new(
            44_100,
            vec![
                SonicEvent::new(
                    EventKind::ImpactTone {
                        class: 3,
                        note: 68,
                        freq: 415.3,
                    },
                    1.0,
                    0.4,
                ),
                SonicEvent::new(EventKind::ClassMarker { class: 3 }, 1.0, 0.4),
            ],
            2.0,
        )
        .unwrap();
        let bytes = write_midi(&t);
        let track = &bytes[22..];
        // tempo, then at tick 960: text "class:3" then note-on 68, then note-off after 384 ticks.
        let expected: Vec<u8> = [
            &[0x00, 0xff, 0x51, 0x03, 0x07, 0xa1, 0x20][..],
            &[0x87, 0x40, 0xff, 0x01, 0x07],
            b"class:3",
            &[0x00, 0x90, 68, 100],
            &[0x83, 0x00, 0x80, 68, 0],
            &[0x00, 0xff, 0x2f, 0x00],
        ]
        .concat();
        assert_eq!(track, &expected[..]);
    }
}
