//! Timed event schedules.
//!
//! Every publication gets a fixed-length slot. Inside the slot the
//! publication whoosh starts the sequence, the open-access drop follows for OA
//! papers, and the impact tone closes it together with a silent class marker.

use std::cmp::Ordering;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{MappedPublication, MappedSound, MappingSchema};

pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;

/// Classes demonstrated by the legend's tones: medium, high, then low.
pub const LEGEND_TONE_CLASSES: [u8; 3] = [3, 6, 1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EventKind {
    PubWhoosh,
    OaDrop,
    ImpactTone {
        class: u8,
        note: u8,
        freq: f64,
    },
    /// Silent; surfaces only in the event log and as MIDI text.
    ClassMarker {
        class: u8,
    },
    /// Pre-rendered audio mixed in verbatim.
    ExternalInsert {
        path: PathBuf,
    },
}

impl EventKind {
    /// Tie-break order for events sharing an onset.
    pub fn rank(&self) -> u8 {
        match self {
            EventKind::PubWhoosh => 0,
            EventKind::OaDrop => 1,
            EventKind::ImpactTone { .. } => 2,
            EventKind::ClassMarker { .. } => 3,
            EventKind::ExternalInsert { .. } => 4,
        }
    }

    pub fn is_audible(&self) -> bool {
        !matches!(self, EventKind::ClassMarker { .. })
    }

    pub fn class(&self) -> Option<u8> {
        match self {
            EventKind::ImpactTone { class, .. } | EventKind::ClassMarker { class } => Some(*class),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SonicEvent {
    #[serde(flatten)]
    pub kind: EventKind,
    /// Seconds from the start of the timeline.
    pub onset: f64,
    pub duration: f64,
    /// Linear gain in `[0, 1]`.
    pub gain: f64,
    /// Publication the event belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
}

impl SonicEvent {
    pub fn new(kind: EventKind, onset: f64, duration: f64) -> Self {
        Self {
            kind,
            onset,
            duration,
            gain: 1.0,
            source_id: None,
        }
    }

    pub fn end(&self) -> f64 {
        self.onset + self.duration
    }

    fn with_source(mut self, id: &str) -> Self {
        self.source_id = Some(id.to_string());
        self
    }

    fn cmp_schedule(&self, other: &Self) -> Ordering {
        self.onset
            .total_cmp(&other.onset)
            .then(self.kind.rank().cmp(&other.kind.rank()))
    }
}

/// Events sorted by onset (ties by kind), with the sample rate they will be
/// rendered at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub sample_rate: u32,
    pub events: Vec<SonicEvent>,
    pub total_duration: f64,
}

impl Timeline {
    pub fn empty(sample_rate: u32) -> Self {
        Self {
            sample_rate,
            events: Vec::new(),
            total_duration: 0.0,
        }
    }

    /// Sorts `events` and extends `total_duration` to cover the last event.
    pub fn new(sample_rate: u32, mut events: Vec<SonicEvent>, total_duration: f64) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        for e in &events {
            if !(e.onset.is_finite() && e.onset >= 0.0) {
                return Err(Error::Config(format!("event onset {} is invalid", e.onset)));
            }
            if !(e.duration.is_finite() && e.duration > 0.0) {
                return Err(Error::Config(format!(
                    "event duration {} is invalid",
                    e.duration
                )));
            }
            if !(0.0..=1.0).contains(&e.gain) {
                return Err(Error::Config(format!(
                    "event gain {} is outside [0, 1]",
                    e.gain
                )));
            }
        }
        events.sort_by(SonicEvent::cmp_schedule);
        let last_end = events.iter().map(SonicEvent::end).fold(0.0, f64::max);
        Ok(Self {
            sample_rate,
            events,
            total_duration: total_duration.max(last_end),
        })
    }

    /// A segment made of one external audio insert starting at zero.
    pub fn insert(path: impl Into<PathBuf>, duration: f64, sample_rate: u32) -> Result<Self> {
        let event = SonicEvent::new(
            EventKind::ExternalInsert { path: path.into() },
            0.0,
            duration,
        );
        Self::new(sample_rate, vec![event], duration)
    }

    pub fn count(&self, pred: impl Fn(&EventKind) -> bool) -> usize {
        self.events.iter().filter(|e| pred(&e.kind)).count()
    }

    /// Number of samples the rendered timeline occupies.
    pub fn sample_len(&self) -> usize {
        (self.total_duration * self.sample_rate as f64).ceil() as usize
    }

    fn shifted(&self, offset: f64) -> impl Iterator<Item = SonicEvent> + '_ {
        self.events.iter().cloned().map(move |mut e| {
            e.onset += offset;
            e
        })
    }
}

/// Spacing and durations, all in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingConfig {
    /// Length of one publication's slot.
    pub slot: f64,
    /// Open-access drop onset relative to the slot start.
    pub oa_offset: f64,
    /// Impact tone (and class marker) onset relative to the slot start.
    pub tone_offset: f64,
    pub tone_duration: f64,
    pub whoosh_duration: f64,
    pub oa_duration: f64,
    /// Silence before the first slot.
    pub lead_in: f64,
    /// Silence between legend items and between concatenated segments.
    pub segment_gap: f64,
    pub sample_rate: u32,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            slot: 0.75,
            oa_offset: 0.15,
            tone_offset: 0.30,
            tone_duration: 0.40,
            whoosh_duration: 0.35,
            oa_duration: 0.50,
            lead_in: 1.0,
            segment_gap: 2.0,
            sample_rate: DEFAULT_SAMPLE_RATE,
        }
    }
}

impl TimingConfig {
    pub fn from_json(raw: &[u8]) -> Result<Self> {
        let cfg: TimingConfig = serde_json::from_slice(raw)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("slot", self.slot),
            ("oa_offset", self.oa_offset),
            ("tone_offset", self.tone_offset),
            ("tone_duration", self.tone_duration),
            ("whoosh_duration", self.whoosh_duration),
            ("oa_duration", self.oa_duration),
            ("lead_in", self.lead_in),
            ("segment_gap", self.segment_gap),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "timing `{name}` must be positive, got {v}"
                )));
            }
        }
        if !(self.oa_offset < self.tone_offset && self.tone_offset < self.slot) {
            return Err(Error::Config(format!(
                "timing requires oa_offset < tone_offset < slot ({} / {} / {})",
                self.oa_offset, self.tone_offset, self.slot
            )));
        }
        if self.sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        Ok(())
    }

    fn event_for(&self, sound: MappedSound, p: &MappedPublication, slot_start: f64) -> SonicEvent {
        let tone_at = slot_start + self.tone_offset;
        match sound {
            MappedSound::Publication => {
                SonicEvent::new(EventKind::PubWhoosh, slot_start, self.whoosh_duration)
            }
            MappedSound::OpenAccess => SonicEvent::new(
                EventKind::OaDrop,
                slot_start + self.oa_offset,
                self.oa_duration,
            ),
            MappedSound::ImpactTone => SonicEvent::new(
                EventKind::ImpactTone {
                    class: p.class,
                    note: p.midi_note,
                    freq: p.freq,
                },
                tone_at,
                self.tone_duration,
            ),
            MappedSound::ClassMarker => SonicEvent::new(
                EventKind::ClassMarker { class: p.class },
                tone_at,
                self.tone_duration,
            ),
        }
    }
}

/// Lays publications out one slot each, in the given order.
pub fn schedule(mapped: &[MappedPublication], cfg: &TimingConfig) -> Result<Timeline> {
    cfg.validate()?;
    let mut events = Vec::with_capacity(mapped.len() * 4);
    for (i, p) in mapped.iter().enumerate() {
        let slot_start = cfg.lead_in + i as f64 * cfg.slot;
        events.extend(
            p.sounds()
                .into_iter()
                .map(|s| cfg.event_for(s, p, slot_start).with_source(&p.id)),
        );
    }
    let nominal = cfg.lead_in + mapped.len() as f64 * cfg.slot;
    Timeline::new(cfg.sample_rate, events, nominal)
}

/// Demonstrates each mapped sound once: publication whoosh, open-access drop,
/// a medium, a high and a low impact tone, then the class markers 1..=n.
pub fn build_legend(schema: &MappingSchema, cfg: &TimingConfig) -> Result<Timeline> {
    cfg.validate()?;
    let mut items = vec![
        SonicEvent::new(EventKind::PubWhoosh, 0.0, cfg.whoosh_duration),
        SonicEvent::new(EventKind::OaDrop, 0.0, cfg.oa_duration),
    ];
    for class in LEGEND_TONE_CLASSES {
        let class = class.min(schema.class_count());
        let note = schema.class_to_midi(class)?;
        items.push(SonicEvent::new(
            EventKind::ImpactTone {
                class,
                note,
                freq: schema.class_to_freq(class)?,
            },
            0.0,
            cfg.tone_duration,
        ));
    }

    let mut cursor = cfg.lead_in;
    let mut events = Vec::new();
    for mut e in items {
        e.onset = cursor;
        cursor += e.duration + cfg.segment_gap;
        events.push(e);
    }
    for class in 1..=schema.class_count() {
        events.push(SonicEvent::new(
            EventKind::ClassMarker { class },
            cursor,
            cfg.tone_duration,
        ));
        cursor += cfg.slot;
    }
    Timeline::new(cfg.sample_rate, events, cursor)
}

/// Lays segments end to end with `gap` seconds of silence between them.
pub fn concat(segments: &[Timeline], gap: f64) -> Result<Timeline> {
    if !(gap.is_finite() && gap >= 0.0) {
        return Err(Error::Config(format!("segment gap {gap} is invalid")));
    }
    let Some(first) = segments.first() else {
        return Ok(Timeline::empty(DEFAULT_SAMPLE_RATE));
    };
    if let Some(other) = segments.iter().find(|s| s.sample_rate != first.sample_rate) {
        return Err(Error::Config(format!(
            "cannot concatenate timelines at {} Hz and {} Hz",
            first.sample_rate, other.sample_rate
        )));
    }
    if segments.len() == 1 {
        return Ok(first.clone());
    }
    let mut events = Vec::new();
    let mut offset = 0.0;
    for (i, seg) in segments.iter().enumerate() {
        if i > 0 {
            offset += gap;
        }
        events.extend(seg.shifted(offset));
        offset += seg.total_duration;
    }
    Timeline::new(first.sample_rate, events, offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PublicationRecord;
    use crate::mapping::map_record;

    fn mapped(n: usize, oa_every: usize) -> Vec<MappedPublication> {
        let schema = MappingSchema::default();
        (0..n)
            .map(|i| {
                let mncs = (i % 50) as f64 / 10.0;
                let rec = PublicationRecord {
                    id: format!("P{i}"),
                    year: 2000,
                    month: None,
                    mncs: Some(mncs),
                    citations: None,
                    categories: None,
                    oa: oa_every > 0 && i % oa_every == 0,
                    title: None,
                };
                map_record(&rec, mncs, &schema).unwrap()
            })
            .collect()
    }

    #[test]
    fn empty_schedule() {
        let t = schedule(&[], &TimingConfig::default()).unwrap();
        assert!(t.events.is_empty());
        assert_eq!(t.total_duration, 1.0);
    }

    #[test]
    fn single_non_oa_publication() {
        let t = schedule(&mapped(1, 0), &TimingConfig::default()).unwrap();
        let kinds: Vec<u8> = t.events.iter().map(|e| e.kind.rank()).collect();
        assert_eq!(kinds, [0, 2, 3]);
        assert_eq!(t.events[0].onset, 1.0);
        assert_eq!(t.events[1].onset, t.events[2].onset);
        assert!(t
            .events
            .iter()
            .all(|e| e.source_id.as_deref() == Some("P0")));
    }

    #[test]
    fn slot_layout() {
        let cfg = TimingConfig::default();
        let t = schedule(&mapped(64, 2), &cfg).unwrap();
        // 1.0 + sum of 64 slots of 0.75
        let expected: f64 = (0..64).fold(cfg.lead_in, |acc, _| acc + cfg.slot);
        assert!(t.total_duration >= expected - 1e-12);
        assert!((t.total_duration - 49.0).abs() < 1e-9);
        assert_eq!(t.events.len(), 64 * 3 + 32);
        let oa = t
            .events
            .iter()
            .find(|e| e.kind == EventKind::OaDrop)
            .unwrap();
        assert!((oa.onset - 1.15).abs() < 1e-12);
    }

    #[test]
    fn invalid_timing_rejected() {
        let cfg = TimingConfig {
            oa_offset: 0.5,
            ..TimingConfig::default()
        };
        assert!(matches!(schedule(&[], &cfg), Err(Error::Config(_))));
        let cfg = TimingConfig {
            slot: 0.0,
            ..TimingConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn legend_contents() {
        let schema = MappingSchema::default();
        let t = build_legend(&schema, &TimingConfig::default()).unwrap();
        assert_eq!(t.count(|k| *k == EventKind::PubWhoosh), 1);
        assert_eq!(t.count(|k| *k == EventKind::OaDrop), 1);
        let tones: Vec<u8> = t
            .events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::ImpactTone { class, .. } => Some(class),
                _ => None,
            })
            .collect();
        assert_eq!(tones, [3, 6, 1]);
        let markers: Vec<u8> = t
            .events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::ClassMarker { class } => Some(class),
                _ => None,
            })
            .collect();
        assert_eq!(markers, [1, 2, 3, 4, 5, 6, 7]);
        assert!(t.events.windows(2).all(|w| w[0].onset < w[1].onset));
        assert!(matches!(t.events[0].kind, EventKind::PubWhoosh));
        assert!(matches!(t.events[1].kind, EventKind::OaDrop));
    }

    #[test]
    fn concat_cases() {
        let cfg = TimingConfig::default();
        let a = schedule(&mapped(3, 2), &cfg).unwrap();
        let b = schedule(&mapped(2, 1), &cfg).unwrap();

        let empty = concat(&[], 2.0).unwrap();
        assert!(empty.events.is_empty());
        assert_eq!(empty.total_duration, 0.0);
        assert_eq!(concat(std::slice::from_ref(&a), 2.0).unwrap(), a);

        let ab = concat(&[a.clone(), b.clone()], 2.0).unwrap();
        let b_first = &ab.events[a.events.len()];
        assert!((b_first.onset - (a.total_duration + 2.0 + b.events[0].onset)).abs() < 1e-12);
        assert!((ab.total_duration - (a.total_duration + 2.0 + b.total_duration)).abs() < 1e-12);
        assert_eq!(ab.events.len(), a.events.len() + b.events.len());

        let mut c = b.clone();
        c.sample_rate = 48_000;
        assert!(matches!(concat(&[a, c], 2.0), Err(Error::Config(_))));
    }

    #[test]
    fn ties_break_by_kind() {
        let events = vec![
            SonicEvent::new(EventKind::ClassMarker { class: 1 }, 1.0, 0.1),
            SonicEvent::new(EventKind::OaDrop, 1.0, 0.1),
            SonicEvent::new(EventKind::PubWhoosh, 1.0, 0.1),
        ];
        let t = Timeline::new(44_100, events, 0.0).unwrap();
        let ranks: Vec<u8> = t.events.iter().map(|e| e.kind.rank()).collect();
        assert_eq!(ranks, [0, 1, 3]);
        assert!((t.total_duration - 1.1).abs() < 1e-12);
    }

    #[test]
    fn insert_segment() {
        let t = Timeline::insert("drone.wav", 3.5, 44_100).unwrap();
        assert_eq!(t.events.len(), 1);
        assert_eq!(t.total_duration, 3.5);
        assert!(Timeline::insert("x.wav", 0.0, 44_100).is_err());
    }
}
