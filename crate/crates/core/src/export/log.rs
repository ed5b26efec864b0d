//! JSON event log: the schema and timing in effect, every scheduled event and
//! every mapped publication. Reading a log back restores the timeline.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{MappedPublication, MappingSchema};
use crate::sequencing::{EventKind, SonicEvent, Timeline, TimingConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEvent {
    pub kind: String,
    pub onset: f64,
    pub duration: f64,
    pub gain: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl From<&SonicEvent> for LogEvent {
    fn from(e: &SonicEvent) -> Self {
        let mut out = LogEvent {
            kind: String::new(),
            onset: e.onset,
            duration: e.duration,
            gain: e.gain,
            class: None,
            freq: None,
            note: None,
            source_id: e.source_id.clone(),
            path: None,
        };
        out.kind = match &e.kind {
            EventKind::PubWhoosh => "PubWhoosh",
            EventKind::OaDrop => "OaDrop",
            EventKind::ImpactTone { class, note, freq } => {
                out.class = Some(*class);
                out.note = Some(*note);
                out.freq = Some(*freq);
                "ImpactTone"
            }
            EventKind::ClassMarker { class } => {
                out.class = Some(*class);
                "ClassMarker"
            }
            EventKind::ExternalInsert { path } => {
                out.path = Some(path.clone());
                "ExternalInsert"
            }
        }
        .to_string();
        out
    }
}

impl TryFrom<&LogEvent> for SonicEvent {
    type Error = Error;

    fn try_from(e: &LogEvent) -> Result<Self> {
        let need = |field: &str| {
            Error::validation(field, None, format!("{} event without `{field}`", e.kind))
        };
        let kind = match e.kind.as_str() {
            "PubWhoosh" => EventKind::PubWhoosh,
            "OaDrop" => EventKind::OaDrop,
            "ImpactTone" => EventKind::ImpactTone {
                class: e.class.ok_or_else(|| need("class"))?,
                note: e.note.ok_or_else(|| need("note"))?,
                freq: e.freq.ok_or_else(|| need("freq"))?,
            },
            "ClassMarker" => EventKind::ClassMarker {
                class: e.class.ok_or_else(|| need("class"))?,
            },
            "ExternalInsert" => EventKind::ExternalInsert {
                path: e.path.clone().ok_or_else(|| need("path"))?,
            },
            other => {
                return Err(Error::validation(
                    "kind",
                    None,
                    format!("unknown kind `{other}`"),
                ))
            }
        };
        Ok(SonicEvent {
            kind,
            onset: e.onset,
            duration: e.duration,
            gain: e.gain,
            source_id: e.source_id.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub schema: MappingSchema,
    pub timing: TimingConfig,
    pub sample_rate: u32,
    pub total_duration: f64,
    pub events: Vec<LogEvent>,
    pub publications: Vec<MappedPublication>,
}

impl EventLog {
    pub fn timeline(&self) -> Result<Timeline> {
        let events = self
            .events
            .iter()
            .map(SonicEvent::try_from)
            .collect::<Result<Vec<_>>>()?;
        Timeline::new(self.sample_rate, events, self.total_duration)
    }
}

pub fn write_event_log(
    timeline: &Timeline,
    mapped: &[MappedPublication],
    schema: &MappingSchema,
    timing: &TimingConfig,
) -> Result<Vec<u8>> {
    let log = EventLog {
        schema: schema.clone(),
        timing: timing.clone(),
        sample_rate: timeline.sample_rate,
        total_duration: timeline.total_duration,
        events: timeline.events.iter().map(LogEvent::from).collect(),
        publications: mapped.to_vec(),
    };
    let mut out = serde_json::to_vec_pretty(&log)?;
    out.push(b'\n');
    Ok(out)
}

pub fn read_event_log(raw: &[u8]) -> Result<EventLog> {
    Ok(serde_json::from_slice(raw)?)
}
