//! Parameter-mapping sonification of bibliometric publication data.
//!
//! The pipeline runs in stages, one module each:
//!
//! - [`ingest`] parses publication records from CSV or JSON and orders them
//!   chronologically.
//! - [`normalization`] resolves the field-normalized citation score (MNCS) of
//!   a record, either passing a precomputed score through or dividing raw
//!   citations by category/year baselines.
//! - [`mapping`] bins scores into seven impact classes and maps each class to
//!   a degree of a seven-tone scale (F minor by default).
//! - [`sequencing`] lays mapped publications out on a timeline, builds the
//!   legend segment and concatenates segments into a track.
//! - [`synthesis`] renders a timeline to mono audio.
//! - [`export`] writes WAV, MIDI, a JSON event log and a CSV mapping report.

pub mod error;
pub mod export;
pub mod ingest;
pub mod mapping;
pub mod normalization;
pub mod sequencing;
pub mod synthesis;

pub use error::{Error, Result};
pub use ingest::{parse_records, sort_chronological, InputFormat, PublicationRecord};
pub use mapping::{
    map_record, ImpactBin, MappedPublication, MappingSchema, PitchClass, PitchLabel,
};
pub use normalization::{compute_mncs, resolve_mncs, BaselineTable, CitationBaseline};
pub use sequencing::{
    build_legend, concat, schedule, EventKind, SonicEvent, Timeline, TimingConfig,
};
pub use synthesis::{render, AudioBuffer, Envelope};
