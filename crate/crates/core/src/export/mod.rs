//! Output writers: WAV audio, a Standard MIDI File, a JSON event log and a
//! CSV mapping report.

pub mod log;
pub mod midi;
pub mod report;
pub mod wav;

pub use log::{read_event_log, write_event_log, EventLog, LogEvent};
pub use midi::write_midi;
pub use report::{read_mapping_report, write_mapping_report, write_records, MappingReportRow};
pub use wav::{read_wav, write_wav};
