//! CSV mapping report in the layout `id,mncs,oa,class,pitch`, and a writer
//! for raw publication records.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{InputFormat, PublicationRecord, CSV_COLUMNS};
use crate::mapping::{MappedPublication, PitchClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingReportRow {
    pub id: String,
    pub mncs: f64,
    pub oa: bool,
    pub class: u8,
    pub pitch: PitchClass,
}

impl From<&MappedPublication> for MappingReportRow {
    fn from(p: &MappedPublication) -> Self {
        Self {
            id: p.id.clone(),
            mncs: p.mncs,
            oa: p.oa,
            class: p.class,
            pitch: p.pitch.pitch_class,
        }
    }
}

/// Shortest round-tripping decimal, always with a fractional part (`55.0`).
fn fmt_decimal(x: f64) -> String {
    format!("{x:?}")
}

fn csv_bytes(writer: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    writer
        .into_inner()
        .map_err(|e| Error::Format(format!("csv: {e}")))
}

fn csv_write_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

pub fn write_mapping_report(rows: &[MappingReportRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "mncs", "oa", "class", "pitch"])
        .map_err(csv_write_err)?;
    for r in rows {
        w.write_record([
            r.id.as_str(),
            &fmt_decimal(r.mncs),
            if r.oa { "1" } else { "0" },
            &r.class.to_string(),
            r.pitch.name(),
        ])
        .map_err(csv_write_err)?;
    }
    csv_bytes(w)
}

pub fn read_mapping_report(raw: &[u8]) -> Result<Vec<MappingReportRow>> {
    #[derive(Deserialize)]
    struct Row {
        id: String,
        mncs: f64,
        oa: u8,
        class: u8,
        pitch: String,
    }
    let mut reader = csv::Reader::from_reader(raw);
    reader
        .deserialize::<Row>()
        .map(|row| {
            let row = row.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            Ok(MappingReportRow {
                id: row.id,
                mncs: row.mncs,
                oa: row.oa != 0,
                class: row.class,
                pitch: row.pitch.parse()?,
            })
        })
        .collect()
}

/// Serializes records in an input format accepted by
/// [`parse_records`](crate::ingest::parse_records).
pub fn write_records(records: &[PublicationRecord], format: InputFormat) -> Result<Vec<u8>> {
    match format {
        InputFormat::Json => Ok(serde_json::to_vec_pretty(records)?),
        InputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_COLUMNS).map_err(csv_write_err)?;
            for r in records {
                let opt = |v: Option<String>| v.unwrap_or_default();
                w.write_record([
                    r.id.clone(),
                    r.year.to_string(),
                    opt(r.month.map(|m| m.to_string())),
                    opt(r.mncs.map(fmt_decimal)),
                    opt(r.citations.map(|c| c.to_string())),
                    opt(r.categories.as_ref().map(|c| c.join(";"))),
                    if r.oa { "1" } else { "0" }.to_string(),
                    opt(r.title.clone()),
                ])
                .map_err(csv_write_err)?;
            }
            csv_bytes(w)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(
            write_mapping_report(&[]).unwrap(),
            b"id,mncs,oa,class,pitch\n"
        );
    }

    #[test]
    fn rows_in_table_layout() {
        let rows = [
            MappingReportRow {
                id: "WOS:000085125700001".into(),
                mncs: 55.0,
                oa: false,
                class: 7,
                pitch: PitchClass::DSharp,
            },
            MappingReportRow {
                id: "WOS:A1997XJ93700002".into(),
                mncs: 0.4,
                oa: true,
                class: 2,
                pitch: PitchClass::G,
            },
        ];
        let out = String::from_utf8(write_mapping_report(&rows).unwrap()).unwrap();
        assert_eq!(
            out,
            "id,mncs,oa,class,pitch\nWOS:000085125700001,55.0,0,7,D#\nWOS:A1997XJ93700002,0.4,1,2,G\n"
        );
        assert_eq!(read_mapping_report(out.as_bytes()).unwrap(), rows);
    }
}
