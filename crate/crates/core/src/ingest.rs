//! Publication records: parsing, validation and chronological ordering.
//!
//! CSV input uses the header `id,year,month,mncs,citations,categories,oa,title`
//! (columns may appear in any order, unknown columns are ignored, trailing
//! empty cells may be omitted). `categories` is a semicolon-separated list.
//! JSON input is an array of objects with the same keys.

use std::collections::{HashMap, HashSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Month used for ordering when a record carries no month.
pub const UNKNOWN_MONTH_SORT_KEY: u8 = 12;

pub const CSV_COLUMNS: [&str; 8] = [
    "id",
    "year",
    "month",
    "mncs",
    "citations",
    "categories",
    "oa",
    "title",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Json,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "json" => Ok(InputFormat::Json),
            other => Err(Error::Config(format!("unknown input format `{other}`"))),
        }
    }
}

/// Metadata of one publication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationRecord {
    /// Accession number (e.g. `WOS:000085125700001`).
    pub id: String,
    pub year: i32,
    pub month: Option<u8>,
    /// Precomputed field-normalized citation score.
    pub mncs: Option<f64>,
    pub citations: Option<u64>,
    pub categories: Option<Vec<String>>,
    /// Open access.
    pub oa: bool,
    pub title: Option<String>,
}

impl PublicationRecord {
    /// `(year, month)` with an absent month ordered last within its year.
    pub fn sort_key(&self) -> (i32, u8) {
        (self.year, self.month.unwrap_or(UNKNOWN_MONTH_SORT_KEY))
    }

    /// Checks the single-record invariants. `line` is only used for messages.
    pub fn validate(&self, line: Option<u64>) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::validation("id", line, "must not be empty"));
        }
        if let Some(m) = self.month {
            if !(1..=12).contains(&m) {
                return Err(Error::range("month", format!("{m} is not in 1..=12")));
            }
        }
        if let Some(x) = self.mncs {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::range(
                    "mncs",
                    format!("{x} is negative or not finite"),
                ));
            }
        }
        if self.mncs.is_none() && (self.citations.is_none() || self.categories.is_none()) {
            return Err(Error::validation(
                "mncs",
                line,
                format!(
                    "record `{}` has no mncs and lacks citations/categories to compute it",
                    self.id
                ),
            ));
        }
        Ok(())
    }
}

/// Parses and validates a dataset. Ids must be unique within the dataset.
pub fn parse_records(raw: &[u8], format: InputFormat) -> Result<Vec<PublicationRecord>> {
    let text = std::str::from_utf8(raw).map_err(|e| Error::Parse {
        line: line_of_offset(raw, e.valid_up_to()),
        message: format!("input is not valid UTF-8: {e}"),
    })?;
    let records = match format {
        InputFormat::Csv => parse_csv(text)?,
        InputFormat::Json => parse_json(text)?,
    };
    let mut seen = HashSet::new();
    for (rec, line) in &records {
        if !seen.insert(rec.id.as_str()) {
            return Err(Error::validation(
                "id",
                *line,
                format!("duplicate id `{}`", rec.id),
            ));
        }
    }
    Ok(records.into_iter().map(|(r, _)| r).collect())
}

/// Stable sort by `(year, month)`.
pub fn sort_chronological(mut records: Vec<PublicationRecord>) -> Vec<PublicationRecord> {
    records.sort_by_key(PublicationRecord::sort_key);
    records
}

fn line_of_offset(raw: &[u8], offset: usize) -> u64 {
    1 + raw[..offset].iter().filter(|&&b| b == b'\n').count() as u64
}

fn parse_csv(text: &str) -> Result<Vec<(PublicationRecord, Option<u64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader.headers().map_err(csv_error)?.clone();
    let columns: HashMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim(), i))
        .collect();
    for required in ["id", "year", "oa"] {
        if !columns.contains_key(required) {
            return Err(Error::validation(
                required,
                Some(1),
                "column missing from header",
            ));
        }
    }

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() > headers.len() {
            return Err(Error::Parse {
                line,
                message: format!("{} fields, header has {}", row.len(), headers.len()),
            });
        }
        if row.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let cell = |name: &str| -> Option<&str> {
            columns
                .get(name)
                .and_then(|&i| row.get(i))
                .map(str::trim)
                .filter(|c| !c.is_empty())
        };
        let at = Some(line);

        let id = cell("id")
            .ok_or_else(|| Error::validation("id", at, "missing"))?
            .to_string();
        let year = cell("year")
            .ok_or_else(|| Error::validation("year", at, "missing"))
            .and_then(|s| parse_num::<i32>("year", s, at))?;
        let month = cell("month")
            .map(|s| parse_num::<u8>("month", s, at))
            .transpose()?;
        let mncs = cell("mncs")
            .map(|s| parse_num::<f64>("mncs", s, at))
            .transpose()?;
        let citations = cell("citations")
            .map(|s| parse_num::<u64>("citations", s, at))
            .transpose()?;
        let categories = cell("categories").map(split_categories);
        let oa = match cell("oa") {
            None => false,
            Some(s) => parse_flag(s).ok_or_else(|| {
                Error::validation("oa", at, format!("`{s}` is not one of 1/0/true/false"))
            })?,
        };
        let title = cell("title").map(str::to_string);

        let rec = PublicationRecord {
            id,
            year,
            month,
            mncs,
            citations,
            categories,
            oa,
            title,
        };
        rec.validate(at)?;
        out.push((rec, at));
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn parse_num<T: FromStr>(field: &str, s: &str, line: Option<u64>) -> Result<T> {
    s.parse().map_err(|_| {
        if s.starts_with('-') {
            Error::range(field, format!("`{s}` is negative"))
        } else {
            Error::validation(field, line, format!("`{s}` is not a valid number"))
        }
    })
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

fn split_categories(s: &str) -> Vec<String> {
    s.split(';')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_json(text: &str) -> Result<Vec<(PublicationRecord, Option<u64>)>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    let items = value.as_array().ok_or_else(|| Error::Parse {
        line: 1,
        message: "expected a JSON array of records".into(),
    })?;

    let mut out = Vec::with_capacity(items.len());
    for (idx, item) in items.iter().enumerate() {
        let obj = item.as_object().ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("element {idx} is not an object"),
        })?;
        let get = |k: &str| obj.get(k).filter(|v| !v.is_null());
        let bad = |field: &str, msg: &str| {
            Error::validation(field, None, format!("record #{idx}: {msg}"))
        };

        let id = match get("id") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(bad("id", "must be a string")),
            None => return Err(bad("id", "missing")),
        };
        let year = match get("year") {
            Some(v) => json_int(v).ok_or_else(|| bad("year", "must be an integer"))? as i32,
            None => return Err(bad("year", "missing")),
        };
        let month = get("month")
            .map(|v| {
                let m = json_int(v).ok_or_else(|| bad("month", "must be an integer"))?;
                u8::try_from(m).map_err(|_| Error::range("month", format!("{m} is not in 1..=12")))
            })
            .transpose()?;
        let mncs = get("mncs")
            .map(|v| json_f64(v).ok_or_else(|| bad("mncs", "must be a number")))
            .transpose()?;
        let citations = get("citations")
            .map(|v| {
                let c = json_int(v).ok_or_else(|| bad("citations", "must be an integer"))?;
                u64::try_from(c).map_err(|_| Error::range("citations", format!("{c} is negative")))
            })
            .transpose()?;
        let categories = match get("categories") {
            None => None,
            Some(Value::String(s)) => Some(split_categories(s)),
            Some(Value::Array(a)) => Some(
                a.iter()
                    .map(|c| c.as_str().map(str::to_string))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| bad("categories", "must contain strings"))?,
            ),
            Some(_) => return Err(bad("categories", "must be a list or a string")),
        };
        let oa = match obj.get("oa") {
            None => return Err(bad("oa", "missing")),
            Some(Value::Null) => false,
            Some(Value::Bool(b)) => *b,
            Some(Value::Number(n)) => match n.as_u64() {
                Some(0) => false,
                Some(1) => true,
                _ => return Err(bad("oa", "must be 0 or 1")),
            },
            Some(Value::String(s)) if s.trim().is_empty() => false,
            Some(Value::String(s)) => {
                parse_flag(s.trim()).ok_or_else(|| bad("oa", "must be 1/0/true/false"))?
            }
            Some(_) => return Err(bad("oa", "must be a boolean")),
        };
        let title = match get("title") {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(bad("title", "must be a string")),
            None => None,
        };

        let rec = PublicationRecord {
            id,
            year,
            month,
            mncs,
            citations,
            categories,
            oa,
            title,
        };
        rec.validate(None)?;
        out.push((rec, None));
    }
    Ok(out)
}

fn json_int(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn json_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "id,year,month,mncs,citations,categories,oa,title\n";

    fn csv(rows: &str) -> Result<Vec<PublicationRecord>> {
        parse_records(format!("{HEADER}{rows}").as_bytes(), InputFormat::Csv)
    }

    fn rec(id: &str, year: i32, month: Option<u8>) -> PublicationRecord {
        PublicationRecord {
            id: id.into(),
            year,
            month,
            mncs: Some(1.0),
            citations: None,
            categories: None,
            oa: false,
            title: None,
        }
    }

    #[test]
    fn parses_table_row() {
        let recs = csv("WOS:A1996UQ23300009,1996,,0.8,,0,\n").unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.id, "WOS:A1996UQ23300009");
        assert_eq!(r.year, 1996);
        assert_eq!(r.month, None);
        assert_eq!(r.mncs, Some(0.8));
        assert!(!r.oa);
    }

    #[test]
    fn header_only_is_empty() {
        assert!(csv("").unwrap().is_empty());
    }

    #[test]
    fn negative_mncs_is_range_error() {
        let err = csv("X,2019,,-1.0,,,0,\n").unwrap_err();
        assert!(
            matches!(err, Error::Range { ref field, .. } if field == "mncs"),
            "{err}"
        );
    }

    #[test]
    fn missing_required_fields_are_named() {
        let err = csv(",2019,,1.0,,,0,\n").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "id"));
        let err = csv("X,,,1.0,,,0,\n").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "year"));
        let err = parse_records(b"id,year,mncs\nX,2019,1.0\n", InputFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "oa"));
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = csv("A,2019,,1.0,,,0,\nB,2019,,1.0,,,0,,extra\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_month_and_duplicates() {
        assert!(matches!(
            csv("A,2019,13,1.0,,,0,\n"),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            csv("A,2019,,1.0,,,0,\nA,2020,,1.0,,,0,\n"),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn oa_encodings() {
        let recs =
            csv("A,2019,,1,,,1,\nB,2019,,1,,,true,\nC,2019,,1,,,,\nD,2019,,1,,,FALSE,\n").unwrap();
        let flags: Vec<bool> = recs.iter().map(|r| r.oa).collect();
        assert_eq!(flags, [true, true, false, false]);
        assert!(csv("A,2019,,1,,,yes,\n").is_err());
    }

    #[test]
    fn record_needs_score_or_inputs() {
        assert!(csv("A,2019,,,10,,0,\n").is_err());
        let r = csv("A,2019,,,10,Physics; Chemistry ,0,\n").unwrap();
        assert_eq!(
            r[0].categories.as_deref(),
            Some(&["Physics".to_string(), "Chemistry".to_string()][..])
        );
    }

    #[test]
    fn unknown_columns_ignored_and_reordered() {
        let raw = "oa,extra,year,id,mncs\n1,zzz,2001,A,2.5\n";
        let r = parse_records(raw.as_bytes(), InputFormat::Csv).unwrap();
        assert_eq!(r[0].id, "A");
        assert!(r[0].oa);
        assert_eq!(r[0].mncs, Some(2.5));
    }

    #[test]
    fn json_records() {
        let raw = r#"[
            {"id":"A","year":2019,"month":3,"mncs":1.5,"oa":true,"title":"t","extra":1},
            {"id":"B","year":2018,"citations":4,"categories":["X","Y"],"oa":0}
        ]"#;
        let r = parse_records(raw.as_bytes(), InputFormat::Json).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].month, Some(3));
        assert_eq!(r[1].categories.as_ref().unwrap().len(), 2);
        assert!(!r[1].oa);

        let err =
            parse_records(br#"[{"id":"A","year":2019,"mncs":1}]"#, InputFormat::Json).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "oa"));
        let err = parse_records(b"[{\"id\":\"A\",\n", InputFormat::Json).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse_records(
            br#"[{"id":"A","year":2019,"mncs":-2,"oa":0}]"#,
            InputFormat::Json,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Range { .. }));
    }

    #[test]
    fn invalid_utf8_is_parse_error() {
        assert!(matches!(
            parse_records(b"id,year,oa\n\xff,1,0\n", InputFormat::Csv),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn sorts_by_year_then_month() {
        let input = vec![
            rec("a", 2019, Some(3)),
            rec("b", 1996, Some(1)),
            rec("c", 2019, Some(1)),
        ];
        let ids: Vec<_> = sort_chronological(input)
            .into_iter()
            .map(|r| r.id)
            .collect();
        assert_eq!(ids, ["b", "c", "a"]);
    }

    #[test]
    fn sort_is_stable_and_unknown_month_is_last() {
        let input = vec![
            rec("x", 2018, None),
            rec("A", 2018, Some(5)),
            rec("B", 2018, Some(5)),
            rec("y", 2018, Some(12)),
        ];
        let ids: Vec<_> = sort_chronological(input)
            .into_iter()
            .map(|r| r.id)
            .collect();
        assert_eq!(ids, ["A", "B", "x", "y"]);
    }
}
