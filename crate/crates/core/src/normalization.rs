//! Field-normalized citation scores.
//!
//! A record's MNCS is its citation count divided by the expected citations of
//! papers in the same subject category and publication year. Papers assigned
//! to several categories are normalized against the arithmetic mean of the
//! matching category baselines.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PublicationRecord;

/// Expected (mean) citations of all papers in one category and year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationBaseline {
    pub category: String,
    pub year: i32,
    pub expected: f64,
}

/// Baselines indexed by `(category, year)`.
#[derive(Debug, Clone, Default)]
pub struct BaselineTable {
    entries: HashMap<(String, i32), f64>,
}

impl BaselineTable {
    pub fn new(baselines: impl IntoIterator<Item = CitationBaseline>) -> Result<Self> {
        let mut entries = HashMap::new();
        for b in baselines {
            if !(b.expected.is_finite() && b.expected > 0.0) {
                return Err(Error::range(
                    "expected",
                    format!(
                        "baseline {}/{} must be positive, got {}",
                        b.category, b.year, b.expected
                    ),
                ));
            }
            let key = (b.category.clone(), b.year);
            if entries.insert(key, b.expected).is_some() {
                return Err(Error::validation(
                    "category",
                    None,
                    format!("duplicate baseline for {}/{}", b.category, b.year),
                ));
            }
        }
        Ok(Self { entries })
    }

    /// Reads a CSV table with header `category,year,expected`.
    pub fn from_csv(raw: &[u8]) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            category: String,
            year: i32,
            expected: f64,
        }
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(raw);
        let mut rows = Vec::new();
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            rows.push(CitationBaseline {
                category: row.category,
                year: row.year,
                expected: row.expected,
            });
        }
        Self::new(rows)
    }

    pub fn get(&self, category: &str, year: i32) -> Option<f64> {
        // HashMap<(String, i32), _> cannot be queried with a borrowed tuple.
        self.entries.get(&(category.to_string(), year)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `citations / mean(baselines)`.
pub fn compute_mncs(citations: u64, baselines: &[f64]) -> Result<f64> {
    if baselines.is_empty() {
        return Err(Error::MissingBaseline { id: None });
    }
    if let Some(bad) = baselines.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
        return Err(Error::range(
            "expected",
            format!("baseline {bad} must be positive"),
        ));
    }
    let mean = baselines.iter().sum::<f64>() / baselines.len() as f64;
    Ok(citations as f64 / mean)
}

/// The record's precomputed score if present, otherwise one computed from its
/// citations and every category that has a baseline for the record's year.
pub fn resolve_mncs(record: &PublicationRecord, table: &BaselineTable) -> Result<f64> {
    if let Some(mncs) = record.mncs {
        return Ok(mncs);
    }
    let missing = || Error::MissingBaseline {
        id: Some(record.id.clone()),
    };
    let citations = record.citations.ok_or_else(missing)?;
    let baselines: Vec<f64> = record
        .categories
        .iter()
        .flatten()
        .filter_map(|c| table.get(c, record.year))
        .collect();
    if baselines.is_empty() {
        return Err(missing());
    }
    compute_mncs(citations, &baselines)
}
