//! Labelled observations and their CSV form
//! (`content_id,tqp,tbpp,tnsl,mos,tc_ref`, `tc_ref` may be blank). Lines
//! starting with `#` are skipped.

use std::collections::{BTreeSet, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstream::FeatureVector;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("duplicate record for content `{content_id}` at tqp {tqp}, tnsl {tnsl}")]
    DuplicateRecord {
        content_id: String,
        tqp: f64,
        tnsl: f64,
    },
    #[error("record for content `{0}` has a non-finite MOS")]
    NonFiniteMos(String),
    #[error("record for content `{0}` has invalid features")]
    InvalidFeatures(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub content_id: String,
    pub features: FeatureVector,
    pub mos: f64,
    /// Reference texture complexity computed from the source cloud.
    pub tc_ref: Option<f64>,
}

impl DatasetRecord {
    pub fn new(content_id: impl Into<String>, features: FeatureVector, mos: f64) -> Self {
        Self {
            content_id: content_id.into(),
            features,
            mos,
            tc_ref: None,
        }
    }

    pub fn with_tc_ref(mut self, tc_ref: f64) -> Self {
        self.tc_ref = Some(tc_ref);
        self
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    content_id: String,
    tqp: f64,
    tbpp: f64,
    tnsl: f64,
    mos: f64,
    #[serde(default, deserialize_with = "csv::invalid_option")]
    tc_ref: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
}

impl Dataset {
    /// Validates the one-record-per-(content, tqp, tnsl) and finite-MOS
    /// invariants.
    pub fn new(records: Vec<DatasetRecord>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::new();
        for r in &records {
            if !r.mos.is_finite() {
                return Err(DatasetError::NonFiniteMos(r.content_id.clone()));
            }
            if !r.features.is_valid() {
                return Err(DatasetError::InvalidFeatures(r.content_id.clone()));
            }
            let key = (
                r.content_id.as_str(),
                r.features.tqp.to_bits(),
                r.features.tnsl.to_bits(),
            );
            if !seen.insert(key) {
                return Err(DatasetError::DuplicateRecord {
                    content_id: r.content_id.clone(),
                    tqp: r.features.tqp,
                    tnsl: r.features.tnsl,
                });
            }
        }
        Ok(Self { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct content ids, sorted.
    pub fn content_ids(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| r.content_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Records whose content is (or, with `keep = false`, is not) in `ids`.
    pub fn select_contents(&self, ids: &[String], keep: bool) -> Dataset {
        let ids: HashSet<&str> = ids.iter().map(String::as_str).collect();
        Dataset {
            records: self
                .records
                .iter()
                .filter(|r| ids.contains(r.content_id.as_str()) == keep)
                .cloned()
                .collect(),
        }
    }

    /// Distinct values of a feature, ascending.
    pub fn levels(&self, feature: impl Fn(&FeatureVector) -> f64) -> Vec<f64> {
        let mut v: Vec<f64> = self.records.iter().map(|r| feature(&r.features)).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut records = Vec::new();
        for row in rdr.deserialize::<CsvRow>() {
            let row = row?;
            records.push(DatasetRecord {
                content_id: row.content_id,
                features: FeatureVector::new(row.tqp, row.tbpp, row.tnsl),
                mos: row.mos,
                tc_ref: row.tc_ref,
            });
        }
        Self::new(records)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(CsvRow {
                content_id: r.content_id.clone(),
                tqp: r.features.tqp,
                tbpp: r.features.tbpp,
                tnsl: r.features.tnsl,
                mos: r.mos,
                tc_ref: r.tc_ref,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}
