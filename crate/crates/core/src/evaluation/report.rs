use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{EvalError, Triple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Content id, trial label or model variant.
    pub group: String,
    /// Number of test records behind the triple.
    pub n: usize,
    pub triple: Triple,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: String,
    pub rows: Vec<ReportRow>,
    /// Mean over rows; absent for protocols whose rows are not replicates.
    pub mean: Option<Triple>,
    /// Sample standard deviation over rows (0 for a single row).
    pub std: Option<Triple>,
    /// `(group, error)` for groups excluded from the aggregates.
    pub failed: Vec<(String, String)>,
    pub metadata: BTreeMap<String, String>,
}

impl EvalReport {
    pub(crate) fn with_aggregates(mut self) -> Self {
        if self.rows.is_empty() {
            return self;
        }
        let n = self.rows.len() as f64;
        let pick = |f: fn(&Triple) -> f64| -> (f64, f64) {
            let v: Vec<f64> = self.rows.iter().map(|r| f(&r.triple)).collect();
            let m = v.iter().sum::<f64>() / n;
            let s = if v.len() > 1 {
                (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            (m, s)
        };
        let (pm, ps) = pick(|t| t.plcc);
        let (sm, ss) = pick(|t| t.srcc);
        let (rm, rs) = pick(|t| t.rmse);
        self.mean = Some(Triple {
            plcc: pm,
            srcc: sm,
            rmse: rm,
        });
        self.std = Some(Triple {
            plcc: ps,
            srcc: ss,
            rmse: rs,
        });
        self
    }

    pub fn row(&self, group: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.group == group)
    }

    /// Values of one metric across rows, in row order.
    pub fn metric(&self, f: impl Fn(&Triple) -> f64) -> Vec<f64> {
        self.rows.iter().map(|r| f(&r.triple)).collect()
    }

    /// One line per row, then `Mean` and `Std` rows when present.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), EvalError> {
        let csv_err = |e: csv::Error| EvalError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["group", "n", "plcc", "srcc", "rmse"])
            .map_err(csv_err)?;
        let mut emit = |group: &str, n: String, t: &Triple| {
            w.write_record([
                group.to_string(),
                n,
                format!("{:.6}", t.plcc),
                format!("{:.6}", t.srcc),
                format!("{:.6}", t.rmse),
            ])
        };
        for r in &self.rows {
            emit(&r.group, r.n.to_string(), &r.triple).map_err(csv_err)?;
        }
        if let Some(m) = &self.mean {
            emit("Mean", String::new(), m).map_err(csv_err)?;
        }
        if let Some(s) = &self.std {
            emit("Std", String::new(), s).map_err(csv_err)?;
        }
        w.flush().map_err(|e| EvalError::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}
