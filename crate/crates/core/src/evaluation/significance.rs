use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::fdist::f_quantile;
use super::mapping::{nonlinear_map, Mapping};
use super::EvalError;

/// Each residual vector must be longer than this.
pub const MIN_SIGNIFICANCE_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ABetter,
    BBetter,
    Indistinguishable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTest {
    /// `var(a) / var(b)`.
    pub statistic: f64,
    pub df: (f64, f64),
    pub lower: f64,
    pub upper: f64,
    pub verdict: Verdict,
}

fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Two-sided F-test on the sample variances of two residual vectors.
/// The smaller-variance side is better when the ratio leaves the central
/// `confidence` interval.
pub fn ftest_variance_ratio(a: &[f64], b: &[f64], confidence: f64) -> Result<FTest, EvalError> {
    for v in [a, b] {
        if v.len() <= MIN_SIGNIFICANCE_SAMPLES {
            return Err(EvalError::TooFewSamples {
                needed: MIN_SIGNIFICANCE_SAMPLES,
                got: v.len(),
            });
        }
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(EvalError::InvalidArgument(format!(
            "confidence {confidence} is outside (0, 1)"
        )));
    }
    let df = ((a.len() - 1) as f64, (b.len() - 1) as f64);
    let alpha = 1.0 - confidence;
    let lower = f_quantile(alpha / 2.0, df.0, df.1);
    let upper = f_quantile(1.0 - alpha / 2.0, df.0, df.1);
    let statistic = sample_variance(a) / sample_variance(b);
    let verdict = if statistic < lower {
        Verdict::ABetter
    } else if statistic > upper {
        Verdict::BBetter
    } else {
        // Includes 0/0.
        Verdict::Indistinguishable
    };
    Ok(FTest {
        statistic,
        df,
        lower,
        upper,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    /// Row model significantly better (black block).
    RowBetter,
    /// Column model significantly better (white block).
    ColumnBetter,
    /// No significant difference (gray block).
    Indistinguishable,
}

impl Cell {
    pub fn symbol(self) -> char {
        match self {
            Cell::RowBetter => 'B',
            Cell::ColumnBetter => 'W',
            Cell::Indistinguishable => 'G',
        }
    }

    fn flipped(self) -> Self {
        match self {
            Cell::RowBetter => Cell::ColumnBetter,
            Cell::ColumnBetter => Cell::RowBetter,
            Cell::Indistinguishable => Cell::Indistinguishable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceMatrix {
    pub models: Vec<String>,
    pub cells: Vec<Vec<Cell>>,
    pub confidence: f64,
}

impl SignificanceMatrix {
    pub fn is_antisymmetric(&self) -> bool {
        let n = self.models.len();
        (0..n).all(|i| {
            self.cells[i][i] == Cell::Indistinguishable
                && (0..n).all(|j| self.cells[i][j] == self.cells[j][i].flipped())
        })
    }

    /// Header `model,<ids…>`, then one row of B/W/G symbols per model.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["model".to_string()];
        header.extend(self.models.iter().cloned());
        w.write_record(&header).expect("writing to memory");
        for (id, row) in self.models.iter().zip(&self.cells) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|c| c.symbol().to_string()));
            w.write_record(&rec).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
    }

    /// Fixed-width text grid with a legend.
    pub fn render_grid(&self) -> String {
        let width = self.models.iter().map(String::len).max().unwrap_or(0);
        let mut out = String::new();
        let _ = write!(out, "{:width$} ", "");
        for k in 0..self.models.len() {
            let _ = write!(out, " {:>2}", k + 1);
        }
        out.push('\n');
        for (i, (id, row)) in self.models.iter().zip(&self.cells).enumerate() {
            let _ = write!(out, "{id:width$} ");
            for c in row {
                let _ = write!(out, "  {}", c.symbol());
            }
            let _ = writeln!(out, "   ({})", i + 1);
        }
        let _ = writeln!(
            out,
            "B: row better, W: column better, G: no significant difference ({}% confidence)",
            self.confidence * 100.0
        );
        out
    }
}

/// Pairwise variance-ratio tests. Only the upper triangle is tested; the
/// lower triangle is its mirror.
pub fn significance_matrix(
    residuals: &[(String, Vec<f64>)],
    confidence: f64,
) -> Result<SignificanceMatrix, EvalError> {
    if let Some((id, v)) = residuals
        .iter()
        .find(|(_, v)| v.len() != residuals[0].1.len())
    {
        return Err(EvalError::MismatchedStimuli(format!(
            "model `{id}` has {} residuals, `{}` has {}",
            v.len(),
            residuals[0].0,
            residuals[0].1.len()
        )));
    }
    let n = residuals.len();
    let mut cells = vec![vec![Cell::Indistinguishable; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let test = ftest_variance_ratio(&residuals[i].1, &residuals[j].1, confidence)?;
            let cell = match test.verdict {
                Verdict::ABetter => Cell::RowBetter,
                Verdict::BBetter => Cell::ColumnBetter,
                Verdict::Indistinguishable => Cell::Indistinguishable,
            };
            cells[i][j] = cell;
            cells[j][i] = cell.flipped();
        }
    }
    if n == 1 {
        // A lone model still needs enough samples to be comparable later.
        let len = residuals[0].1.len();
        if len <= MIN_SIGNIFICANCE_SAMPLES {
            return Err(EvalError::TooFewSamples {
                needed: MIN_SIGNIFICANCE_SAMPLES,
                got: len,
            });
        }
    }
    Ok(SignificanceMatrix {
        models: residuals.iter().map(|(id, _)| id.clone()).collect(),
        cells,
        confidence,
    })
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    stimulus_id: String,
    model_id: String,
    score: f64,
}

/// Per-model score CSV (`stimulus_id,model_id,score`) as
/// `model → stimulus → score`.
pub fn read_model_scores(
    reader: impl Read,
) -> Result<BTreeMap<String, BTreeMap<String, f64>>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for row in rdr.deserialize::<ScoreRow>() {
        let row = row.map_err(|e| EvalError::Csv(e.to_string()))?;
        if !row.score.is_finite() {
            return Err(EvalError::Csv(format!(
                "non-finite score for `{}` / `{}`",
                row.model_id, row.stimulus_id
            )));
        }
        let prev = out
            .entry(row.model_id.clone())
            .or_default()
            .insert(row.stimulus_id.clone(), row.score);
        if prev.is_some() {
            return Err(EvalError::Csv(format!(
                "duplicate score for `{}` / `{}`",
                row.model_id, row.stimulus_id
            )));
        }
    }
    Ok(out)
}

/// Maps each model's scores onto MOS and returns the fitted mappings in
/// model-id order. Every model must score exactly the MOS stimuli.
pub fn mapped_residuals(
    scores: &BTreeMap<String, BTreeMap<String, f64>>,
    mos: &BTreeMap<String, f64>,
) -> Result<Vec<(String, Mapping)>, EvalError> {
    let observed: Vec<f64> = mos.values().copied().collect();
    scores
        .iter()
        .map(|(model, by_stimulus)| {
            if let Some(s) = mos.keys().find(|s| !by_stimulus.contains_key(*s)) {
                return Err(EvalError::MismatchedStimuli(format!(
                    "model `{model}` has no score for `{s}`"
                )));
            }
            if let Some(s) = by_stimulus.keys().find(|s| !mos.contains_key(*s)) {
                return Err(EvalError::MismatchedStimuli(format!(
                    "model `{model}` scores `{s}`, which has no MOS"
                )));
            }
            let objective: Vec<f64> = mos.keys().map(|s| by_stimulus[s]).collect();
            Ok((model.clone(), nonlinear_map(&objective, &observed)?))
        })
        .collect()
}
