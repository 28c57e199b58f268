//! Raw panel ratings to MOS: z-scores, BT.500 observer screening, rescaling
//! and per-stimulus averaging.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubjectiveError {
    #[error("{axis} `{id}` has fewer than two scores or zero spread")]
    ZeroVariance { axis: &'static str, id: String },
    #[error("screening needs at least 3 observers, found {0}")]
    TooFewObservers(usize),
    #[error("all scores are equal, cannot rescale")]
    DegenerateRange,
    #[error("stimulus `{0}` has no retained score")]
    EmptyStimulus(String),
    #[error("duplicate score for stimulus `{stimulus}` by observer `{observer}`")]
    DuplicateScore { stimulus: String, observer: String },
    #[error("csv: {0}")]
    Csv(String),
}

/// Normalization axis for [`zscore`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    #[default]
    PerObserver,
    PerStimulus,
}

/// Stimulus × observer scores, entries optional.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    pub stimuli: Vec<String>,
    pub observers: Vec<String>,
    /// `scores[stimulus][observer]`.
    pub scores: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Deserialize)]
struct RatingRow {
    stimulus_id: String,
    observer_id: String,
    score: f64,
}

fn csv_err(e: impl std::fmt::Display) -> SubjectiveError {
    SubjectiveError::Csv(e.to_string())
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = if v.len() > 1 {
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (m, s)
}

impl RatingMatrix {
    /// Long-format CSV `stimulus_id,observer_id,score`; ids keep their
    /// first-appearance order.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self, SubjectiveError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut stimuli = Vec::new();
        let mut observers = Vec::new();
        let mut s_index = HashMap::new();
        let mut o_index = HashMap::new();
        let mut entries = Vec::new();
        for row in rdr.deserialize::<RatingRow>() {
            let row = row.map_err(csv_err)?;
            if !row.score.is_finite() {
                return Err(SubjectiveError::Csv(format!(
                    "non-finite score for `{}` by `{}`",
                    row.stimulus_id, row.observer_id
                )));
            }
            let s = *s_index.entry(row.stimulus_id.clone()).or_insert_with(|| {
                stimuli.push(row.stimulus_id.clone());
                stimuli.len() - 1
            });
            let o = *o_index.entry(row.observer_id.clone()).or_insert_with(|| {
                observers.push(row.observer_id.clone());
                observers.len() - 1
            });
            entries.push((s, o, row.score));
        }
        let mut scores = vec![vec![None; observers.len()]; stimuli.len()];
        for (s, o, v) in entries {
            if scores[s][o].replace(v).is_some() {
                return Err(SubjectiveError::DuplicateScore {
                    stimulus: stimuli[s].clone(),
                    observer: observers[o].clone(),
                });
            }
        }
        Ok(Self {
            stimuli,
            observers,
            scores,
        })
    }

    pub fn from_csv_path(path: impl AsRef<std::path::Path>) -> Result<Self, SubjectiveError> {
        Self::from_csv_reader(std::fs::File::open(path).map_err(csv_err)?)
    }

    /// Complete matrix from `scores[stimulus][observer]`.
    pub fn from_dense(stimuli: Vec<String>, observers: Vec<String>, dense: Vec<Vec<f64>>) -> Self {
        let scores = dense
            .into_iter()
            .map(|row| row.into_iter().map(Some).collect())
            .collect();
        Self {
            stimuli,
            observers,
            scores,
        }
    }

    pub fn observer_scores(&self, o: usize) -> Vec<f64> {
        self.scores.iter().filter_map(|row| row[o]).collect()
    }

    fn map_entries(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        let scores = self
            .scores
            .iter()
            .enumerate()
            .map(|(s, row)| {
                row.iter()
                    .enumerate()
                    .map(|(o, v)| v.map(|x| f(s, o, x)))
                    .collect()
            })
            .collect();
        Self {
            stimuli: self.stimuli.clone(),
            observers: self.observers.clone(),
            scores,
        }
    }

    fn without_observers(&self, drop: &[usize]) -> Self {
        let keep: Vec<usize> = (0..self.observers.len())
            .filter(|o| !drop.contains(o))
            .collect();
        Self {
            stimuli: self.stimuli.clone(),
            observers: keep.iter().map(|&o| self.observers[o].clone()).collect(),
            scores: self
                .scores
                .iter()
                .map(|row| keep.iter().map(|&o| row[o]).collect())
                .collect(),
        }
    }
}

/// `(x − μ) / σ` with sample σ along `axis`; missing entries stay missing.
pub fn zscore(matrix: &RatingMatrix, axis: Axis) -> Result<RatingMatrix, SubjectiveError> {
    let stats = |v: Vec<f64>, axis: &'static str, id: &str| {
        let (m, s) = mean_std(&v);
        if v.len() < 2 || s == 0.0 {
            Err(SubjectiveError::ZeroVariance {
                axis,
                id: id.to_string(),
            })
        } else {
            Ok((m, s))
        }
    };
    match axis {
        Axis::PerObserver => {
            let params = (0..matrix.observers.len())
                .map(|o| stats(matrix.observer_scores(o), "observer", &matrix.observers[o]))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(matrix.map_entries(|_, o, x| (x - params[o].0) / params[o].1))
        }
        Axis::PerStimulus => {
            let params = matrix
                .scores
                .iter()
                .zip(&matrix.stimuli)
                .map(|(row, id)| stats(row.iter().flatten().copied().collect(), "stimulus", id))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(matrix.map_entries(|s, _, x| (x - params[s].0) / params[s].1))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Screening {
    pub retained: RatingMatrix,
    pub rejected: Vec<String>,
}

/// Per-observer `(P, Q)` counts of scores above / below the per-stimulus
/// acceptance band.
pub fn outlier_counts(matrix: &RatingMatrix) -> Vec<(usize, usize)> {
    let mut counts = vec![(0, 0); matrix.observers.len()];
    for row in &matrix.scores {
        let present: Vec<f64> = row.iter().flatten().copied().collect();
        if present.len() < 2 {
            continue;
        }
        let (mean, sd) = mean_std(&present);
        if sd == 0.0 {
            continue;
        }
        let n = present.len() as f64;
        let m2 = present.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m4 = present.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let kurtosis = m4 / (m2 * m2);
        let band = if (2.0..=4.0).contains(&kurtosis) {
            2.0 * sd
        } else {
            20f64.sqrt() * sd
        };
        for (o, v) in row.iter().enumerate() {
            match v {
                Some(x) if *x > mean + band => counts[o].0 += 1,
                Some(x) if *x < mean - band => counts[o].1 += 1,
                _ => {}
            }
        }
    }
    counts
}

/// BT.500 observer screening: reject when `(P+Q)/N > 0.05` and
/// `|P−Q|/(P+Q) < 0.3`, with `N` the observer's score count.
pub fn screen_observers(matrix: &RatingMatrix) -> Result<Screening, SubjectiveError> {
    if matrix.observers.len() < 3 {
        return Err(SubjectiveError::TooFewObservers(matrix.observers.len()));
    }
    let counts = outlier_counts(matrix);
    let drop: Vec<usize> = counts
        .iter()
        .enumerate()
        .filter(|&(o, &(p, q))| {
            let n = matrix.observer_scores(o).len() as f64;
            let pq = (p + q) as f64;
            pq > 0.0 && pq / n > 0.05 && (p as f64 - q as f64).abs() / pq < 0.3
        })
        .map(|(o, _)| o)
        .collect();
    Ok(Screening {
        retained: matrix.without_observers(&drop),
        rejected: drop.iter().map(|&o| matrix.observers[o].clone()).collect(),
    })
}

/// Global affine map sending the smallest entry to `lo` and the largest to
/// `hi`.
pub fn rescale_to_range(
    matrix: &RatingMatrix,
    lo: f64,
    hi: f64,
) -> Result<RatingMatrix, SubjectiveError> {
    let (min, max) = matrix
        .scores
        .iter()
        .flatten()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if max <= min {
        return Err(SubjectiveError::DegenerateRange);
    }
    let k = (hi - lo) / (max - min);
    Ok(matrix.map_entries(|_, _, x| lo + (x - min) * k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosRow {
    pub stimulus_id: String,
    pub mos: f64,
    /// Sample standard deviation; 0 when a single observer remains.
    pub std: f64,
    pub n: usize,
}

impl MosRow {
    pub fn single_observer(&self) -> bool {
        self.n == 1
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MosTable {
    pub rows: Vec<MosRow>,
}

impl MosTable {
    pub fn get(&self, stimulus: &str) -> Option<&MosRow> {
        self.rows.iter().find(|r| r.stimulus_id == stimulus)
    }

    /// `stimulus → mos`.
    pub fn to_map(&self) -> std::collections::BTreeMap<String, f64> {
        self.rows
            .iter()
            .map(|r| (r.stimulus_id.clone(), r.mos))
            .collect()
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), SubjectiveError> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r).map_err(csv_err)?;
        }
        w.flush().map_err(csv_err)
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self, SubjectiveError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let rows = rdr
            .deserialize::<MosRow>()
            .collect::<Result<Vec<_>, _>>()
            .map_err(csv_err)?;
        Ok(Self { rows })
    }
}

/// Per-stimulus mean and sample standard deviation over present scores.
pub fn compute_mos(matrix: &RatingMatrix) -> Result<MosTable, SubjectiveError> {
    let rows = matrix
        .scores
        .iter()
        .zip(&matrix.stimuli)
        .map(|(row, id)| {
            let present: Vec<f64> = row.iter().flatten().copied().collect();
            if present.is_empty() {
                return Err(SubjectiveError::EmptyStimulus(id.clone()));
            }
            let (mos, std) = mean_std(&present);
            Ok(MosRow {
                stimulus_id: id.clone(),
                mos,
                std,
                n: present.len(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MosTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubjectiveOptions {
    pub axis: Axis,
    pub screen: bool,
    pub lo: f64,
    pub hi: f64,
}

impl Default for SubjectiveOptions {
    fn default() -> Self {
        Self {
            axis: Axis::PerObserver,
            screen: true,
            lo: 1.0,
            hi: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectiveOutcome {
    pub mos: MosTable,
    pub rejected: Vec<String>,
}

/// z-score, screen, rescale, average.
pub fn process_ratings(
    matrix: &RatingMatrix,
    options: &SubjectiveOptions,
) -> Result<SubjectiveOutcome, SubjectiveError> {
    let z = zscore(matrix, options.axis)?;
    let (kept, rejected) = if options.screen {
        let s = screen_observers(&z)?;
        (s.retained, s.rejected)
    } else {
        (z, Vec::new())
    };
    let scaled = rescale_to_range(&kept, options.lo, options.hi)?;
    Ok(SubjectiveOutcome {
        mos: compute_mos(&scaled)?,
        rejected,
    })
}
