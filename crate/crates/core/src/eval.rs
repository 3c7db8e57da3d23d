//! Robustness and precision of a match trace against a ground-truth alignment.
//!
//! Every ground-truth score onset gets a predicted performance time: the
//! onset of the first performed note matched to it, or a linear interpolation
//! between neighbouring matched onsets when it was never matched. A piece is
//! lost when any absolute error exceeds [`LOST_THRESHOLD_S`]. Precision is
//! the share of errors at or below each of [`THRESHOLDS_S`], averaged over
//! the pieces that were not lost.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::GroundTruthAlignment;
use crate::model::{MatchEvent, ScoreSequence};

pub const THRESHOLDS_S: [f64; 5] = [0.025, 0.05, 0.1, 0.25, 0.5];
pub const LOST_THRESHOLD_S: f64 = 10.0;

pub fn predicted_times(
    matches: &[MatchEvent],
    score: &ScoreSequence,
    gt: &GroundTruthAlignment,
) -> Result<Vec<f64>> {
    if matches.is_empty() {
        return Err(Error::NoMatches);
    }
    let mut first_time: Vec<Option<f64>> = vec![None; score.len()];
    for m in matches {
        first_time[m.score_index].get_or_insert(m.perf_onset_s);
    }
    let anchors: Vec<(f64, f64)> = first_time
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|t| (score[i].onset_b(), t)))
        .collect();

    let predict = |beats: f64| -> f64 {
        if let Some(t) = score.index_of_beat(beats).and_then(|i| first_time[i]) {
            return t;
        }
        let k = anchors.partition_point(|&(b, _)| b < beats);
        if k == 0 {
            anchors[0].1
        } else if k == anchors.len() {
            anchors[k - 1].1
        } else {
            let (b0, t0) = anchors[k - 1];
            let (b1, t1) = anchors[k];
            t0 + (t1 - t0) * (beats - b0) / (b1 - b0)
        }
    };
    Ok(gt.pairs().iter().map(|&(beats, _)| predict(beats)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceReport {
    pub errors_s: Vec<f64>,
    pub lost: bool,
    /// Percentage of errors `<=` each threshold in [`THRESHOLDS_S`].
    pub quantile_pcts: [f64; 5],
}

impl PieceReport {
    pub fn from_errors(errors_s: Vec<f64>) -> Self {
        let lost = errors_s.iter().any(|&e| e > LOST_THRESHOLD_S);
        let n = errors_s.len();
        let quantile_pcts = THRESHOLDS_S.map(|th| {
            if n == 0 {
                100.0
            } else {
                100.0 * errors_s.iter().filter(|&&e| e <= th).count() as f64 / n as f64
            }
        });
        PieceReport {
            errors_s,
            lost,
            quantile_pcts,
        }
    }
}

/// # Panics
///
/// If `predicted` and `gt` differ in length.
pub fn piece_report(predicted: &[f64], gt: &GroundTruthAlignment) -> PieceReport {
    assert_eq!(predicted.len(), gt.len(), "one prediction per ground-truth onset");
    let errors = predicted
        .iter()
        .zip(gt.pairs())
        .map(|(p, &(_, actual))| (p - actual).abs())
        .collect();
    PieceReport::from_errors(errors)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub pieces: usize,
    /// Percentage of pieces not lost.
    pub robustness: f64,
    /// Mean quantile percentages over pieces not lost; `None` when all are.
    pub precision: Option<[f64; 5]>,
}

pub fn dataset_report(reports: &[PieceReport]) -> DatasetSummary {
    let robust: Vec<&PieceReport> = reports.iter().filter(|r| !r.lost).collect();
    let robustness = if reports.is_empty() {
        0.0
    } else {
        100.0 * robust.len() as f64 / reports.len() as f64
    };
    let precision = (!robust.is_empty()).then(|| {
        let mut sums = [0.0; 5];
        for r in &robust {
            for (s, v) in sums.iter_mut().zip(r.quantile_pcts) {
                *s += v;
            }
        }
        sums.map(|s| s / robust.len() as f64)
    });
    DatasetSummary {
        pieces: reports.len(),
        robustness,
        precision,
    }
}
