//! Pairwise distance between a score onset and a performed note.
//!
//! The distance mixes a binary pitch error with the deviation of the observed
//! onset from the onset extrapolated along the previous tempo estimate. The
//! same call also produces the smoothed tempo for the step.

use crate::config::TrackerConfig;
use crate::model::{PerformanceNote, ScoreOnset, TempoEstimate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseResult {
    pub distance: f64,
    pub tempo: TempoEstimate,
}

/// Distance of `perf_cur` to `score_cur`, given the predecessor pair and the
/// tempo stored at the predecessor cell.
///
/// For a non-zero score inter-onset interval the raw tempo is the ratio of
/// performance to score interval; for coinciding score onsets the performance
/// interval is added to the previous tempo instead. The raw tempo is blended
/// with the previous one by `cfg.d` and clamped to `[tempo_min, tempo_max]`.
#[inline]
pub fn pairwise_distance(
    score_cur: &ScoreOnset,
    score_prev: &ScoreOnset,
    perf_cur: &PerformanceNote,
    perf_prev: &PerformanceNote,
    prev_tempo: TempoEstimate,
    cfg: &TrackerConfig,
) -> PairwiseResult {
    let t_prev = prev_tempo.spq();
    let score_ioi = score_cur.onset_b() - score_prev.onset_b();

    let pitch_err = if score_cur.pitches().contains(perf_cur.pitch()) {
        0.0
    } else {
        1.0
    };
    let expected_onset = perf_prev.onset_s() + score_ioi * t_prev;
    let time_err = (expected_onset - perf_cur.onset_s()).abs();
    let distance = pitch_err + cfg.c * time_err;

    let raw_tempo = if score_ioi != 0.0 {
        if cfg.faithful_line6 {
            (perf_cur.onset_s() + perf_prev.onset_s()) / score_ioi
        } else {
            (perf_cur.onset_s() - perf_prev.onset_s()) / score_ioi
        }
    } else {
        t_prev + perf_cur.onset_s() - perf_prev.onset_s()
    };
    let smoothed = raw_tempo * cfg.d + (1.0 - cfg.d) * t_prev;
    let clamped = if smoothed.is_nan() {
        t_prev
    } else {
        smoothed.clamp(cfg.tempo_min, cfg.tempo_max)
    };

    PairwiseResult {
        distance,
        tempo: TempoEstimate::from_spq_unchecked(clamped),
    }
}
