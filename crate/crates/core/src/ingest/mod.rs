//! Loading scores, performances and ground-truth alignments.
//!
//! Scores and performances come from Standard MIDI Files or from a small
//! tab-separated fixture format; alignments are TSV only.

mod midi;
mod tsv;

use std::path::Path;

use serde::Serialize;

pub use midi::{load_performance_midi, load_score_midi, parse_performance_midi, parse_score_midi, MidiOptions};
pub use tsv::{
    alignment_to_tsv, load_tsv, parse_alignment_tsv, parse_performance_tsv, parse_score_tsv,
    parse_tsv, performance_to_tsv, score_to_tsv, TsvData, TsvKind,
};

use crate::error::{Error, Result};
use crate::model::{PerformanceStream, PitchSet, ScoreOnset, ScoreSequence};

/// Reference mapping from score beats to performance seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruthAlignment {
    pairs: Vec<(f64, f64)>,
}

impl GroundTruthAlignment {
    /// Pairs of `(score_beats, perf_seconds)`; beats strictly increasing,
    /// seconds non-decreasing.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        for (k, &(b, s)) in pairs.iter().enumerate() {
            if !b.is_finite() || !s.is_finite() {
                return Err(Error::Validation(format!("alignment pair {k} is not finite")));
            }
            if k > 0 {
                let (pb, ps) = pairs[k - 1];
                if b <= pb {
                    return Err(Error::Validation(format!(
                        "alignment beats not increasing at pair {k} ({pb} -> {b})"
                    )));
                }
                if s < ps {
                    return Err(Error::Validation(format!(
                        "alignment seconds decreasing at pair {k} ({ps} -> {s})"
                    )));
                }
            }
        }
        Ok(GroundTruthAlignment { pairs })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Groups `(beats, pitch)` notes into score onsets. Notes whose beat lies
/// within `merge_epsilon` of the first beat of the current group join it;
/// with epsilon 0 only exactly equal beats are merged.
pub fn group_score_notes(mut notes: Vec<(f64, u8)>, merge_epsilon: f64) -> Result<ScoreSequence> {
    notes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut onsets: Vec<ScoreOnset> = Vec::new();
    let mut group: Option<(f64, PitchSet)> = None;
    for (beats, pitch) in notes {
        match group.as_mut() {
            Some((start, set)) if beats - *start <= merge_epsilon => set.insert(pitch)?,
            _ => {
                if let Some((start, set)) = group.take() {
                    onsets.push(ScoreOnset::new(set, start)?);
                }
                let mut set = PitchSet::empty();
                set.insert(pitch)?;
                group = Some((beats, set));
            }
        }
    }
    if let Some((start, set)) = group {
        onsets.push(ScoreOnset::new(set, start)?);
    }
    ScoreSequence::new(onsets)
}

fn is_midi(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("mid" | "midi")
    )
}

/// Loads a score from `.mid`/`.midi` or TSV, chosen by extension.
pub fn load_score(path: &Path) -> Result<ScoreSequence> {
    if is_midi(path) {
        load_score_midi(path, &MidiOptions::default())
    } else {
        match load_tsv(path, TsvKind::Score)? {
            TsvData::Score(s) => Ok(s),
            _ => unreachable!(),
        }
    }
}

/// Loads a performance from `.mid`/`.midi` or TSV, chosen by extension.
pub fn load_performance(path: &Path) -> Result<PerformanceStream> {
    if is_midi(path) {
        load_performance_midi(path, &MidiOptions::default())
    } else {
        match load_tsv(path, TsvKind::Performance)? {
            TsvData::Performance(p) => Ok(p),
            _ => unreachable!(),
        }
    }
}

pub fn load_alignment(path: &Path) -> Result<GroundTruthAlignment> {
    match load_tsv(path, TsvKind::Alignment)? {
        TsvData::Alignment(a) => Ok(a),
        _ => unreachable!(),
    }
}
