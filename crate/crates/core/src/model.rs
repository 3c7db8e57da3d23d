//! Domain types shared by the tracker, the loaders and the evaluation code.
//!
//! Score time is measured in quarter-note beats, performance time in seconds,
//! and tempo in seconds per quarter note.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest valid MIDI pitch.
pub const MAX_PITCH: u8 = 127;

fn check_pitch(pitch: i64) -> Result<u8> {
    if (0..=MAX_PITCH as i64).contains(&pitch) {
        Ok(pitch as u8)
    } else {
        Err(Error::InvalidPitch(pitch))
    }
}

fn check_onset(onset: f64) -> Result<f64> {
    if onset.is_finite() && onset >= 0.0 {
        Ok(onset)
    } else {
        Err(Error::InvalidOnset(onset))
    }
}

/// A set of MIDI pitches, stored as a 128-bit membership mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PitchSet(u128);

impl PitchSet {
    pub const fn empty() -> Self {
        PitchSet(0)
    }

    pub fn from_pitches<I: IntoIterator<Item = u8>>(pitches: I) -> Result<Self> {
        let mut set = PitchSet::empty();
        for p in pitches {
            set.insert(p)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, pitch: u8) -> Result<()> {
        let pitch = check_pitch(pitch as i64)?;
        self.0 |= 1u128 << pitch;
        Ok(())
    }

    #[inline]
    pub fn contains(&self, pitch: u8) -> bool {
        pitch <= MAX_PITCH && self.0 & (1u128 << pitch) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(&self, other: &PitchSet) -> PitchSet {
        PitchSet(self.0 | other.0)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        let bits = self.0;
        (0..=MAX_PITCH).filter(move |p| bits & (1u128 << p) != 0)
    }
}

impl fmt::Debug for PitchSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// One performed note: MIDI pitch and onset in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceNote {
    pitch: u8,
    onset_s: f64,
}

impl PerformanceNote {
    pub fn new(pitch: u8, onset_s: f64) -> Result<Self> {
        Ok(PerformanceNote {
            pitch: check_pitch(pitch as i64)?,
            onset_s: check_onset(onset_s)?,
        })
    }

    #[inline]
    pub fn pitch(&self) -> u8 {
        self.pitch
    }

    #[inline]
    pub fn onset_s(&self) -> f64 {
        self.onset_s
    }

    pub(crate) fn with_onset(self, onset_s: f64) -> Self {
        PerformanceNote { onset_s, ..self }
    }
}

/// Ordered performance with non-decreasing onsets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerformanceStream {
    notes: Vec<PerformanceNote>,
}

impl PerformanceStream {
    pub fn new(notes: Vec<PerformanceNote>) -> Result<Self> {
        validate_performance(&notes)?;
        Ok(PerformanceStream { notes })
    }

    pub fn notes(&self) -> &[PerformanceNote] {
        &self.notes
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    pub fn into_notes(self) -> Vec<PerformanceNote> {
        self.notes
    }
}

/// Checks that onsets never decrease.
pub fn validate_performance(notes: &[PerformanceNote]) -> Result<()> {
    for (index, pair) in notes.windows(2).enumerate() {
        if pair[1].onset_s < pair[0].onset_s {
            return Err(Error::DecreasingPerformance {
                index: index + 1,
                prev: pair[0].onset_s,
                next: pair[1].onset_s,
            });
        }
    }
    Ok(())
}

/// One score event: the pitches starting together at an onset (in beats).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreOnset {
    pitches: PitchSet,
    onset_b: f64,
}

impl ScoreOnset {
    /// Builds an onset. The pitch set may be empty here; [`validate_score`]
    /// rejects that when the onset becomes part of a score.
    pub fn new(pitches: PitchSet, onset_b: f64) -> Result<Self> {
        Ok(ScoreOnset {
            pitches,
            onset_b: check_onset(onset_b)?,
        })
    }

    pub fn from_pitches(pitches: &[u8], onset_b: f64) -> Result<Self> {
        ScoreOnset::new(PitchSet::from_pitches(pitches.iter().copied())?, onset_b)
    }

    #[inline]
    pub fn pitches(&self) -> &PitchSet {
        &self.pitches
    }

    #[inline]
    pub fn onset_b(&self) -> f64 {
        self.onset_b
    }
}

/// Ordered score with strictly increasing onsets and non-empty pitch sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSequence {
    onsets: Vec<ScoreOnset>,
}

impl ScoreSequence {
    pub fn new(onsets: Vec<ScoreOnset>) -> Result<Self> {
        validate_score(&onsets)?;
        Ok(ScoreSequence { onsets })
    }

    pub fn onsets(&self) -> &[ScoreOnset] {
        &self.onsets
    }

    pub fn len(&self) -> usize {
        self.onsets.len()
    }

    /// Always false for a constructed score; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.onsets.is_empty()
    }

    pub fn first_beat(&self) -> f64 {
        self.onsets[0].onset_b
    }

    pub fn last_beat(&self) -> f64 {
        self.onsets[self.onsets.len() - 1].onset_b
    }

    /// Index of the onset at exactly `beats`, tolerating float noise.
    pub fn index_of_beat(&self, beats: f64) -> Option<usize> {
        let tol = 1e-9 * beats.abs().max(1.0);
        let pos = self.onsets.partition_point(|o| o.onset_b < beats - tol);
        self.onsets
            .get(pos)
            .filter(|o| (o.onset_b - beats).abs() <= tol)
            .map(|_| pos)
    }
}

impl std::ops::Index<usize> for ScoreSequence {
    type Output = ScoreOnset;

    fn index(&self, index: usize) -> &ScoreOnset {
        &self.onsets[index]
    }
}

pub fn validate_score(onsets: &[ScoreOnset]) -> Result<()> {
    if onsets.is_empty() {
        return Err(Error::EmptyScore);
    }
    for (index, onset) in onsets.iter().enumerate() {
        if onset.pitches.is_empty() {
            return Err(Error::EmptyPitchSet { index });
        }
        if index > 0 && onset.onset_b <= onsets[index - 1].onset_b {
            return Err(Error::NonIncreasingOnsets {
                index,
                prev: onsets[index - 1].onset_b,
                next: onset.onset_b,
            });
        }
    }
    Ok(())
}

/// Local tempo in seconds per quarter note.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TempoEstimate(f64);

impl TempoEstimate {
    pub fn new(spq: f64) -> Result<Self> {
        if spq.is_finite() && spq > 0.0 {
            Ok(TempoEstimate(spq))
        } else {
            Err(Error::InvalidConfig(format!("tempo {spq} s/quarter must be > 0")))
        }
    }

    /// Callers guarantee `spq > 0`.
    #[inline]
    pub(crate) fn from_spq_unchecked(spq: f64) -> Self {
        debug_assert!(spq > 0.0);
        TempoEstimate(spq)
    }

    #[inline]
    pub fn spq(&self) -> f64 {
        self.0
    }

    /// Quarter notes per minute.
    pub fn qpm(&self) -> f64 {
        60.0 / self.0
    }
}

/// One alignment decision reported by the tracker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchEvent {
    pub score_index: usize,
    pub perf_index: usize,
    pub perf_onset_s: f64,
    pub tempo: TempoEstimate,
}
