//! Event-driven windowed online time warping.
//!
//! Rows of the cost matrices are score onsets, columns are performed notes.
//! Every incoming note appends one column spanning the current score window.
//! Each cell keeps the accumulated cost of its best path, the tempo estimate
//! carried along that path and the path length. Only the two most recent
//! columns are stored, so memory is `O(w)`.
//!
//! The reported match for a note is the cell of the new column with the
//! lowest length-normalized accumulated cost. The window is then recentred so
//! the match sits `w / 2` rows past the window start; it only ever moves
//! forward.

use std::ops::Range;

use crate::config::TrackerConfig;
use crate::distance::pairwise_distance;
use crate::error::{Error, Result};
use crate::model::{MatchEvent, PerformanceNote, ScoreSequence, TempoEstimate};

/// Onsets may regress by at most this much before a note is rejected.
pub const ONSET_REGRESSION_TOLERANCE_S: f64 = 1e-3;

/// Step direction into a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// From `(i - 1, j)`: advance in the score, same performed note.
    Score,
    /// From `(i - 1, j - 1)`.
    Diagonal,
    /// From `(i, j - 1)`: same score onset, next performed note.
    Performance,
    /// The virtual origin preceding `(0, 0)`.
    Origin,
}

#[derive(Debug, Clone, Default)]
struct Column {
    start: usize,
    cost: Vec<f64>,
    tempo: Vec<f64>,
    path_len: Vec<u32>,
    dir: Vec<Direction>,
}

impl Column {
    fn reset(&mut self, start: usize) {
        self.start = start;
        self.cost.clear();
        self.tempo.clear();
        self.path_len.clear();
        self.dir.clear();
    }

    #[inline]
    fn get(&self, row: usize) -> Option<(f64, f64, u32)> {
        let k = row.checked_sub(self.start)?;
        if k < self.cost.len() {
            Some((self.cost[k], self.tempo[k], self.path_len[k]))
        } else {
            None
        }
    }

    fn push(&mut self, cost: f64, tempo: f64, path_len: u32, dir: Direction) {
        self.cost.push(cost);
        self.tempo.push(tempo);
        self.path_len.push(path_len);
        self.dir.push(dir);
    }
}

/// Read-only view of the most recently computed column.
#[derive(Debug, Clone, Copy)]
pub struct ColumnView<'a> {
    pub perf_index: usize,
    /// Score index of the first row.
    pub score_start: usize,
    pub cost: &'a [f64],
    pub tempo: &'a [f64],
    pub path_len: &'a [u32],
    pub direction: &'a [Direction],
}

impl ColumnView<'_> {
    pub fn rows(&self) -> Range<usize> {
        self.score_start..self.score_start + self.cost.len()
    }
}

/// A single tracking session over one score.
///
/// Single-owner state machine: feed notes in onset order with [`step`] and
/// read the latest position with [`current_position`].
///
/// [`step`]: Tracker::step
/// [`current_position`]: Tracker::current_position
#[derive(Debug, Clone)]
pub struct Tracker<'s> {
    score: &'s ScoreSequence,
    cfg: TrackerConfig,
    window_start: usize,
    prev: Column,
    cur: Column,
    prev_note: Option<PerformanceNote>,
    perf_count: usize,
    last_match: Option<MatchEvent>,
    cells_total: u64,
    cells_last_step: usize,
}

impl<'s> Tracker<'s> {
    pub fn new(score: &'s ScoreSequence, cfg: TrackerConfig) -> Result<Self> {
        if score.is_empty() {
            return Err(Error::EmptyScore);
        }
        cfg.validate()?;
        Ok(Tracker {
            score,
            cfg,
            window_start: 0,
            prev: Column::default(),
            cur: Column::default(),
            prev_note: None,
            perf_count: 0,
            last_match: None,
            cells_total: 0,
            cells_last_step: 0,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn score(&self) -> &'s ScoreSequence {
        self.score
    }

    /// Score rows the next column will cover.
    pub fn window(&self) -> Range<usize> {
        self.window_start..(self.window_start + self.cfg.w).min(self.score.len())
    }

    pub fn window_start(&self) -> usize {
        self.window_start
    }

    /// Number of performed notes consumed so far.
    pub fn perf_count(&self) -> usize {
        self.perf_count
    }

    pub fn current_position(&self) -> Option<MatchEvent> {
        self.last_match
    }

    /// The column computed by the last step, if any.
    pub fn column(&self) -> Option<ColumnView<'_>> {
        if self.perf_count == 0 {
            return None;
        }
        Some(ColumnView {
            perf_index: self.perf_count - 1,
            score_start: self.cur.start,
            cost: &self.cur.cost,
            tempo: &self.cur.tempo,
            path_len: &self.cur.path_len,
            direction: &self.cur.dir,
        })
    }

    /// Cells updated by the last step.
    pub fn cells_last_step(&self) -> usize {
        self.cells_last_step
    }

    pub fn cells_total(&self) -> u64 {
        self.cells_total
    }

    /// Consumes one performed note and returns the resulting match.
    pub fn step(&mut self, note: PerformanceNote) -> Result<MatchEvent> {
        let note = match self.prev_note {
            Some(prev) if note.onset_s() < prev.onset_s() => {
                if prev.onset_s() - note.onset_s() > ONSET_REGRESSION_TOLERANCE_S {
                    return Err(Error::OutOfOrderInput {
                        onset_s: note.onset_s(),
                        prev_s: prev.onset_s(),
                    });
                }
                note.with_onset(prev.onset_s())
            }
            _ => note,
        };
        if let Some(last) = self.last_match {
            if last.score_index + 1 == self.score.len()
                && note.onset_s() - last.perf_onset_s > self.cfg.end_gap_s
            {
                return Err(Error::SessionEnded);
            }
        }

        std::mem::swap(&mut self.prev, &mut self.cur);
        let rows = self.window();
        self.cur.reset(rows.start);
        for i in rows.clone() {
            self.fill_cell(i, &note);
        }
        self.cells_last_step = rows.len();
        self.cells_total += rows.len() as u64;

        let best = self.select_border();
        let event = MatchEvent {
            score_index: best,
            perf_index: self.perf_count,
            perf_onset_s: note.onset_s(),
            tempo: TempoEstimate::from_spq_unchecked(self.cur.tempo[best - self.cur.start]),
        };

        self.perf_count += 1;
        self.prev_note = Some(note);
        self.last_match = Some(event);
        self.recenter(best);
        Ok(event)
    }

    fn fill_cell(&mut self, i: usize, note: &PerformanceNote) {
        let score = self.score;
        let cfg = &self.cfg;
        let a_i = &score[i];
        let mut best: Option<(f64, f64, u32, Direction)> = None;
        let mut consider = |cost: f64, tempo: f64, len: u32, dir: Direction| {
            if best.is_none_or(|(c, ..)| cost < c) {
                best = Some((cost, tempo, len, dir));
            }
        };

        // Evaluation order doubles as the tie-break: diagonal, score, performance.
        if let (Some(prev_note), true) = (self.prev_note.as_ref(), i > 0) {
            if let Some((ac, t, pl)) = self.prev.get(i - 1) {
                let r = pairwise_distance(
                    a_i,
                    &score[i - 1],
                    note,
                    prev_note,
                    TempoEstimate::from_spq_unchecked(t),
                    cfg,
                );
                consider(cfg.dw1 * r.distance + ac, r.tempo.spq(), pl + 1, Direction::Diagonal);
            }
        }
        if i > self.cur.start {
            let k = i - 1 - self.cur.start;
            let (ac, t, pl) = (self.cur.cost[k], self.cur.tempo[k], self.cur.path_len[k]);
            let r = pairwise_distance(
                a_i,
                &score[i - 1],
                note,
                note,
                TempoEstimate::from_spq_unchecked(t),
                cfg,
            );
            consider(cfg.dw0 * r.distance + ac, r.tempo.spq(), pl + 1, Direction::Score);
        }
        if let Some(prev_note) = self.prev_note.as_ref() {
            if let Some((ac, t, pl)) = self.prev.get(i) {
                let r = pairwise_distance(
                    a_i,
                    a_i,
                    note,
                    prev_note,
                    TempoEstimate::from_spq_unchecked(t),
                    cfg,
                );
                consider(cfg.dw2 * r.distance + ac, r.tempo.spq(), pl + 1, Direction::Performance);
            }
        }
        if self.perf_count == 0 && i == 0 {
            // Virtual predecessor: same score onset, same note, so only the
            // pitch error contributes.
            let r = pairwise_distance(a_i, a_i, note, note, cfg.t_init, cfg);
            consider(cfg.dw1 * r.distance, r.tempo.spq(), 1, Direction::Origin);
        }

        let (cost, tempo, len, dir) = best.unwrap_or_else(|| {
            debug_assert!(false, "cell ({i}, {}) has no predecessor", self.perf_count);
            (f64::INFINITY, cfg.t_init.spq(), 1, Direction::Origin)
        });
        self.cur.push(cost, tempo, len, dir);
    }

    /// Row with minimal normalized cost; ties go to the later row.
    fn select_border(&self) -> usize {
        let mut best_row = self.cur.start;
        let mut best_norm = f64::INFINITY;
        for (k, (&cost, &len)) in self.cur.cost.iter().zip(&self.cur.path_len).enumerate() {
            let norm = cost / len as f64;
            if norm <= best_norm {
                best_norm = norm;
                best_row = self.cur.start + k;
            }
        }
        best_row
    }

    fn recenter(&mut self, matched: usize) {
        let max_start = self.score.len().saturating_sub(self.cfg.w);
        let target = matched.saturating_sub(self.cfg.w / 2).min(max_start);
        self.window_start = self.window_start.max(target);
    }

    /// Score position (beats) predicted `lookahead_s` seconds past the last
    /// matched note, clipped to the score's beat range.
    pub fn extrapolate_position(&self, lookahead_s: f64) -> Result<f64> {
        let last = self.last_match.ok_or(Error::NoMatchYet)?;
        if !(lookahead_s.is_finite() && lookahead_s >= 0.0) {
            return Err(Error::Validation(format!(
                "lookahead {lookahead_s} s must be finite and >= 0"
            )));
        }
        let beats = self.score[last.score_index].onset_b() + lookahead_s / last.tempo.spq();
        Ok(beats.clamp(self.score.first_beat(), self.score.last_beat()))
    }
}

/// Result of running a tracker over a whole note sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracking {
    pub matches: Vec<MatchEvent>,
    /// Index of the first note refused with [`Error::SessionEnded`].
    pub ended_at: Option<usize>,
}

/// Tracks every note in order. A session end stops tracking without error;
/// any other error aborts.
pub fn track(score: &ScoreSequence, notes: &[PerformanceNote], cfg: TrackerConfig) -> Result<Tracking> {
    let mut tracker = Tracker::new(score, cfg)?;
    let mut matches = Vec::with_capacity(notes.len());
    for (k, note) in notes.iter().enumerate() {
        match tracker.step(*note) {
            Ok(event) => matches.push(event),
            Err(Error::SessionEnded) => {
                return Ok(Tracking {
                    matches,
                    ended_at: Some(k),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Tracking {
        matches,
        ended_at: None,
    })
}
