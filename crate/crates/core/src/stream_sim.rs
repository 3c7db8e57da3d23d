//! Timed note feeds and synthetic performances.

use std::sync::mpsc::{Sender, SyncSender};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ingest::GroundTruthAlignment;
use crate::model::{PerformanceNote, PerformanceStream, PitchSet, ScoreOnset, ScoreSequence};

/// Receives notes from [`replay`].
pub trait NoteSink {
    fn deliver(&mut self, note: PerformanceNote) -> Result<()>;
}

impl<F> NoteSink for F
where
    F: FnMut(PerformanceNote) -> Result<()>,
{
    fn deliver(&mut self, note: PerformanceNote) -> Result<()> {
        self(note)
    }
}

impl NoteSink for Sender<PerformanceNote> {
    fn deliver(&mut self, note: PerformanceNote) -> Result<()> {
        self.send(note).map_err(|_| Error::SinkClosed)
    }
}

impl NoteSink for SyncSender<PerformanceNote> {
    fn deliver(&mut self, note: PerformanceNote) -> Result<()> {
        self.send(note).map_err(|_| Error::SinkClosed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pacing {
    /// Sleep so deliveries follow the performance's inter-onset gaps.
    Realtime,
    /// Deliver everything immediately.
    Accelerated,
}

/// Feeds `perf` into `sink` in stream order. Realtime pacing measures gaps
/// from the first note, which is delivered at once.
pub fn replay<S: NoteSink + ?Sized>(perf: &PerformanceStream, pacing: Pacing, sink: &mut S) -> Result<()> {
    let Some(first) = perf.notes().first() else {
        return Ok(());
    };
    let origin = first.onset_s();
    let start = Instant::now();
    for note in perf.notes() {
        if pacing == Pacing::Realtime {
            let due = start + Duration::from_secs_f64(note.onset_s() - origin);
            let now = Instant::now();
            if due > now {
                std::thread::sleep(due - now);
            }
        }
        sink.deliver(*note)?;
    }
    Ok(())
}

/// Piecewise-linear tempo (seconds per quarter) as a function of score beats,
/// held constant outside its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct TempoCurve {
    knots: Vec<(f64, f64)>,
}

impl TempoCurve {
    pub fn constant(spq: f64) -> Result<Self> {
        TempoCurve::new(vec![(0.0, spq)])
    }

    /// `knots` are `(beat, seconds per quarter)` with strictly increasing beats.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::DegenerateTempoCurve("no knots".into()));
        }
        for (k, &(beat, spq)) in knots.iter().enumerate() {
            if !beat.is_finite() || !(spq.is_finite() && spq > 0.0) {
                return Err(Error::DegenerateTempoCurve(format!(
                    "knot {k} ({beat}, {spq}) must be finite with a positive tempo"
                )));
            }
            if k > 0 && beat <= knots[k - 1].0 {
                return Err(Error::DegenerateTempoCurve(format!(
                    "knot beats must increase (knot {k})"
                )));
            }
        }
        Ok(TempoCurve { knots })
    }

    /// Parses `0.5` (constant) or `beat:spq,beat:spq,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let bad = |msg: String| Error::DegenerateTempoCurve(msg);
        if !spec.contains(':') {
            let v = spec.parse().map_err(|_| bad(format!("cannot parse '{spec}'")))?;
            return TempoCurve::constant(v);
        }
        let knots = spec
            .split(',')
            .map(|part| {
                let (b, v) = part
                    .split_once(':')
                    .ok_or_else(|| bad(format!("expected beat:spq, got '{part}'")))?;
                let b = b.trim().parse().map_err(|_| bad(format!("bad beat '{b}'")))?;
                let v = v.trim().parse().map_err(|_| bad(format!("bad tempo '{v}'")))?;
                Ok((b, v))
            })
            .collect::<Result<Vec<_>>>()?;
        TempoCurve::new(knots)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn spq_at(&self, beat: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if beat <= first.0 {
            return first.1;
        }
        if beat >= last.0 {
            return last.1;
        }
        let k = self.knots.partition_point(|&(b, _)| b <= beat);
        let (b0, v0) = self.knots[k - 1];
        let (b1, v1) = self.knots[k];
        v0 + (v1 - v0) * (beat - b0) / (b1 - b0)
    }

    /// Seconds elapsed between beat 0 and `beat`.
    pub fn seconds_at(&self, beat: f64) -> f64 {
        if self.knots.len() == 1 {
            return self.knots[0].1 * beat;
        }
        let (lo, hi, sign) = if beat >= 0.0 { (0.0, beat, 1.0) } else { (beat, 0.0, -1.0) };
        // Breakpoints of the integrand inside [lo, hi]; between two
        // consecutive breakpoints the tempo is linear, so the trapezoid is exact.
        let mut points = vec![lo];
        points.extend(self.knots.iter().map(|&(b, _)| b).filter(|&b| b > lo && b < hi));
        points.push(hi);
        let total: f64 = points
            .windows(2)
            .map(|p| (p[1] - p[0]) * (self.spq_at(p[0]) + self.spq_at(p[1])) / 2.0)
            .sum();
        sign * total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub tempo_curve: TempoCurve,
    pub jitter_sd_s: f64,
    pub chord_spread_sd_s: f64,
    pub insert_rate: f64,
    pub delete_rate: f64,
    pub seed: u64,
}

impl SynthParams {
    /// Noise-free rendering along `tempo_curve`.
    pub fn exact(tempo_curve: TempoCurve) -> Self {
        SynthParams {
            tempo_curve,
            jitter_sd_s: 0.0,
            chord_spread_sd_s: 0.0,
            insert_rate: 0.0,
            delete_rate: 0.0,
            seed: 0,
        }
    }
}

/// Lowest and highest pitch of inserted notes (piano range).
const INSERT_PITCHES: std::ops::RangeInclusive<u8> = 21..=108;

/// Renders `score` as a performance. Ground truth records the nominal
/// (noise-free) onset time of every score onset; inserted notes have none.
pub fn synthesize(score: &ScoreSequence, params: &SynthParams) -> Result<(PerformanceStream, GroundTruthAlignment)> {
    for rate in [params.insert_rate, params.delete_rate] {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidRate(rate));
        }
    }
    for sd in [params.jitter_sd_s, params.chord_spread_sd_s] {
        if !(sd.is_finite() && sd >= 0.0) {
            return Err(Error::Validation(format!("standard deviation {sd} must be >= 0")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let nominal: Vec<f64> = score
        .onsets()
        .iter()
        .map(|o| params.tempo_curve.seconds_at(o.onset_b()))
        .collect();
    if nominal.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::DegenerateTempoCurve("curve maps the score to negative time".into()));
    }
    let end = nominal.iter().copied().fold(0.0, f64::max);

    let mut notes = Vec::new();
    let mut inserts = 0usize;
    for (onset, &time) in score.onsets().iter().zip(&nominal) {
        for pitch in onset.pitches().iter() {
            let spread: f64 = rng.sample(StandardNormal);
            let jitter: f64 = rng.sample(StandardNormal);
            let keep = rng.random::<f64>() >= params.delete_rate;
            if rng.random::<f64>() < params.insert_rate {
                inserts += 1;
            }
            if keep {
                let t = time + params.chord_spread_sd_s * spread + params.jitter_sd_s * jitter;
                notes.push(PerformanceNote::new(pitch, t.max(0.0))?);
            }
        }
    }
    for _ in 0..inserts {
        let pitch = rng.random_range(INSERT_PITCHES);
        let t = rng.random::<f64>() * end;
        notes.push(PerformanceNote::new(pitch, t)?);
    }
    notes.sort_by(|a, b| a.onset_s().total_cmp(&b.onset_s()).then(a.pitch().cmp(&b.pitch())));

    let gt = score.onsets().iter().map(|o| o.onset_b()).zip(nominal).collect();
    Ok((PerformanceStream::new(notes)?, GroundTruthAlignment::new(gt)?))
}

/// Random piano-like score: a stepwise melody with occasional chords below it.
pub fn random_score(n_onsets: usize, seed: u64) -> Result<ScoreSequence> {
    const IOIS: [f64; 7] = [0.25, 0.5, 0.5, 0.5, 1.0, 1.0, 1.5];
    const CHORD_INTERVALS: [u8; 6] = [3, 4, 5, 7, 9, 12];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut melody: i32 = 72;
    let mut beat = 0.0;
    let mut onsets = Vec::with_capacity(n_onsets);
    for _ in 0..n_onsets {
        melody = (melody + rng.random_range(-4..=4)).clamp(60, 88);
        let mut pitches = PitchSet::empty();
        pitches.insert(melody as u8)?;
        let extra = match rng.random::<f64>() {
            x if x < 0.55 => 0,
            x if x < 0.8 => 1,
            x if x < 0.95 => 2,
            _ => 3,
        };
        let mut below = melody as u8;
        for _ in 0..extra {
            below = below.saturating_sub(CHORD_INTERVALS[rng.random_range(0..CHORD_INTERVALS.len())]);
            pitches.insert(below.max(21))?;
        }
        onsets.push(ScoreOnset::new(pitches, beat)?);
        beat += IOIS[rng.random_range(0..IOIS.len())];
    }
    ScoreSequence::new(onsets)
}
