use std::path::Path;

use midly::{MetaMessage, MidiMessage, Smf, Timing, TrackEventKind};

use super::group_score_notes;
use crate::error::{Error, Result};
use crate::model::{PerformanceNote, PerformanceStream, ScoreSequence};

/// Microseconds per quarter note when a file carries no tempo event (120 qpm).
const DEFAULT_TEMPO_US: u32 = 500_000;
const PERCUSSION_CHANNEL: u8 = 9;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MidiOptions {
    /// Drop note-ons on MIDI channel 10.
    pub exclude_percussion: bool,
    /// Score onsets closer than this many beats are merged into one pitch set.
    pub merge_epsilon_beats: f64,
}

struct RawMidi {
    ticks_per_quarter: u32,
    /// `(absolute tick, pitch)` of every sounding note-on, all tracks merged.
    notes: Vec<(u64, u8)>,
    /// `(absolute tick, microseconds per quarter)`.
    tempos: Vec<(u64, u32)>,
}

fn read(bytes: &[u8], opts: &MidiOptions) -> Result<RawMidi> {
    let smf = Smf::parse(bytes).map_err(|e| Error::Midi(e.to_string()))?;
    let ticks_per_quarter = match smf.header.timing {
        Timing::Metrical(tpq) if tpq.as_int() > 0 => tpq.as_int() as u32,
        Timing::Metrical(_) => return Err(Error::Midi("division of 0 ticks per quarter".into())),
        Timing::Timecode(..) => return Err(Error::UnsupportedDivision),
    };
    let mut notes = Vec::new();
    let mut tempos = Vec::new();
    for track in &smf.tracks {
        let mut tick = 0u64;
        for event in track {
            tick += event.delta.as_int() as u64;
            match event.kind {
                TrackEventKind::Midi {
                    channel,
                    message: MidiMessage::NoteOn { key, vel },
                } if vel.as_int() > 0 => {
                    if !(opts.exclude_percussion && channel.as_int() == PERCUSSION_CHANNEL) {
                        notes.push((tick, key.as_int()));
                    }
                }
                TrackEventKind::Meta(MetaMessage::Tempo(us)) => tempos.push((tick, us.as_int())),
                _ => {}
            }
        }
    }
    tempos.sort_by_key(|&(tick, _)| tick);
    Ok(RawMidi {
        ticks_per_quarter,
        notes,
        tempos,
    })
}

/// Parses a score: note-ons from all tracks, grouped into pitch sets by tick.
pub fn parse_score_midi(bytes: &[u8], opts: &MidiOptions) -> Result<ScoreSequence> {
    let raw = read(bytes, opts)?;
    let tpq = raw.ticks_per_quarter as f64;
    let notes = raw
        .notes
        .into_iter()
        .map(|(tick, pitch)| (tick as f64 / tpq, pitch))
        .collect();
    group_score_notes(notes, opts.merge_epsilon_beats)
}

/// Parses a performance: note-on times converted to seconds through the
/// tempo map, ordered by onset then pitch.
pub fn parse_performance_midi(bytes: &[u8], opts: &MidiOptions) -> Result<PerformanceStream> {
    let raw = read(bytes, opts)?;
    let tpq = raw.ticks_per_quarter as f64;

    // Tempo map segments: (start tick, start seconds, seconds per tick).
    let mut segments = vec![(0u64, 0.0f64, DEFAULT_TEMPO_US as f64 * 1e-6 / tpq)];
    for (tick, us) in raw.tempos {
        let (seg_tick, seg_sec, spt) = *segments.last().unwrap();
        let secs = seg_sec + (tick - seg_tick) as f64 * spt;
        let next = (tick, secs, us as f64 * 1e-6 / tpq);
        if tick == seg_tick {
            *segments.last_mut().unwrap() = next;
        } else {
            segments.push(next);
        }
    }
    let to_seconds = |tick: u64| {
        let k = segments.partition_point(|s| s.0 <= tick) - 1;
        let (seg_tick, seg_sec, spt) = segments[k];
        seg_sec + (tick - seg_tick) as f64 * spt
    };

    let mut notes = raw
        .notes
        .into_iter()
        .map(|(tick, pitch)| PerformanceNote::new(pitch, to_seconds(tick)))
        .collect::<Result<Vec<_>>>()?;
    notes.sort_by(|a, b| a.onset_s().total_cmp(&b.onset_s()).then(a.pitch().cmp(&b.pitch())));
    PerformanceStream::new(notes)
}

pub fn load_score_midi(path: &Path, opts: &MidiOptions) -> Result<ScoreSequence> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_score_midi(&bytes, opts)
}

pub fn load_performance_midi(path: &Path, opts: &MidiOptions) -> Result<PerformanceStream> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_performance_midi(&bytes, opts)
}
