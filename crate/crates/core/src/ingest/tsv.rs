//! Tab-separated fixture formats. One record per line, `#` starts a comment.
//!
//! ```text
//! score:        beats<TAB>pitch[,pitch...]
//! performance:  seconds<TAB>pitch
//! alignment:    beats<TAB>seconds
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{group_score_notes, GroundTruthAlignment};
use crate::config::strip_comment;
use crate::error::{Error, Result};
use crate::model::{PerformanceNote, PerformanceStream, ScoreSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsvKind {
    Score,
    Performance,
    Alignment,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TsvData {
    Score(ScoreSequence),
    Performance(PerformanceStream),
    Alignment(GroundTruthAlignment),
}

/// Yields `(line number, [field0, field1])` for every record line.
fn records(text: &str) -> impl Iterator<Item = Result<(usize, [&str; 2])>> {
    text.lines().enumerate().filter_map(|(n, raw)| {
        let line = strip_comment(raw);
        if line.is_empty() {
            return None;
        }
        let mut fields = line.split('\t').map(str::trim);
        Some(match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => Ok((n + 1, [a, b])),
            _ => Err(Error::parse(n + 1, format!("expected 2 tab-separated fields, got '{line}'"))),
        })
    })
}

fn number(line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("invalid number '{field}'")))
}

fn pitch(line: usize, field: &str) -> Result<u8> {
    field
        .parse::<u8>()
        .ok()
        .filter(|&p| p <= 127)
        .ok_or_else(|| Error::parse(line, format!("invalid MIDI pitch '{field}'")))
}

pub fn parse_score_tsv(text: &str) -> Result<ScoreSequence> {
    let mut notes = Vec::new();
    for rec in records(text) {
        let (line, [beats, pitches]) = rec?;
        let beats = number(line, beats)?;
        if beats < 0.0 {
            return Err(Error::parse(line, "negative onset"));
        }
        for p in pitches.split(',') {
            notes.push((beats, pitch(line, p.trim())?));
        }
    }
    group_score_notes(notes, 0.0)
}

pub fn parse_performance_tsv(text: &str) -> Result<PerformanceStream> {
    let mut notes = Vec::new();
    for rec in records(text) {
        let (line, [seconds, p]) = rec?;
        let note = PerformanceNote::new(pitch(line, p)?, number(line, seconds)?)
            .map_err(|e| Error::parse(line, e.to_string()))?;
        notes.push(note);
    }
    PerformanceStream::new(notes).map_err(|e| Error::Validation(e.to_string()))
}

pub fn parse_alignment_tsv(text: &str) -> Result<GroundTruthAlignment> {
    let mut pairs = Vec::new();
    for rec in records(text) {
        let (line, [beats, seconds]) = rec?;
        pairs.push((number(line, beats)?, number(line, seconds)?));
    }
    GroundTruthAlignment::new(pairs)
}

pub fn parse_tsv(text: &str, kind: TsvKind) -> Result<TsvData> {
    Ok(match kind {
        TsvKind::Score => TsvData::Score(parse_score_tsv(text)?),
        TsvKind::Performance => TsvData::Performance(parse_performance_tsv(text)?),
        TsvKind::Alignment => TsvData::Alignment(parse_alignment_tsv(text)?),
    })
}

pub fn load_tsv(path: &Path, kind: TsvKind) -> Result<TsvData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tsv(&text, kind)
}

pub fn score_to_tsv(score: &ScoreSequence) -> String {
    let mut out = String::new();
    for onset in score.onsets() {
        let pitches: Vec<String> = onset.pitches().iter().map(|p| p.to_string()).collect();
        let _ = writeln!(out, "{:?}\t{}", onset.onset_b(), pitches.join(","));
    }
    out
}

pub fn performance_to_tsv(perf: &PerformanceStream) -> String {
    let mut out = String::new();
    for note in perf.notes() {
        let _ = writeln!(out, "{:?}\t{}", note.onset_s(), note.pitch());
    }
    out
}

pub fn alignment_to_tsv(gt: &GroundTruthAlignment) -> String {
    let mut out = String::new();
    for (beats, seconds) in gt.pairs() {
        let _ = writeln!(out, "{beats:?}\t{seconds:?}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn score_fixture() {
        let score = parse_score_tsv("0.0\t60,64\n1.0\t67").unwrap();
        assert_eq!(score.len(), 2);
        assert_eq!(score[0].pitches().iter().collect::<Vec<_>>(), vec![60, 64]);
        assert_eq!(score[0].onset_b(), 0.0);
        assert_eq!(score[1].pitches().iter().collect::<Vec<_>>(), vec![67]);
        assert_eq!(score[1].onset_b(), 1.0);
    }

    #[test]
    fn score_lines_in_any_order_with_repeats() {
        let score = parse_score_tsv("# header\n1.0\t67\n0.0\t64\n0.0\t60\n").unwrap();
        assert_eq!(score_to_tsv(&score), "0.0\t60,64\n1.0\t67\n");
    }

    #[test]
    fn performance_fixture() {
        let perf = parse_performance_tsv("0.0\t60").unwrap();
        assert_eq!(perf.notes(), &[PerformanceNote::new(60, 0.0).unwrap()]);
        assert!(matches!(
            parse_performance_tsv("1.0\t60\n0.5\t62"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn alignment_must_increase() {
        assert!(matches!(
            parse_alignment_tsv("1.0\t0.5\n0.5\t0.6"),
            Err(Error::Validation(_))
        ));
        assert_eq!(parse_alignment_tsv("0\t0\n2\t1.25").unwrap().pairs(), &[(0.0, 0.0), (2.0, 1.25)]);
    }

    #[test]
    fn parse_errors_carry_line() {
        assert_eq!(
            parse_score_tsv("0.0\t60\nbad\t62"),
            Err(Error::parse(2, "invalid number 'bad'"))
        );
        assert!(matches!(parse_score_tsv("0.0\t60\t1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_score_tsv("0.0\t200"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_performance_tsv("\n\n-1\t60"), Err(Error::Parse { line: 3, .. })));
        assert_eq!(parse_score_tsv("# only comments\n"), Err(Error::EmptyScore));
    }

    proptest! {
        #[test]
        fn score_round_trip(
            rows in proptest::collection::btree_map(0u32..10_000, proptest::collection::btree_set(0u8..128, 1..5), 1..40)
        ) {
            let mut text = String::from("# generated\n");
            for (tick, pitches) in &rows {
                let ps: Vec<String> = pitches.iter().map(|p| p.to_string()).collect();
                text.push_str(&format!("{:?}\t{}\n", *tick as f64 / 8.0, ps.join(",")));
            }
            let score = parse_score_tsv(&text).unwrap();
            prop_assert_eq!(score.len(), rows.len());
            let expected: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
            prop_assert_eq!(score_to_tsv(&score), expected);
        }

        #[test]
        fn performance_round_trip(mut onsets in proptest::collection::vec((0.0f64..500.0, 0u8..128), 0..50)) {
            onsets.sort_by(|a, b| a.0.total_cmp(&b.0));
            let notes = onsets.iter().map(|&(s, p)| PerformanceNote::new(p, s).unwrap()).collect();
            let perf = PerformanceStream::new(notes).unwrap();
            let text = performance_to_tsv(&perf);
            prop_assert_eq!(parse_performance_tsv(&text).unwrap(), perf);
        }
    }
}
