use thiserror::Error;

/// Errors produced anywhere in the tracking pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("score is empty")]
    EmptyScore,
    #[error("score onsets must be strictly increasing (index {index}: {prev} -> {next} beats)")]
    NonIncreasingOnsets { index: usize, prev: f64, next: f64 },
    #[error("score onset {index} has an empty pitch set")]
    EmptyPitchSet { index: usize },
    #[error("MIDI pitch {0} outside [0, 127]")]
    InvalidPitch(i64),
    #[error("invalid onset {0}: must be finite and >= 0")]
    InvalidOnset(f64),
    #[error("performance onsets must be non-decreasing (index {index}: {prev} -> {next} s)")]
    DecreasingPerformance { index: usize, prev: f64, next: f64 },
    #[error("invalid tracker configuration: {0}")]
    InvalidConfig(String),

    #[error("note onset {onset_s} s precedes previous onset {prev_s} s")]
    OutOfOrderInput { onset_s: f64, prev_s: f64 },
    #[error("tracking session ended: score exhausted")]
    SessionEnded,
    #[error("no match has been emitted yet")]
    NoMatchYet,
    #[error("match trace is empty")]
    NoMatches,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("MIDI error: {0}")]
    Midi(String),
    #[error("SMPTE time division is not supported")]
    UnsupportedDivision,
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },

    #[error("degenerate tempo curve: {0}")]
    DegenerateTempoCurve(String),
    #[error("rate {0} outside [0, 1]")]
    InvalidRate(f64),
    #[error("note sink closed")]
    SinkClosed,
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            msg: err.to_string(),
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
