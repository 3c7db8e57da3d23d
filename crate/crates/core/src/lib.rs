//! Real-time score following on symbolic note streams.
//!
//! A [`Tracker`] aligns performed notes (pitch and onset in seconds) against a
//! score of pitch sets (onset in beats) with a windowed online time warping
//! whose cells each carry their own tempo estimate. Loaders read scores and
//! performances from MIDI or TSV, [`stream_sim`] replays and synthesizes
//! performances, and [`eval`] / [`harness`] score match traces against
//! ground-truth alignments.
//!
//! ```
//! use symtrack::{PerformanceNote, ScoreOnset, ScoreSequence, Tracker, TrackerConfig};
//!
//! let score = ScoreSequence::new(vec![
//!     ScoreOnset::from_pitches(&[60, 64], 0.0)?,
//!     ScoreOnset::from_pitches(&[67], 1.0)?,
//! ])?;
//! let mut tracker = Tracker::new(&score, TrackerConfig::default())?;
//! tracker.step(PerformanceNote::new(60, 0.0)?)?;
//! let event = tracker.step(PerformanceNote::new(67, 0.5)?)?;
//! assert_eq!(event.score_index, 1);
//! # Ok::<(), symtrack::Error>(())
//! ```

pub mod config;
pub mod distance;
pub mod error;
pub mod eval;
pub mod harness;
pub mod ingest;
pub mod model;
pub mod stream_sim;
pub mod tracker;

pub use config::TrackerConfig;
pub use distance::{pairwise_distance, PairwiseResult};
pub use error::{Error, Result};
pub use eval::{dataset_report, piece_report, predicted_times, DatasetSummary, PieceReport};
pub use ingest::GroundTruthAlignment;
pub use model::{
    validate_performance, validate_score, MatchEvent, PerformanceNote, PerformanceStream, PitchSet,
    ScoreOnset, ScoreSequence, TempoEstimate,
};
pub use tracker::{track, Direction, Tracker, Tracking};
