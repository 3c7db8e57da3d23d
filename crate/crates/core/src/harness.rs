//! Dataset evaluation and parameter grids over manifests of pieces.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{strip_comment, TrackerConfig};
use crate::error::{Error, Result};
use crate::eval::{dataset_report, piece_report, predicted_times, DatasetSummary, PieceReport};
use crate::ingest::{load_alignment, load_performance, load_score, GroundTruthAlignment};
use crate::model::{PerformanceStream, ScoreSequence};
use crate::tracker::track;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub score: PathBuf,
    pub perf: PathBuf,
    pub align: PathBuf,
}

/// Parses `score<TAB>perf<TAB>align` lines; relative paths resolve against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [score, perf, align] = fields[..] else {
            return Err(Error::parse(n + 1, "expected score<TAB>perf<TAB>align"));
        };
        entries.push(ManifestEntry {
            score: base.join(score),
            perf: base.join(perf),
            align: base.join(align),
        });
    }
    Ok(entries)
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PieceData {
    pub score: ScoreSequence,
    pub perf: PerformanceStream,
    pub gt: GroundTruthAlignment,
}

/// A named piece; `data` holds the load failure for unreadable pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub name: String,
    pub data: Result<PieceData>,
}

impl Piece {
    pub fn load(entry: &ManifestEntry) -> Piece {
        let data = (|| {
            Ok(PieceData {
                score: load_score(&entry.score)?,
                perf: load_performance(&entry.perf)?,
                gt: load_alignment(&entry.align)?,
            })
        })();
        Piece {
            name: entry.perf.display().to_string(),
            data,
        }
    }
}

/// Tracks one piece without pacing and scores it.
pub fn evaluate_piece(data: &PieceData, cfg: &TrackerConfig) -> Result<PieceReport> {
    let tracking = track(&data.score, data.perf.notes(), *cfg)?;
    let predicted = predicted_times(&tracking.matches, &data.score, &data.gt)?;
    Ok(piece_report(&predicted, &data.gt))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceEntry {
    pub name: String,
    /// `"ok"` or `"error"`.
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub onsets: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lost: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_error_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantile_pcts: Option<[f64; 5]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// Aggregates over the pieces that could be evaluated.
    pub summary: DatasetSummary,
    pub pieces: Vec<PieceEntry>,
}

/// Evaluates all pieces in parallel; output keeps input order. Pieces that
/// fail to load or track are listed as errors and left out of the summary.
pub fn evaluate(pieces: &[Piece], cfg: &TrackerConfig) -> EvalReport {
    let results: Vec<Result<PieceReport>> = pieces
        .par_iter()
        .map(|p| match &p.data {
            Ok(data) => evaluate_piece(data, cfg),
            Err(e) => Err(e.clone()),
        })
        .collect();

    let reports: Vec<PieceReport> = results.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
    let entries = pieces
        .iter()
        .zip(&results)
        .map(|(p, r)| match r {
            Ok(rep) => PieceEntry {
                name: p.name.clone(),
                status: "ok",
                onsets: Some(rep.errors_s.len()),
                lost: Some(rep.lost),
                max_error_s: Some(rep.errors_s.iter().copied().fold(0.0, f64::max)),
                quantile_pcts: Some(rep.quantile_pcts),
                error: None,
            },
            Err(e) => PieceEntry {
                name: p.name.clone(),
                status: "error",
                onsets: None,
                lost: None,
                max_error_s: None,
                quantile_pcts: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    EvalReport {
        summary: dataset_report(&reports),
        pieces: entries,
    }
}

/// Parameter axes, each `key=v1,v2,...`, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    pub axes: Vec<(String, Vec<String>)>,
}

impl ParamGrid {
    pub fn parse(text: &str) -> Result<Self> {
        let mut axes = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (key, values) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(n + 1, format!("expected key=v1,v2,..., got '{line}'")))?;
            let values: Vec<String> = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(String::from)
                .collect();
            if values.is_empty() {
                return Err(Error::Usage(format!("grid axis '{}' has no values", key.trim())));
            }
            axes.push((key.trim().to_string(), values));
        }
        if axes.is_empty() {
            return Err(Error::Usage("grid has no axes".into()));
        }
        Ok(ParamGrid { axes })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ParamGrid::parse(&text)
    }

    /// Cartesian product over `base`, first axis outermost. Each item is the
    /// column label and its validated configuration.
    pub fn configs(&self, base: &TrackerConfig) -> Result<Vec<(String, TrackerConfig)>> {
        let mut out = vec![(Vec::<String>::new(), *base)];
        for (key, values) in &self.axes {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for (label, cfg) in &out {
                for v in values {
                    let mut cfg = *cfg;
                    cfg.set(key, v)?;
                    let mut label = label.clone();
                    label.push(format!("{key}={v}"));
                    next.push((label, cfg));
                }
            }
            out = next;
        }
        out.into_iter()
            .map(|(label, cfg)| {
                cfg.validate()?;
                Ok((label.join(","), cfg))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridColumn {
    pub label: String,
    pub config: TrackerConfig,
    pub summary: DatasetSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub columns: Vec<GridColumn>,
}

pub const METRIC_ROWS: [&str; 6] = ["robustness", "le_25ms", "le_50ms", "le_100ms", "le_250ms", "le_500ms"];

impl GridReport {
    /// One column per configuration, one row per metric.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric");
        for col in &self.columns {
            out.push('\t');
            out.push_str(&col.label);
        }
        out.push('\n');
        for (row, name) in METRIC_ROWS.iter().enumerate() {
            out.push_str(name);
            for col in &self.columns {
                let value = if row == 0 {
                    Some(col.summary.robustness)
                } else {
                    col.summary.precision.map(|p| p[row - 1])
                };
                match value {
                    Some(v) => {
                        let _ = write!(out, "\t{v:.2}");
                    }
                    None => out.push_str("\t-"),
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn run_grid(pieces: &[Piece], grid: &ParamGrid, base: &TrackerConfig) -> Result<GridReport> {
    let columns = grid
        .configs(base)?
        .into_iter()
        .map(|(label, config)| GridColumn {
            label,
            summary: evaluate(pieces, &config).summary,
            config,
        })
        .collect();
    Ok(GridReport { columns })
}
