//! Tracker tuning parameters and their flat `key = value` file format.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::TempoEstimate;

/// Keys accepted by [`TrackerConfig::set`], in canonical output order.
pub const CONFIG_KEYS: &[&str] = &[
    "w",
    "c",
    "dw0",
    "dw1",
    "dw2",
    "d",
    "t_init_spq",
    "tempo_min",
    "tempo_max",
    "faithful_line6",
    "end_gap_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackerConfig {
    /// Score window size, in score onsets.
    pub w: usize,
    /// Weight of the timing error in the pairwise distance.
    pub c: f64,
    /// Weight of a step in score direction.
    pub dw0: f64,
    /// Weight of a diagonal step.
    pub dw1: f64,
    /// Weight of a step in performance direction.
    pub dw2: f64,
    /// Tempo smoothing factor in (0, 1].
    pub d: f64,
    pub t_init: TempoEstimate,
    pub tempo_min: f64,
    pub tempo_max: f64,
    /// Use the tempo quotient with a summed numerator, `(b_j + b_pj) / ioi`,
    /// instead of the inter-onset difference. Only useful for comparison.
    pub faithful_line6: bool,
    /// Once the final score onset is matched, a note arriving more than this
    /// many seconds after that match ends the session.
    pub end_gap_s: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            w: 20,
            c: 2.0,
            dw0: 1.0,
            dw1: 1.0,
            dw2: 1.0,
            d: 0.1,
            t_init: TempoEstimate::from_spq_unchecked(0.5),
            tempo_min: 0.05,
            tempo_max: 5.0,
            faithful_line6: false,
            end_gap_s: 10.0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.w < 2 {
            return bad(format!("w = {} must be >= 2", self.w));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return bad(format!("c = {} must be >= 0", self.c));
        }
        for (name, v) in [("dw0", self.dw0), ("dw1", self.dw1), ("dw2", self.dw2)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} = {v} must be > 0"));
            }
        }
        if !(self.d > 0.0 && self.d <= 1.0) {
            return bad(format!("d = {} must lie in (0, 1]", self.d));
        }
        let t = self.t_init.spq();
        if !(self.tempo_min > 0.0 && self.tempo_min < t && t < self.tempo_max && self.tempo_max.is_finite())
        {
            return bad(format!(
                "need 0 < tempo_min ({}) < t_init ({t}) < tempo_max ({})",
                self.tempo_min, self.tempo_max
            ));
        }
        if self.end_gap_s.is_nan() || self.end_gap_s <= 0.0 {
            return bad(format!("end_gap_s = {} must be > 0", self.end_gap_s));
        }
        Ok(())
    }

    /// Sets one parameter from its textual value. `t_init` is accepted as an
    /// alias of `t_init_spq`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse '{value}'")))
        };
        match key {
            "w" => {
                self.w = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("w: cannot parse '{value}'")))?
            }
            "c" => self.c = num()?,
            "dw0" => self.dw0 = num()?,
            "dw1" => self.dw1 = num()?,
            "dw2" => self.dw2 = num()?,
            "d" => self.d = num()?,
            "t_init_spq" | "t_init" => self.t_init = TempoEstimate::new(num()?)?,
            "tempo_min" => self.tempo_min = num()?,
            "tempo_max" => self.tempo_max = num()?,
            "faithful_line6" => {
                self.faithful_line6 = value.parse().map_err(|_| {
                    Error::InvalidConfig(format!("faithful_line6: expected true/false, got '{value}'"))
                })?
            }
            "end_gap_s" => self.end_gap_s = num()?,
            other => return Err(Error::InvalidConfig(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses a config file body. Unlisted keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = TrackerConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(n + 1, format!("expected key = value, got '{line}'")))?;
            cfg.set(key.trim(), value)
                .map_err(|e| Error::parse(n + 1, e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrackerConfig::parse(&text)
    }

    pub fn to_text(&self) -> String {
        format!(
            "w = {}\nc = {:?}\ndw0 = {:?}\ndw1 = {:?}\ndw2 = {:?}\nd = {:?}\nt_init_spq = {:?}\n\
             tempo_min = {:?}\ntempo_max = {:?}\nfaithful_line6 = {}\nend_gap_s = {:?}\n",
            self.w,
            self.c,
            self.dw0,
            self.dw1,
            self.dw2,
            self.d,
            self.t_init.spq(),
            self.tempo_min,
            self.tempo_max,
            self.faithful_line6,
            self.end_gap_s
        )
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => line[..pos].trim(),
        None => line.trim(),
    }
}
