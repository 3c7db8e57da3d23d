#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symtrack::harness::{Piece, PieceData};
use symtrack::stream_sim::{random_score, synthesize, SynthParams, TempoCurve};
use symtrack::{PerformanceNote, ScoreSequence, TrackerConfig};

/// Full offline weighted DTW over the whole score/performance grid, written
/// independently of the tracker: its own metric, full matrices, no windows.
pub struct OfflineOracle {
    pub cost: Vec<Vec<f64>>,
    pub path_len: Vec<Vec<u32>>,
    pub tempo: Vec<Vec<f64>>,
}

#[allow(clippy::too_many_arguments)]
fn oracle_metric(
    score: &ScoreSequence,
    i: usize,
    i_prev: usize,
    notes: &[PerformanceNote],
    j: usize,
    j_prev: usize,
    t_prev: f64,
    cfg: &TrackerConfig,
) -> (f64, f64) {
    let a_cur = score[i].onset_b();
    let a_prev = score[i_prev].onset_b();
    let b_cur = notes[j].onset_s();
    let b_prev = notes[j_prev].onset_s();
    let e_p = if score[i].pitches().contains(notes[j].pitch()) { 0.0 } else { 1.0 };
    let e_t = ((b_prev + (a_cur - a_prev) * t_prev) - b_cur).abs();
    let t_c = if a_cur != a_prev {
        (b_cur - b_prev) / (a_cur - a_prev)
    } else {
        t_prev + b_cur - b_prev
    };
    let t_s = (t_c * cfg.d + (1.0 - cfg.d) * t_prev).clamp(cfg.tempo_min, cfg.tempo_max);
    (e_p + cfg.c * e_t, t_s)
}

impl OfflineOracle {
    pub fn run(score: &ScoreSequence, notes: &[PerformanceNote], cfg: &TrackerConfig) -> Self {
        let (n, m) = (score.len(), notes.len());
        let mut cost = vec![vec![f64::INFINITY; m]; n];
        let mut path_len = vec![vec![0u32; m]; n];
        let mut tempo = vec![vec![f64::NAN; m]; n];
        for j in 0..m {
            for i in 0..n {
                if i == 0 && j == 0 {
                    let (pd, t) = oracle_metric(score, 0, 0, notes, 0, 0, cfg.t_init.spq(), cfg);
                    cost[0][0] = cfg.dw1 * pd;
                    path_len[0][0] = 1;
                    tempo[0][0] = t;
                    continue;
                }
                // (weighted cost, tempo, length), candidates in tie-break order.
                let mut cands: Vec<(f64, f64, u32)> = Vec::new();
                if i > 0 && j > 0 {
                    let (pd, t) = oracle_metric(score, i, i - 1, notes, j, j - 1, tempo[i - 1][j - 1], cfg);
                    cands.push((cfg.dw1 * pd + cost[i - 1][j - 1], t, path_len[i - 1][j - 1] + 1));
                }
                if i > 0 {
                    let (pd, t) = oracle_metric(score, i, i - 1, notes, j, j, tempo[i - 1][j], cfg);
                    cands.push((cfg.dw0 * pd + cost[i - 1][j], t, path_len[i - 1][j] + 1));
                }
                if j > 0 {
                    let (pd, t) = oracle_metric(score, i, i, notes, j, j - 1, tempo[i][j - 1], cfg);
                    cands.push((cfg.dw2 * pd + cost[i][j - 1], t, path_len[i][j - 1] + 1));
                }
                let mut best = cands[0];
                for c in &cands[1..] {
                    if c.0 < best.0 {
                        best = *c;
                    }
                }
                cost[i][j] = best.0;
                tempo[i][j] = best.1;
                path_len[i][j] = best.2;
            }
        }
        OfflineOracle { cost, path_len, tempo }
    }
}

/// Performance notes for oracle checks: either a noisy rendering of the score
/// or unrelated random notes.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (ScoreSequence, Vec<PerformanceNote>) {
    let n = rng.random_range(1..=30);
    let score = random_score(n, rng.random()).unwrap();
    let max_notes = rng.random_range(1..=40usize);
    let notes: Vec<PerformanceNote> = if rng.random_bool(0.6) {
        let params = SynthParams {
            tempo_curve: TempoCurve::constant(rng.random_range(0.3..0.8)).unwrap(),
            jitter_sd_s: rng.random_range(0.0..0.05),
            chord_spread_sd_s: rng.random_range(0.0..0.03),
            insert_rate: rng.random_range(0.0..0.2),
            delete_rate: rng.random_range(0.0..0.2),
            seed: rng.random(),
        };
        let (perf, _) = synthesize(&score, &params).unwrap();
        perf.notes().iter().copied().take(max_notes).collect()
    } else {
        let mut t = 0.0;
        (0..max_notes)
            .map(|_| {
                t += rng.random_range(0.0..0.6);
                PerformanceNote::new(rng.random_range(40..90), t).unwrap()
            })
            .collect()
    };
    if notes.is_empty() {
        return (score, vec![PerformanceNote::new(60, 0.0).unwrap()]);
    }
    (score, notes)
}

/// Tempo curve with a knot every 16 beats, each within +-30 % of 0.5 s/quarter.
pub fn varying_tempo(rng: &mut ChaCha8Rng, beats: f64) -> TempoCurve {
    let mut knots = vec![(0.0, 0.5)];
    let mut b = 16.0;
    while b < beats + 16.0 {
        knots.push((b, 0.5 * rng.random_range(0.7..=1.3)));
        b += 16.0;
    }
    TempoCurve::new(knots).unwrap()
}

fn piece(name: String, score: ScoreSequence, params: &SynthParams) -> Piece {
    let (perf, gt) = synthesize(&score, params).unwrap();
    Piece {
        name,
        data: Ok(PieceData { score, perf, gt }),
    }
}

/// Zero-noise renderings at a constant 0.5 s/quarter.
pub fn clean_corpus(pieces: usize, onsets: usize) -> Vec<Piece> {
    (0..pieces)
        .map(|k| {
            let score = random_score(onsets, 1000 + k as u64).unwrap();
            let params = SynthParams::exact(TempoCurve::constant(0.5).unwrap());
            piece(format!("clean-{k:02}"), score, &params)
        })
        .collect()
}

/// Seeded noisy corpus: piecewise tempo +-30 %, 20 ms jitter, 10 ms chord
/// spread, 5 % insertions and deletions.
pub fn noisy_corpus(pieces: usize, onsets: usize, seed: u64) -> Vec<Piece> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pieces)
        .map(|k| {
            let score = random_score(onsets, rng.random()).unwrap();
            let params = SynthParams {
                tempo_curve: varying_tempo(&mut rng, score.last_beat()),
                jitter_sd_s: 0.020,
                chord_spread_sd_s: 0.010,
                insert_rate: 0.05,
                delete_rate: 0.05,
                seed: rng.random(),
            };
            piece(format!("noisy-{k:02}"), score, &params)
        })
        .collect()
}
