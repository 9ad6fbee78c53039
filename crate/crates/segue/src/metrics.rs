//! The three challenge ranking metrics and set-level evaluation.
//!
//! * **R-precision** — fraction of the `|G|` holdout slots matched within
//!   the first `|G|` recommendations. At track level a hit is an exact
//!   track match; at artist level a recommended track consumes one
//!   not-yet-used slot of its artist in the holdout artist multiset.
//!   Artist level is the reporting default.
//! * **NDCG** — `DCG / IDCG` with `DCG = rel_1 + Σ_{i≥2} rel_i/log2(i+1)`
//!   and `IDCG = 1 + Σ_{i=2}^{|G|} 1/log2(i+1)`; relevance is track-level.
//! * **CLICKS** — `floor((i*−1)/10)` for the 1-based position `i*` of the
//!   first relevant track; `51` when none of the 500 slots hits.
//!
//! All three require a non-empty ground truth. `evaluate_set` matches
//! predictions to ground truth by pid and aggregates per-category and
//! overall means into a results table.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compose::Recommendation;
use crate::corpus::{ArtistRef, ChallengeCategory, Corpus, EvalPlaylist, TrackRef};

/// The no-hit CLICKS value: 500 recommendation slots / 10 per refresh + 1.
pub const CLICKS_MISS: f64 = 51.0;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("empty ground truth{}", pid.map(|p| format!(" for playlist {p}")).unwrap_or_default())]
    EmptyGroundTruth { pid: Option<u64> },
    #[error(
        "prediction/ground-truth pid mismatch: missing {missing:?}, unexpected {unexpected:?}, \
         duplicated {duplicated:?}"
    )]
    PidMismatch {
        missing: Vec<u64>,
        unexpected: Vec<u64>,
        duplicated: Vec<u64>,
    },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// The holdout of one playlist: the distinct withheld tracks and, derived
/// from them, the multiset of their artists.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    tracks: BTreeSet<TrackRef>,
    /// One entry per distinct holdout track, sorted.
    artists: Vec<ArtistRef>,
}

impl GroundTruth {
    pub fn new(holdout: &[TrackRef], corpus: &Corpus) -> Result<Self, MetricsError> {
        let tracks: BTreeSet<TrackRef> = holdout.iter().copied().collect();
        let mut artists: Vec<ArtistRef> = tracks.iter().map(|&t| corpus.artist_of(t)).collect();
        artists.sort_unstable();
        Self::from_parts(tracks, artists)
    }

    /// Direct construction for tests and oracles; `artists` must hold one
    /// entry per distinct holdout track.
    pub fn from_parts(tracks: BTreeSet<TrackRef>, artists: Vec<ArtistRef>) -> Result<Self, MetricsError> {
        if tracks.is_empty() {
            return Err(MetricsError::EmptyGroundTruth { pid: None });
        }
        assert_eq!(tracks.len(), artists.len(), "one artist slot per holdout track");
        Ok(Self { tracks, artists })
    }

    /// `|G|`: the number of distinct holdout tracks.
    pub fn size(&self) -> usize {
        self.tracks.len()
    }

    pub fn contains(&self, t: TrackRef) -> bool {
        self.tracks.contains(&t)
    }
}

/// A recommendation list with per-position artists resolved.
#[derive(Clone, Debug)]
pub struct RankedList {
    pub tracks: Vec<TrackRef>,
    pub artists: Vec<ArtistRef>,
}

impl RankedList {
    pub fn from_corpus(tracks: &[TrackRef], corpus: &Corpus) -> Self {
        Self {
            tracks: tracks.to_vec(),
            artists: tracks.iter().map(|&t| corpus.artist_of(t)).collect(),
        }
    }
}

/// Which agreement level R-precision uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Track,
    Artist,
}

/// Fraction of the `|G|` slots matched within the first `|G|` positions.
/// Track level intersects sets; artist level consumes holdout-artist slots
/// per position (each slot at most once).
pub fn r_precision(gt: &GroundTruth, ranked: &RankedList, level: Level) -> f64 {
    let k = gt.size();
    let prefix = k.min(ranked.tracks.len());
    let hits = match level {
        Level::Track => {
            let seen: BTreeSet<TrackRef> = ranked.tracks[..prefix]
                .iter()
                .copied()
                .filter(|&t| gt.contains(t))
                .collect();
            seen.len()
        }
        Level::Artist => {
            let mut slots: HashMap<ArtistRef, usize> = HashMap::new();
            for &a in &gt.artists {
                *slots.entry(a).or_insert(0) += 1;
            }
            let mut hits = 0usize;
            for &a in &ranked.artists[..prefix] {
                if let Some(remaining) = slots.get_mut(&a) {
                    if *remaining > 0 {
                        *remaining -= 1;
                        hits += 1;
                    }
                }
            }
            hits
        }
    };
    hits as f64 / k as f64
}

/// `DCG / IDCG` with binary track-level relevance. `1/log2(i+1)` equals 1
/// at position 1, so a single accumulation covers the `rel_1` head term.
pub fn ndcg(gt: &GroundTruth, tracks: &[TrackRef]) -> f64 {
    let discount = |position: usize| 1.0 / ((position as f64) + 1.0).log2();
    let dcg: f64 = tracks
        .iter()
        .enumerate()
        .filter(|&(_, t)| gt.contains(*t))
        .map(|(i, _)| discount(i + 1))
        .sum();
    if dcg == 0.0 {
        return 0.0;
    }
    let idcg: f64 = (1..=gt.size()).map(discount).sum();
    dcg / idcg
}

/// Number of ten-track refreshes before the first relevant track;
/// [`CLICKS_MISS`] when the list contains none.
pub fn clicks(gt: &GroundTruth, tracks: &[TrackRef]) -> f64 {
    match tracks.iter().position(|&t| gt.contains(t)) {
        Some(zero_based) => (zero_based / 10) as f64,
        None => CLICKS_MISS,
    }
}

// ---------------------------------------------------------------------------
// Set-level evaluation

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaylistMetrics {
    pub pid: u64,
    pub category: ChallengeCategory,
    pub r_precision: f64,
    pub ndcg: f64,
    pub clicks: f64,
}

/// Mean metrics over one group of playlists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupMeans {
    pub count: usize,
    pub r_precision: f64,
    pub ndcg: f64,
    pub clicks: f64,
}

impl GroupMeans {
    fn of(rows: &[&PlaylistMetrics]) -> GroupMeans {
        let n = rows.len();
        if n == 0 {
            return GroupMeans::default();
        }
        let mean = |f: fn(&PlaylistMetrics) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n as f64;
        GroupMeans {
            count: n,
            r_precision: mean(|r| r.r_precision),
            ndcg: mean(|r| r.ndcg),
            clicks: mean(|r| r.clicks),
        }
    }
}

/// Per-playlist metrics plus per-category and overall means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Sorted by (category, pid).
    pub per_playlist: Vec<PlaylistMetrics>,
    pub per_category: BTreeMap<ChallengeCategory, GroupMeans>,
    pub overall: GroupMeans,
}

impl EvalReport {
    /// Re-aggregates the means from per-playlist rows (also used to verify
    /// dumped rows externally).
    pub fn from_rows(mut per_playlist: Vec<PlaylistMetrics>) -> EvalReport {
        per_playlist.sort_by_key(|r| (r.category, r.pid));
        let mut per_category = BTreeMap::new();
        for category in ChallengeCategory::ALL {
            let rows: Vec<&PlaylistMetrics> = per_playlist
                .iter()
                .filter(|r| r.category == category)
                .collect();
            if !rows.is_empty() {
                per_category.insert(category, GroupMeans::of(&rows));
            }
        }
        let all: Vec<&PlaylistMetrics> = per_playlist.iter().collect();
        let overall = GroupMeans::of(&all);
        EvalReport {
            per_playlist,
            per_category,
            overall,
        }
    }

    /// Renders the per-category results table, one row per challenge category.
    pub fn table_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<14} {:>6} {:>8} {:>8} {:>8}", "Category", "Count", "NDCG", "CLICKS", "RPREC");
        let mut row = |label: &str, m: &GroupMeans| {
            let _ = writeln!(
                out,
                "{label:<14} {:>6} {:>8.3} {:>8.3} {:>8.3}",
                m.count, m.ndcg, m.clicks, m.r_precision
            );
        };
        for category in ChallengeCategory::TABLE_ORDER {
            if let Some(m) = self.per_category.get(&category) {
                row(category.label(), m);
            }
        }
        row("Overall", &self.overall);
        out
    }

    /// Line-delimited per-playlist records for external re-aggregation.
    pub fn write_per_playlist_jsonl(&self, path: &Path) -> Result<(), MetricsError> {
        let io_err = |e: std::io::Error| MetricsError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let file = std::fs::File::create(path).map_err(io_err)?;
        let mut out = std::io::BufWriter::new(file);
        for row in &self.per_playlist {
            let line = serde_json::to_string(row).expect("metrics row serializes");
            writeln!(out, "{line}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    pub fn read_per_playlist_jsonl(path: &Path) -> Result<Vec<PlaylistMetrics>, MetricsError> {
        let io_err = |message: String| MetricsError::Io {
            path: path.to_path_buf(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| io_err(e.to_string()))?;
        text.lines()
            .enumerate()
            .map(|(i, line)| {
                serde_json::from_str(line).map_err(|e| io_err(format!("line {}: {e}", i + 1)))
            })
            .collect()
    }
}

/// Scores every prediction against its ground-truth playlist (matched by
/// pid) and aggregates. Any missing, unexpected, or duplicated pid is
/// fatal and reported by value.
pub fn evaluate_set(
    truths: &[EvalPlaylist],
    predictions: &[Recommendation],
    corpus: &Corpus,
    level: Level,
) -> Result<EvalReport, MetricsError> {
    let mut by_pid: HashMap<u64, &Recommendation> = HashMap::with_capacity(predictions.len());
    let mut duplicated: BTreeSet<u64> = BTreeSet::new();
    for p in predictions {
        if by_pid.insert(p.pid, p).is_some() {
            duplicated.insert(p.pid);
        }
    }
    let mut truth_pids: BTreeSet<u64> = BTreeSet::new();
    for t in truths {
        if !truth_pids.insert(t.pid) {
            duplicated.insert(t.pid);
        }
    }
    let missing: Vec<u64> = truth_pids
        .iter()
        .copied()
        .filter(|pid| !by_pid.contains_key(pid))
        .collect();
    let unexpected: Vec<u64> = {
        let mut v: Vec<u64> = by_pid
            .keys()
            .copied()
            .filter(|pid| !truth_pids.contains(pid))
            .collect();
        v.sort_unstable();
        v
    };
    if !missing.is_empty() || !unexpected.is_empty() || !duplicated.is_empty() {
        return Err(MetricsError::PidMismatch {
            missing,
            unexpected,
            duplicated: duplicated.into_iter().collect(),
        });
    }

    let rows: Result<Vec<PlaylistMetrics>, MetricsError> = truths
        .par_iter()
        .map(|truth| {
            let gt = GroundTruth::new(&truth.holdout_tracks, corpus).map_err(|_| {
                MetricsError::EmptyGroundTruth {
                    pid: Some(truth.pid),
                }
            })?;
            let rec = by_pid[&truth.pid];
            let ranked = RankedList::from_corpus(&rec.tracks, corpus);
            Ok(PlaylistMetrics {
                pid: truth.pid,
                category: truth.category,
                r_precision: r_precision(&gt, &ranked, level),
                ndcg: ndcg(&gt, &ranked.tracks),
                clicks: clicks(&gt, &ranked.tracks),
            })
        })
        .collect();
    Ok(EvalReport::from_rows(rows?))
}
