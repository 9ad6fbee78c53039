//! Score composition and recommendation assembly.
//!
//! The four model scores are combined by a weighted sum,
//!
//! ```text
//! score(t) = w_track·M_track(t) + w_word·M_word(t)
//!          + w_album·M_album(t) + w_artist·M_artist(t)
//! ```
//!
//! and a fixed-length recommendation is assembled in three stages: album
//! completion (when the seeds are concentrated in few albums), the composed
//! ranking, and a popularity backfill that tops the list up to exactly `n`
//! tracks. Seed tracks are never recommended and the output contains no
//! duplicates.
//!
//! Context sets are deduplicated before scoring: a seed track, its album,
//! its artist, and each title word contribute once per playlist, mirroring
//! the membership semantics the indices were built with.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cooccur::{ContextKind, IndexSet, NormalizationScheme, ScoreVector};
use crate::corpus::{AlbumRef, ChallengeCategory, Corpus, EvalPlaylist, TrackRef};

#[derive(Debug, thiserror::Error)]
pub enum ComposeError {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error(
        "playlist {pid}: need {needed} recommendations but only {available} \
         non-seed tracks exist in the corpus"
    )]
    QuotaUnsatisfiable {
        pid: u64,
        needed: usize,
        available: usize,
    },
    #[error("weight profile has no entry for category {0}")]
    MissingCategory(ChallengeCategory),
    #[error("weight file {path}: {message}")]
    BadProfile { path: std::path::PathBuf, message: String },
}

/// Album-completion trigger: complete albums when
/// `|seeds| / |distinct seed albums| > m`. `Infinite` disables the stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ThresholdRepr", into = "ThresholdRepr")]
pub enum AlbumThreshold {
    Finite(u32),
    Infinite,
}

/// Serialized form: a number, or the string `"inf"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ThresholdRepr {
    Finite(u32),
    Name(String),
}

impl TryFrom<ThresholdRepr> for AlbumThreshold {
    type Error = String;

    fn try_from(repr: ThresholdRepr) -> Result<Self, String> {
        match repr {
            ThresholdRepr::Finite(m) => Ok(AlbumThreshold::Finite(m)),
            ThresholdRepr::Name(s) if s == "inf" => Ok(AlbumThreshold::Infinite),
            ThresholdRepr::Name(s) => Err(format!("bad album threshold {s:?}; want a number or \"inf\"")),
        }
    }
}

impl From<AlbumThreshold> for ThresholdRepr {
    fn from(t: AlbumThreshold) -> Self {
        match t {
            AlbumThreshold::Finite(m) => ThresholdRepr::Finite(m),
            AlbumThreshold::Infinite => ThresholdRepr::Name("inf".into()),
        }
    }
}

impl std::fmt::Display for AlbumThreshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlbumThreshold::Finite(m) => write!(f, "{m}"),
            AlbumThreshold::Infinite => write!(f, "inf"),
        }
    }
}

/// One column of the tuned-parameter table: the four model weights and the
/// album-completion threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionWeights {
    pub w_track: f64,
    pub w_word: f64,
    pub w_album: f64,
    pub w_artist: f64,
    pub album_threshold: AlbumThreshold,
}

impl Default for CompositionWeights {
    fn default() -> Self {
        Self {
            w_track: 0.0,
            w_word: 0.0,
            w_album: 0.0,
            w_artist: 0.0,
            album_threshold: AlbumThreshold::Infinite,
        }
    }
}

impl CompositionWeights {
    pub fn validate(&self) -> Result<(), ComposeError> {
        for (name, w) in [
            ("w_track", self.w_track),
            ("w_word", self.w_word),
            ("w_album", self.w_album),
            ("w_artist", self.w_artist),
        ] {
            if !w.is_finite() || w < 0.0 {
                return Err(ComposeError::InvalidWeights(format!(
                    "{name} = {w} (weights must be finite and non-negative)"
                )));
            }
        }
        Ok(())
    }
}

/// The four per-model score vectors for one playlist, in model order.
#[derive(Clone, Debug, Default)]
pub struct ModelScores {
    pub track: ScoreVector,
    pub word: ScoreVector,
    pub album: ScoreVector,
    pub artist: ScoreVector,
}

impl ModelScores {
    pub fn get(&self, kind: ContextKind) -> &ScoreVector {
        match kind {
            ContextKind::Track => &self.track,
            ContextKind::Word => &self.word,
            ContextKind::Album => &self.album,
            ContextKind::Artist => &self.artist,
        }
    }
}

/// The weighted sum of the model scores. Models are folded in fixed order
/// (track, word, album, artist) so float summation is deterministic; zero
/// entries are dropped from the result.
pub fn compose_scores(models: &ModelScores, weights: &CompositionWeights) -> ScoreVector {
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    let weighted = [
        (&models.track, weights.w_track),
        (&models.word, weights.w_word),
        (&models.album, weights.w_album),
        (&models.artist, weights.w_artist),
    ];
    for (scores, w) in weighted {
        if w == 0.0 {
            continue;
        }
        for &(t, s) in scores.iter() {
            *acc.entry(t.0).or_insert(0.0) += w * s;
        }
    }
    ScoreVector(
        acc.into_iter()
            .filter(|&(_, s)| s != 0.0)
            .map(|(t, s)| (TrackRef(t), s))
            .collect(),
    )
}

/// An exactly-`n`-track continuation for one playlist.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub pid: u64,
    pub tracks: Vec<TrackRef>,
}

/// Assembles recommendations against one training corpus and its index set.
pub struct Recommender<'a> {
    corpus: &'a Corpus,
    indices: &'a IndexSet,
    normalization: NormalizationScheme,
    n: usize,
    /// All tracks by (popularity desc, id asc).
    popularity_order: Vec<TrackRef>,
    /// Album id → member tracks by (popularity desc, id asc).
    album_tracks: Vec<Vec<TrackRef>>,
}

impl<'a> Recommender<'a> {
    pub fn new(
        corpus: &'a Corpus,
        indices: &'a IndexSet,
        normalization: NormalizationScheme,
        n: usize,
    ) -> Self {
        let popularity_order = crate::corpus::popularity_ranking(corpus);
        let mut album_tracks: Vec<Vec<TrackRef>> = vec![Vec::new(); corpus.albums.len()];
        for &t in &popularity_order {
            album_tracks[corpus.album_of(t).idx()].push(t);
        }
        Self {
            corpus,
            indices,
            normalization,
            n,
            popularity_order,
            album_tracks,
        }
    }

    pub fn quota(&self) -> usize {
        self.n
    }

    /// Scores the playlist under each of the four models. Context sets are
    /// deduplicated; models with an empty context yield empty scores.
    pub fn model_scores(&self, playlist: &EvalPlaylist) -> ModelScores {
        let seeds = dedup_ids(playlist.seed_tracks.iter().map(|t| t.0));
        let words = dedup_ids(playlist.title_tokens.iter().map(|w| w.0));
        let albums = dedup_ids(
            playlist
                .seed_tracks
                .iter()
                .map(|&t| self.corpus.album_of(t).0),
        );
        let artists = dedup_ids(
            playlist
                .seed_tracks
                .iter()
                .map(|&t| self.corpus.artist_of(t).0),
        );
        ModelScores {
            track: self.indices.track.score(&seeds, self.normalization),
            word: self.indices.word.score(&words, self.normalization),
            album: self.indices.album.score(&albums, self.normalization),
            artist: self.indices.artist.score(&artists, self.normalization),
        }
    }

    /// Builds the exactly-`n` continuation: album completion, then the
    /// composed ranking, then popularity backfill. Seeds are excluded and
    /// the output is duplicate-free; ties break by higher popularity, then
    /// lower track id.
    pub fn recommend(
        &self,
        playlist: &EvalPlaylist,
        weights: &CompositionWeights,
    ) -> Result<Recommendation, ComposeError> {
        weights.validate()?;

        let n_tracks = self.corpus.track_count();
        let mut taken = vec![false; n_tracks];
        let mut distinct_seeds = 0usize;
        for &t in &playlist.seed_tracks {
            if !taken[t.idx()] {
                taken[t.idx()] = true;
                distinct_seeds += 1;
            }
        }
        if n_tracks - distinct_seeds < self.n {
            return Err(ComposeError::QuotaUnsatisfiable {
                pid: playlist.pid,
                needed: self.n,
                available: n_tracks - distinct_seeds,
            });
        }

        let scores = compose_scores(&self.model_scores(playlist), weights);
        let mut result: Vec<TrackRef> = Vec::with_capacity(self.n);
        let take = |t: TrackRef, taken: &mut Vec<bool>, result: &mut Vec<TrackRef>| {
            if !taken[t.idx()] && result.len() < self.n {
                taken[t.idx()] = true;
                result.push(t);
            }
        };

        // Stage 1: album completion. Albums ordered by seed count (desc)
        // then album id; tracks within an album by popularity then id.
        if let AlbumThreshold::Finite(m) = weights.album_threshold {
            if !playlist.seed_tracks.is_empty() {
                let mut seed_albums: BTreeMap<AlbumRef, usize> = BTreeMap::new();
                let mut seen = vec![false; n_tracks];
                for &t in &playlist.seed_tracks {
                    if !seen[t.idx()] {
                        seen[t.idx()] = true;
                        *seed_albums.entry(self.corpus.album_of(t)).or_insert(0) += 1;
                    }
                }
                let ratio = playlist.seed_tracks.len() as f64 / seed_albums.len() as f64;
                if ratio > m as f64 {
                    let mut albums: Vec<(AlbumRef, usize)> = seed_albums.into_iter().collect();
                    albums.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
                    for (album, _) in albums {
                        for &t in &self.album_tracks[album.idx()] {
                            take(t, &mut taken, &mut result);
                        }
                    }
                }
            }
        }

        // Stage 2: the composed ranking, positives only.
        let mut ranked: Vec<(TrackRef, f64)> = scores
            .iter()
            .filter(|&&(t, s)| s > 0.0 && !taken[t.idx()])
            .copied()
            .collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.corpus.popularity(b.0).cmp(&self.corpus.popularity(a.0)))
                .then_with(|| a.0.cmp(&b.0))
        });
        for (t, _) in ranked {
            take(t, &mut taken, &mut result);
        }

        // Stage 3: popularity backfill up to exactly n.
        if result.len() < self.n {
            for &t in &self.popularity_order {
                take(t, &mut taken, &mut result);
                if result.len() == self.n {
                    break;
                }
            }
        }

        debug_assert_eq!(result.len(), self.n);
        Ok(Recommendation {
            pid: playlist.pid,
            tracks: result,
        })
    }
}

fn dedup_ids(ids: impl Iterator<Item = u32>) -> Vec<u32> {
    let mut v: Vec<u32> = ids.collect();
    v.sort_unstable();
    v.dedup();
    v
}

// ---------------------------------------------------------------------------
// Weight profiles

/// Tuned weights, either one global set or one set per challenge category.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WeightProfile {
    Global { weights: CompositionWeights },
    Local {
        categories: BTreeMap<ChallengeCategory, CompositionWeights>,
    },
}

impl WeightProfile {
    pub fn weights_for(&self, category: ChallengeCategory) -> Result<&CompositionWeights, ComposeError> {
        match self {
            WeightProfile::Global { weights } => Ok(weights),
            WeightProfile::Local { categories } => categories
                .get(&category)
                .ok_or(ComposeError::MissingCategory(category)),
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), ComposeError> {
        let file = ProfileFile {
            format: PROFILE_FORMAT.to_string(),
            profile: self.clone(),
        };
        let json = serde_json::to_string_pretty(&file).expect("profile serializes");
        std::fs::write(path, json).map_err(|e| ComposeError::BadProfile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &std::path::Path) -> Result<WeightProfile, ComposeError> {
        let bad = |message: String| ComposeError::BadProfile {
            path: path.to_path_buf(),
            message,
        };
        let bytes = std::fs::read(path).map_err(|e| bad(e.to_string()))?;
        let file: ProfileFile =
            serde_json::from_slice(&bytes).map_err(|e| bad(e.to_string()))?;
        if file.format != PROFILE_FORMAT {
            return Err(bad(format!(
                "unsupported format {:?}; want {PROFILE_FORMAT:?}",
                file.format
            )));
        }
        Ok(file.profile)
    }
}

const PROFILE_FORMAT: &str = "segue-weights-v1";

#[derive(Serialize, Deserialize)]
struct ProfileFile {
    format: String,
    profile: WeightProfile,
}

// ---------------------------------------------------------------------------
// Submission output

/// Writes the challenge submission CSV: a `team_info` header line followed
/// by one line per playlist (`pid, uri, uri, ...`).
pub fn write_submission<W: Write>(
    mut out: W,
    team_name: &str,
    contact: &str,
    recommendations: &[Recommendation],
    corpus: &Corpus,
) -> std::io::Result<()> {
    writeln!(out, "team_info,{team_name},{contact}")?;
    for rec in recommendations {
        write!(out, "{}", rec.pid)?;
        for &t in &rec.tracks {
            write!(out, ",{}", corpus.tracks.name(t.0))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
