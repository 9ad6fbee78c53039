//! Corpus ingestion: playlist JSON slices in, dense-id entities out.
//!
//! String URIs (tracks, artists, albums) and title words are interned into
//! contiguous 0-based ids so the co-occurrence indices can use flat arrays.
//! This module also owns the evaluation-split machinery: carving a pid
//! range into the ten challenge categories with per-category quotas.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: playlist #{index}{pid}: missing required field \"{field}\"")]
    MissingField {
        path: PathBuf,
        index: usize,
        /// Formatted as " (pid N)" when the pid itself was present.
        pid: String,
        field: &'static str,
    },
    #[error("category {category}: needs {needed} eligible playlists, found {available}")]
    InsufficientEligible {
        category: ChallengeCategory,
        needed: usize,
        available: usize,
    },
    #[error("unknown challenge category label {label:?}")]
    UnknownCategory { label: String },
    #[error("challenge playlist pid {pid}: {reason}")]
    BadChallengePlaylist { pid: u64, reason: String },
    #[error("{path}:{line}: malformed split record: {message}")]
    BadSplitRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

// ---------------------------------------------------------------------------
// Entity ids

macro_rules! entity_ref {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn idx(self) -> usize {
                self.0 as usize
            }
        }
    };
}

entity_ref!(
    /// Dense 0-based id for a track URI.
    TrackRef
);
entity_ref!(
    /// Dense 0-based id for an artist URI.
    ArtistRef
);
entity_ref!(
    /// Dense 0-based id for an album URI.
    AlbumRef
);
entity_ref!(
    /// Dense 0-based id for a lowercase title token.
    WordRef
);

/// Bijective string ↔ dense-id table. Interning the same string twice
/// yields the same id; ids are contiguous from 0 in first-seen order.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Interner {
    names: Vec<String>,
    by_name: HashMap<String, u32>,
}

impl Interner {
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.by_name.get(name) {
            return id;
        }
        let id = u32::try_from(self.names.len()).expect("entity count exceeds u32");
        self.names.push(name.to_string());
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

impl From<Vec<String>> for Interner {
    fn from(names: Vec<String>) -> Self {
        let by_name = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        Self { names, by_name }
    }
}

impl From<Interner> for Vec<String> {
    fn from(interner: Interner) -> Self {
        interner.names
    }
}

// ---------------------------------------------------------------------------
// Core corpus types

/// Per-track metadata, indexed by `TrackRef`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackMeta {
    pub track: TrackRef,
    pub artist: ArtistRef,
    pub album: AlbumRef,
    /// Number of distinct playlists (in this corpus) containing the track.
    pub popularity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Playlist {
    pub pid: u64,
    /// Lowercased, punctuation-stripped title words, in title order.
    pub title_tokens: Vec<WordRef>,
    /// Tracks in playlist order; duplicates permitted (present in source data).
    pub tracks: Vec<TrackRef>,
}

/// A raw playlist as it appears in a source slice, before interning.
/// Shared by the JSON loader and the synthetic-corpus generator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SourcePlaylist {
    pub pid: u64,
    pub name: String,
    pub tracks: Vec<SourceTrack>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SourceTrack {
    pub track_uri: String,
    pub artist_uri: String,
    pub album_uri: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Corpus {
    pub tracks: Interner,
    pub artists: Interner,
    pub albums: Interner,
    pub words: Interner,
    /// Indexed by `TrackRef`.
    pub meta: Vec<TrackMeta>,
    pub playlists: Vec<Playlist>,
}

impl Corpus {
    /// Interns a batch of source playlists into a corpus. Playlist order is
    /// preserved; entity ids are assigned in first-seen order. A track URI
    /// seen with conflicting artist/album keeps its first-seen metadata.
    pub fn from_source(source: &[SourcePlaylist]) -> Corpus {
        let mut corpus = Corpus {
            tracks: Interner::default(),
            artists: Interner::default(),
            albums: Interner::default(),
            words: Interner::default(),
            meta: Vec::new(),
            playlists: Vec::with_capacity(source.len()),
        };
        for sp in source {
            let title_tokens = tokenize_title(&sp.name)
                .iter()
                .map(|w| WordRef(corpus.words.intern(w)))
                .collect();
            let mut tracks = Vec::with_capacity(sp.tracks.len());
            for st in &sp.tracks {
                let t = corpus.tracks.intern(&st.track_uri);
                if t as usize == corpus.meta.len() {
                    corpus.meta.push(TrackMeta {
                        track: TrackRef(t),
                        artist: ArtistRef(corpus.artists.intern(&st.artist_uri)),
                        album: AlbumRef(corpus.albums.intern(&st.album_uri)),
                        popularity: 0,
                    });
                }
                tracks.push(TrackRef(t));
            }
            corpus.playlists.push(Playlist {
                pid: sp.pid,
                title_tokens,
                tracks,
            });
        }
        corpus.recompute_popularity();
        corpus
    }

    fn recompute_popularity(&mut self) {
        for m in &mut self.meta {
            m.popularity = 0;
        }
        let mut distinct = Vec::new();
        for p in &self.playlists {
            distinct.clear();
            distinct.extend_from_slice(&p.tracks);
            distinct.sort_unstable();
            distinct.dedup();
            for &t in &distinct {
                self.meta[t.idx()].popularity += 1;
            }
        }
    }

    pub fn track_count(&self) -> usize {
        self.tracks.len()
    }

    pub fn playlist_count(&self) -> usize {
        self.playlists.len()
    }

    pub fn artist_of(&self, t: TrackRef) -> ArtistRef {
        self.meta[t.idx()].artist
    }

    pub fn album_of(&self, t: TrackRef) -> AlbumRef {
        self.meta[t.idx()].album
    }

    pub fn popularity(&self, t: TrackRef) -> u32 {
        self.meta[t.idx()].popularity
    }

    pub fn playlist_by_pid(&self, pid: u64) -> Option<&Playlist> {
        self.playlists.iter().find(|p| p.pid == pid)
    }

    /// A corpus containing only the playlists whose pid satisfies `keep`.
    /// Entity id spaces are shared with the parent; popularity is
    /// recomputed over the kept playlists (it must reflect the training
    /// data only, since it drives the backfill ranking).
    pub fn filtered_by_pid(&self, keep: impl Fn(u64) -> bool) -> Corpus {
        let mut out = Corpus {
            tracks: self.tracks.clone(),
            artists: self.artists.clone(),
            albums: self.albums.clone(),
            words: self.words.clone(),
            meta: self.meta.clone(),
            playlists: self
                .playlists
                .iter()
                .filter(|p| keep(p.pid))
                .cloned()
                .collect(),
        };
        out.recompute_popularity();
        out
    }

    /// Drops the tracks rejected by `keep` from every playlist (entity ids
    /// and metadata stay intact) and recomputes popularity. Used to cap the
    /// training vocabulary.
    pub fn retain_tracks(&mut self, keep: impl Fn(TrackRef) -> bool) {
        for p in &mut self.playlists {
            p.tracks.retain(|&t| keep(t));
        }
        self.recompute_popularity();
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let file = File::create(path).map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let artifact = CorpusArtifact {
            format: CORPUS_FORMAT.to_string(),
            corpus: self,
        };
        serde_json::to_writer(BufWriter::new(file), &artifact).map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            source: e.into(),
        })
    }

    pub fn load(path: &Path) -> Result<Corpus, CorpusError> {
        let file = File::open(path).map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let artifact: CorpusArtifactOwned =
            serde_json::from_reader(BufReader::new(file)).map_err(|e| CorpusError::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        if artifact.format != CORPUS_FORMAT {
            return Err(CorpusError::Parse {
                path: path.to_path_buf(),
                line: 1,
                column: 1,
                message: format!(
                    "unsupported corpus format {:?} (expected {CORPUS_FORMAT:?})",
                    artifact.format
                ),
            });
        }
        Ok(artifact.corpus)
    }
}

const CORPUS_FORMAT: &str = "segue-corpus-v1";

#[derive(Serialize)]
struct CorpusArtifact<'a> {
    format: String,
    corpus: &'a Corpus,
}

#[derive(Deserialize)]
struct CorpusArtifactOwned {
    format: String,
    corpus: Corpus,
}

// ---------------------------------------------------------------------------
// Loading JSON slices

#[derive(Deserialize)]
struct RawSlice {
    playlists: Option<Vec<RawPlaylist>>,
}

#[derive(Deserialize)]
struct RawPlaylist {
    pid: Option<u64>,
    name: Option<String>,
    category: Option<String>,
    tracks: Option<Vec<RawTrack>>,
}

#[derive(Deserialize)]
struct RawTrack {
    track_uri: Option<String>,
    artist_uri: Option<String>,
    album_uri: Option<String>,
}

fn parse_slice(path: &Path) -> Result<Vec<RawPlaylist>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let slice: RawSlice =
        serde_json::from_reader(BufReader::new(file)).map_err(|e| CorpusError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    slice.playlists.ok_or_else(|| CorpusError::MissingField {
        path: path.to_path_buf(),
        index: 0,
        pid: String::new(),
        field: "playlists",
    })
}

fn missing(path: &Path, index: usize, pid: Option<u64>, field: &'static str) -> CorpusError {
    CorpusError::MissingField {
        path: path.to_path_buf(),
        index,
        pid: pid.map(|p| format!(" (pid {p})")).unwrap_or_default(),
        field,
    }
}

/// Loads playlist JSON slice files into one corpus. Every playlist must carry
/// "pid", "name", and "tracks" (each with track/artist/album URIs);
/// playlist order follows file order, then in-file order.
pub fn load_corpus(paths: &[PathBuf]) -> Result<Corpus, CorpusError> {
    let mut source = Vec::new();
    for path in paths {
        for (index, raw) in parse_slice(path)?.into_iter().enumerate() {
            let pid = raw.pid.ok_or_else(|| missing(path, index, None, "pid"))?;
            let name = raw
                .name
                .ok_or_else(|| missing(path, index, Some(pid), "name"))?;
            let tracks = raw
                .tracks
                .ok_or_else(|| missing(path, index, Some(pid), "tracks"))?;
            let tracks = tracks
                .into_iter()
                .map(|t| {
                    Ok(SourceTrack {
                        track_uri: t
                            .track_uri
                            .ok_or_else(|| missing(path, index, Some(pid), "track_uri"))?,
                        artist_uri: t
                            .artist_uri
                            .ok_or_else(|| missing(path, index, Some(pid), "artist_uri"))?,
                        album_uri: t
                            .album_uri
                            .ok_or_else(|| missing(path, index, Some(pid), "album_uri"))?,
                    })
                })
                .collect::<Result<Vec<_>, CorpusError>>()?;
            source.push(SourcePlaylist { pid, name, tracks });
        }
    }
    Ok(Corpus::from_source(&source))
}

// ---------------------------------------------------------------------------
// Title tokenization

/// Splits on the space character, lowercases each piece, strips Unicode
/// punctuation (general categories P*), and drops pieces that end up empty.
pub fn tokenize_title(raw: &str) -> Vec<String> {
    raw.split(' ')
        .map(|piece| {
            piece
                .chars()
                .flat_map(char::to_lowercase)
                .filter(|c| c.general_category_group() != GeneralCategoryGroup::Punctuation)
                .collect::<String>()
        })
        .filter(|token| !token.is_empty())
        .collect()
}

// ---------------------------------------------------------------------------
// Challenge categories

/// The ten challenge regimes: how many seed tracks are revealed (K), whether
/// the title is revealed, and whether seeds are the playlist prefix or a
/// random sample.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum ChallengeCategory {
    #[serde(rename = "title_only")]
    TitleOnly,
    #[serde(rename = "1_with_title")]
    Title1First,
    #[serde(rename = "5_with_title")]
    Title5First,
    #[serde(rename = "5_no_title")]
    NoTitle5First,
    #[serde(rename = "10_with_title")]
    Title10First,
    #[serde(rename = "10_no_title")]
    NoTitle10First,
    #[serde(rename = "25_first")]
    Title25First,
    #[serde(rename = "25_random")]
    Title25Random,
    #[serde(rename = "100_first")]
    Title100First,
    #[serde(rename = "100_random")]
    Title100Random,
}

impl ChallengeCategory {
    pub const ALL: [ChallengeCategory; 10] = [
        ChallengeCategory::TitleOnly,
        ChallengeCategory::Title1First,
        ChallengeCategory::Title5First,
        ChallengeCategory::NoTitle5First,
        ChallengeCategory::Title10First,
        ChallengeCategory::NoTitle10First,
        ChallengeCategory::Title25First,
        ChallengeCategory::Title25Random,
        ChallengeCategory::Title100First,
        ChallengeCategory::Title100Random,
    ];

    /// Row order of the published result tables: no-title variants come
    /// before their titled siblings.
    pub const TABLE_ORDER: [ChallengeCategory; 10] = [
        ChallengeCategory::TitleOnly,
        ChallengeCategory::Title1First,
        ChallengeCategory::NoTitle5First,
        ChallengeCategory::Title5First,
        ChallengeCategory::NoTitle10First,
        ChallengeCategory::Title10First,
        ChallengeCategory::Title25First,
        ChallengeCategory::Title25Random,
        ChallengeCategory::Title100First,
        ChallengeCategory::Title100Random,
    ];

    pub fn seed_count(self) -> usize {
        match self {
            ChallengeCategory::TitleOnly => 0,
            ChallengeCategory::Title1First => 1,
            ChallengeCategory::Title5First | ChallengeCategory::NoTitle5First => 5,
            ChallengeCategory::Title10First | ChallengeCategory::NoTitle10First => 10,
            ChallengeCategory::Title25First | ChallengeCategory::Title25Random => 25,
            ChallengeCategory::Title100First | ChallengeCategory::Title100Random => 100,
        }
    }

    pub fn has_title(self) -> bool {
        !matches!(
            self,
            ChallengeCategory::NoTitle5First | ChallengeCategory::NoTitle10First
        )
    }

    pub fn random_seeds(self) -> bool {
        matches!(
            self,
            ChallengeCategory::Title25Random | ChallengeCategory::Title100Random
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            ChallengeCategory::TitleOnly => "title_only",
            ChallengeCategory::Title1First => "1_with_title",
            ChallengeCategory::Title5First => "5_with_title",
            ChallengeCategory::NoTitle5First => "5_no_title",
            ChallengeCategory::Title10First => "10_with_title",
            ChallengeCategory::NoTitle10First => "10_no_title",
            ChallengeCategory::Title25First => "25_first",
            ChallengeCategory::Title25Random => "25_random",
            ChallengeCategory::Title100First => "100_first",
            ChallengeCategory::Title100Random => "100_random",
        }
    }
}

impl fmt::Display for ChallengeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ChallengeCategory {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChallengeCategory::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| CorpusError::UnknownCategory {
                label: s.to_string(),
            })
    }
}

// ---------------------------------------------------------------------------
// Evaluation splits

/// Inclusive pid range `[lo, hi]`; serializes as a two-element array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct PidRange {
    pub lo: u64,
    pub hi: u64,
}

impl From<[u64; 2]> for PidRange {
    fn from([lo, hi]: [u64; 2]) -> Self {
        Self { lo, hi }
    }
}

impl From<PidRange> for [u64; 2] {
    fn from(r: PidRange) -> Self {
        [r.lo, r.hi]
    }
}

impl PidRange {
    pub fn new(lo: u64, hi: u64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, pid: u64) -> bool {
        (self.lo..=self.hi).contains(&pid)
    }

    pub fn overlaps(&self, other: &PidRange) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

impl fmt::Display for PidRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

/// One evaluation playlist: the revealed seeds and the withheld holdout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPlaylist {
    pub pid: u64,
    pub category: ChallengeCategory,
    /// Empty when the category hides the title.
    pub title_tokens: Vec<WordRef>,
    pub seed_tracks: Vec<TrackRef>,
    pub holdout_tracks: Vec<TrackRef>,
}

/// Categories ordered by descending seed demand. Assigning the hungriest
/// categories first keeps long playlists from being consumed by categories
/// any playlist could satisfy.
const ASSIGNMENT_ORDER: [ChallengeCategory; 10] = [
    ChallengeCategory::Title100Random,
    ChallengeCategory::Title100First,
    ChallengeCategory::Title25Random,
    ChallengeCategory::Title25First,
    ChallengeCategory::NoTitle10First,
    ChallengeCategory::Title10First,
    ChallengeCategory::NoTitle5First,
    ChallengeCategory::Title5First,
    ChallengeCategory::Title1First,
    ChallengeCategory::TitleOnly,
];

/// Carves the playlists whose pid falls in `pid_range` into challenge
/// categories. Each playlist lands in at most one category; quotas are met
/// exactly or the call fails naming the starved category. A playlist is
/// eligible for seed count K only when it has at least K+1 tracks, so the
/// holdout is never empty.
///
/// Deterministic given `rng_seed`: the candidate pool is shuffled once, and
/// random-seed categories sample positions from the same stream.
pub fn make_eval_split(
    corpus: &Corpus,
    pid_range: PidRange,
    quotas: &BTreeMap<ChallengeCategory, usize>,
    rng_seed: u64,
) -> Result<Vec<EvalPlaylist>, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut pool: Vec<usize> = (0..corpus.playlists.len())
        .filter(|&i| pid_range.contains(corpus.playlists[i].pid))
        .collect();
    pool.shuffle(&mut rng);

    let mut assigned: Vec<bool> = vec![false; corpus.playlists.len()];
    let mut out = Vec::new();
    for category in ASSIGNMENT_ORDER {
        let quota = quotas.get(&category).copied().unwrap_or(0);
        if quota == 0 {
            continue;
        }
        let k = category.seed_count();
        let mut taken = 0;
        for &i in pool.iter() {
            if taken == quota {
                break;
            }
            let playlist = &corpus.playlists[i];
            if assigned[i] || playlist.tracks.len() < k + 1 {
                continue;
            }
            assigned[i] = true;
            taken += 1;
            out.push(carve(playlist, category, &mut rng));
        }
        if taken < quota {
            return Err(CorpusError::InsufficientEligible {
                category,
                needed: quota,
                available: taken,
            });
        }
    }
    out.sort_by_key(|e| (category_rank(e.category), e.pid));
    Ok(out)
}

fn category_rank(c: ChallengeCategory) -> usize {
    ChallengeCategory::ALL.iter().position(|&x| x == c).unwrap()
}

fn carve(playlist: &Playlist, category: ChallengeCategory, rng: &mut ChaCha8Rng) -> EvalPlaylist {
    let k = category.seed_count();
    let n = playlist.tracks.len();
    let seed_positions: Vec<usize> = if category.random_seeds() {
        let mut positions = rand::seq::index::sample(rng, n, k).into_vec();
        positions.sort_unstable();
        positions
    } else {
        (0..k).collect()
    };
    let mut is_seed = vec![false; n];
    for &p in &seed_positions {
        is_seed[p] = true;
    }
    EvalPlaylist {
        pid: playlist.pid,
        category,
        title_tokens: if category.has_title() {
            playlist.title_tokens.clone()
        } else {
            Vec::new()
        },
        seed_tracks: seed_positions.iter().map(|&p| playlist.tracks[p]).collect(),
        holdout_tracks: (0..n)
            .filter(|&p| !is_seed[p])
            .map(|p| playlist.tracks[p])
            .collect(),
    }
}

/// Writes one JSON record per line: pid, category, title token ids, seed
/// track ids, holdout track ids.
pub fn write_split_manifest(path: &Path, split: &[EvalPlaylist]) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut out = BufWriter::new(file);
    for record in split {
        serde_json::to_writer(&mut out, record).map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
        out.write_all(b"\n").map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
    }
    out.flush().map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn read_split_manifest(path: &Path) -> Result<Vec<EvalPlaylist>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: EvalPlaylist =
            serde_json::from_str(&line).map_err(|e| CorpusError::BadSplitRecord {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        out.push(record);
    }
    Ok(out)
}

/// Per-seed-count split statistics: playlist count, mean holdout length,
/// distinct seed tracks, distinct seed artists.
pub fn split_stats_table(split: &[EvalPlaylist], corpus: &Corpus) -> String {
    let mut table = String::from("Group   N_Playlist   H_avg   N_Track   N_Artist\n");
    for k in [0usize, 1, 5, 10, 25, 100] {
        let group: Vec<&EvalPlaylist> = split
            .iter()
            .filter(|e| e.category.seed_count() == k)
            .collect();
        if group.is_empty() {
            continue;
        }
        let h_avg = group.iter().map(|e| e.holdout_tracks.len()).sum::<usize>() as f64
            / group.len() as f64;
        let seed_tracks: BTreeSet<TrackRef> = group
            .iter()
            .flat_map(|e| e.seed_tracks.iter().copied())
            .collect();
        let seed_artists: BTreeSet<ArtistRef> =
            seed_tracks.iter().map(|&t| corpus.artist_of(t)).collect();
        table.push_str(&format!(
            "K={k:<5} {:>10} {h_avg:>7.1} {:>9} {:>10}\n",
            group.len(),
            seed_tracks.len(),
            seed_artists.len(),
        ));
    }
    table
}

// ---------------------------------------------------------------------------
// Popularity

/// All tracks ordered by popularity descending; ties broken by ascending id.
pub fn popularity_ranking(corpus: &Corpus) -> Vec<TrackRef> {
    let mut order: Vec<TrackRef> = corpus.meta.iter().map(|m| m.track).collect();
    order.sort_by_key(|t| (std::cmp::Reverse(corpus.popularity(*t)), t.0));
    order
}

// ---------------------------------------------------------------------------
// Challenge files (seeds only, no holdout)

/// Result of loading a challenge file: playlists to continue, plus the seed
/// URIs that were unknown to the corpus and therefore dropped.
pub struct ChallengeSet {
    pub playlists: Vec<EvalPlaylist>,
    pub unknown_seed_uris: Vec<(u64, String)>,
}

/// Loads a challenge file: the same slice shape, but "name" is optional,
/// holdouts are absent, and an optional per-playlist "category" field names
/// the challenge category. Without that field the category is inferred
/// from the seed count and title presence; 25- and 100-seed playlists
/// default to the first-K variant since seed placement cannot be observed.
///
/// Seed URIs not present in the training corpus are dropped (they carry no
/// context) and reported in `unknown_seed_uris`.
pub fn load_challenge(path: &Path, corpus: &Corpus) -> Result<ChallengeSet, CorpusError> {
    let mut playlists = Vec::new();
    let mut unknown = Vec::new();
    for (index, raw) in parse_slice(path)?.into_iter().enumerate() {
        let pid = raw.pid.ok_or_else(|| missing(path, index, None, "pid"))?;
        let tracks = raw
            .tracks
            .ok_or_else(|| missing(path, index, Some(pid), "tracks"))?;
        let k = tracks.len();
        let category = match raw.category {
            Some(label) => label.parse::<ChallengeCategory>()?,
            None => infer_category(pid, k, raw.name.is_some())?,
        };
        if category.seed_count() != k {
            return Err(CorpusError::BadChallengePlaylist {
                pid,
                reason: format!(
                    "category {category} expects {} seed tracks, found {k}",
                    category.seed_count()
                ),
            });
        }
        let title_tokens = match (&raw.name, category.has_title()) {
            (Some(name), true) => tokenize_title(name)
                .iter()
                .filter_map(|w| corpus.words.get(w).map(WordRef))
                .collect(),
            _ => Vec::new(),
        };
        let mut seed_tracks = Vec::with_capacity(k);
        for t in tracks {
            let uri = t
                .track_uri
                .ok_or_else(|| missing(path, index, Some(pid), "track_uri"))?;
            match corpus.tracks.get(&uri) {
                Some(id) => seed_tracks.push(TrackRef(id)),
                None => unknown.push((pid, uri)),
            }
        }
        playlists.push(EvalPlaylist {
            pid,
            category,
            title_tokens,
            seed_tracks,
            holdout_tracks: Vec::new(),
        });
    }
    Ok(ChallengeSet {
        playlists,
        unknown_seed_uris: unknown,
    })
}

fn infer_category(pid: u64, k: usize, has_title: bool) -> Result<ChallengeCategory, CorpusError> {
    match (k, has_title) {
        (0, true) => Ok(ChallengeCategory::TitleOnly),
        (1, true) => Ok(ChallengeCategory::Title1First),
        (5, true) => Ok(ChallengeCategory::Title5First),
        (5, false) => Ok(ChallengeCategory::NoTitle5First),
        (10, true) => Ok(ChallengeCategory::Title10First),
        (10, false) => Ok(ChallengeCategory::NoTitle10First),
        (25, true) => Ok(ChallengeCategory::Title25First),
        (100, true) => Ok(ChallengeCategory::Title100First),
        _ => Err(CorpusError::BadChallengePlaylist {
            pid,
            reason: format!(
                "cannot infer a challenge category from {k} seed tracks ({} title)",
                if has_title { "with" } else { "no" }
            ),
        }),
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn uri(kind: &str, n: usize) -> String {
        format!("spotify:{kind}:{n:04}")
    }

    fn source_playlist(pid: u64, name: &str, track_ids: &[usize]) -> SourcePlaylist {
        SourcePlaylist {
            pid,
            name: name.to_string(),
            tracks: track_ids
                .iter()
                .map(|&t| SourceTrack {
                    track_uri: uri("track", t),
                    // 2 tracks per album, 4 per artist.
                    artist_uri: uri("artist", t / 4),
                    album_uri: uri("album", t / 2),
                })
                .collect(),
        }
    }

    fn write_slice(dir: &Path, name: &str, playlists: &[SourcePlaylist]) -> PathBuf {
        let path = dir.join(name);
        let body = serde_json::json!({ "info": {"slice": name}, "playlists": playlists });
        std::fs::write(&path, serde_json::to_vec(&body).unwrap()).unwrap();
        path
    }

    #[test]
    fn interning_is_idempotent_and_dense() {
        let mut interner = Interner::default();
        let a = interner.intern("alpha");
        let b = interner.intern("beta");
        assert_eq!(interner.intern("alpha"), a);
        assert_ne!(a, b);
        assert_eq!(interner.len(), 2);
        assert_eq!(interner.name(a), "alpha");
        assert_eq!(interner.get("beta"), Some(b));
        assert_eq!(interner.get("gamma"), None);
    }

    #[test]
    fn shared_track_across_slices_has_one_ref_and_popularity_two() {
        let dir = tempfile::tempdir().unwrap();
        let s1 = write_slice(dir.path(), "s1.json", &[source_playlist(1, "one", &[7, 8])]);
        let s2 = write_slice(dir.path(), "s2.json", &[source_playlist(2, "two", &[7, 9])]);
        let corpus = load_corpus(&[s1, s2]).unwrap();
        let id = corpus.tracks.get(&uri("track", 7)).unwrap();
        assert_eq!(corpus.popularity(TrackRef(id)), 2);
        assert_eq!(corpus.track_count(), 3);
        assert_eq!(corpus.playlist_count(), 2);
    }

    #[test]
    fn empty_playlists_array_yields_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_slice(dir.path(), "empty.json", &[]);
        let corpus = load_corpus(&[path]).unwrap();
        assert_eq!(corpus.playlist_count(), 0);
        assert_eq!(corpus.track_count(), 0);
    }

    #[test]
    fn popularity_matches_linear_scan_oracle() {
        // Track X = 42 appears in playlists 1, 3, 7 of a 10-playlist fixture.
        let fixture: Vec<SourcePlaylist> = (0..10u64)
            .map(|pid| {
                let mut tracks = vec![pid as usize, 20 + pid as usize];
                if [1, 3, 7].contains(&pid) {
                    tracks.push(42);
                }
                source_playlist(pid, "fixture", &tracks)
            })
            .collect();
        let corpus = Corpus::from_source(&fixture);
        // Independent oracle: count by scanning the raw fixture.
        let oracle = fixture
            .iter()
            .filter(|p| p.tracks.iter().any(|t| t.track_uri == uri("track", 42)))
            .count() as u32;
        assert_eq!(oracle, 3);
        let x = TrackRef(corpus.tracks.get(&uri("track", 42)).unwrap());
        assert_eq!(corpus.popularity(x), oracle);
    }

    #[test]
    fn duplicate_tracks_in_one_playlist_count_popularity_once() {
        let corpus = Corpus::from_source(&[
            source_playlist(1, "dups", &[5, 5, 5]),
            source_playlist(2, "other", &[5]),
        ]);
        let t = TrackRef(corpus.tracks.get(&uri("track", 5)).unwrap());
        assert_eq!(corpus.popularity(t), 2);
        // The playlist itself keeps its duplicates.
        assert_eq!(corpus.playlists[0].tracks.len(), 3);
    }

    #[test]
    fn popularity_sums_to_distinct_track_memberships() {
        let corpus = Corpus::from_source(&[
            source_playlist(1, "a", &[0, 1, 2, 1]),
            source_playlist(2, "b", &[2, 3]),
            source_playlist(3, "c", &[3, 3]),
        ]);
        let total: u32 = corpus.meta.iter().map(|m| m.popularity).sum();
        let expected: usize = corpus
            .playlists
            .iter()
            .map(|p| {
                let mut d = p.tracks.clone();
                d.sort_unstable();
                d.dedup();
                d.len()
            })
            .sum();
        assert_eq!(total as usize, expected);
    }

    #[test]
    fn malformed_json_names_file_and_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, b"{\"playlists\": [ nope ]}").unwrap();
        let err = load_corpus(std::slice::from_ref(&path)).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("bad.json"), "missing file name: {text}");
        assert!(text.contains("line 1"), "missing offset: {text}");
    }

    #[test]
    fn missing_field_names_pid_and_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing.json");
        let body = serde_json::json!({
            "playlists": [{ "pid": 77, "name": "x", "tracks": [{ "artist_uri": "a", "album_uri": "b" }] }]
        });
        std::fs::write(&path, serde_json::to_vec(&body).unwrap()).unwrap();
        let err = load_corpus(&[path]).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("pid 77"), "missing pid: {text}");
        assert!(text.contains("track_uri"), "missing field name: {text}");
    }

    #[test]
    fn tokenize_strips_punctuation_and_lowercases() {
        assert_eq!(tokenize_title("My Christmas Mix!!"), ["my", "christmas", "mix"]);
    }

    #[test]
    fn tokenize_empty_title_is_empty() {
        assert!(tokenize_title("").is_empty());
    }

    #[test]
    fn tokenize_drops_pieces_that_become_empty() {
        // Double space yields an empty piece; "--" strips to nothing inside
        // the first piece.
        assert_eq!(tokenize_title("ROAD--TRIP  2017"), ["roadtrip", "2017"]);
        assert_eq!(tokenize_title("!!! ..."), Vec::<String>::new());
    }

    #[test]
    fn tokenize_uses_unicode_punctuation_not_symbols() {
        // Em dash (Pd) is punctuation; '+' (Sm) is a math symbol and stays.
        assert_eq!(tokenize_title("Noite—Fria a+b"), ["noitefria", "a+b"]);
    }

    fn synthetic_corpus(n_playlists: usize, vocab: usize, seed: u64) -> Corpus {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let source: Vec<SourcePlaylist> = (0..n_playlists as u64)
            .map(|pid| {
                let len = rng.gen_range(1..=150);
                let tracks: Vec<usize> = (0..len).map(|_| rng.gen_range(0..vocab)).collect();
                source_playlist(pid, &format!("list {}", pid % 37), &tracks)
            })
            .collect();
        Corpus::from_source(&source)
    }

    fn full_quotas(per_category: usize) -> BTreeMap<ChallengeCategory, usize> {
        ChallengeCategory::ALL
            .into_iter()
            .map(|c| (c, per_category))
            .collect()
    }

    #[test]
    fn table_shaped_quotas_fill_exactly() {
        let corpus = synthetic_corpus(10_000, 2_000, 11);
        let split = make_eval_split(
            &corpus,
            PidRange::new(0, 9_999),
            &full_quotas(1_000),
            7,
        )
        .unwrap();
        assert_eq!(split.len(), 10_000);
        for category in ChallengeCategory::ALL {
            let n = split.iter().filter(|e| e.category == category).count();
            assert_eq!(n, 1_000, "quota not met for {category}");
        }
        // No playlist appears twice.
        let mut pids: Vec<u64> = split.iter().map(|e| e.pid).collect();
        pids.sort_unstable();
        pids.dedup();
        assert_eq!(pids.len(), 10_000);
    }

    #[test]
    fn split_respects_seed_and_holdout_contracts() {
        let corpus = synthetic_corpus(3_000, 800, 5);
        let split = make_eval_split(
            &corpus,
            PidRange::new(0, 2_999),
            &full_quotas(120),
            99,
        )
        .unwrap();
        for e in &split {
            let source = corpus.playlist_by_pid(e.pid).unwrap();
            assert_eq!(e.seed_tracks.len(), e.category.seed_count());
            assert!(!e.holdout_tracks.is_empty());
            // Seeds ∪ holdout must equal the source track multiset.
            let mut combined = e.seed_tracks.clone();
            combined.extend_from_slice(&e.holdout_tracks);
            let mut original = source.tracks.clone();
            combined.sort_unstable();
            original.sort_unstable();
            assert_eq!(combined, original);
            if !e.category.random_seeds() {
                assert_eq!(
                    e.seed_tracks.as_slice(),
                    &source.tracks[..e.category.seed_count()]
                );
            }
            if !e.category.has_title() {
                assert!(e.title_tokens.is_empty());
            } else {
                assert_eq!(e.title_tokens, source.title_tokens);
            }
        }
    }

    #[test]
    fn k_zero_quota_keeps_all_tracks_as_holdout() {
        let corpus = Corpus::from_source(&[source_playlist(1, "only", &[1, 2, 3])]);
        let quotas = BTreeMap::from([(ChallengeCategory::TitleOnly, 1)]);
        let split = make_eval_split(&corpus, PidRange::new(0, 10), &quotas, 0).unwrap();
        assert_eq!(split.len(), 1);
        assert!(split[0].seed_tracks.is_empty());
        assert_eq!(split[0].holdout_tracks, corpus.playlists[0].tracks);
    }

    #[test]
    fn split_is_seed_deterministic_and_seed_sensitive() {
        let corpus = synthetic_corpus(400, 300, 3);
        let quotas = full_quotas(10);
        let range = PidRange::new(0, 399);
        let a = make_eval_split(&corpus, range, &quotas, 123).unwrap();
        let b = make_eval_split(&corpus, range, &quotas, 123).unwrap();
        assert_eq!(a, b);
        let c = make_eval_split(&corpus, range, &quotas, 124).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn different_seeds_change_random_seed_selection() {
        // Five identical-length playlists, quota forces all into 25_random;
        // only the random seed positions can differ between rng seeds.
        let source: Vec<SourcePlaylist> = (0..5u64)
            .map(|pid| source_playlist(pid, "same", &(0..60).collect::<Vec<_>>()))
            .collect();
        let corpus = Corpus::from_source(&source);
        let quotas = BTreeMap::from([(ChallengeCategory::Title25Random, 5)]);
        let a = make_eval_split(&corpus, PidRange::new(0, 4), &quotas, 1).unwrap();
        let b = make_eval_split(&corpus, PidRange::new(0, 4), &quotas, 2).unwrap();
        assert!(
            a.iter().zip(&b).any(|(x, y)| x.seed_tracks != y.seed_tracks),
            "different rng seeds produced identical random seed selections"
        );
        for e in a.iter().chain(&b) {
            // Random seeds preserve playlist order.
            let positions: Vec<usize> = e
                .seed_tracks
                .iter()
                .map(|t| t.idx())
                .collect();
            assert!(positions.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn starved_category_is_a_named_error() {
        let corpus = Corpus::from_source(&[source_playlist(1, "short", &[1, 2])]);
        let quotas = BTreeMap::from([(ChallengeCategory::Title100First, 1)]);
        let err = make_eval_split(&corpus, PidRange::new(0, 10), &quotas, 0).unwrap_err();
        match err {
            CorpusError::InsufficientEligible { category, .. } => {
                assert_eq!(category, ChallengeCategory::Title100First)
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn popularity_ranking_orders_by_count_then_id() {
        // A appears in 5 playlists, B and C in 3 each, with id(B) < id(C).
        let mut source = Vec::new();
        for pid in 0..5u64 {
            let mut tracks = vec![0usize]; // A
            if pid < 3 {
                tracks.push(1); // B
                tracks.push(2); // C
            }
            source.push(source_playlist(pid, "p", &tracks));
        }
        let corpus = Corpus::from_source(&source);
        let ranking = popularity_ranking(&corpus);
        assert_eq!(ranking, vec![TrackRef(0), TrackRef(1), TrackRef(2)]);
    }

    #[test]
    fn popularity_ranking_all_ties_is_ascending_ids() {
        let corpus = Corpus::from_source(&[source_playlist(1, "p", &[3, 1, 2, 0])]);
        let ranking = popularity_ranking(&corpus);
        assert_eq!(
            ranking,
            vec![TrackRef(0), TrackRef(1), TrackRef(2), TrackRef(3)]
        );
    }

    #[test]
    fn popularity_ranking_of_empty_corpus_is_empty() {
        let corpus = Corpus::from_source(&[]);
        assert!(popularity_ranking(&corpus).is_empty());
    }

    #[test]
    fn split_manifest_round_trips() {
        let corpus = synthetic_corpus(300, 200, 8);
        let split = make_eval_split(
            &corpus,
            PidRange::new(0, 299),
            &full_quotas(8),
            21,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("split.jsonl");
        write_split_manifest(&path, &split).unwrap();
        assert_eq!(read_split_manifest(&path).unwrap(), split);
    }

    #[test]
    fn filtered_corpus_recomputes_popularity() {
        let corpus = Corpus::from_source(&[
            source_playlist(1, "a", &[0, 1]),
            source_playlist(2, "b", &[0]),
            source_playlist(3, "c", &[0, 1]),
        ]);
        let train = corpus.filtered_by_pid(|pid| pid != 3);
        assert_eq!(train.playlist_count(), 2);
        assert_eq!(train.popularity(TrackRef(0)), 2);
        assert_eq!(train.popularity(TrackRef(1)), 1);
        // Id spaces are shared with the parent corpus.
        assert_eq!(train.track_count(), corpus.track_count());
    }

    #[test]
    fn corpus_artifact_round_trips() {
        let corpus = synthetic_corpus(50, 60, 4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.json");
        corpus.save(&path).unwrap();
        let loaded = Corpus::load(&path).unwrap();
        assert_eq!(loaded.playlists, corpus.playlists);
        assert_eq!(loaded.meta, corpus.meta);
        assert_eq!(loaded.tracks.get(&uri("track", 0)), corpus.tracks.get(&uri("track", 0)));
    }

    #[test]
    fn challenge_file_drops_unknown_seeds_and_infers_categories() {
        let corpus = Corpus::from_source(&[source_playlist(1, "road trip", &[0, 1, 2, 3, 4, 5])]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("challenge.json");
        let body = serde_json::json!({
            "playlists": [
                { "pid": 100, "name": "road trip",
                  "tracks": [
                      { "track_uri": uri("track", 0), "artist_uri": uri("artist", 0), "album_uri": uri("album", 0) },
                      { "track_uri": "spotify:track:cold", "artist_uri": "a", "album_uri": "b" },
                      { "track_uri": uri("track", 2), "artist_uri": uri("artist", 0), "album_uri": uri("album", 1) },
                      { "track_uri": uri("track", 3), "artist_uri": uri("artist", 0), "album_uri": uri("album", 1) },
                      { "track_uri": uri("track", 4), "artist_uri": uri("artist", 1), "album_uri": uri("album", 2) }
                  ] },
                { "pid": 101, "tracks": [
                      { "track_uri": uri("track", 1), "artist_uri": uri("artist", 0), "album_uri": uri("album", 0) },
                      { "track_uri": uri("track", 2), "artist_uri": uri("artist", 0), "album_uri": uri("album", 1) },
                      { "track_uri": uri("track", 3), "artist_uri": uri("artist", 0), "album_uri": uri("album", 1) },
                      { "track_uri": uri("track", 4), "artist_uri": uri("artist", 1), "album_uri": uri("album", 2) },
                      { "track_uri": uri("track", 5), "artist_uri": uri("artist", 1), "album_uri": uri("album", 2) }
                  ] },
                { "pid": 102, "name": "quiet", "category": "title_only", "tracks": [] }
            ]
        });
        std::fs::write(&path, serde_json::to_vec(&body).unwrap()).unwrap();
        let set = load_challenge(&path, &corpus).unwrap();
        assert_eq!(set.playlists.len(), 3);
        assert_eq!(set.playlists[0].category, ChallengeCategory::Title5First);
        assert_eq!(set.playlists[0].seed_tracks.len(), 4); // cold seed dropped
        assert_eq!(set.playlists[1].category, ChallengeCategory::NoTitle5First);
        assert!(set.playlists[1].title_tokens.is_empty());
        assert_eq!(set.playlists[2].category, ChallengeCategory::TitleOnly);
        assert_eq!(set.unknown_seed_uris, vec![(100, "spotify:track:cold".to_string())]);
    }

    #[test]
    fn challenge_category_labels_round_trip() {
        for category in ChallengeCategory::ALL {
            let parsed: ChallengeCategory = category.label().parse().unwrap();
            assert_eq!(parsed, category);
            let json = serde_json::to_string(&category).unwrap();
            assert_eq!(json, format!("\"{}\"", category.label()));
        }
        assert!("51_mystery".parse::<ChallengeCategory>().is_err());
    }
}
