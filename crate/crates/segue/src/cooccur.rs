//! The four sparse co-occurrence collaborative filters and their scoring.
//!
//! Each index maps a context entity (track, title word, album, artist) to
//! the tracks it shares playlists with. Co-occurrence is a playlist
//! *membership* relation: duplicate tracks within one playlist are
//! deduplicated before counting. Scoring sums per-context similarities,
//! either raw co-counts or cosine-damped by the marginals.
//!
//! # On-disk format
//!
//! Indices serialize to a little-endian binary file:
//!
//! ```text
//! magic      4 bytes  "SGIX"
//! version    u32      1
//! kind       u8       0 track, 1 word, 2 album, 3 artist
//! n_tracks   varint
//! n_rows     varint
//! rows       n_rows × { entry_count varint;
//!                       entries sorted by track id, delta-encoded:
//!                       first id varint, then (id − prev) varint,
//!                       each followed by its co-count varint }
//! ctx_marg   n_rows varints
//! trk_marg   n_tracks varints
//! ```
//!
//! All varints are LEB128. Round-trips are bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Playlist, TrackRef};

#[derive(Debug, thiserror::Error)]
pub enum IndexIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid index file: {message}")]
    Format { path: PathBuf, message: String },
}

/// The context entity of one collaborative model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextKind {
    Track,
    Word,
    Album,
    Artist,
}

impl ContextKind {
    pub const ALL: [ContextKind; 4] = [
        ContextKind::Track,
        ContextKind::Word,
        ContextKind::Album,
        ContextKind::Artist,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ContextKind::Track => "track",
            ContextKind::Word => "word",
            ContextKind::Album => "album",
            ContextKind::Artist => "artist",
        }
    }

    fn tag(self) -> u8 {
        match self {
            ContextKind::Track => 0,
            ContextKind::Word => 1,
            ContextKind::Album => 2,
            ContextKind::Artist => 3,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

/// How a context→track co-count is turned into a similarity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationScheme {
    /// `co(c,t) / sqrt(context_marginal(c) · track_marginal(t))` — damps
    /// popularity bias. The default.
    #[default]
    Cosine,
    /// The raw co-count.
    Raw,
}

/// Sparse non-negative scores, sorted by track id, no zero entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreVector(pub Vec<(TrackRef, f64)>);

impl ScoreVector {
    pub fn get(&self, t: TrackRef) -> f64 {
        match self.0.binary_search_by_key(&t, |&(id, _)| id) {
            Ok(i) => self.0[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(TrackRef, f64)> {
        self.0.iter()
    }
}

/// One co-occurrence model: sparse rows plus the marginals needed for
/// cosine damping. Immutable once built.
#[derive(Debug, PartialEq, Eq)]
pub struct CooccurrenceIndex {
    kind: ContextKind,
    n_tracks: usize,
    /// Context id → (track, co-count), sorted by track id, counts ≥ 1.
    rows: Vec<Vec<(u32, u32)>>,
    /// Context id → number of playlists containing that context entity.
    context_marginal: Vec<u32>,
    /// Track id → number of playlists containing that track.
    track_marginal: Vec<u32>,
}

#[derive(Debug, Clone, Copy)]
pub struct IndexStats {
    pub contexts: usize,
    pub nonempty_rows: usize,
    pub entries: usize,
}

/// Dedup-sorted copies of the id sequences relevant to `kind` for one
/// playlist: the context entities and the member tracks.
fn playlist_projection(corpus: &Corpus, playlist: &Playlist, kind: ContextKind) -> (Vec<u32>, Vec<u32>) {
    let mut tracks: Vec<u32> = playlist.tracks.iter().map(|t| t.0).collect();
    tracks.sort_unstable();
    tracks.dedup();
    let mut contexts: Vec<u32> = match kind {
        ContextKind::Track => tracks.clone(),
        ContextKind::Word => playlist.title_tokens.iter().map(|w| w.0).collect(),
        ContextKind::Album => tracks
            .iter()
            .map(|&t| corpus.meta[t as usize].album.0)
            .collect(),
        ContextKind::Artist => tracks
            .iter()
            .map(|&t| corpus.meta[t as usize].artist.0)
            .collect(),
    };
    contexts.sort_unstable();
    contexts.dedup();
    (contexts, tracks)
}

/// Builds the co-occurrence index of `kind` over every playlist in the
/// corpus. `co(c, t)` = number of playlists containing both the context
/// entity `c` and the track `t`; for the track kind, self pairs are
/// excluded and the relation is symmetric.
pub fn build_index(corpus: &Corpus, kind: ContextKind) -> CooccurrenceIndex {
    let n_tracks = corpus.track_count();
    let n_contexts = match kind {
        ContextKind::Track => n_tracks,
        ContextKind::Word => corpus.words.len(),
        ContextKind::Album => corpus.albums.len(),
        ContextKind::Artist => corpus.artists.len(),
    };

    let projections: Vec<(Vec<u32>, Vec<u32>)> = corpus
        .playlists
        .iter()
        .map(|p| playlist_projection(corpus, p, kind))
        .collect();

    let mut context_marginal = vec![0u32; n_contexts];
    let mut track_marginal = vec![0u32; n_tracks];
    let mut inverted: Vec<Vec<u32>> = vec![Vec::new(); n_contexts];
    for (pidx, (contexts, tracks)) in projections.iter().enumerate() {
        for &c in contexts {
            context_marginal[c as usize] += 1;
            inverted[c as usize].push(pidx as u32);
        }
        for &t in tracks {
            track_marginal[t as usize] += 1;
        }
    }

    // One dense counter pass per context row; rows come out sorted because
    // the touched set is sorted before harvesting.
    let mut counter = vec![0u32; n_tracks];
    let mut touched: Vec<u32> = Vec::new();
    let rows = inverted
        .iter()
        .enumerate()
        .map(|(c, playlist_ids)| {
            for &pidx in playlist_ids {
                for &t in &projections[pidx as usize].1 {
                    if kind == ContextKind::Track && t == c as u32 {
                        continue;
                    }
                    if counter[t as usize] == 0 {
                        touched.push(t);
                    }
                    counter[t as usize] += 1;
                }
            }
            touched.sort_unstable();
            let row: Vec<(u32, u32)> = touched
                .iter()
                .map(|&t| (t, counter[t as usize]))
                .collect();
            for &t in &touched {
                counter[t as usize] = 0;
            }
            touched.clear();
            row
        })
        .collect();

    CooccurrenceIndex {
        kind,
        n_tracks,
        rows,
        context_marginal,
        track_marginal,
    }
}

impl CooccurrenceIndex {
    pub fn kind(&self) -> ContextKind {
        self.kind
    }

    pub fn context_count(&self) -> usize {
        self.rows.len()
    }

    pub fn track_count(&self) -> usize {
        self.n_tracks
    }

    /// The sparse row for a context id; unknown ids get an empty row.
    pub fn row(&self, context: u32) -> &[(u32, u32)] {
        self.rows.get(context as usize).map_or(&[], Vec::as_slice)
    }

    pub fn co_count(&self, context: u32, track: TrackRef) -> u32 {
        let row = self.row(context);
        match row.binary_search_by_key(&track.0, |&(t, _)| t) {
            Ok(i) => row[i].1,
            Err(_) => 0,
        }
    }

    pub fn context_marginal(&self, context: u32) -> u32 {
        self.context_marginal.get(context as usize).copied().unwrap_or(0)
    }

    pub fn track_marginal(&self, track: TrackRef) -> u32 {
        self.track_marginal.get(track.idx()).copied().unwrap_or(0)
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            contexts: self.rows.len(),
            nonempty_rows: self.rows.iter().filter(|r| !r.is_empty()).count(),
            entries: self.rows.iter().map(Vec::len).sum(),
        }
    }

    /// Sums per-context similarities over a context multiset: each
    /// occurrence of a context id contributes its full row. Unknown ids
    /// contribute nothing. The result is sorted by track id and free of
    /// zero entries.
    pub fn score(&self, context: &[u32], normalization: NormalizationScheme) -> ScoreVector {
        let mut acc = vec![0.0f64; self.n_tracks];
        let mut touched: Vec<u32> = Vec::new();
        for &c in context {
            let row = self.row(c);
            if row.is_empty() {
                continue;
            }
            let cm = self.context_marginal[c as usize] as f64;
            for &(t, co) in row {
                let sim = match normalization {
                    NormalizationScheme::Raw => co as f64,
                    NormalizationScheme::Cosine => {
                        co as f64 / (cm * self.track_marginal[t as usize] as f64).sqrt()
                    }
                };
                if acc[t as usize] == 0.0 {
                    touched.push(t);
                }
                acc[t as usize] += sim;
            }
        }
        touched.sort_unstable();
        touched.dedup();
        ScoreVector(
            touched
                .into_iter()
                .filter(|&t| acc[t as usize] != 0.0)
                .map(|t| (TrackRef(t), acc[t as usize]))
                .collect(),
        )
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexIoError> {
        let io_err = |e: std::io::Error| IndexIoError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut out = BufWriter::new(file);
        out.write_all(MAGIC).map_err(io_err)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes()).map_err(io_err)?;
        out.write_all(&[self.kind.tag()]).map_err(io_err)?;
        write_varint(&mut out, self.n_tracks as u64).map_err(io_err)?;
        write_varint(&mut out, self.rows.len() as u64).map_err(io_err)?;
        for row in &self.rows {
            write_varint(&mut out, row.len() as u64).map_err(io_err)?;
            let mut prev = 0u32;
            for (i, &(t, count)) in row.iter().enumerate() {
                let delta = if i == 0 { t } else { t - prev };
                prev = t;
                write_varint(&mut out, delta as u64).map_err(io_err)?;
                write_varint(&mut out, count as u64).map_err(io_err)?;
            }
        }
        for &m in &self.context_marginal {
            write_varint(&mut out, m as u64).map_err(io_err)?;
        }
        for &m in &self.track_marginal {
            write_varint(&mut out, m as u64).map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<CooccurrenceIndex, IndexIoError> {
        let io_err = |e: std::io::Error| IndexIoError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let bad = |message: String| IndexIoError::Format {
            path: path.to_path_buf(),
            message,
        };
        let file = File::open(path).map_err(io_err)?;
        let mut input = BufReader::new(file);

        let mut magic = [0u8; 4];
        input.read_exact(&mut magic).map_err(io_err)?;
        if &magic != MAGIC {
            return Err(bad(format!("bad magic {magic:?}")));
        }
        let mut version = [0u8; 4];
        input.read_exact(&mut version).map_err(io_err)?;
        let version = u32::from_le_bytes(version);
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let mut tag = [0u8; 1];
        input.read_exact(&mut tag).map_err(io_err)?;
        let kind = ContextKind::from_tag(tag[0]).ok_or_else(|| bad(format!("bad kind tag {}", tag[0])))?;

        let as_u32 = |v: u64, what: &str| -> Result<u32, IndexIoError> {
            u32::try_from(v).map_err(|_| bad(format!("{what} {v} out of range")))
        };
        let n_tracks = read_varint(&mut input).map_err(io_err)? as usize;
        let n_rows = read_varint(&mut input).map_err(io_err)? as usize;
        let mut rows = Vec::with_capacity(n_rows);
        for r in 0..n_rows {
            let len = read_varint(&mut input).map_err(io_err)? as usize;
            let mut row = Vec::with_capacity(len);
            let mut prev = 0u32;
            for i in 0..len {
                let delta = as_u32(read_varint(&mut input).map_err(io_err)?, "track delta")?;
                let t = if i == 0 { delta } else { prev.checked_add(delta).ok_or_else(|| bad("track id overflow".into()))? };
                if i > 0 && delta == 0 {
                    return Err(bad(format!("row {r}: non-increasing track ids")));
                }
                if t as usize >= n_tracks {
                    return Err(bad(format!("row {r}: track id {t} >= {n_tracks}")));
                }
                let count = as_u32(read_varint(&mut input).map_err(io_err)?, "co-count")?;
                if count == 0 {
                    return Err(bad(format!("row {r}: explicit zero co-count")));
                }
                prev = t;
                row.push((t, count));
            }
            rows.push(row);
        }
        let mut context_marginal = Vec::with_capacity(n_rows);
        for _ in 0..n_rows {
            context_marginal.push(as_u32(read_varint(&mut input).map_err(io_err)?, "marginal")?);
        }
        let mut track_marginal = Vec::with_capacity(n_tracks);
        for _ in 0..n_tracks {
            track_marginal.push(as_u32(read_varint(&mut input).map_err(io_err)?, "marginal")?);
        }
        let mut trailing = [0u8; 1];
        match input.read(&mut trailing).map_err(io_err)? {
            0 => {}
            _ => return Err(bad("trailing bytes after index".into())),
        }
        Ok(CooccurrenceIndex {
            kind,
            n_tracks,
            rows,
            context_marginal,
            track_marginal,
        })
    }
}

const MAGIC: &[u8; 4] = b"SGIX";
const FORMAT_VERSION: u32 = 1;

fn write_varint<W: Write>(out: &mut W, mut value: u64) -> std::io::Result<()> {
    loop {
        let byte = (value & 0x7F) as u8;
        value >>= 7;
        if value == 0 {
            return out.write_all(&[byte]);
        }
        out.write_all(&[byte | 0x80])?;
    }
}

fn read_varint<R: Read>(input: &mut R) -> std::io::Result<u64> {
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let mut byte = [0u8; 1];
        input.read_exact(&mut byte)?;
        if shift >= 64 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "varint longer than 64 bits",
            ));
        }
        value |= u64::from(byte[0] & 0x7F) << shift;
        if byte[0] & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

/// All four models over one corpus, with the standard file layout
/// `index_<kind>.bin` used by the CLI.
pub struct IndexSet {
    pub track: CooccurrenceIndex,
    pub word: CooccurrenceIndex,
    pub album: CooccurrenceIndex,
    pub artist: CooccurrenceIndex,
}

impl IndexSet {
    pub fn build(corpus: &Corpus) -> IndexSet {
        IndexSet {
            track: build_index(corpus, ContextKind::Track),
            word: build_index(corpus, ContextKind::Word),
            album: build_index(corpus, ContextKind::Album),
            artist: build_index(corpus, ContextKind::Artist),
        }
    }

    pub fn get(&self, kind: ContextKind) -> &CooccurrenceIndex {
        match kind {
            ContextKind::Track => &self.track,
            ContextKind::Word => &self.word,
            ContextKind::Album => &self.album,
            ContextKind::Artist => &self.artist,
        }
    }

    pub fn file_name(kind: ContextKind) -> String {
        format!("index_{}.bin", kind.label())
    }

    pub fn save_dir(&self, dir: &Path) -> Result<(), IndexIoError> {
        for kind in ContextKind::ALL {
            self.get(kind).save(&dir.join(Self::file_name(kind)))?;
        }
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<IndexSet, IndexIoError> {
        let load = |kind: ContextKind| CooccurrenceIndex::load(&dir.join(Self::file_name(kind)));
        Ok(IndexSet {
            track: load(ContextKind::Track)?,
            word: load(ContextKind::Word)?,
            album: load(ContextKind::Album)?,
            artist: load(ContextKind::Artist)?,
        })
    }
}
