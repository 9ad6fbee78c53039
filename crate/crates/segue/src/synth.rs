//! Synthetic corpus generator with planted, verifiable structure.
//!
//! Every playlist draws most of its tracks from a primary genre and the
//! tail from the next genre on a ring, so the data has properties the
//! engine should exploit and tests can assert on:
//!
//! * Track/album/artist co-occurrence clusters by genre, so a composed
//!   model beats raw popularity.
//! * The genre switch happens after ≥ 65% of the playlist, and long
//!   playlists are ≥ 160 tracks, so the first 100 tracks are always pure
//!   primary genre while a random sample straddles both — random-seed
//!   categories carry strictly more information than first-K ones.
//! * With `informative_titles`, the title is the primary genre's name;
//!   otherwise titles are meaningless tokens from a pool scaled to the
//!   corpus, so each word recurs in only a handful of unrelated playlists
//!   and the word model can only inject junk.
//! * Within a genre, track popularity follows a Zipf-like law, giving the
//!   popularity baseline something real to work with.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Corpus, SourcePlaylist, SourceTrack};

/// Genre vocabulary; also the informative playlist titles.
const GENRES: [&str; 30] = [
    "acoustic", "ambient", "blues", "classical", "country", "dance", "disco", "electro", "folk",
    "funk", "gospel", "grunge", "hiphop", "house", "indie", "jazz", "latin", "lofi", "metal",
    "opera", "pop", "punk", "reggae", "rock", "soul", "swing", "techno", "trance", "tropical",
    "waltz",
];


const TRACKS_PER_ALBUM: usize = 10;
const TRACKS_PER_ARTIST: usize = 40;

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub n_genres: usize,
    pub tracks_per_genre: usize,
    pub n_playlists: usize,
    pub rng_seed: u64,
    /// Title = primary genre name when true; when false, two tokens from
    /// a meaningless word pool sized `n_playlists / 2`, so each word lands
    /// in roughly four unrelated playlists.
    pub informative_titles: bool,
    /// Zipf exponent of within-genre track popularity.
    pub zipf_exponent: f64,
    /// Share of playlists with 160–220 tracks (the rest split between
    /// 40–120 and 10–39).
    pub long_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_genres: 25,
            tracks_per_genre: 200,
            n_playlists: 50_000,
            rng_seed: 7,
            informative_titles: true,
            zipf_exponent: 0.8,
            long_fraction: 0.2,
        }
    }
}

impl SynthConfig {
    pub fn track_count(&self) -> usize {
        self.n_genres * self.tracks_per_genre
    }

    fn genre_title(&self, genre: usize) -> String {
        if genre < GENRES.len() {
            GENRES[genre].to_string()
        } else {
            format!("genre{genre}")
        }
    }
}

fn source_track(config: &SynthConfig, global: usize) -> SourceTrack {
    let genre = global / config.tracks_per_genre;
    let local = global % config.tracks_per_genre;
    SourceTrack {
        track_uri: format!("synth:track:{global:05}"),
        artist_uri: format!("synth:artist:g{genre}n{}", local / TRACKS_PER_ARTIST),
        album_uri: format!("synth:album:g{genre}n{}", local / TRACKS_PER_ALBUM),
    }
}

/// Weighted sampling without replacement (Efraimidis–Spirakis keys): track
/// at within-genre popularity rank `r` has weight `1/(r+1)^zipf`.
fn sample_genre(config: &SynthConfig, rng: &mut ChaCha8Rng, genre: usize, n: usize) -> Vec<usize> {
    assert!(n <= config.tracks_per_genre, "segment larger than genre");
    let base = genre * config.tracks_per_genre;
    let mut keyed: Vec<(f64, usize)> = (0..config.tracks_per_genre)
        .map(|r| {
            let weight = 1.0 / ((r + 1) as f64).powf(config.zipf_exponent);
            let u: f64 = rng.gen();
            (u.powf(1.0 / weight), base + r)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.truncate(n);
    keyed.into_iter().map(|(_, t)| t).collect()
}

/// Generates playlists with pids `0..n_playlists`.
pub fn generate_source(config: &SynthConfig) -> Vec<SourcePlaylist> {
    assert!(config.n_genres >= 2, "the genre ring needs at least two genres");
    assert!(
        config.tracks_per_genre >= 176,
        "long playlists need up to ceil(0.8*220) = 176 primary-genre tracks"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut playlists = Vec::with_capacity(config.n_playlists);
    for pid in 0..config.n_playlists as u64 {
        let g1 = rng.gen_range(0..config.n_genres);
        let g2 = (g1 + 1) % config.n_genres;

        let class: f64 = rng.gen();
        let length = if class < config.long_fraction {
            rng.gen_range(160..=220)
        } else if class < config.long_fraction + 0.35 {
            rng.gen_range(40..=120)
        } else {
            rng.gen_range(10..=39)
        };
        let split: f64 = rng.gen_range(0.65..0.80);
        let n1 = ((length as f64) * split).ceil() as usize;
        let n2 = length - n1;

        let mut track_ids = sample_genre(config, &mut rng, g1, n1);
        track_ids.extend(sample_genre(config, &mut rng, g2, n2));

        let name = if config.informative_titles {
            config.genre_title(g1)
        } else {
            let pool = (config.n_playlists / 2).max(8);
            format!("w{} w{}", rng.gen_range(0..pool), rng.gen_range(0..pool))
        };

        playlists.push(SourcePlaylist {
            pid,
            name,
            tracks: track_ids
                .into_iter()
                .map(|t| source_track(config, t))
                .collect(),
        });
    }
    playlists
}

pub fn generate(config: &SynthConfig) -> Corpus {
    Corpus::from_source(&generate_source(config))
}

#[derive(Serialize)]
struct SliceFile<'a> {
    info: SliceInfo,
    playlists: &'a [SourcePlaylist],
}

#[derive(Serialize)]
struct SliceInfo {
    generator: &'static str,
    slice: String,
}

/// Writes the playlists as JSON slice files of `per_slice` playlists each,
/// named `slice.<first_pid>-<last_pid>.json`; returns the paths in order.
pub fn write_slices(
    source: &[SourcePlaylist],
    dir: &Path,
    per_slice: usize,
) -> std::io::Result<Vec<PathBuf>> {
    assert!(per_slice > 0);
    let mut paths = Vec::new();
    for chunk in source.chunks(per_slice) {
        let first = chunk.first().map(|p| p.pid).unwrap_or(0);
        let last = chunk.last().map(|p| p.pid).unwrap_or(0);
        let path = dir.join(format!("slice.{first}-{last}.json"));
        let file = SliceFile {
            info: SliceInfo {
                generator: "segue-synth",
                slice: format!("{first}-{last}"),
            },
            playlists: chunk,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
        serde_json::to_writer(&mut out, &file)?;
        out.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
