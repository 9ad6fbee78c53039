//! Shared test helpers: independent naive oracles and random-input
//! generators. The oracles here are deliberately written as literal
//! transcriptions of the published formulas (linear scans, no shared code
//! with the library) so that agreement with the engine is meaningful.

#![allow(dead_code)] // each integration-test binary uses a different subset

use rand::prelude::*;
use segue::corpus::{
    ChallengeCategory, Corpus, EvalPlaylist, SourcePlaylist, SourceTrack, TrackRef, WordRef,
};
use segue::cooccur::ContextKind;

// ---------------------------------------------------------------------------
// Naive metric oracles
// ---------------------------------------------------------------------------

/// Track-level R-precision: matches in the first |G| positions over |G|,
/// computed by linear membership scans.
pub fn naive_r_precision_track(g: &[u32], ranked: &[u32]) -> f64 {
    let k = g.len().min(ranked.len());
    let mut hits = 0usize;
    for &r in &ranked[..k] {
        if g.contains(&r) {
            hits += 1;
        }
    }
    hits as f64 / g.len() as f64
}

/// Artist-level R-precision: each holdout artist occurrence is a slot that
/// a recommended track in the first |G| positions can consume at most once.
pub fn naive_r_precision_artist(g_artists: &[u32], ranked_artists: &[u32], g_len: usize) -> f64 {
    let mut slots: Vec<u32> = g_artists.to_vec();
    let mut hits = 0usize;
    let k = g_len.min(ranked_artists.len());
    for &a in &ranked_artists[..k] {
        if let Some(pos) = slots.iter().position(|&s| s == a) {
            slots.swap_remove(pos);
            hits += 1;
        }
    }
    hits as f64 / g_len as f64
}

/// NDCG with binary track-level relevance, written exactly as the published
/// equations: DCG = rel_1 + Σ_{i≥2} rel_i / log2(i+1), IDCG over |G| ones.
pub fn naive_ndcg(g: &[u32], ranked: &[u32]) -> f64 {
    let rel = |i: usize| -> f64 {
        if i <= ranked.len() && g.contains(&ranked[i - 1]) {
            1.0
        } else {
            0.0
        }
    };
    let mut dcg = rel(1);
    for i in 2..=ranked.len() {
        dcg += rel(i) / (i as f64 + 1.0).log2();
    }
    let mut idcg = 1.0;
    for i in 2..=g.len() {
        idcg += 1.0 / (i as f64 + 1.0).log2();
    }
    if dcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

/// CLICKS: floor((i*−1)/10) for the 1-indexed first hit i*, else 51.
pub fn naive_clicks(g: &[u32], ranked: &[u32]) -> f64 {
    for (i, r) in ranked.iter().enumerate() {
        if g.contains(r) {
            return ((i) / 10) as f64; // i is already i*−1
        }
    }
    51.0
}

// ---------------------------------------------------------------------------
// Dense brute-force co-occurrence oracle
// ---------------------------------------------------------------------------

/// A full dense co-occurrence matrix plus marginals, built by the direct
/// definition: one pass per playlist over the cartesian product of its
/// deduplicated context entities and deduplicated member tracks.
pub struct DenseIndex {
    pub co: Vec<Vec<u32>>, // [context][track]
    pub context_marginal: Vec<u32>,
    pub track_marginal: Vec<u32>,
}

pub fn dense_index(corpus: &Corpus, kind: ContextKind) -> DenseIndex {
    let n_tracks = corpus.track_count();
    let n_contexts = match kind {
        ContextKind::Track => n_tracks,
        ContextKind::Word => corpus.words.len(),
        ContextKind::Album => corpus.albums.len(),
        ContextKind::Artist => corpus.artists.len(),
    };
    let mut co = vec![vec![0u32; n_tracks]; n_contexts];
    let mut context_marginal = vec![0u32; n_contexts];
    let mut track_marginal = vec![0u32; n_tracks];

    for p in &corpus.playlists {
        let mut tracks: Vec<u32> = p.tracks.iter().map(|t| t.0).collect();
        tracks.sort_unstable();
        tracks.dedup();
        let mut contexts: Vec<u32> = match kind {
            ContextKind::Track => tracks.clone(),
            ContextKind::Word => p.title_tokens.iter().map(|w| w.0).collect(),
            ContextKind::Album => tracks.iter().map(|&t| corpus.album_of(TrackRef(t)).0).collect(),
            ContextKind::Artist => tracks.iter().map(|&t| corpus.artist_of(TrackRef(t)).0).collect(),
        };
        contexts.sort_unstable();
        contexts.dedup();

        for &c in &contexts {
            context_marginal[c as usize] += 1;
            for &t in &tracks {
                if kind == ContextKind::Track && c == t {
                    continue;
                }
                co[c as usize][t as usize] += 1;
            }
        }
        for &t in &tracks {
            track_marginal[t as usize] += 1;
        }
    }

    DenseIndex {
        co,
        context_marginal,
        track_marginal,
    }
}

// ---------------------------------------------------------------------------
// Random corpus / playlist generators
// ---------------------------------------------------------------------------

pub const TITLE_POOL: [&str; 6] = ["road", "trip", "chill", "gym", "party", "focus"];

/// Random source playlists over a `n_tracks` vocabulary: tracks drawn with
/// replacement (so duplicates occur), artists group threes, albums pairs.
pub fn random_source(
    rng: &mut impl Rng,
    max_playlists: usize,
    max_len: usize,
    n_tracks: usize,
) -> Vec<SourcePlaylist> {
    let n_playlists = rng.gen_range(1..=max_playlists);
    (0..n_playlists)
        .map(|pid| {
            let len = rng.gen_range(1..=max_len);
            let tracks = (0..len)
                .map(|_| {
                    let t = rng.gen_range(0..n_tracks);
                    SourceTrack {
                        track_uri: format!("t:{t}"),
                        artist_uri: format!("ar:{}", t / 3),
                        album_uri: format!("al:{}", t / 2),
                    }
                })
                .collect();
            let n_words = rng.gen_range(0..=3);
            let name = (0..n_words)
                .map(|_| TITLE_POOL[rng.gen_range(0..TITLE_POOL.len())])
                .collect::<Vec<_>>()
                .join(" ");
            SourcePlaylist {
                pid: pid as u64,
                name,
                tracks,
            }
        })
        .collect()
}

/// A random small corpus; see [`random_source`].
pub fn random_corpus(
    rng: &mut impl Rng,
    max_playlists: usize,
    max_len: usize,
    n_tracks: usize,
) -> Corpus {
    Corpus::from_source(&random_source(rng, max_playlists, max_len, n_tracks))
}

/// True when `needle` is a (not necessarily contiguous) subsequence of
/// `haystack`.
pub fn is_subsequence<T: PartialEq>(needle: &[T], haystack: &[T]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

// ---------------------------------------------------------------------------
// CLI workspace builder
// ---------------------------------------------------------------------------

pub struct WorkspaceSpec {
    pub synth: segue::synth::SynthConfig,
    /// Last training pid; opt and val split the remainder at `opt_to`.
    pub train_to: u64,
    pub opt_to: u64,
    pub quota: usize,
    pub budget: usize,
    pub n: usize,
    pub challenge_playlists: usize,
    /// Replace one challenge seed URI with one the corpus has never seen.
    pub poison_unknown_uri: bool,
}

/// Writes a complete CLI workspace (slices, challenge file, run.toml)
/// under `dir` and returns the config path.
pub fn write_cli_workspace(dir: &std::path::Path, spec: &WorkspaceSpec) -> std::path::PathBuf {
    use segue::synth::{generate_source, write_slices, SynthConfig};

    let data_dir = dir.join("data");
    std::fs::create_dir_all(&data_dir).unwrap();
    let source = generate_source(&spec.synth);
    let slice_paths = write_slices(&source, &data_dir, 800).unwrap();

    let challenge_source = generate_source(&SynthConfig {
        n_playlists: spec.challenge_playlists,
        rng_seed: spec.synth.rng_seed + 1,
        ..spec.synth.clone()
    });
    let seed_counts = [0usize, 1, 5, 10, 25, 100];
    let challenge: Vec<serde_json::Value> = challenge_source
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let wanted = seed_counts[i % seed_counts.len()];
            let k = seed_counts
                .iter()
                .copied()
                .filter(|&k| k <= wanted && k < p.tracks.len())
                .max()
                .unwrap_or(0);
            let mut tracks: Vec<serde_json::Value> = p
                .tracks
                .iter()
                .take(k)
                .map(|t| serde_json::to_value(t).unwrap())
                .collect();
            if spec.poison_unknown_uri && i == 2 {
                tracks[0]["track_uri"] = serde_json::json!("synth:track:error");
            }
            let mut obj = serde_json::json!({
                "pid": 9_000_000 + p.pid,
                "tracks": tracks,
            });
            let hide = (k == 5 || k == 10) && (i / seed_counts.len()) % 2 == 1;
            if !hide {
                obj["name"] = serde_json::json!(p.name);
            }
            obj
        })
        .collect();
    std::fs::write(
        dir.join("challenge.json"),
        serde_json::to_string(&serde_json::json!({ "playlists": challenge })).unwrap(),
    )
    .unwrap();

    let slices_toml: Vec<String> = slice_paths
        .iter()
        .map(|p| format!("{:?}", p.to_string_lossy()))
        .collect();
    let config_path = dir.join("run.toml");
    std::fs::write(
        &config_path,
        format!(
            r#"[corpus]
slices = [{slices}]

[splits]
train = [0, {train_to}]
opt = [{opt_from}, {opt_to}]
val = [{val_from}, {val_to}]
opt_seed = 1
val_seed = 2
quota_per_category = {quota}

[model]
instantiation = "local_weights_with_album"
normalization = "cosine"
n = {n}

[tpe]
budget = {budget}
rng_seed = 42

[output]
dir = {out:?}

[team]
name = "ci"
contact = "ci@example.org"
"#,
            slices = slices_toml.join(", "),
            train_to = spec.train_to,
            opt_from = spec.train_to + 1,
            opt_to = spec.opt_to,
            val_from = spec.opt_to + 1,
            val_to = spec.synth.n_playlists as u64 - 1,
            quota = spec.quota,
            n = spec.n,
            budget = spec.budget,
            out = dir.join("run").to_string_lossy(),
        ),
    )
    .unwrap();
    config_path
}

/// An eval playlist carved from nothing: seeds and title are taken as
/// given, the category is whatever the caller claims.
pub fn eval_playlist(
    pid: u64,
    category: ChallengeCategory,
    title_tokens: Vec<u32>,
    seeds: Vec<u32>,
    holdout: Vec<u32>,
) -> EvalPlaylist {
    EvalPlaylist {
        pid,
        category,
        title_tokens: title_tokens.into_iter().map(WordRef).collect(),
        seed_tracks: seeds.into_iter().map(TrackRef).collect(),
        holdout_tracks: holdout.into_iter().map(TrackRef).collect(),
    }
}
