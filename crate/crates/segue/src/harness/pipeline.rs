//! The pipeline stages behind the CLI subcommands.
//!
//! Determinism contract: given the same corpus, config, and seeds, every
//! stage produces bit-identical artifacts (the manifest, which carries a
//! timestamp, is the one exception). Parallel sections therefore collect
//! per-playlist results into position-stable vectors and reduce
//! sequentially; nothing depends on thread scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tpe::{ParamSpec, ParamValue, Params, TpeConfig};

use crate::compose::{
    write_submission, AlbumThreshold, CompositionWeights, Recommendation, Recommender,
    WeightProfile,
};
use crate::cooccur::IndexSet;
use crate::corpus::{
    self, ChallengeCategory, Corpus, EvalPlaylist, PidRange,
};
use crate::metrics::{self, EvalReport, GroundTruth, Level};

use super::config::{Instantiation, RunConfig};
use super::manifest::Manifest;
use super::HarnessError;

// ---------------------------------------------------------------------------
// Artifact layout

/// Canonical artifact paths under one run directory.
#[derive(Clone, Debug)]
pub struct RunPaths {
    pub dir: PathBuf,
}

impl RunPaths {
    pub fn new(dir: &Path) -> RunPaths {
        RunPaths {
            dir: dir.to_path_buf(),
        }
    }

    pub fn corpus(&self) -> PathBuf {
        self.dir.join("corpus.json")
    }

    pub fn split(&self, which: SplitKind) -> PathBuf {
        self.dir.join(format!("split_{}.jsonl", which.label()))
    }

    pub fn split_stats(&self, which: SplitKind) -> PathBuf {
        self.dir.join(format!("split_stats_{}.txt", which.label()))
    }

    pub fn index_dir(&self) -> PathBuf {
        self.dir.clone()
    }

    pub fn trials_dir(&self) -> PathBuf {
        self.dir.join("trials")
    }

    pub fn trial_log(&self, label: &str) -> PathBuf {
        self.trials_dir().join(format!("{label}.jsonl"))
    }

    pub fn weights(&self) -> PathBuf {
        self.dir.join("weights.json")
    }

    pub fn weight_table(&self) -> PathBuf {
        self.dir.join("weight_table.txt")
    }

    pub fn report_txt(&self) -> PathBuf {
        self.dir.join("report.txt")
    }

    pub fn report_json(&self) -> PathBuf {
        self.dir.join("report.json")
    }

    pub fn per_playlist(&self) -> PathBuf {
        self.dir.join("per_playlist.jsonl")
    }

    pub fn recommendations(&self) -> PathBuf {
        self.dir.join("recommendations.jsonl")
    }

    pub fn submission(&self) -> PathBuf {
        self.dir.join("submission.csv")
    }

    pub fn manifest(&self) -> PathBuf {
        self.dir.join("manifest.json")
    }

    pub fn ensure_dir(&self) -> Result<(), HarnessError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| HarnessError::Io {
            path: self.dir.clone(),
            message: e.to_string(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitKind {
    Opt,
    Val,
}

impl SplitKind {
    pub fn label(self) -> &'static str {
        match self {
            SplitKind::Opt => "opt",
            SplitKind::Val => "val",
        }
    }
}

fn require(path: PathBuf, hint: &'static str) -> Result<PathBuf, HarnessError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(HarnessError::MissingArtifact { path, hint })
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn stamp_manifest(command: &str, config: &RunConfig, paths: &RunPaths) -> Result<(), HarnessError> {
    Manifest::for_run(command, config, &paths.corpus()).write(&paths.manifest())
}

// ---------------------------------------------------------------------------
// Shared stage inputs

/// Loads the ingested corpus artifact.
pub fn load_corpus_artifact(paths: &RunPaths) -> Result<Corpus, HarnessError> {
    let path = require(paths.corpus(), "run `segue ingest` first")?;
    Ok(Corpus::load(&path)?)
}

/// The training view of the corpus: train-range playlists only, optionally
/// with the track vocabulary capped to the most popular training tracks.
/// Entity ids are shared with the full corpus.
pub fn train_corpus(config: &RunConfig, corpus: &Corpus) -> Corpus {
    let train: PidRange = config.splits.train;
    let mut filtered = corpus.filtered_by_pid(|pid| train.contains(pid));
    if let Some(cap) = config.model.track_vocab_cap {
        if cap < filtered.track_count() {
            let ranking = corpus::popularity_ranking(&filtered);
            let mut keep = vec![false; filtered.track_count()];
            for &t in ranking.iter().take(cap) {
                keep[t.idx()] = true;
            }
            filtered.retain_tracks(|t| keep[t.idx()]);
        }
    }
    filtered
}

fn load_split(paths: &RunPaths, which: SplitKind) -> Result<Vec<EvalPlaylist>, HarnessError> {
    let path = require(paths.split(which), "run `segue split` first")?;
    Ok(corpus::read_split_manifest(&path)?)
}

fn load_indices(paths: &RunPaths) -> Result<IndexSet, HarnessError> {
    require(
        paths.index_dir().join(IndexSet::file_name(crate::cooccur::ContextKind::Track)),
        "run `segue build-index` first",
    )?;
    Ok(IndexSet::load_dir(&paths.index_dir())?)
}

fn load_profile(paths: &RunPaths, override_path: Option<&Path>) -> Result<WeightProfile, HarnessError> {
    let path = match override_path {
        Some(p) => require(p.to_path_buf(), "weight file not found")?,
        None => require(paths.weights(), "run `segue optimize` first")?,
    };
    Ok(WeightProfile::load(&path)?)
}

// ---------------------------------------------------------------------------
// ingest / split / build-index

pub struct IngestSummary {
    pub playlists: usize,
    pub tracks: usize,
    pub artists: usize,
    pub albums: usize,
    pub words: usize,
}

pub fn run_ingest(config: &RunConfig, paths: &RunPaths) -> Result<IngestSummary, HarnessError> {
    paths.ensure_dir()?;
    let corpus = corpus::load_corpus(&config.corpus.slices)?;
    corpus.save(&paths.corpus())?;
    stamp_manifest("ingest", config, paths)?;
    Ok(IngestSummary {
        playlists: corpus.playlist_count(),
        tracks: corpus.track_count(),
        artists: corpus.artists.len(),
        albums: corpus.albums.len(),
        words: corpus.words.len(),
    })
}

pub fn run_split(config: &RunConfig, paths: &RunPaths) -> Result<(usize, usize), HarnessError> {
    paths.ensure_dir()?;
    let corpus = load_corpus_artifact(paths)?;
    let quotas = config.quotas();
    let mut sizes = (0usize, 0usize);
    for (which, range, seed) in [
        (SplitKind::Opt, config.splits.opt, config.splits.opt_seed),
        (SplitKind::Val, config.splits.val, config.splits.val_seed),
    ] {
        let split = corpus::make_eval_split(&corpus, range, &quotas, seed)?;
        corpus::write_split_manifest(&paths.split(which), &split)?;
        write_text(&paths.split_stats(which), &corpus::split_stats_table(&split, &corpus))?;
        match which {
            SplitKind::Opt => sizes.0 = split.len(),
            SplitKind::Val => sizes.1 = split.len(),
        }
    }
    stamp_manifest("split", config, paths)?;
    Ok(sizes)
}

pub fn run_build_index(config: &RunConfig, paths: &RunPaths) -> Result<Vec<String>, HarnessError> {
    paths.ensure_dir()?;
    let corpus = load_corpus_artifact(paths)?;
    let train = train_corpus(config, &corpus);
    let indices = IndexSet::build(&train);
    indices.save_dir(&paths.index_dir())?;
    stamp_manifest("build-index", config, paths)?;
    Ok(crate::cooccur::ContextKind::ALL
        .into_iter()
        .map(|kind| {
            let stats = indices.get(kind).stats();
            format!(
                "{}: {} contexts, {} entries",
                kind.label(),
                stats.contexts,
                stats.entries
            )
        })
        .collect())
}

// ---------------------------------------------------------------------------
// optimize

/// Search space for one TPE run. `category` is `None` in global mode.
/// Models whose context cannot exist are pinned to zero by omission: the
/// word weight for no-title categories, and everything but the word weight
/// when only the title is available.
fn search_space(instantiation: Instantiation, category: Option<ChallengeCategory>) -> Vec<ParamSpec> {
    let mut space = Vec::new();
    let (has_seeds, has_title) = match category {
        None => (true, true),
        Some(c) => (c.seed_count() > 0, c.has_title()),
    };
    if has_seeds {
        space.push(ParamSpec::uniform("w_track", 0.0, 1.0));
    }
    if has_title {
        space.push(ParamSpec::uniform("w_word", 0.0, 1.0));
    }
    if has_seeds {
        space.push(ParamSpec::uniform("w_album", 0.0, 1.0));
        space.push(ParamSpec::uniform("w_artist", 0.0, 1.0));
        if category.is_some() && instantiation == Instantiation::LocalWeightsWithAlbum {
            space.push(ParamSpec::quantized_uniform("m", 1.0, 10.0, 1.0));
        }
    }
    space
}

/// Parameters absent from the space stay at zero influence; a missing `m`
/// disables album completion.
fn weights_from_params(params: &Params) -> CompositionWeights {
    let real = |name: &str| params.get(name).and_then(ParamValue::as_real).unwrap_or(0.0);
    CompositionWeights {
        w_track: real("w_track"),
        w_word: real("w_word"),
        w_album: real("w_album"),
        w_artist: real("w_artist"),
        album_threshold: match params.get("m").and_then(ParamValue::as_real) {
            Some(m) => AlbumThreshold::Finite(m.round() as u32),
            None => AlbumThreshold::Infinite,
        },
    }
}

/// Mean NDCG over a fixed playlist set, negated for the minimizer. The
/// per-playlist scores are collected in order and summed sequentially so
/// the value is independent of worker scheduling.
fn negated_mean_ndcg(
    recommender: &Recommender,
    playlists: &[EvalPlaylist],
    truths: &[GroundTruth],
    weights: &CompositionWeights,
) -> f64 {
    let scores: Vec<f64> = playlists
        .par_iter()
        .zip(truths.par_iter())
        .map(|(ep, gt)| match recommender.recommend(ep, weights) {
            Ok(rec) => metrics::ndcg(gt, &rec.tracks),
            Err(_) => f64::NAN,
        })
        .collect();
    let total: f64 = scores.iter().sum();
    -(total / playlists.len().max(1) as f64)
}

fn ground_truths(split: &[EvalPlaylist], corpus: &Corpus) -> Result<Vec<GroundTruth>, HarnessError> {
    split
        .iter()
        .map(|ep| {
            GroundTruth::new(&ep.holdout_tracks, corpus).map_err(|_| {
                HarnessError::Invalid(format!("playlist {} has an empty holdout", ep.pid))
            })
        })
        .collect()
}

pub struct OptimizeOutcome {
    pub profile: WeightProfile,
    pub table: String,
    /// (label, best objective = −mean NDCG, trials run) per TPE run.
    pub runs: Vec<(String, f64, usize)>,
}

pub fn run_optimize(config: &RunConfig, paths: &RunPaths) -> Result<OptimizeOutcome, HarnessError> {
    paths.ensure_dir()?;
    let corpus = load_corpus_artifact(paths)?;
    let train = train_corpus(config, &corpus);
    let indices = load_indices(paths)?;
    let split = load_split(paths, SplitKind::Opt)?;
    let recommender = Recommender::new(&train, &indices, config.model.normalization, config.model.n);
    feasibility_check(config, &corpus)?;

    let instantiation = config.model.instantiation;
    let mut runs = Vec::new();

    let profile = match instantiation {
        Instantiation::PopularityBaseline => WeightProfile::Global {
            weights: CompositionWeights::default(),
        },
        Instantiation::GlobalWeights => {
            let truths = ground_truths(&split, &corpus)?;
            let space = search_space(instantiation, None);
            let tpe_config = TpeConfig::default().with_seed(config.tpe.rng_seed);
            std::fs::create_dir_all(paths.trials_dir()).map_err(|e| HarnessError::Io {
                path: paths.trials_dir(),
                message: e.to_string(),
            })?;
            let mut objective = |params: &Params| {
                negated_mean_ndcg(&recommender, &split, &truths, &weights_from_params(params))
            };
            let (best, history) = tpe::optimize_with_log(
                &mut objective,
                &space,
                config.tpe.budget,
                &tpe_config,
                &paths.trial_log("global"),
            )?;
            runs.push(("global".to_string(), best.objective, history.len()));
            WeightProfile::Global {
                weights: weights_from_params(&best.params),
            }
        }
        Instantiation::LocalWeightsNoAlbum | Instantiation::LocalWeightsWithAlbum => {
            std::fs::create_dir_all(paths.trials_dir()).map_err(|e| HarnessError::Io {
                path: paths.trials_dir(),
                message: e.to_string(),
            })?;
            let mut categories = BTreeMap::new();
            for (rank, category) in ChallengeCategory::ALL.into_iter().enumerate() {
                let subset: Vec<EvalPlaylist> = split
                    .iter()
                    .filter(|ep| ep.category == category)
                    .cloned()
                    .collect();
                if subset.is_empty() {
                    continue;
                }
                let truths = ground_truths(&subset, &corpus)?;
                let space = search_space(instantiation, Some(category));
                let tpe_config =
                    TpeConfig::default().with_seed(config.tpe.rng_seed.wrapping_add(1 + rank as u64));
                let mut objective = |params: &Params| {
                    negated_mean_ndcg(&recommender, &subset, &truths, &weights_from_params(params))
                };
                let (best, history) = tpe::optimize_with_log(
                    &mut objective,
                    &space,
                    config.tpe.budget,
                    &tpe_config,
                    &paths.trial_log(category.label()),
                )?;
                runs.push((category.label().to_string(), best.objective, history.len()));
                categories.insert(category, weights_from_params(&best.params));
            }
            WeightProfile::Local { categories }
        }
    };

    let table = weight_table_text(&profile);
    profile.save(&paths.weights())?;
    write_text(&paths.weight_table(), &table)?;
    stamp_manifest("optimize", config, paths)?;
    Ok(OptimizeOutcome {
        profile,
        table,
        runs,
    })
}

/// The recommendation quota must be satisfiable for every playlist; the
/// largest seed set a challenge category reveals is 100 tracks.
fn feasibility_check(config: &RunConfig, corpus: &Corpus) -> Result<(), HarnessError> {
    let max_seeds = 100;
    if corpus.track_count() < config.model.n + max_seeds {
        return Err(HarnessError::Invalid(format!(
            "model.n = {} cannot be met: corpus has {} tracks and up to {max_seeds} are seeds",
            config.model.n,
            corpus.track_count()
        )));
    }
    Ok(())
}

/// The tuned-weight table: one row per challenge category (local) or a
/// single `global` row, with one column per composition weight.
pub fn weight_table_text(profile: &WeightProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:>7} {:>7} {:>7} {:>7} {:>5}",
        "Category", "W_u", "W_w", "W_al", "W_ar", "m"
    );
    let mut row = |label: &str, w: &CompositionWeights| {
        let m = match w.album_threshold {
            AlbumThreshold::Finite(m) => m.to_string(),
            AlbumThreshold::Infinite => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "{label:<14} {:>7.3} {:>7.3} {:>7.3} {:>7.3} {m:>5}",
            w.w_track, w.w_word, w.w_album, w.w_artist
        );
    };
    match profile {
        WeightProfile::Global { weights } => row("global", weights),
        WeightProfile::Local { categories } => {
            for category in ChallengeCategory::TABLE_ORDER {
                if let Some(weights) = categories.get(&category) {
                    row(category.label(), weights);
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// evaluate

/// Recommends for every playlist of the split under its category weights.
/// Fails fast if the profile lacks a category the split needs.
fn recommend_all(
    recommender: &Recommender,
    playlists: &[EvalPlaylist],
    profile: &WeightProfile,
) -> Result<Vec<Recommendation>, HarnessError> {
    let mut weights_by_category: BTreeMap<ChallengeCategory, CompositionWeights> = BTreeMap::new();
    for ep in playlists {
        if let std::collections::btree_map::Entry::Vacant(e) = weights_by_category.entry(ep.category) {
            e.insert(*profile.weights_for(ep.category)?);
        }
    }
    let results: Vec<Result<Recommendation, HarnessError>> = playlists
        .par_iter()
        .map(|ep| {
            let weights = &weights_by_category[&ep.category];
            recommender.recommend(ep, weights).map_err(HarnessError::from)
        })
        .collect();
    results.into_iter().collect()
}

pub fn run_evaluate(
    config: &RunConfig,
    paths: &RunPaths,
    weights_override: Option<&Path>,
) -> Result<EvalReport, HarnessError> {
    paths.ensure_dir()?;
    let corpus = load_corpus_artifact(paths)?;
    let train = train_corpus(config, &corpus);
    let indices = load_indices(paths)?;
    let split = load_split(paths, SplitKind::Val)?;
    let profile = load_profile(paths, weights_override)?;
    let recommender = Recommender::new(&train, &indices, config.model.normalization, config.model.n);

    let recommendations = recommend_all(&recommender, &split, &profile)?;
    let report = metrics::evaluate_set(&split, &recommendations, &corpus, Level::Artist)?;

    write_text(&paths.report_txt(), &report.table_text())?;
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_text(&paths.report_json(), &report_json)?;
    report.write_per_playlist_jsonl(&paths.per_playlist())?;
    stamp_manifest("evaluate", config, paths)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// recommend / submit

pub struct ChallengeOutcome {
    pub playlists: usize,
    pub unknown_seed_uris: usize,
    pub out_path: PathBuf,
}

fn load_challenge_playlists(
    corpus: &Corpus,
    challenge: &Path,
) -> Result<(Vec<EvalPlaylist>, usize), HarnessError> {
    let set = corpus::load_challenge(challenge, corpus)?;
    Ok((set.playlists, set.unknown_seed_uris.len()))
}

pub fn run_recommend(
    config: &RunConfig,
    paths: &RunPaths,
    challenge: &Path,
    weights_override: Option<&Path>,
    out: Option<&Path>,
) -> Result<ChallengeOutcome, HarnessError> {
    paths.ensure_dir()?;
    let corpus = load_corpus_artifact(paths)?;
    let train = train_corpus(config, &corpus);
    let indices = load_indices(paths)?;
    let profile = load_profile(paths, weights_override)?;
    let recommender = Recommender::new(&train, &indices, config.model.normalization, config.model.n);

    let (playlists, unknown) = load_challenge_playlists(&corpus, challenge)?;
    let recommendations = recommend_all(&recommender, &playlists, &profile)?;

    let out_path = out.map(Path::to_path_buf).unwrap_or_else(|| paths.recommendations());
    let file = std::fs::File::create(&out_path).map_err(|e| HarnessError::Io {
        path: out_path.clone(),
        message: e.to_string(),
    })?;
    let mut writer = std::io::BufWriter::new(file);
    for rec in &recommendations {
        let uris: Vec<&str> = rec.tracks.iter().map(|&t| corpus.tracks.name(t.0)).collect();
        let line = serde_json::json!({ "pid": rec.pid, "tracks": uris });
        writeln!(writer, "{line}").map_err(|e| HarnessError::Io {
            path: out_path.clone(),
            message: e.to_string(),
        })?;
    }
    writer.flush().map_err(|e| HarnessError::Io {
        path: out_path.clone(),
        message: e.to_string(),
    })?;
    stamp_manifest("recommend", config, paths)?;
    Ok(ChallengeOutcome {
        playlists: recommendations.len(),
        unknown_seed_uris: unknown,
        out_path,
    })
}

pub fn run_submit(
    config: &RunConfig,
    paths: &RunPaths,
    challenge: &Path,
    weights_override: Option<&Path>,
    out: Option<&Path>,
) -> Result<ChallengeOutcome, HarnessError> {
    paths.ensure_dir()?;
    let team = config.team.as_ref().ok_or_else(|| {
        HarnessError::Invalid("submit needs a [team] section (name, contact) in the config".into())
    })?;
    let corpus = load_corpus_artifact(paths)?;
    let train = train_corpus(config, &corpus);
    let indices = load_indices(paths)?;
    let profile = load_profile(paths, weights_override)?;
    let recommender = Recommender::new(&train, &indices, config.model.normalization, config.model.n);

    let (playlists, unknown) = load_challenge_playlists(&corpus, challenge)?;
    let recommendations = recommend_all(&recommender, &playlists, &profile)?;

    let out_path = out.map(Path::to_path_buf).unwrap_or_else(|| paths.submission());
    let file = std::fs::File::create(&out_path).map_err(|e| HarnessError::Io {
        path: out_path.clone(),
        message: e.to_string(),
    })?;
    let mut writer = std::io::BufWriter::new(file);
    write_submission(&mut writer, &team.name, &team.contact, &recommendations, &corpus).map_err(
        |e| HarnessError::Io {
            path: out_path.clone(),
            message: e.to_string(),
        },
    )?;
    writer.flush().map_err(|e| HarnessError::Io {
        path: out_path.clone(),
        message: e.to_string(),
    })?;
    stamp_manifest("submit", config, paths)?;
    Ok(ChallengeOutcome {
        playlists: recommendations.len(),
        unknown_seed_uris: unknown,
        out_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn search_space_shapes_follow_category_information() {
        let names = |space: &[ParamSpec]| {
            space.iter().map(|s| s.name.clone()).collect::<Vec<_>>()
        };
        // Title only: nothing but the word model can matter.
        let space = search_space(
            Instantiation::LocalWeightsWithAlbum,
            Some(ChallengeCategory::TitleOnly),
        );
        assert_eq!(names(&space), ["w_word"]);
        // No-title categories: no word weight.
        let space = search_space(
            Instantiation::LocalWeightsWithAlbum,
            Some(ChallengeCategory::NoTitle10First),
        );
        assert_eq!(names(&space), ["w_track", "w_album", "w_artist", "m"]);
        // Titled seed categories search everything.
        let space = search_space(
            Instantiation::LocalWeightsWithAlbum,
            Some(ChallengeCategory::Title25Random),
        );
        assert_eq!(names(&space), ["w_track", "w_word", "w_album", "w_artist", "m"]);
        // No-album instantiation drops m.
        let space = search_space(
            Instantiation::LocalWeightsNoAlbum,
            Some(ChallengeCategory::Title25Random),
        );
        assert_eq!(names(&space), ["w_track", "w_word", "w_album", "w_artist"]);
        // Global mode: all four weights, no m.
        let space = search_space(Instantiation::GlobalWeights, None);
        assert_eq!(names(&space), ["w_track", "w_word", "w_album", "w_artist"]);
    }

    #[test]
    fn missing_params_mean_zero_weight_and_no_album_completion() {
        let mut params = Params::default();
        params.insert("w_word", ParamValue::Real(0.8));
        let w = weights_from_params(&params);
        assert_eq!(w.w_word, 0.8);
        assert_eq!(w.w_track, 0.0);
        assert_eq!(w.album_threshold, AlbumThreshold::Infinite);

        params.insert("m", ParamValue::Real(3.0));
        let w = weights_from_params(&params);
        assert_eq!(w.album_threshold, AlbumThreshold::Finite(3));
    }

    #[test]
    fn weight_table_emits_one_row_per_tuned_unit() {
        let global = WeightProfile::Global {
            weights: CompositionWeights {
                w_track: 1.0,
                w_word: 0.517,
                w_album: 0.084,
                w_artist: 0.056,
                album_threshold: AlbumThreshold::Infinite,
            },
        };
        let text = weight_table_text(&global);
        assert_eq!(text.lines().count(), 2, "header + one row:\n{text}");
        assert!(text.contains("global"));
        assert!(text.contains('-'), "infinite threshold renders as -");

        let mut categories = BTreeMap::new();
        for category in ChallengeCategory::ALL {
            categories.insert(
                category,
                CompositionWeights {
                    album_threshold: AlbumThreshold::Finite(2),
                    ..Default::default()
                },
            );
        }
        let local = WeightProfile::Local { categories };
        let text = weight_table_text(&local);
        assert_eq!(text.lines().count(), 11, "header + ten rows:\n{text}");
        assert!(text.contains("title_only"));
        assert!(text.contains("100_random"));
    }

    #[test]
    fn missing_artifacts_name_the_prerequisite_command() {
        let dir = tempfile::tempdir().unwrap();
        let paths = RunPaths::new(&dir.path().join("run"));
        match load_corpus_artifact(&paths) {
            Err(HarnessError::MissingArtifact { hint, .. }) => {
                assert!(hint.contains("ingest"));
            }
            other => panic!("want MissingArtifact, got {other:?}"),
        }
    }
}
