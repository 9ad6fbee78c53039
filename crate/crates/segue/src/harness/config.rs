//! Run configuration: a TOML file with one section per pipeline concern,
//! plus a desk-scale switch that shrinks every expensive default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cooccur::NormalizationScheme;
use crate::corpus::{ChallengeCategory, PidRange};

use super::HarnessError;

/// Which model family the run optimizes and evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instantiation {
    /// One weight set tuned over all categories; no album completion.
    GlobalWeights,
    /// Per-category weights; no album completion.
    LocalWeightsNoAlbum,
    /// Per-category weights plus the album-completion threshold `m`.
    LocalWeightsWithAlbum,
    /// No tuning: recommend by overall popularity only.
    PopularityBaseline,
}

impl Instantiation {
    pub fn label(self) -> &'static str {
        match self {
            Instantiation::GlobalWeights => "global_weights",
            Instantiation::LocalWeightsNoAlbum => "local_weights_no_album",
            Instantiation::LocalWeightsWithAlbum => "local_weights_with_album",
            Instantiation::PopularityBaseline => "popularity_baseline",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    /// JSON slice files, ingested in order.
    pub slices: Vec<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitsSection {
    /// Training playlists (index building, popularity).
    pub train: PidRange,
    /// Optimization split: TPE objective evaluations only.
    pub opt: PidRange,
    /// Validation split: final evaluation only.
    pub val: PidRange,
    #[serde(default = "default_opt_seed")]
    pub opt_seed: u64,
    #[serde(default = "default_val_seed")]
    pub val_seed: u64,
    /// Playlists carved per challenge category, for both eval splits.
    #[serde(default = "default_quota")]
    pub quota_per_category: usize,
}

fn default_opt_seed() -> u64 {
    1
}

fn default_val_seed() -> u64 {
    2
}

fn default_quota() -> usize {
    1000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub instantiation: Instantiation,
    #[serde(default)]
    pub normalization: NormalizationScheme,
    /// Recommendation list length.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Optional cap on the training track vocabulary: only the
    /// `track_vocab_cap` most popular training tracks feed the indices and
    /// the backfill ranking.
    #[serde(default)]
    pub track_vocab_cap: Option<usize>,
}

fn default_n() -> usize {
    500
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TpeSection {
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for TpeSection {
    fn default() -> Self {
        Self {
            budget: default_budget(),
            rng_seed: 0,
        }
    }
}

fn default_budget() -> usize {
    100
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// All artifacts of a run live under this directory.
    pub dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeamSection {
    pub name: String,
    pub contact: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusSection,
    pub splits: SplitsSection,
    pub model: ModelSection,
    #[serde(default)]
    pub tpe: TpeSection,
    pub output: OutputSection,
    /// Required by `submit` for the CSV header.
    #[serde(default)]
    pub team: Option<TeamSection>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| HarnessError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate().map_err(|message| HarnessError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.corpus.slices.is_empty() {
            return Err("corpus.slices must list at least one file".into());
        }
        let ranges = [
            ("train", self.splits.train),
            ("opt", self.splits.opt),
            ("val", self.splits.val),
        ];
        for (name, r) in ranges {
            if r.lo > r.hi {
                return Err(format!("splits.{name} is empty: {r}"));
            }
        }
        for i in 0..ranges.len() {
            for j in i + 1..ranges.len() {
                if ranges[i].1.overlaps(&ranges[j].1) {
                    return Err(format!(
                        "split ranges must be pairwise disjoint: {} ({}) overlaps {} ({})",
                        ranges[i].0, ranges[i].1, ranges[j].0, ranges[j].1
                    ));
                }
            }
        }
        if self.splits.quota_per_category == 0 {
            return Err("splits.quota_per_category must be >= 1".into());
        }
        if self.model.n == 0 {
            return Err("model.n must be >= 1".into());
        }
        if self.model.track_vocab_cap == Some(0) {
            return Err("model.track_vocab_cap must be >= 1 when set".into());
        }
        if self.tpe.budget == 0 {
            return Err("tpe.budget must be >= 1".into());
        }
        Ok(())
    }

    /// Shrinks the expensive knobs so a full pipeline runs in minutes on a
    /// laptop: N=50, budget=30, quotas capped at 40 per category.
    pub fn apply_desk_scale(&mut self) {
        self.model.n = 50;
        self.tpe.budget = 30;
        self.splits.quota_per_category = self.splits.quota_per_category.min(40);
    }

    /// Uniform per-category quotas for the eval splits.
    pub fn quotas(&self) -> BTreeMap<ChallengeCategory, usize> {
        ChallengeCategory::ALL
            .into_iter()
            .map(|c| (c, self.splits.quota_per_category))
            .collect()
    }
}
