//! Per-run provenance manifest: which command ran, under which config and
//! corpus (by content hash), with which binary version.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::HarnessError;

/// Set by the build script from `git describe`; "unknown" outside a git
/// checkout.
pub const GIT_VERSION: &str = env!("SEGUE_GIT_VERSION");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    /// Crate version plus git-describe output.
    pub version: String,
    pub created_unix: u64,
    /// SHA-256 of the canonical JSON form of the effective config.
    pub config_sha256: String,
    /// SHA-256 of the ingested corpus artifact; "unavailable" before ingest.
    pub corpus_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    sha256_hex(&canonical)
}

pub fn file_hash(path: &Path) -> Option<String> {
    std::fs::read(path).ok().map(|bytes| sha256_hex(&bytes))
}

impl Manifest {
    /// Builds the manifest for one command. `corpus_artifact` is the
    /// corpus.json path; its hash is recorded when the file exists.
    pub fn for_run(command: &str, config: &RunConfig, corpus_artifact: &Path) -> Manifest {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Manifest {
            command: command.to_string(),
            version: format!("{} ({GIT_VERSION})", env!("CARGO_PKG_VERSION")),
            created_unix,
            config_sha256: config_hash(config),
            corpus_sha256: file_hash(corpus_artifact).unwrap_or_else(|| "unavailable".into()),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json).map_err(|e| HarnessError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_matches_known_vector() {
        // SHA-256("abc"), a published test vector.
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn config_hash_is_stable_and_content_sensitive() {
        let toml_text = r#"
            [corpus]
            slices = ["a.json"]
            [splits]
            train = [0, 9]
            opt = [10, 19]
            val = [20, 29]
            [model]
            instantiation = "global_weights"
            [output]
            dir = "out"
        "#;
        let a: RunConfig = toml::from_str(toml_text).unwrap();
        let b: RunConfig = toml::from_str(toml_text).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        let mut c = a.clone();
        c.model.n = 7;
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn manifest_round_trips_and_marks_missing_corpus() {
        let config: RunConfig = toml::from_str(
            r#"
            [corpus]
            slices = ["a.json"]
            [splits]
            train = [0, 9]
            opt = [10, 19]
            val = [20, 29]
            [model]
            instantiation = "global_weights"
            [output]
            dir = "out"
        "#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = Manifest::for_run("ingest", &config, &dir.path().join("missing.json"));
        assert_eq!(manifest.corpus_sha256, "unavailable");
        assert!(manifest.version.contains(env!("CARGO_PKG_VERSION")));
        let path = dir.path().join("manifest.json");
        manifest.write(&path).unwrap();
        let loaded: Manifest =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(loaded.command, "ingest");
        assert_eq!(loaded.config_sha256, manifest.config_sha256);
    }
}
