//! Generates a self-contained demo workspace: synthetic corpus slices, a
//! small challenge file, and a ready-to-run `run.toml`.
//!
//! ```text
//! cargo run -p segue --example make_demo_corpus -- demo
//! ```

use std::io::Write;
use std::path::Path;

use segue::synth::{generate_source, write_slices, SynthConfig};

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "demo".to_string());
    let dir = Path::new(&dir);
    let data_dir = dir.join("data");
    std::fs::create_dir_all(&data_dir)?;

    let config = SynthConfig {
        n_genres: 4,
        tracks_per_genre: 180,
        n_playlists: 3000,
        rng_seed: 7,
        ..SynthConfig::default()
    };
    let source = generate_source(&config);
    let slice_paths = write_slices(&source, &data_dir, 1000)?;

    // Challenge file: fresh playlists over the same track universe, with
    // only a seed prefix revealed. Seed counts cycle through the challenge
    // categories; titleless entries leave out "name".
    let challenge_source = generate_source(&SynthConfig {
        n_playlists: 48,
        rng_seed: 8,
        ..config.clone()
    });
    let seed_counts = [0usize, 1, 5, 10, 25, 100];
    let challenge: Vec<serde_json::Value> = challenge_source
        .iter()
        .enumerate()
        .map(|(i, p)| {
            // Ask for the cycle's seed count, falling back to the largest
            // valid one for short playlists (a seed count must leave at
            // least one track and match a challenge category).
            let wanted = seed_counts[i % seed_counts.len()];
            let k = seed_counts
                .iter()
                .copied()
                .filter(|&k| k <= wanted && k < p.tracks.len())
                .max()
                .unwrap_or(0);
            let tracks: Vec<&segue::corpus::SourceTrack> = p.tracks.iter().take(k).collect();
            let mut obj = serde_json::json!({
                "pid": 1_000_000 + p.pid,
                "tracks": tracks,
            });
            // Hide the title on alternating cycles, but only where a
            // no-title challenge category exists (5 and 10 seeds).
            let hide = (k == 5 || k == 10) && (i / seed_counts.len()) % 2 == 1;
            if !hide {
                obj["name"] = serde_json::json!(p.name);
            }
            obj
        })
        .collect();
    let challenge_path = dir.join("challenge.json");
    std::fs::write(
        &challenge_path,
        serde_json::to_string_pretty(&serde_json::json!({ "playlists": challenge }))?,
    )?;

    let slices_toml: Vec<String> = slice_paths
        .iter()
        .map(|p| format!("{:?}", p.to_string_lossy()))
        .collect();
    let run_toml = format!(
        r#"[corpus]
slices = [{slices}]

[splits]
train = [0, 2399]
opt = [2400, 2699]
val = [2700, 2999]
opt_seed = 1
val_seed = 2
quota_per_category = 10

[model]
instantiation = "local_weights_with_album"
normalization = "cosine"
n = 50

[tpe]
budget = 20
rng_seed = 42

[output]
dir = {out:?}

[team]
name = "demo"
contact = "demo@example.org"
"#,
        slices = slices_toml.join(", "),
        out = dir.join("runs").join("demo").to_string_lossy(),
    );
    let config_path = dir.join("run.toml");
    std::fs::write(&config_path, run_toml)?;

    let mut stdout = std::io::stdout();
    writeln!(stdout, "wrote {} slices under {}", slice_paths.len(), data_dir.display())?;
    writeln!(stdout, "wrote {}", challenge_path.display())?;
    writeln!(stdout, "wrote {}", config_path.display())?;
    Ok(())
}
