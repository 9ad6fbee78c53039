//! Append-only JSONL trial log: one record per line carrying the trial
//! plus the wall-clock seconds its objective evaluation took.
//!
//! Because suggestions are a pure function of the recorded history, a run
//! resumed from its log continues exactly where a longer uninterrupted run
//! would have been. Wall time is informational only and is dropped on load.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::optimizer::{best_of, suggest, Trial};
use crate::space::{ParamSpec, Params};
use crate::{TpeConfig, TpeError};

#[derive(Serialize, Deserialize)]
struct LogRecord {
    #[serde(flatten)]
    trial: Trial,
    wall_time_s: f64,
}

/// Appends one trial to the log at `path`, creating the file if needed.
pub fn append_trial(path: &Path, trial: &Trial, wall_time_s: f64) -> Result<(), TpeError> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| TpeError::Log(format!("open {}: {e}", path.display())))?;
    let record = LogRecord {
        trial: trial.clone(),
        wall_time_s,
    };
    let line = serde_json::to_string(&record)
        .map_err(|e| TpeError::Log(format!("serialize trial: {e}")))?;
    writeln!(file, "{line}").map_err(|e| TpeError::Log(format!("write {}: {e}", path.display())))?;
    Ok(())
}

/// Loads a trial history from a JSONL log. A missing file is an empty
/// history. Iterations must be contiguous from zero — a gap means the log
/// was truncated or interleaved and cannot seed a resume.
pub fn load_trials(path: &Path) -> Result<Vec<Trial>, TpeError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(TpeError::Log(format!("open {}: {e}", path.display()))),
    };
    let mut trials = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| TpeError::Log(format!("read {}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LogRecord = serde_json::from_str(&line)
            .map_err(|e| TpeError::Log(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        if record.trial.iteration != trials.len() {
            return Err(TpeError::Log(format!(
                "{}:{}: iteration {} out of order (expected {})",
                path.display(),
                lineno + 1,
                record.trial.iteration,
                trials.len()
            )));
        }
        trials.push(record.trial);
    }
    Ok(trials)
}

/// Runs [`crate::optimize`] with persistence: existing trials in the log at
/// `path` seed the history, and every new trial is appended as it
/// completes. `budget` counts total trials including those already logged.
pub fn optimize_with_log<F>(
    objective: &mut F,
    space: &[ParamSpec],
    budget: usize,
    config: &TpeConfig,
    path: &Path,
) -> Result<(Trial, Vec<Trial>), TpeError>
where
    F: FnMut(&Params) -> f64,
{
    if budget == 0 {
        return Err(TpeError::BadConfig("budget must be >= 1"));
    }
    let mut history = load_trials(path)?;
    while history.len() < budget {
        let params = suggest(&history, space, config)?;
        let start = Instant::now();
        let raw = objective(&params);
        let wall_time_s = start.elapsed().as_secs_f64();
        let failed = !raw.is_finite();
        let trial = Trial {
            iteration: history.len(),
            params,
            objective: if failed { f64::INFINITY } else { raw },
            failed,
        };
        append_trial(path, &trial, wall_time_s)?;
        history.push(trial);
    }
    let best = best_of(&history).expect("budget >= 1").clone();
    Ok((best, history))
}
