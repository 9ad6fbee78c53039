//! The suggest/optimize loop: prior sampling during startup, then
//! good/bad density modeling with candidate selection by density ratio.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::parzen::{CategoricalDensity, TruncatedGaussianMixture};
use crate::space::{quantized_steps, validate_space, ParamKind, ParamSpec, ParamValue, Params};
use crate::TpeError;

/// Optimizer configuration. Objectives are minimized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TpeConfig {
    /// Trials sampled from the prior before the density model kicks in.
    pub n_startup: usize,
    /// Fraction of history treated as "good": the lowest `ceil(gamma * n)`
    /// objectives.
    pub gamma: f64,
    /// Candidates drawn from the good density per suggestion.
    pub n_ei_candidates: usize,
    /// Base seed; each iteration derives its own RNG from `(seed, iteration)`.
    pub rng_seed: u64,
}

impl Default for TpeConfig {
    fn default() -> Self {
        Self {
            n_startup: 20,
            gamma: 0.25,
            n_ei_candidates: 24,
            rng_seed: 0,
        }
    }
}

impl TpeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    fn validate(&self) -> Result<(), TpeError> {
        if self.n_startup == 0 {
            return Err(TpeError::BadConfig("n_startup must be >= 1"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(TpeError::BadConfig("gamma must lie in (0, 1)"));
        }
        if self.n_ei_candidates == 0 {
            return Err(TpeError::BadConfig("n_ei_candidates must be >= 1"));
        }
        Ok(())
    }
}

/// One evaluated point: parameters, objective, and its position in history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub iteration: usize,
    pub params: Params,
    /// Objective under the minimization convention; `+inf` when `failed`.
    pub objective: f64,
    /// Set when the objective returned a non-finite value.
    #[serde(default)]
    pub failed: bool,
}

/// splitmix64: decorrelates per-iteration RNG streams from one base seed.
fn mix_seed(seed: u64, iteration: u64) -> u64 {
    let mut z = seed ^ iteration.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_prior<R: Rng>(spec: &ParamSpec, rng: &mut R) -> ParamValue {
    match &spec.kind {
        ParamKind::Uniform { lo, hi } => ParamValue::Real(lo + rng.gen::<f64>() * (hi - lo)),
        ParamKind::QuantizedUniform { lo, hi, step } => {
            let k = quantized_steps(*lo, *hi, *step).expect("validated spec");
            let j = rng.gen_range(0..=k);
            ParamValue::Real(grid_value(*lo, *hi, *step, j))
        }
        ParamKind::Categorical { choices } => ParamValue::Index(rng.gen_range(0..choices.len())),
    }
}

fn grid_value(lo: f64, hi: f64, step: f64, j: u64) -> f64 {
    (lo + j as f64 * step).min(hi)
}

/// Snaps `x` onto the quantized grid of the spec.
fn snap_to_grid(lo: f64, hi: f64, step: f64, x: f64) -> f64 {
    let k = quantized_steps(lo, hi, step).expect("validated spec");
    let j = (((x - lo) / step).round().max(0.0) as u64).min(k);
    grid_value(lo, hi, step, j)
}

/// Proposes parameters for the next trial.
///
/// With fewer than `n_startup` trials in `history`, every parameter is an
/// independent prior draw. Afterwards the history is split at the gamma
/// quantile of the objective; per parameter, a density is fit over the good
/// values (`l`) and the bad values (`g`), `n_ei_candidates` draws are taken
/// from `l`, and the draw maximizing `l(x) / g(x)` wins.
///
/// Deterministic given `(history, space, config)`: the RNG is derived from
/// `(config.rng_seed, history.len())`.
pub fn suggest(history: &[Trial], space: &[ParamSpec], config: &TpeConfig) -> Result<Params, TpeError> {
    validate_space(space)?;
    config.validate()?;

    let iteration = history.len();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.rng_seed, iteration as u64));

    let mut params = Params::default();
    if iteration < config.n_startup {
        for spec in space {
            params.insert(&spec.name, sample_prior(spec, &mut rng));
        }
        return Ok(params);
    }

    // Sort by (objective, iteration); ties resolved by age for determinism.
    let mut order: Vec<usize> = (0..history.len()).collect();
    order.sort_by(|&a, &b| {
        history[a]
            .objective
            .total_cmp(&history[b].objective)
            .then(history[a].iteration.cmp(&history[b].iteration))
    });
    let n_good = (config.gamma * history.len() as f64).ceil() as usize;
    let (good, bad) = order.split_at(n_good.min(history.len()));

    for spec in space {
        let value = match &spec.kind {
            ParamKind::Uniform { lo, hi } => {
                let x = propose_numeric(history, &spec.name, good, bad, *lo, *hi, None, config, &mut rng);
                ParamValue::Real(x)
            }
            ParamKind::QuantizedUniform { lo, hi, step } => {
                let x = propose_numeric(
                    history,
                    &spec.name,
                    good,
                    bad,
                    *lo,
                    *hi,
                    Some(*step),
                    config,
                    &mut rng,
                );
                ParamValue::Real(x)
            }
            ParamKind::Categorical { choices } => {
                let collect = |idx: &[usize]| -> Vec<usize> {
                    idx.iter()
                        .filter_map(|&i| history[i].params.get(&spec.name))
                        .filter_map(ParamValue::as_index)
                        .collect()
                };
                let l = CategoricalDensity::fit(choices.len(), &collect(good));
                let g = CategoricalDensity::fit(choices.len(), &collect(bad));
                let mut best = (f64::NEG_INFINITY, 0usize);
                for _ in 0..config.n_ei_candidates {
                    let c = l.sample(&mut rng);
                    let score = l.log_pdf(c) - g.log_pdf(c);
                    if score > best.0 {
                        best = (score, c);
                    }
                }
                ParamValue::Index(best.1)
            }
        };
        params.insert(&spec.name, value);
    }
    Ok(params)
}

#[allow(clippy::too_many_arguments)]
fn propose_numeric<R: Rng>(
    history: &[Trial],
    name: &str,
    good: &[usize],
    bad: &[usize],
    lo: f64,
    hi: f64,
    step: Option<f64>,
    config: &TpeConfig,
    rng: &mut R,
) -> f64 {
    let collect = |idx: &[usize]| -> Vec<f64> {
        idx.iter()
            .filter_map(|&i| history[i].params.get(name))
            .filter_map(ParamValue::as_real)
            .filter(|v| v.is_finite())
            .collect()
    };
    let l = TruncatedGaussianMixture::fit(lo, hi, &collect(good));
    let g = TruncatedGaussianMixture::fit(lo, hi, &collect(bad));

    let mut best = (f64::NEG_INFINITY, lo);
    for _ in 0..config.n_ei_candidates {
        let mut x = l.sample(rng);
        if let Some(step) = step {
            x = snap_to_grid(lo, hi, step, x);
        }
        let score = l.log_pdf(x) - g.log_pdf(x);
        if score > best.0 {
            best = (score, x);
        }
    }
    best.1.clamp(lo, hi)
}

/// Runs `budget` trials of suggest-and-evaluate, minimizing `objective`.
///
/// Non-finite objective values are recorded as `+inf` with the trial's
/// `failed` flag set, so one bad evaluation cannot poison the history.
/// Returns the best trial and the full history.
pub fn optimize<F>(
    mut objective: F,
    space: &[ParamSpec],
    budget: usize,
    config: &TpeConfig,
) -> Result<(Trial, Vec<Trial>), TpeError>
where
    F: FnMut(&Params) -> f64,
{
    optimize_from(Vec::new(), &mut |p| objective(p), space, budget, config)
}

/// Like [`optimize`], but continues from an existing history (e.g. loaded
/// from a trial log). `budget` is the *total* trial count including the
/// prior history.
pub fn optimize_from<F>(
    mut history: Vec<Trial>,
    objective: &mut F,
    space: &[ParamSpec],
    budget: usize,
    config: &TpeConfig,
) -> Result<(Trial, Vec<Trial>), TpeError>
where
    F: FnMut(&Params) -> f64,
{
    if budget == 0 {
        return Err(TpeError::BadConfig("budget must be >= 1"));
    }
    validate_space(space)?;
    config.validate()?;

    while history.len() < budget {
        let params = suggest(&history, space, config)?;
        let raw = objective(&params);
        let failed = !raw.is_finite();
        history.push(Trial {
            iteration: history.len(),
            params,
            objective: if failed { f64::INFINITY } else { raw },
            failed,
        });
    }

    let best = best_of(&history).expect("budget >= 1").clone();
    Ok((best, history))
}

/// Lowest-objective trial; ties go to the earlier iteration.
pub(crate) fn best_of(history: &[Trial]) -> Option<&Trial> {
    history.iter().min_by(|a, b| {
        a.objective
            .total_cmp(&b.objective)
            .then(a.iteration.cmp(&b.iteration))
    })
}
