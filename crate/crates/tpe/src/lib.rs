//! Tree-structured Parzen Estimator for sequential model-based optimization
//! of black-box objectives over mixed parameter spaces.
//!
//! The optimizer minimizes. After `n_startup` prior-sampled trials, each
//! suggestion splits the history at the gamma quantile of the objective,
//! fits a Parzen density over the good values (`l`) and the bad values
//! (`g`) independently per parameter, draws `n_ei_candidates` candidates
//! from `l`, and keeps the one maximizing the density ratio `l(x) / g(x)`
//! — equivalent to maximizing expected improvement under the TPE model.
//!
//! Numeric parameters use truncated Gaussian mixtures with a flat-ish prior
//! component at the range midpoint; categorical parameters use add-one
//! smoothed frequency tables. Everything is deterministic given the seed:
//! the RNG for iteration `i` is derived from `(rng_seed, i)`, so a run
//! resumed from a trial log reproduces the uninterrupted run bit for bit.
//!
//! ```
//! use tpe::{optimize, ParamSpec, TpeConfig};
//!
//! let space = vec![
//!     ParamSpec::uniform("x", -5.0, 5.0),
//!     ParamSpec::uniform("y", -5.0, 5.0),
//! ];
//! let objective = |p: &tpe::Params| {
//!     let (x, y) = (p.real("x"), p.real("y"));
//!     x * x + y * y
//! };
//! let (best, history) =
//!     optimize(objective, &space, 80, &TpeConfig::default().with_seed(7)).unwrap();
//! assert_eq!(history.len(), 80);
//! assert!(best.objective < 1.0);
//! ```

mod log;
mod optimizer;
mod parzen;
mod space;

pub use crate::log::{append_trial, load_trials, optimize_with_log};
pub use crate::optimizer::{optimize, optimize_from, suggest, TpeConfig, Trial};
pub use crate::space::{ParamKind, ParamSpec, ParamValue, Params};

/// Errors from space validation, configuration, or trial-log IO.
#[derive(Debug, thiserror::Error)]
pub enum TpeError {
    #[error("search space has no parameters")]
    EmptySpace,
    #[error("duplicate parameter name {name:?}")]
    DuplicateName { name: String },
    #[error("parameter {name:?}: range [{lo}, {hi}] is empty or not finite")]
    BadRange { name: String, lo: f64, hi: f64 },
    #[error("parameter {name:?}: step {step} must be positive and divide the range")]
    BadStep { name: String, step: f64 },
    #[error("parameter {name:?}: needs at least 2 choices, got {got}")]
    TooFewChoices { name: String, got: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(&'static str),
    #[error("trial log: {0}")]
    Log(String),
}
