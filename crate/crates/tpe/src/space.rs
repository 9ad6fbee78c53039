//! Search-space definition: parameter specs and concrete parameter values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::TpeError;

/// How a single parameter is distributed under the prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamKind {
    /// Continuous value drawn uniformly from `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Value drawn from the grid `lo, lo + step, ..., hi`.
    ///
    /// `step` must divide `hi - lo` evenly.
    QuantizedUniform { lo: f64, hi: f64, step: f64 },
    /// One of a fixed list of named choices; values are indices into the list.
    Categorical { choices: Vec<String> },
}

/// A named parameter in the search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
}

impl ParamSpec {
    pub fn uniform(name: &str, lo: f64, hi: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: ParamKind::Uniform { lo, hi },
        }
    }

    pub fn quantized_uniform(name: &str, lo: f64, hi: f64, step: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: ParamKind::QuantizedUniform { lo, hi, step },
        }
    }

    pub fn categorical(name: &str, choices: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            kind: ParamKind::Categorical {
                choices: choices.iter().map(|c| c.to_string()).collect(),
            },
        }
    }

    pub(crate) fn validate(&self) -> Result<(), TpeError> {
        match &self.kind {
            ParamKind::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(TpeError::BadRange {
                        name: self.name.clone(),
                        lo: *lo,
                        hi: *hi,
                    });
                }
            }
            ParamKind::QuantizedUniform { lo, hi, step } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(TpeError::BadRange {
                        name: self.name.clone(),
                        lo: *lo,
                        hi: *hi,
                    });
                }
                if !(step.is_finite() && *step > 0.0) || quantized_steps(*lo, *hi, *step).is_none()
                {
                    return Err(TpeError::BadStep {
                        name: self.name.clone(),
                        step: *step,
                    });
                }
            }
            ParamKind::Categorical { choices } => {
                if choices.len() < 2 {
                    return Err(TpeError::TooFewChoices {
                        name: self.name.clone(),
                        got: choices.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Number of grid intervals for a quantized range, or `None` when `step`
/// does not divide `hi - lo` evenly (to within 1e-9 of a whole step).
pub(crate) fn quantized_steps(lo: f64, hi: f64, step: f64) -> Option<u64> {
    let raw = (hi - lo) / step;
    let k = raw.round();
    if k >= 1.0 && (raw - k).abs() <= 1e-9 {
        Some(k as u64)
    } else {
        None
    }
}

/// Validates an entire space: every spec well-formed, names unique, non-empty.
pub(crate) fn validate_space(space: &[ParamSpec]) -> Result<(), TpeError> {
    if space.is_empty() {
        return Err(TpeError::EmptySpace);
    }
    let mut seen = std::collections::HashSet::new();
    for spec in space {
        spec.validate()?;
        if !seen.insert(spec.name.as_str()) {
            return Err(TpeError::DuplicateName {
                name: spec.name.clone(),
            });
        }
    }
    Ok(())
}

/// A concrete value for one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamValue {
    /// Value of a `Uniform` or `QuantizedUniform` parameter.
    Real(f64),
    /// Choice index of a `Categorical` parameter.
    Index(usize),
}

impl ParamValue {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            ParamValue::Real(v) => Some(*v),
            ParamValue::Index(_) => None,
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            ParamValue::Index(i) => Some(*i),
            ParamValue::Real(_) => None,
        }
    }
}

/// A full assignment of values to every parameter in a space, keyed by name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params(pub BTreeMap<String, ParamValue>);

impl Params {
    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.0.get(name)
    }

    /// Real value of `name`; panics if absent or categorical.
    pub fn real(&self, name: &str) -> f64 {
        self.get(name)
            .and_then(ParamValue::as_real)
            .unwrap_or_else(|| panic!("no real-valued parameter named {name:?}"))
    }

    /// Choice index of `name`; panics if absent or non-categorical.
    pub fn index(&self, name: &str) -> usize {
        self.get(name)
            .and_then(ParamValue::as_index)
            .unwrap_or_else(|| panic!("no categorical parameter named {name:?}"))
    }

    pub fn insert(&mut self, name: &str, value: ParamValue) {
        self.0.insert(name.to_string(), value);
    }
}
