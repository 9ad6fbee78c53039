//! Batch automatic-playlist-continuation engine.
//!
//! A playlist corpus is interned into dense entity ids ([`corpus`]), four
//! sparse co-occurrence collaborative filters are built over it
//! ([`cooccur`]), their scores are combined by a tunable weighted sum with
//! album completion and popularity backfill ([`compose`]), and the results
//! are judged with the challenge's three ranking metrics ([`metrics`]).
//! Composition weights are tuned per challenge category with the
//! Tree-structured Parzen Estimator from the companion `tpe` crate; the
//! [`harness`] module wires all of it behind the `segue` CLI.

pub mod compose;
pub mod cooccur;
pub mod corpus;
pub mod harness;
pub mod metrics;
pub mod synth;
