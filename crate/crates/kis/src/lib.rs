//! Unsupervised text-simplification toolkit: a composite reward built from
//! simplicity, fluency, and salience scores with binary guardrails, a
//! self-critical policy-gradient trainer over a toy lexical-substitution
//! policy, and the matching automatic evaluation metrics.
//!
//! The reward for a pair (original, simplified) is the product of
//! normalized [0, 1] components:
//!
//! - simplicity: a grade-level ramp peaking at a calibrated FKGL drop,
//!   times a lexical ramp peaking at a +0.4 Zipf frequency shift;
//! - fluency: a language-model likelihood ramp, times an adversarial
//!   discriminator's authenticity probability once one is trained;
//! - salience: the fraction of masked content words of the original
//!   recoverable from the simplified text;
//! - guardrails: a compression band and novel-entity detection, either of
//!   which zeroes the total when triggered.
//!
//! Everything is deterministic: seeded generators, fixed iteration orders,
//! and portable math, so identical inputs produce identical bytes.

pub mod bundled;
pub mod error;
pub mod evalmetrics;
pub mod fluency;
pub mod guardrails;
pub mod kscst;
pub mod mathx;
pub mod reward;
pub mod salience;
pub mod simplicity;
pub mod textproc;

mod binio;

pub use error::{KisError, Result};
