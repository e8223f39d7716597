//! Exact abductive explanations (AXps) and approximate probabilistic abductive
//! explanations (ApproxPAXps) for binary naive Bayes classifiers over
//! categorical features.
//!
//! The classifier is first reduced to an extended linear classifier ([`xlc`]).
//! AXps come from a greedy over the per-feature slack ([`axp`]). Explanation
//! precision is counted exactly with a pseudo-polynomial dynamic program over
//! an integer knapsack form of the classifier ([`count`]), and the deletion
//! loop in [`paxp`] uses it to trim AXps down to a target size.

pub mod axp;
pub mod count;
pub mod error;
pub mod io;
pub mod nbc;
pub mod oracle;
pub mod paxp;
pub mod synth;
pub mod threshold;
pub mod xlc;

pub use axp::{compute_axp, is_weak_axp, FeatureSet};
pub use count::{count_complement, count_models, precision, CountTable, FixStatus, Slot};
pub use error::{Error, Result};
pub use nbc::{train, Class, Dataset, FeatureSpec, Instance, NbcModel};
pub use paxp::{
    approx_paxp, audit, explain, is_weak_paxp, ExplainConfig, Explanation, ExplanationKind,
    Traversal,
};
pub use threshold::Threshold;
pub use xlc::{quantize, QuantizedKnapsack, SlackProfile, Xlc};
