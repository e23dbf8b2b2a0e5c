//! Fairness interventions with an audit trail.
//!
//! The crate covers the three places a fairness repair can sit in a learning
//! pipeline, and measures what each one does to the training record:
//!
//! - pre-processing: [`massage`] (label flips), [`optimize`] (randomized
//!   repair maps over finite domains) and [`smote`] (synthetic rows);
//! - in-processing: [`classifiers`] (logistic baseline, prejudice-remover
//!   regularization, adversarially debiased two-head network);
//! - post-processing: [`postprocess`] (reject option, ensemble disagreement).
//!
//! [`audit`] quantifies how a repair changes the precedent neighbourhood of a
//! probe case, and [`routing`] simulates consent-gated AI decisions with blind
//! human re-evaluation of negative outcomes. [`pipeline`] wires everything
//! into reproducible, config-driven experiments.

pub mod audit;
pub mod classifiers;
pub mod data;
pub mod massage;
pub mod metrics;
pub mod neighbors;
pub mod optimize;
pub mod pipeline;
pub mod postprocess;
pub mod rng;
pub mod routing;
mod serde_float;
pub mod smote;

pub use data::{Dataset, GeneratorConfig, JointDistribution, Schema, Value};
pub use metrics::FairnessReport;
