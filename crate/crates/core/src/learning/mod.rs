//! Datasets, losses, risks, and the small trainable models.

pub mod dataset;
pub mod mlp;
pub mod objective;
pub mod risk;

pub use dataset::{gen_mixture_dataset, Dataset, GaussianMixture, Provenance};
pub use mlp::{accuracy, Classifier, Mlp};
pub use objective::{EmpiricalRiskField, LogisticLoss, Objective, QuadraticLoss};
pub use risk::{empirical_risk, generalization_gap, population_risk, RiskReport};
