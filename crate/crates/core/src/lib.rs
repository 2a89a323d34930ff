//! Cluster-then-explain classification for imbalanced tabular data.
//!
//! Training rebalances the data, standardizes it, cuts a Ward dendrogram into
//! main clusters and fits a shallow CART tree inside each cluster. Every cluster
//! is profiled by feature z-scores and described by a persona, generated either
//! by a chat-completion endpoint or by a deterministic offline backend.
//! Classification routes a record to its nearest centroid and reads the
//! prediction, confidence and explanation off the local tree.

pub mod classify;
pub mod dtree;
mod error;
pub mod eval;
pub mod hcluster;
pub mod persona;
pub mod pipeline;
pub mod report;
pub mod resample;
pub mod synth;
pub mod tabular;

pub use classify::{classify, classify_row, render_explanation, ClassificationResult, FeatureRecord};
pub use dtree::{DecisionTree, Impurity, Predicate, Rule, TreeConfig, TreeNode};
pub use error::{Error, LlmError, Result};
pub use hcluster::{ClusterModel, LinkageStep};
pub use persona::{ClusterProfile, LlmParams, PersonaDescription, PromptBundle, Provenance};
pub use pipeline::{load_model, save_model, train, ClusterEntry, LlmMode, TrainConfig, TrainedModel};
pub use resample::{resample, ResampleConfig, ResampleStrategy, Resampled};
pub use tabular::{Dataset, FeatureKind, FeatureSchema, StandardizationStats};
