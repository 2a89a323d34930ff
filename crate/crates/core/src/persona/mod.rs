//! Cluster profiling and persona generation.
//!
//! A cluster's profile is its standardized center (the mean z-score of its
//! members per feature) together with raw and normalized success rates. The
//! most distinctive features are formatted into a prompt, sent to a
//! [`PersonaBackend`] and the reply is parsed into a [`PersonaDescription`].

mod llm;
mod prompt;
mod sections;

use serde::{Deserialize, Serialize};

use crate::dtree::{DecisionTree, Rule};
use crate::error::{Error, Result};
use crate::tabular::StandardizationStats;

pub use llm::{query_llm, HttpLlm, LlmParams, MockLlm, PersonaBackend, API_KEY_ENV, MOCK_MODEL_NAME};
pub use prompt::{construct_prompt, PromptBundle, PromptTemplate, FEATURE_PLACEHOLDER};
pub use sections::{post_process, PersonaDescription, Provenance, SECTION_TITLES};

/// Features with at least this tree importance are always described.
pub const IMPORTANCE_THRESHOLD: f64 = 0.05;

/// Placeholder used when no feature qualifies for the prompt.
pub const NO_FEATURES_LINE: &str = "no distinguishing features";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificantFeature {
    pub feature_index: usize,
    pub feature_name: String,
    pub z: f64,
}

/// One leaf of a cluster's tree, with thresholds in raw units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubclusterStats {
    pub rule: Rule,
    pub member_count: usize,
    pub success_count: usize,
    pub raw_success_rate: f64,
    pub normalized_success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster_label: usize,
    pub member_count: usize,
    pub success_count: usize,
    pub raw_success_rate: f64,
    pub normalized_success_rate: f64,
    /// Mean standardized value per feature.
    pub feature_zscores: Vec<f64>,
    /// Raw per-feature means inside the cluster.
    pub cluster_means: Vec<f64>,
    /// Population means the z-scores are measured against.
    pub global_means: Vec<f64>,
    /// Top features by `|z|`, descending.
    pub significant_features: Vec<SignificantFeature>,
    pub subclusters: Vec<SubclusterStats>,
}

/// Deflates a rate observed on resampled data back to the real-world scale.
pub fn normalized_rate(raw: f64, p_real: f64, p_train: f64) -> f64 {
    (raw * p_real / p_train).clamp(0.0, 1.0)
}

/// Indices of the `top_k` largest `|z|`, ties broken by lower index.
pub fn rank_by_magnitude(zscores: &[f64], top_k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..zscores.len()).collect();
    order.sort_by(|&a, &b| zscores[b].abs().total_cmp(&zscores[a].abs()).then(a.cmp(&b)));
    order.truncate(top_k);
    order
}

fn check_rate(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in (0, 1), got {p}")))
    }
}

/// Profiles one cluster from its raw rows against population statistics.
#[allow(clippy::too_many_arguments)]
pub fn profile_cluster(
    cluster_label: usize,
    rows: &[Vec<f64>],
    labels: &[u8],
    feature_names: &[String],
    global_stats: &StandardizationStats,
    p_train: f64,
    p_real: f64,
    top_k: usize,
) -> Result<ClusterProfile> {
    if rows.is_empty() {
        return Err(Error::Empty("cannot profile an empty cluster"));
    }
    if rows.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            found: labels.len(),
        });
    }
    if feature_names.len() != global_stats.dim() {
        return Err(Error::DimensionMismatch {
            expected: global_stats.dim(),
            found: feature_names.len(),
        });
    }
    check_rate("p_train", p_train)?;
    check_rate("p_real", p_real)?;

    let n = rows.len() as f64;
    let d = global_stats.dim();
    let mut zsum = vec![0.0; d];
    let mut rawsum = vec![0.0; d];
    for row in rows {
        let z = global_stats.transform_row(row)?;
        for j in 0..d {
            zsum[j] += z[j];
            rawsum[j] += row[j];
        }
    }
    let feature_zscores: Vec<f64> = zsum.iter().map(|s| s / n).collect();
    let cluster_means: Vec<f64> = rawsum.iter().map(|s| s / n).collect();
    let success_count = labels.iter().filter(|&&l| l == 1).count();
    let raw = success_count as f64 / n;
    let significant_features = rank_by_magnitude(&feature_zscores, top_k)
        .into_iter()
        .map(|j| SignificantFeature {
            feature_index: j,
            feature_name: feature_names[j].clone(),
            z: feature_zscores[j],
        })
        .collect();
    Ok(ClusterProfile {
        cluster_label,
        member_count: rows.len(),
        success_count,
        raw_success_rate: raw,
        normalized_success_rate: normalized_rate(raw, p_real, p_train),
        feature_zscores,
        cluster_means,
        global_means: global_stats.means.clone(),
        significant_features,
        subclusters: Vec::new(),
    })
}

/// Per-leaf statistics of `tree`, with rules rendered in raw units.
pub fn subclusters_from_tree(
    tree: &DecisionTree,
    feature_names: &[String],
    stats: &StandardizationStats,
    p_train: f64,
    p_real: f64,
) -> Vec<SubclusterStats> {
    crate::dtree::extract_rules(tree, feature_names)
        .into_iter()
        .map(|rule| {
            let members = rule.leaf_counts[0] + rule.leaf_counts[1];
            let raw = rule.leaf_success_rate;
            SubclusterStats {
                member_count: members,
                success_count: rule.leaf_counts[1],
                raw_success_rate: raw,
                normalized_success_rate: normalized_rate(raw, p_real, p_train),
                rule: rule.to_raw(stats),
            }
        })
        .collect()
}

/// One prompt line per described feature, e.g. `VC_experience ↑ (1.41): ...`.
///
/// Candidates are the profile's top features plus any feature with importance
/// of at least [`IMPORTANCE_THRESHOLD`]; a candidate is dropped when its `|z|`
/// is below `z_floor` and its importance below the threshold.
pub fn format_feature_stats(
    profile: &ClusterProfile,
    feature_names: &[String],
    importances: Option<&[f64]>,
    z_floor: f64,
) -> String {
    let importance = |j: usize| importances.and_then(|imp| imp.get(j).copied()).unwrap_or(0.0);
    let mut chosen: Vec<usize> = profile.significant_features.iter().map(|f| f.feature_index).collect();
    if let Some(imp) = importances {
        for (j, &v) in imp.iter().enumerate() {
            if v >= IMPORTANCE_THRESHOLD && !chosen.contains(&j) {
                chosen.push(j);
            }
        }
    }
    chosen.retain(|&j| profile.feature_zscores[j].abs() >= z_floor || importance(j) >= IMPORTANCE_THRESHOLD);
    chosen.sort_by(|&a, &b| {
        let (za, zb) = (profile.feature_zscores[a].abs(), profile.feature_zscores[b].abs());
        zb.total_cmp(&za).then(a.cmp(&b))
    });
    if chosen.is_empty() {
        return NO_FEATURES_LINE.to_string();
    }
    chosen
        .iter()
        .map(|&j| {
            let z = profile.feature_zscores[j];
            let arrow = if z > 0.0 { '↑' } else { '↓' };
            let name = feature_names.get(j).map_or("?", String::as_str);
            let mut line = format!(
                "{name} {arrow} ({:.2}): cluster mean {:.2} vs global {:.2}",
                z.abs(),
                profile.cluster_means[j],
                profile.global_means[j]
            );
            if importance(j) > 0.0 {
                line.push_str(&format!(", tree importance {:.2}", importance(j)));
            }
            line
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Runs prompt construction, the backend call and validation for one cluster.
pub fn describe_cluster(
    feature_block: &str,
    template: &PromptTemplate,
    backend: &dyn PersonaBackend,
) -> Result<PersonaDescription> {
    let bundle = construct_prompt(template, feature_block)?;
    let raw = query_llm(&bundle, backend)?;
    post_process(&raw, backend.provenance(), backend.model_name())
}
