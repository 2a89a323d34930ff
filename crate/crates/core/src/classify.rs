//! Inference: nearest-centroid routing followed by the cluster's local tree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dtree::{decision_path, ClassCounts, Predicate};
use crate::error::{Error, Result};
use crate::hcluster::nearest_cluster;
use crate::persona::ClusterProfile;
use crate::pipeline::TrainedModel;

/// Raw feature values by name.
pub type FeatureRecord = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub cluster: usize,
    pub persona_summary: Option<String>,
    pub prediction: u8,
    /// Majority fraction of the routed leaf, or of the cluster on fallback.
    pub confidence: f64,
    pub explanation: String,
    /// Satisfied predicates in raw units, root first.
    pub decision_path: Vec<Predicate>,
    pub leaf_counts: Option<ClassCounts>,
    pub centroid_distance: f64,
    pub cluster_normalized_success_rate: f64,
    /// The cluster had no tree; prediction comes from its success rate.
    pub cluster_level_fallback: bool,
}

/// Classifies a record given as a name to value map.
pub fn classify(model: &TrainedModel, record: &FeatureRecord) -> Result<ClassificationResult> {
    if let Some(unknown) = record.keys().find(|k| model.schema.feature_index(k).is_none()) {
        return Err(Error::UnknownFeature(unknown.clone()));
    }
    let row = model
        .schema
        .feature_names
        .iter()
        .map(|name| {
            record
                .get(name)
                .copied()
                .ok_or_else(|| Error::MissingFeature(name.clone()))
        })
        .collect::<Result<Vec<f64>>>()?;
    classify_row(model, &row)
}

/// Classifies raw feature values in schema order.
pub fn classify_row(model: &TrainedModel, raw: &[f64]) -> Result<ClassificationResult> {
    if let Some(j) = raw.iter().position(|v| !v.is_finite()) {
        let name = model.schema.feature_names.get(j).cloned().unwrap_or_default();
        return Err(Error::Data(format!("feature `{name}` is not finite")));
    }
    let z = model.stats.transform_row(raw)?;
    let (label, distance) = nearest_cluster(&z, &model.clusters)?;
    let entry = model
        .entry(label)
        .ok_or_else(|| Error::Data(format!("model has no entry for cluster {label}")))?;
    let profile = &entry.profile;
    let persona_summary = entry.description.as_ref().map(|d| d.persona_summary.clone());

    let (prediction, confidence, path, leaf_counts) = match &entry.tree {
        Some(tree) => {
            let path = decision_path(tree, &z, &model.schema.feature_names)?;
            let [fail, success] = path.leaf_counts;
            let confidence = fail.max(success) as f64 / (fail + success) as f64;
            let raw_path: Vec<Predicate> = path.predicates.iter().map(|p| p.to_raw(&model.stats)).collect();
            (path.predicted_class, confidence, raw_path, Some(path.leaf_counts))
        }
        None => {
            let rate = profile.raw_success_rate;
            (u8::from(rate >= 0.5), rate.max(1.0 - rate), Vec::new(), None)
        }
    };
    let explanation = render_explanation(
        profile,
        entry.description.as_ref().map(|d| d.one_liner()),
        &path,
        prediction,
        leaf_counts,
    );
    Ok(ClassificationResult {
        cluster: label,
        persona_summary,
        prediction,
        confidence,
        explanation,
        decision_path: path,
        leaf_counts,
        centroid_distance: distance,
        cluster_normalized_success_rate: profile.normalized_success_rate,
        cluster_level_fallback: entry.tree.is_none(),
    })
}

fn percent(p: f64) -> String {
    format!("{:.1}%", p * 100.0)
}

/// Deterministic explanation: persona line, the satisfied predicates with their
/// leaf statistics, and the cluster base rate.
pub fn render_explanation(
    profile: &ClusterProfile,
    persona_line: Option<&str>,
    path: &[Predicate],
    prediction: u8,
    leaf_counts: Option<ClassCounts>,
) -> String {
    let persona = match persona_line {
        Some(line) => format!("Cluster {}: {}", profile.cluster_label, line.trim()),
        None => {
            let traits: Vec<String> = profile
                .significant_features
                .iter()
                .take(3)
                .map(|f| format!("{} {}", f.feature_name, if f.z > 0.0 { "↑" } else { "↓" }))
                .collect();
            if traits.is_empty() {
                format!("Cluster {} ({} members).", profile.cluster_label, profile.member_count)
            } else {
                format!(
                    "Cluster {} ({} members; {}).",
                    profile.cluster_label,
                    profile.member_count,
                    traits.join(", ")
                )
            }
        }
    };
    let mut lines = vec![persona];
    if !path.is_empty() {
        let outcome = if prediction == 1 { "success" } else { "failure" };
        let reasons: Vec<String> = path.iter().map(ToString::to_string).collect();
        lines.push(format!("Predicted {outcome} because {}.", reasons.join(" and ")));
        if let Some([fail, success]) = leaf_counts {
            let n = fail + success;
            lines.push(format!(
                "{success} of {n} training records on this path succeeded ({}).",
                percent(success as f64 / n as f64)
            ));
        }
    }
    lines.push(format!(
        "Cluster base rate: {} of {} training records succeeded ({} raw, {} normalized success rate).",
        profile.success_count,
        profile.member_count,
        percent(profile.raw_success_rate),
        percent(profile.normalized_success_rate)
    ));
    lines.join("\n")
}
