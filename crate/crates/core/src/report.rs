//! Per-cluster persona report in markdown or JSON.

use serde::{Deserialize, Serialize};

use crate::dtree::Rule;
use crate::persona::{PersonaDescription, SignificantFeature, SubclusterStats};
use crate::pipeline::TrainedModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature_name: String,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub label: usize,
    pub member_count: usize,
    pub success_count: usize,
    pub raw_success_rate: f64,
    pub normalized_success_rate: f64,
    pub top_features: Vec<SignificantFeature>,
    /// Features with non-zero importance, largest first.
    pub importance_ranking: Vec<ImportanceEntry>,
    pub rules: Vec<Rule>,
    pub subclusters: Vec<SubclusterStats>,
    pub description: Option<PersonaDescription>,
    pub description_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub p_train: f64,
    pub p_real: f64,
    /// Sorted by normalized success rate, highest first.
    pub clusters: Vec<ClusterReport>,
}

pub fn build_report(model: &TrainedModel) -> Report {
    let mut clusters: Vec<ClusterReport> = model
        .entries
        .iter()
        .map(|e| {
            let mut importance_ranking: Vec<ImportanceEntry> = e
                .tree
                .as_ref()
                .map(|t| {
                    t.feature_importances
                        .iter()
                        .enumerate()
                        .filter(|(_, &v)| v > 0.0)
                        .map(|(j, &v)| ImportanceEntry {
                            feature_name: model.schema.feature_names[j].clone(),
                            importance: v,
                        })
                        .collect()
                })
                .unwrap_or_default();
            importance_ranking.sort_by(|a, b| b.importance.total_cmp(&a.importance));
            ClusterReport {
                label: e.label,
                member_count: e.profile.member_count,
                success_count: e.profile.success_count,
                raw_success_rate: e.profile.raw_success_rate,
                normalized_success_rate: e.profile.normalized_success_rate,
                top_features: e.profile.significant_features.clone(),
                importance_ranking,
                rules: e.rules.clone(),
                subclusters: e.profile.subclusters.clone(),
                description: e.description.clone(),
                description_error: e.description_error.clone(),
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        b.normalized_success_rate
            .total_cmp(&a.normalized_success_rate)
            .then(a.label.cmp(&b.label))
    });
    Report {
        p_train: model.summary.p_train,
        p_real: model.summary.p_real,
        clusters,
    }
}

fn pct(p: f64) -> String {
    format!("{:.1}%", p * 100.0)
}

fn top_feature_list(features: &[SignificantFeature]) -> String {
    if features.is_empty() {
        return "-".into();
    }
    features
        .iter()
        .map(|f| format!("{} ({:+.2})", f.feature_name, f.z))
        .collect::<Vec<_>>()
        .join(", ")
}

fn success_table(report: &Report) -> String {
    let mut out = String::from(
        "| Cluster | Members | Successes | Raw rate | Normalized rate | Top features |\n\
         |---|---|---|---|---|---|\n",
    );
    for c in &report.clusters {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            c.label,
            c.member_count,
            c.success_count,
            pct(c.raw_success_rate),
            pct(c.normalized_success_rate),
            top_feature_list(&c.top_features)
        ));
    }
    out
}

pub fn render_markdown(report: &Report) -> String {
    let mut out = String::from("# Cluster personas\n\n");
    out.push_str(&format!(
        "Training success rate {}, real-world success rate {}.\n\n",
        pct(report.p_train),
        pct(report.p_real)
    ));
    out.push_str(&success_table(report));
    for c in &report.clusters {
        out.push_str(&format!(
            "\n## Cluster {} ({} members, {} normalized success rate)\n\n",
            c.label,
            c.member_count,
            pct(c.normalized_success_rate)
        ));
        match &c.description {
            Some(d) => out.push_str(&d.render_markdown(3)),
            None => out.push_str("(description unavailable)\n"),
        }
        if !c.importance_ranking.is_empty() {
            out.push_str("\n**Feature importance**\n\n");
            for (rank, f) in c.importance_ranking.iter().enumerate() {
                out.push_str(&format!("{}. {} {:.3}\n", rank + 1, f.feature_name, f.importance));
            }
        }
        if !c.subclusters.is_empty() {
            out.push_str("\n**Subclusters**\n\n| Rule | Members | Successes | Raw rate | Normalized rate |\n|---|---|---|---|---|\n");
            for s in &c.subclusters {
                let rule = if s.rule.predicates.is_empty() {
                    "(all members)".to_string()
                } else {
                    s.rule
                        .predicates
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(" and ")
                };
                out.push_str(&format!(
                    "| {rule} | {} | {} | {} | {} |\n",
                    s.member_count,
                    s.success_count,
                    pct(s.raw_success_rate),
                    pct(s.normalized_success_rate)
                ));
            }
        } else if !c.rules.is_empty() {
            out.push_str("\n**Rules**\n\n");
            for r in &c.rules {
                out.push_str(&format!("- {r}\n"));
            }
        }
    }
    out
}

/// Fixed-width per-cluster summary in label order.
pub fn cluster_table(model: &TrainedModel) -> String {
    let mut out = format!(
        "{:>7}  {:>7}  {:>9}  {:>8}  {:>10}  {}\n",
        "cluster", "members", "successes", "raw", "normalized", "top features"
    );
    for e in &model.entries {
        let p = &e.profile;
        out.push_str(&format!(
            "{:>7}  {:>7}  {:>9}  {:>8}  {:>10}  {}\n",
            e.label,
            p.member_count,
            p.success_count,
            pct(p.raw_success_rate),
            pct(p.normalized_success_rate),
            top_feature_list(&p.significant_features)
        ));
    }
    out
}
