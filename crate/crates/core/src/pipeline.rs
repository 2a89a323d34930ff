//! Training orchestration and the model artifact.
//!
//! Training runs resample, standardize (fitted on the resampled rows), cluster,
//! and then per cluster: tree, rules, importances, profile and persona. Clusters
//! with at most `min_subcluster_size` members keep a profile only.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtree::{self, DecisionTree, Rule, TreeConfig};
use crate::error::{Error, Result};
use crate::hcluster::{self, ClusterModel};
use crate::persona::{
    self, describe_cluster, format_feature_stats, ClusterProfile, HttpLlm, LlmParams, MockLlm, PersonaBackend,
    PersonaDescription, PromptTemplate,
};
use crate::resample::{resample, ResampleConfig};
use crate::tabular::{fit_standardizer, transform, Dataset, FeatureSchema, StandardizationStats};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LlmMode {
    Mock,
    Live(LlmParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub n_main_clusters: usize,
    /// Clusters of at most this size get no tree; also the minimum leaf size.
    pub min_subcluster_size: usize,
    pub real_world_success_rate: f64,
    pub resample_enabled: bool,
    /// Its `seed` is replaced by [`TrainConfig::seed`].
    pub resample: ResampleConfig,
    /// Its `min_leaf_size` is replaced by `min_subcluster_size`.
    pub tree: TreeConfig,
    pub top_k_features: usize,
    /// `|z|` below which a feature is left out of the persona prompt unless
    /// the tree found it important.
    pub significance_z_floor: f64,
    pub seed: u64,
    pub llm: LlmMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_main_clusters: 8,
            min_subcluster_size: 20,
            real_world_success_rate: 0.019,
            resample_enabled: true,
            resample: ResampleConfig::default(),
            tree: TreeConfig::default(),
            top_k_features: 5,
            significance_z_floor: 0.2,
            seed: 0,
            llm: LlmMode::Mock,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_main_clusters == 0 {
            return Err(Error::Config("n_main_clusters must be at least 1".into()));
        }
        if self.min_subcluster_size == 0 {
            return Err(Error::Config("min_subcluster_size must be at least 1".into()));
        }
        if !(self.real_world_success_rate > 0.0 && self.real_world_success_rate < 1.0) {
            return Err(Error::Config("real_world_success_rate must lie in (0, 1)".into()));
        }
        if self.significance_z_floor.is_nan() || self.significance_z_floor < 0.0 {
            return Err(Error::Config("significance_z_floor must be non-negative".into()));
        }
        self.resample.validate()?;
        self.effective_tree().validate()
    }

    fn effective_resample(&self) -> ResampleConfig {
        ResampleConfig {
            seed: self.seed,
            ..self.resample.clone()
        }
    }

    fn effective_tree(&self) -> TreeConfig {
        TreeConfig {
            min_leaf_size: self.min_subcluster_size,
            ..self.tree.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub label: usize,
    pub tree: Option<DecisionTree>,
    /// Leaf rules with thresholds in raw units.
    pub rules: Vec<Rule>,
    pub profile: ClusterProfile,
    pub description: Option<PersonaDescription>,
    /// Why the description is absent, when generation failed.
    pub description_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub input_rows: usize,
    pub training_rows: usize,
    pub synthetic_rows: usize,
    pub resample_fell_back_to_duplicate: bool,
    /// Success fraction of the training (resampled) rows.
    pub p_train: f64,
    pub p_real: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: String,
    pub schema: FeatureSchema,
    pub stats: StandardizationStats,
    pub clusters: ClusterModel,
    pub entries: Vec<ClusterEntry>,
    pub config: TrainConfig,
    pub summary: TrainingSummary,
}

impl TrainedModel {
    pub fn entry(&self, label: usize) -> Option<&ClusterEntry> {
        self.entries.get(label)
    }

    pub fn n_trees(&self) -> usize {
        self.entries.iter().filter(|e| e.tree.is_some()).count()
    }

    /// Labels of clusters whose persona generation failed.
    pub fn failed_descriptions(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| e.description_error.is_some())
            .map(|e| e.label)
            .collect()
    }
}

/// Trains with the backend selected by `config.llm`.
pub fn train(data: &Dataset, config: &TrainConfig) -> Result<TrainedModel> {
    match &config.llm {
        LlmMode::Mock => train_with_backend(data, config, &MockLlm, &PromptTemplate::builtin()),
        LlmMode::Live(params) => {
            let backend = HttpLlm::new(params.clone());
            train_with_backend(data, config, &backend, &PromptTemplate::builtin())
        }
    }
}

pub fn train_with_backend(
    data: &Dataset,
    config: &TrainConfig,
    backend: &dyn PersonaBackend,
    template: &PromptTemplate,
) -> Result<TrainedModel> {
    config.validate()?;
    data.validate()?;
    let successes = data.success_count();
    if successes == 0 || successes == data.n_rows() {
        return Err(Error::Data("training needs both classes present".into()));
    }

    let (train_data, synthetic_rows, fell_back) = if config.resample_enabled {
        let out = resample(data, &config.effective_resample())?;
        (out.data, out.added, out.fell_back_to_duplicate)
    } else {
        (data.clone(), 0, false)
    };
    let stats = fit_standardizer(&train_data)?;
    let standardized = transform(&train_data, &stats)?;
    let clusters = hcluster::cluster(&standardized, config.n_main_clusters)?;
    let p_train = train_data.success_rate();
    let p_real = config.real_world_success_rate;
    let tree_config = config.effective_tree();
    let names = &train_data.schema.feature_names;

    let entries: Vec<ClusterEntry> = clusters
        .members()
        .into_par_iter()
        .enumerate()
        .map(|(label, members)| {
            let rows: Vec<Vec<f64>> = members.iter().map(|&i| train_data.rows[i].clone()).collect();
            let z_rows: Vec<Vec<f64>> = members.iter().map(|&i| standardized[i].clone()).collect();
            let labels: Vec<u8> = members.iter().map(|&i| train_data.labels[i]).collect();
            let mut profile = persona::profile_cluster(
                label,
                &rows,
                &labels,
                names,
                &stats,
                p_train,
                p_real,
                config.top_k_features,
            )
            .map_err(|e| e.in_cluster(label))?;
            let mut entry = ClusterEntry {
                label,
                tree: None,
                rules: Vec::new(),
                profile: profile.clone(),
                description: None,
                description_error: None,
            };
            if members.len() <= config.min_subcluster_size {
                return Ok(entry);
            }
            let tree = dtree::fit(&z_rows, &labels, &tree_config).map_err(|e| e.in_cluster(label))?;
            let rules: Vec<Rule> = dtree::extract_rules(&tree, names)
                .iter()
                .map(|r| r.to_raw(&stats))
                .collect();
            profile.subclusters = persona::subclusters_from_tree(&tree, names, &stats, p_train, p_real);
            let block = format_feature_stats(
                &profile,
                names,
                Some(&tree.feature_importances),
                config.significance_z_floor,
            );
            match describe_cluster(&block, template, backend) {
                Ok(d) => entry.description = Some(d),
                Err(e) => {
                    log::warn!("cluster {label}: persona generation failed: {e}");
                    entry.description_error = Some(e.to_string());
                }
            }
            entry.tree = Some(tree);
            entry.rules = rules;
            entry.profile = profile;
            Ok(entry)
        })
        .collect::<Result<_>>()?;

    Ok(TrainedModel {
        format_version: FORMAT_VERSION.to_string(),
        schema: train_data.schema.clone(),
        stats,
        clusters,
        entries,
        config: config.clone(),
        summary: TrainingSummary {
            input_rows: data.n_rows(),
            training_rows: train_data.n_rows(),
            synthetic_rows,
            resample_fell_back_to_duplicate: fell_back,
            p_train,
            p_real,
        },
    })
}

pub fn model_to_json(model: &TrainedModel) -> Result<String> {
    let mut text = serde_json::to_string_pretty(model).map_err(|e| Error::Data(format!("serializing model: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

fn parse_error(text: &str, e: serde_json::Error) -> Error {
    Error::ModelParse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    }
}

pub fn model_from_json(text: &str) -> Result<TrainedModel> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_error(text, e))?;
    let version = value.get("format_version").ok_or_else(|| Error::ModelParse {
        offset: 0,
        message: "missing `format_version`".into(),
    })?;
    let found = version.as_str().map_or_else(|| version.to_string(), str::to_string);
    if found != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found,
            supported: FORMAT_VERSION.into(),
        });
    }
    serde_json::from_str(text).map_err(|e| parse_error(text, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = TrainConfig::default();
        assert_eq!(c.n_main_clusters, 8);
        assert_eq!(c.real_world_success_rate, 0.019);
        assert_eq!(c.top_k_features, 5);
        assert_eq!(c.tree.max_depth, 3);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn config_deserializes_with_defaults() {
        let c: TrainConfig = serde_json::from_str(
            r#"{"n_main_clusters": 4, "seed": 9, "tree": {"impurity": "entropy"},
                "llm": {"mode": "live", "endpoint": "http://localhost:1/x", "max_retries": 0}}"#,
        )
        .unwrap();
        assert_eq!(c.n_main_clusters, 4);
        assert_eq!(c.tree.impurity, dtree::Impurity::Entropy);
        assert_eq!(c.tree.max_depth, 3);
        match c.llm {
            LlmMode::Live(p) => {
                assert_eq!(p.temperature, 0.7);
                assert_eq!(p.max_retries, 0);
            }
            LlmMode::Mock => panic!("expected live mode"),
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            TrainConfig {
                n_main_clusters: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                min_subcluster_size: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                real_world_success_rate: 1.5,
                ..TrainConfig::default()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn byte_offsets() {
        let text = "ab\ncd\nef";
        assert_eq!(byte_offset(text, 1, 1), 0);
        assert_eq!(byte_offset(text, 2, 2), 4);
        assert_eq!(byte_offset(text, 3, 9), text.len());
    }

    #[test]
    fn version_gate() {
        let err = model_from_json(r#"{"format_version": "99"}"#).unwrap_err();
        assert!(matches!(err, Error::UnsupportedVersion { found, .. } if found == "99"));
        let err = model_from_json(r#"{"format_version": "1", "sch"#).unwrap_err();
        assert!(matches!(err, Error::ModelParse { offset, .. } if offset > 0));
    }
}
