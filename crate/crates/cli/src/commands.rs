use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use htree_core::persona::{HttpLlm, MockLlm, PromptTemplate};
use htree_core::pipeline::{model_to_json, train_with_backend};
use htree_core::report::{build_report, cluster_table, render_markdown};
use htree_core::synth::{generate, write_truth, SynthConfig};
use htree_core::tabular::{infer_schema, ingest_csv, ingest_unlabeled_csv, write_csv, FeatureSchema};
use htree_core::{
    classify_row, load_model, ClassificationResult, Error as CoreError, Impurity, LlmMode, LlmParams, ResampleStrategy,
    TrainConfig,
};
use serde::Serialize;

use crate::args::{ClassifyArgs, ImpurityArg, ReportArgs, ReportFormat, StrategyArg, SynthArgs, TrainArgs};
use crate::error::CliError;

type CliResult<T = ()> = Result<T, CliError>;

fn write_output(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Output {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Output {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// File settings first, then flags on top.
pub fn resolve_train_config(args: &TrainArgs) -> CliResult<TrainConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
            toml::from_str::<TrainConfig>(&text)
                .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?
        }
        None => TrainConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(k) = args.clusters {
        config.n_main_clusters = k;
    }
    if let Some(m) = args.min_subcluster_size {
        config.min_subcluster_size = m;
    }
    if let Some(p) = args.real_world_success_rate {
        config.real_world_success_rate = p;
    }
    if let Some(t) = args.target_success_rate {
        config.resample.target_success_rate = t;
    }
    if let Some(s) = args.strategy {
        config.resample.strategy = match s {
            StrategyArg::Duplicate => ResampleStrategy::Duplicate,
            StrategyArg::Interpolate => ResampleStrategy::Interpolate,
        };
    }
    if let Some(n) = args.neighbor_count {
        config.resample.neighbor_count = n;
    }
    if args.no_resample {
        config.resample_enabled = false;
    }
    if let Some(d) = args.max_depth {
        config.tree.max_depth = d;
    }
    if let Some(i) = args.impurity {
        config.tree.impurity = match i {
            ImpurityArg::Gini => Impurity::Gini,
            ImpurityArg::Entropy => Impurity::Entropy,
        };
    }
    if let Some(k) = args.top_k_features {
        config.top_k_features = k;
    }
    if args.mock_llm {
        config.llm = LlmMode::Mock;
    } else if let Some(endpoint) = &args.llm_endpoint {
        let mut params = match &config.llm {
            LlmMode::Live(p) => p.clone(),
            LlmMode::Mock => LlmParams::default(),
        };
        params.endpoint = endpoint.clone();
        if let Some(m) = &args.llm_model {
            params.model_name = m.clone();
        }
        config.llm = LlmMode::Live(params);
    }
    config.validate()?;
    Ok(config)
}

fn training_schema(args: &TrainArgs) -> CliResult<FeatureSchema> {
    match &args.id {
        Some(id) => Ok(infer_schema(&args.input, &args.label, Some(id))?),
        None => match infer_schema(&args.input, &args.label, Some("id")) {
            Err(CoreError::MissingColumn { column }) if column == "id" => {
                Ok(infer_schema(&args.input, &args.label, None)?)
            }
            other => Ok(other?),
        },
    }
}

pub fn train(args: &TrainArgs) -> CliResult {
    let config = resolve_train_config(args)?;
    let template = match &args.prompt_template {
        Some(path) => PromptTemplate::from_file(path)?,
        None => PromptTemplate::builtin(),
    };
    let schema = training_schema(args)?;
    let data = ingest_csv(&args.input, &schema)?;
    log::info!(
        "read {} rows with {} features from {}",
        data.n_rows(),
        data.n_features(),
        args.input.display()
    );
    let model = match &config.llm {
        LlmMode::Mock => train_with_backend(&data, &config, &MockLlm, &template)?,
        LlmMode::Live(params) => train_with_backend(&data, &config, &HttpLlm::new(params.clone()), &template)?,
    };
    let failed = model.failed_descriptions();
    if args.strict_llm && matches!(config.llm, LlmMode::Live(_)) && !failed.is_empty() {
        let detail = model
            .entry(failed[0])
            .and_then(|e| e.description_error.clone())
            .unwrap_or_default();
        return Err(CliError::Llm {
            clusters: failed,
            detail,
        });
    }
    let json = model_to_json(&model)?;
    std::fs::write(&args.output, json).map_err(|source| CliError::Output {
        path: args.output.clone(),
        source,
    })?;
    for label in &failed {
        eprintln!("warning: cluster {label} has no persona description");
    }
    let s = &model.summary;
    let mut text = format!(
        "seed: {}\nrows: {} input, {} training ({} synthetic)\nsuccess rate: {:.1}% training, {:.1}% real-world\ntrees: {} of {} clusters\n\n",
        config.seed,
        s.input_rows,
        s.training_rows,
        s.synthetic_rows,
        s.p_train * 100.0,
        s.p_real * 100.0,
        model.n_trees(),
        model.entries.len()
    );
    text.push_str(&cluster_table(&model));
    text.push_str(&format!("\nmodel written to {}\n", args.output.display()));
    write_output(None, &text)
}

#[derive(Serialize)]
struct ClassifiedLine<'a> {
    id: &'a str,
    #[serde(flatten)]
    result: &'a ClassificationResult,
}

pub fn classify(args: &ClassifyArgs) -> CliResult {
    let model = load_model(&args.model)?;
    let input = ingest_unlabeled_csv(&args.input, &model.schema)?;
    let results = input
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| classify_row(&model, row).map_err(|e| CliError::Data(format!("row {}: {e}", i + 1))))
        .collect::<CliResult<Vec<_>>>()?;

    let sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(File::create(path).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?),
        None => Box::new(io::stdout().lock()),
    };
    let out_path = args.output.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let io_err = |source| CliError::Output {
        path: out_path.clone(),
        source,
    };
    let mut sink = BufWriter::new(sink);
    let mut histogram: BTreeMap<usize, [usize; 2]> = BTreeMap::new();
    for (id, result) in input.ids.iter().zip(&results) {
        let line = serde_json::to_string(&ClassifiedLine { id, result })
            .map_err(|e| CliError::Data(format!("serializing result: {e}")))?;
        writeln!(sink, "{line}").map_err(io_err)?;
        histogram.entry(result.cluster).or_default()[usize::from(result.prediction)] += 1;
    }
    sink.flush().map_err(io_err)?;

    eprintln!("classified {} rows", results.len());
    for (cluster, [fail, success]) in histogram {
        let n = fail + success;
        eprintln!(
            "cluster {cluster:>3}: {n:>6} {:<40} ({success} predicted success)",
            "#".repeat((40 * n).div_ceil(results.len().max(1)))
        );
    }
    Ok(())
}

pub fn report(args: &ReportArgs) -> CliResult {
    let model = load_model(&args.model)?;
    let report = build_report(&model);
    let text = match args.format {
        ReportFormat::Md => render_markdown(&report),
        ReportFormat::Json => {
            let mut t = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Data(format!("serializing report: {e}")))?;
            t.push('\n');
            t
        }
    };
    write_output(args.output.as_deref(), &text)
}

fn default_truth_path(output: &Path) -> PathBuf {
    let mut name = output.file_stem().unwrap_or_default().to_os_string();
    name.push(".truth.json");
    output.with_file_name(name)
}

pub fn synth(args: &SynthArgs) -> CliResult {
    let config = SynthConfig {
        personas: args.personas,
        rows: args.rows,
        base_rate: args.base_rate,
        blob_rates: args.blob_rates.clone(),
        signal_features: args.signal_features,
        flag_features: args.flag_features,
        seed: args.seed,
        separation: args.separation,
        spread: args.spread,
        purity: args.purity,
    };
    let generated = generate(&config)?;
    let truth_path = args.truth.clone().unwrap_or_else(|| default_truth_path(&args.output));
    write_csv(&generated.data, &args.output)?;
    write_truth(&generated.truth, &truth_path)?;
    let text = format!(
        "seed: {}\nrows: {}\npersonas: {}\nsuccess rate: {:.2}%\ndata written to {}\ntruth written to {}\n",
        config.seed,
        generated.data.n_rows(),
        config.personas,
        generated.data.success_rate() * 100.0,
        args.output.display(),
        truth_path.display()
    );
    write_output(None, &text)
}
