//! Planted-persona datasets with known blob structure and success drivers.
//!
//! Blob `b` is offset by `separation` along its own `persona_b` axis. Within a
//! blob, success depends on one planted feature: rows on its high side succeed
//! with probability `p_high`, the rest with `p_low`, averaging the blob rate.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Dataset, FeatureKind, FeatureSchema};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub personas: usize,
    pub rows: usize,
    pub base_rate: f64,
    /// Per-blob success rates; spread around `base_rate` when absent.
    pub blob_rates: Option<Vec<f64>>,
    pub signal_features: usize,
    pub flag_features: usize,
    pub seed: u64,
    pub separation: f64,
    pub spread: f64,
    /// Share of a blob's successes on the high side of its planted feature.
    pub purity: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            personas: 8,
            rows: 2000,
            base_rate: 0.019,
            blob_rates: None,
            signal_features: 4,
            flag_features: 2,
            seed: 0,
            separation: 6.0,
            spread: 0.3,
            purity: 0.9,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.personas == 0 {
            return Err(Error::Config("personas must be at least 1".into()));
        }
        if self.rows < self.personas {
            return Err(Error::Config(format!(
                "rows ({}) must be at least personas ({})",
                self.rows, self.personas
            )));
        }
        if !(self.base_rate > 0.0 && self.base_rate < 1.0) {
            return Err(Error::Config("base_rate must lie in (0, 1)".into()));
        }
        if let Some(rates) = &self.blob_rates {
            if rates.len() != self.personas {
                return Err(Error::Config(format!(
                    "blob_rates has {} entries, expected {}",
                    rates.len(),
                    self.personas
                )));
            }
            if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
                return Err(Error::Config("blob_rates must lie in [0, 1]".into()));
            }
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return Err(Error::Config("separation must be positive".into()));
        }
        if !(self.spread > 0.0 && self.spread.is_finite()) {
            return Err(Error::Config("spread must be positive".into()));
        }
        if !(0.5..=1.0).contains(&self.purity) {
            return Err(Error::Config("purity must lie in [0.5, 1]".into()));
        }
        Ok(())
    }

    /// Rates per blob: explicit, or `base_rate` times multipliers evenly
    /// spaced over [0.25, 1.75].
    pub fn rates(&self) -> Vec<f64> {
        if let Some(r) = &self.blob_rates {
            return r.clone();
        }
        let k = self.personas;
        (0..k)
            .map(|b| {
                let m = if k == 1 {
                    1.0
                } else {
                    0.25 + 1.5 * b as f64 / (k - 1) as f64
                };
                (self.base_rate * m).min(1.0)
            })
            .collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let persona = (0..self.personas).map(|k| format!("persona_{k}"));
        let signal = (0..self.signal_features).map(|j| format!("signal_{j}"));
        let flag = (0..self.flag_features).map(|j| format!("flag_{j}"));
        persona.chain(signal).chain(flag).collect()
    }

    pub fn schema(&self) -> FeatureSchema {
        let kinds = (0..self.personas + self.signal_features)
            .map(|_| FeatureKind::Continuous)
            .chain((0..self.flag_features).map(|_| FeatureKind::BinaryIndicator))
            .collect();
        FeatureSchema {
            feature_names: self.feature_names(),
            feature_kinds: kinds,
            label_name: "success".into(),
            id_name: Some("id".into()),
        }
    }

    /// Index of the feature driving success in blob `b`.
    fn planted_feature(&self, b: usize) -> Option<usize> {
        let drivers = self.signal_features + self.flag_features;
        (drivers > 0).then(|| self.personas + b % drivers)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobTruth {
    pub blob: usize,
    pub planted_rate: f64,
    pub planted_feature: Option<String>,
    pub member_count: usize,
    pub success_count: usize,
}

/// Ground truth written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub config: SynthConfig,
    pub blobs: Vec<BlobTruth>,
    /// Blob of each CSV row, in file order.
    pub assignments: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub data: Dataset,
    pub truth: SynthTruth,
}

pub fn generate(config: &SynthConfig) -> Result<Synthesized> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let noise = Normal::new(0.0, config.spread).expect("validated spread");
    let rates = config.rates();
    let d = config.personas + config.signal_features + config.flag_features;
    let k = config.personas;

    let mut records: Vec<(usize, Vec<f64>, u8)> = Vec::with_capacity(config.rows);
    for b in 0..k {
        let size = config.rows / k + usize::from(b < config.rows % k);
        let planted = config.planted_feature(b);
        let p_high = (2.0 * rates[b] * config.purity).min(1.0);
        let p_low = (2.0 * rates[b] - p_high).max(0.0);
        for _ in 0..size {
            let mut row = Vec::with_capacity(d);
            for p in 0..k {
                let centre = if p == b { config.separation } else { 0.0 };
                row.push(centre + noise.sample(&mut rng));
            }
            for _ in 0..config.signal_features {
                row.push(unit.sample(&mut rng));
            }
            for _ in 0..config.flag_features {
                row.push(f64::from(u8::from(rng.random_bool(0.5))));
            }
            let p = match planted {
                Some(j) => {
                    let high = if j < k + config.signal_features {
                        row[j] > 0.0
                    } else {
                        row[j] == 1.0
                    };
                    if high {
                        p_high
                    } else {
                        p_low
                    }
                }
                None => rates[b],
            };
            let label = u8::from(rng.random_bool(p.clamp(0.0, 1.0)));
            records.push((b, row, label));
        }
    }
    records.shuffle(&mut rng);

    let names = config.feature_names();
    let mut blobs: Vec<BlobTruth> = (0..k)
        .map(|b| BlobTruth {
            blob: b,
            planted_rate: rates[b],
            planted_feature: config.planted_feature(b).map(|j| names[j].clone()),
            member_count: 0,
            success_count: 0,
        })
        .collect();
    let mut assignments = Vec::with_capacity(records.len());
    let mut rows = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (b, row, label) in records {
        blobs[b].member_count += 1;
        blobs[b].success_count += usize::from(label);
        assignments.push(b);
        rows.push(row);
        labels.push(label);
    }
    let data = Dataset::with_row_ids(config.schema(), rows, labels)?;
    Ok(Synthesized {
        data,
        truth: SynthTruth {
            config: config.clone(),
            blobs,
            assignments,
        },
    })
}

pub fn truth_to_json(truth: &SynthTruth) -> Result<String> {
    let mut text = serde_json::to_string_pretty(truth).map_err(|e| Error::Data(format!("serializing truth: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn write_truth(truth: &SynthTruth, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, truth_to_json(truth)?).map_err(|e| Error::io(path, e))
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<SynthTruth> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rates_average_base() {
        let c = SynthConfig::default();
        let rates = c.rates();
        assert_eq!(rates.len(), 8);
        let mean = rates.iter().sum::<f64>() / 8.0;
        assert!((mean - c.base_rate).abs() < 1e-12);
        assert!(rates.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn deterministic_and_sized() {
        let c = SynthConfig {
            rows: 403,
            seed: 11,
            ..SynthConfig::default()
        };
        let a = generate(&c).unwrap();
        let b = generate(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.data.n_rows(), 403);
        assert_eq!(a.truth.blobs.len(), 8);
        assert_eq!(a.truth.blobs.iter().map(|b| b.member_count).sum::<usize>(), 403);
        assert_eq!(
            a.truth.blobs.iter().map(|b| b.success_count).sum::<usize>(),
            a.data.success_count()
        );
        assert!(a.data.validate().is_ok());
        assert_eq!(a.truth.blobs[5].planted_feature.as_deref(), Some("flag_1"));
    }

    #[test]
    fn base_rate_within_binomial_tolerance() {
        for seed in 0..5 {
            let c = SynthConfig {
                seed,
                ..SynthConfig::default()
            };
            let s = generate(&c).unwrap();
            assert!((s.data.success_rate() - 0.019).abs() <= 0.01, "seed {seed}");
        }
    }

    #[test]
    fn planted_feature_drives_success() {
        let c = SynthConfig {
            personas: 1,
            rows: 4000,
            base_rate: 0.3,
            flag_features: 0,
            seed: 3,
            ..SynthConfig::default()
        };
        let s = generate(&c).unwrap();
        let j = c.schema().feature_index("signal_0").unwrap();
        let rate = |high: bool| {
            let (n, k) = s
                .data
                .rows
                .iter()
                .zip(&s.data.labels)
                .filter(|(r, _)| (r[j] > 0.0) == high)
                .fold((0usize, 0usize), |(n, k), (_, &l)| (n + 1, k + usize::from(l)));
            k as f64 / n as f64
        };
        assert!((rate(true) - 0.54).abs() < 0.05);
        assert!((rate(false) - 0.06).abs() < 0.03);
    }

    #[test]
    fn invalid_params() {
        let bad = [
            SynthConfig {
                personas: 0,
                ..SynthConfig::default()
            },
            SynthConfig {
                rows: 3,
                ..SynthConfig::default()
            },
            SynthConfig {
                base_rate: 0.0,
                ..SynthConfig::default()
            },
            SynthConfig {
                blob_rates: Some(vec![0.1]),
                ..SynthConfig::default()
            },
        ];
        for c in bad {
            assert!(matches!(generate(&c), Err(Error::Config(_))));
        }
    }
}
