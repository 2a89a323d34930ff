//! Minority oversampling toward a target success rate.
//!
//! Only success rows are ever added; the original rows come first and are left
//! untouched, synthetic rows are appended with fresh ids.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{fit_rows, Dataset, FeatureKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleStrategy {
    /// Copies uniformly drawn minority rows.
    Duplicate,
    /// SMOTE-style interpolation towards one of the nearest minority rows.
    Interpolate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResampleConfig {
    pub target_success_rate: f64,
    pub strategy: ResampleStrategy,
    pub seed: u64,
    pub neighbor_count: usize,
}

impl Default for ResampleConfig {
    fn default() -> Self {
        ResampleConfig {
            target_success_rate: 0.10,
            strategy: ResampleStrategy::Interpolate,
            seed: 0,
            neighbor_count: 5,
        }
    }
}

impl ResampleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_success_rate > 0.0 && self.target_success_rate < 1.0) {
            return Err(Error::Config(format!(
                "target_success_rate must lie in (0, 1), got {}",
                self.target_success_rate
            )));
        }
        if self.neighbor_count == 0 {
            return Err(Error::Config("neighbor_count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub data: Dataset,
    pub added: usize,
    /// Interpolation was requested but fewer than two minority rows existed.
    pub fell_back_to_duplicate: bool,
}

/// Smallest `s` with `(successes + s) / (total + s) >= target`.
pub fn required_additions(successes: usize, total: usize, target: f64) -> usize {
    let reached = |s: usize| (successes + s) as f64 / (total + s) as f64 >= target;
    let estimate = ((target * total as f64 - successes as f64) / (1.0 - target)).ceil();
    let mut s = if estimate.is_finite() && estimate > 0.0 {
        estimate as usize
    } else {
        0
    };
    while !reached(s) {
        s += 1;
    }
    while s > 0 && reached(s - 1) {
        s -= 1;
    }
    s
}

pub fn resample(data: &Dataset, config: &ResampleConfig) -> Result<Resampled> {
    config.validate()?;
    let minority: Vec<usize> = (0..data.n_rows()).filter(|&i| data.labels[i] == 1).collect();
    if minority.is_empty() || minority.len() == data.n_rows() {
        return Err(Error::Data("resampling needs both classes present".into()));
    }
    let added = required_additions(minority.len(), data.n_rows(), config.target_success_rate);
    let mut out = Resampled {
        data: data.clone(),
        added,
        fell_back_to_duplicate: false,
    };
    if added == 0 {
        return Ok(out);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut strategy = config.strategy;
    if strategy == ResampleStrategy::Interpolate && minority.len() < 2 {
        log::warn!("interpolation needs two minority rows; duplicating instead");
        strategy = ResampleStrategy::Duplicate;
        out.fell_back_to_duplicate = true;
    }

    let synthetic_rows = match strategy {
        ResampleStrategy::Duplicate => (0..added)
            .map(|_| data.rows[minority[rng.random_range(0..minority.len())]].clone())
            .collect::<Vec<_>>(),
        ResampleStrategy::Interpolate => interpolate(data, &minority, added, config.neighbor_count, &mut rng)?,
    };

    let mut taken: HashSet<String> = data.ids.iter().cloned().collect();
    let mut next = 0usize;
    for row in synthetic_rows {
        let id = loop {
            let candidate = format!("syn-{next}");
            next += 1;
            if taken.insert(candidate.clone()) {
                break candidate;
            }
        };
        out.data.rows.push(row);
        out.data.labels.push(1);
        out.data.ids.push(id);
        out.data.synthetic.push(true);
    }
    Ok(out)
}

fn interpolate(
    data: &Dataset,
    minority: &[usize],
    count: usize,
    neighbor_count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    // Neighbours are found in standardized space; the interpolation itself is
    // affine, so it is carried out on raw values with the same weight.
    let stats = fit_rows(&data.rows)?;
    let standardized: Vec<Vec<f64>> = minority
        .iter()
        .map(|&i| stats.transform_row(&data.rows[i]))
        .collect::<Result<_>>()?;
    let k = neighbor_count.min(minority.len() - 1);
    let neighbors: Vec<Vec<usize>> = (0..minority.len())
        .map(|a| {
            let mut by_distance: Vec<(f64, usize)> = (0..minority.len())
                .filter(|&b| b != a)
                .map(|b| (squared_distance(&standardized[a], &standardized[b]), b))
                .collect();
            by_distance.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            by_distance.into_iter().take(k).map(|(_, b)| b).collect()
        })
        .collect();

    let kinds = &data.schema.feature_kinds;
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let a = rng.random_range(0..minority.len());
        let b = neighbors[a][rng.random_range(0..neighbors[a].len())];
        let u: f64 = rng.random();
        let (xa, xb) = (&data.rows[minority[a]], &data.rows[minority[b]]);
        let row = xa
            .iter()
            .zip(xb)
            .zip(kinds)
            .map(|((&va, &vb), kind)| {
                let v = va + u * (vb - va);
                match kind {
                    FeatureKind::BinaryIndicator => v.round().clamp(0.0, 1.0),
                    FeatureKind::Continuous => v,
                }
            })
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}
