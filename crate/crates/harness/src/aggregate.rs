//! Cross-seed summaries of per-episode metrics.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use adapt_swarm_core::EpisodeMetrics;
use serde::{Deserialize, Serialize};

use crate::metrics::{read_metrics, CsvError};

pub const SMOOTHING_WINDOW: usize = 20;
pub const FINAL_WINDOW: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MeanQ,
    TotalReward,
    Mae,
    AdaptationTimeS,
    Loss,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::MeanQ, Metric::TotalReward, Metric::Mae, Metric::AdaptationTimeS, Metric::Loss];

    pub fn column(self) -> &'static str {
        match self {
            Metric::MeanQ => "mean_q",
            Metric::TotalReward => "total_reward",
            Metric::Mae => "mae",
            Metric::AdaptationTimeS => "adaptation_time_s",
            Metric::Loss => "loss",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Metric::MeanQ => "Mean Q value per episode",
            Metric::TotalReward => "Total reward per episode",
            Metric::Mae => "Mean absolute error per episode",
            Metric::AdaptationTimeS => "Adaptation time (s) per episode",
            Metric::Loss => "Loss per episode",
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::MeanQ | Metric::TotalReward)
    }

    pub fn of(self, m: &EpisodeMetrics) -> f64 {
        match self {
            Metric::MeanQ => m.mean_q,
            Metric::TotalReward => m.total_reward,
            Metric::Mae => m.mae,
            Metric::AdaptationTimeS => m.adaptation_time_s,
            Metric::Loss => m.loss,
        }
    }
}

/// One algorithm over all its seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: String,
    pub seeds: usize,
    /// Episodes common to every seed.
    pub episodes: usize,
    /// Per-episode mean over seeds, skipping missing values; NaN where no seed
    /// has a value.
    #[serde(with = "nan_as_null_map")]
    pub curves: BTreeMap<Metric, Vec<f64>>,
    /// Trailing mean of the total-reward curve over `SMOOTHING_WINDOW`
    /// episodes (fewer at the start).
    pub smoothed_reward: Vec<f64>,
    /// First episode (1-based) at which the smoothed reward peaks.
    pub episodes_to_best_reward: usize,
    /// Means of each curve over its last `FINAL_WINDOW` episodes.
    #[serde(with = "nan_as_null_scalar_map")]
    pub final_means: BTreeMap<Metric, f64>,
    /// Spearman correlation between episode index and smoothed reward.
    pub reward_trend: f64,
    pub converged_fraction: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum AggregateError {
    #[error("no CSV files given")]
    Empty,
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: CsvError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: no episodes")]
    NoRows { path: PathBuf },
}

pub fn load_csv(path: &Path) -> Result<Vec<EpisodeMetrics>, AggregateError> {
    let file = File::open(path).map_err(|source| AggregateError::Io { path: path.to_owned(), source })?;
    read_metrics(file).map_err(|source| AggregateError::Csv { path: path.to_owned(), source })
}

pub fn aggregate_files(algorithm: &str, paths: &[PathBuf]) -> Result<Summary, AggregateError> {
    let mut runs = Vec::with_capacity(paths.len());
    for p in paths {
        let rows = load_csv(p)?;
        if rows.is_empty() {
            return Err(AggregateError::NoRows { path: p.clone() });
        }
        runs.push(rows);
    }
    aggregate(algorithm, &runs)
}

pub fn aggregate(algorithm: &str, runs: &[Vec<EpisodeMetrics>]) -> Result<Summary, AggregateError> {
    let episodes = runs.iter().map(Vec::len).min().ok_or(AggregateError::Empty)?;
    let curves: BTreeMap<Metric, Vec<f64>> = Metric::ALL
        .into_iter()
        .map(|m| (m, (0..episodes).map(|e| nan_mean(runs.iter().map(|r| m.of(&r[e])))).collect()))
        .collect();
    let smoothed_reward = trailing_mean(&curves[&Metric::TotalReward], SMOOTHING_WINDOW);
    let final_means = curves
        .iter()
        .map(|(&m, c)| (m, nan_mean(c[c.len().saturating_sub(FINAL_WINDOW)..].iter().copied())))
        .collect();
    let index: Vec<f64> = (1..=episodes).map(|e| e as f64).collect();
    let converged = runs.iter().flat_map(|r| &r[..episodes]).filter(|m| m.converged).count();
    Ok(Summary {
        algorithm: algorithm.to_owned(),
        seeds: runs.len(),
        episodes,
        episodes_to_best_reward: first_max(&smoothed_reward) + 1,
        reward_trend: spearman(&index, &smoothed_reward),
        smoothed_reward,
        curves,
        final_means,
        converged_fraction: converged as f64 / (episodes * runs.len()).max(1) as f64,
    })
}

/// Mean of the non-NaN values; NaN if there are none.
pub fn nan_mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.filter(|x| !x.is_nan()).fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

pub fn trailing_mean(xs: &[f64], window: usize) -> Vec<f64> {
    (0..xs.len()).map(|i| nan_mean(xs[(i + 1).saturating_sub(window)..=i].iter().copied())).collect()
}

/// Index of the first maximum, ignoring NaN; 0 for an all-NaN input.
pub fn first_max(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if xs[best].is_nan() || x > xs[best] {
            best = i;
        }
    }
    best
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation over pairs where both values are present.
/// Zero when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = x.iter().zip(y).filter(|(a, b)| !a.is_nan() && !b.is_nan()).map(|(a, b)| (*a, *b)).unzip();
    let (rx, ry) = (ranks(&x), ranks(&y));
    let n = rx.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

// JSON has no NaN, so missing values travel as null.
fn nan_to_opt(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

mod nan_as_null_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<Metric, Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        let v: BTreeMap<_, Vec<Option<f64>>> = m.iter().map(|(k, c)| (*k, c.iter().map(|&x| nan_to_opt(x)).collect())).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Metric, Vec<f64>>, D::Error> {
        let v = BTreeMap::<Metric, Vec<Option<f64>>>::deserialize(d)?;
        Ok(v.into_iter().map(|(k, c)| (k, c.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())).collect())
    }
}

mod nan_as_null_scalar_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<Metric, f64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(k, &x)| (*k, nan_to_opt(x))).collect::<BTreeMap<_, _>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Metric, f64>, D::Error> {
        let v = BTreeMap::<Metric, Option<f64>>::deserialize(d)?;
        Ok(v.into_iter().map(|(k, x)| (k, x.unwrap_or(f64::NAN))).collect())
    }
}
