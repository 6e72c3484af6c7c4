use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use super::config::{Algorithm, ExperimentConfig};
use crate::data::{load_features, load_labels, standardize, LabeledDataset};
use crate::error::{Error, Result};
use crate::graph::AffinityMatrix;
use crate::metrics::{score_all, Scores};
use crate::numerics::SeededRng;
use crate::selfexpress::{
    lsr_affinity, run_flsr_observed, run_ftrr_observed, trr_affinity, IterationConfig,
    IterationTrace, LsrConfig, TrrConfig,
};
use crate::spectral::{cluster, SpectralConfig};

/// Loads features plus ground truth from a separate file or a label column.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<LabeledDataset> {
    let mut data = load_features(&cfg.data, cfg.has_labels)?;
    if let Some(path) = &cfg.labels {
        let labels = load_labels(path)?;
        if labels.len() != data.n() {
            return Err(Error::usage(format!(
                "labels: {} labels for {} samples",
                labels.len(),
                data.n()
            )));
        }
        data.labels = Some(labels);
    }
    if cfg.standardize {
        data.features = standardize(&data.features);
    }
    Ok(data)
}

pub fn cluster_count(cfg: &ExperimentConfig, data: &LabeledDataset) -> Result<usize> {
    cfg.g
        .or_else(|| data.classes())
        .ok_or_else(|| Error::usage("g required (no labels to infer it from)"))
}

/// Hyperparameters that vary between sweep cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub alpha: f64,
    pub k: u32,
    pub seed: u64,
}

impl CellParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            alpha: cfg.alpha,
            k: cfg.k.unwrap_or(0),
            seed: cfg.seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub labels: Vec<usize>,
    /// Mean over repeats, with the population standard deviation.
    pub scores: Option<(Scores, Scores)>,
    /// `None` for the closed-form algorithms.
    pub trace: Option<IterationTrace>,
    pub fit_time: Duration,
    pub cluster_time: Duration,
}

impl RunOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.as_ref().map_or(1, |t| t.iterations())
    }

    pub fn converged(&self) -> bool {
        self.trace.as_ref().is_none_or(|t| t.converged)
    }
}

fn lsr_config(cfg: &ExperimentConfig, alpha: f64) -> LsrConfig {
    LsrConfig {
        alpha,
        zero_diag: cfg.zero_diag,
    }
}

fn p_of(cfg: &ExperimentConfig) -> Result<usize> {
    cfg.p.ok_or_else(|| Error::usage("p required"))
}

fn spectral(cfg: &ExperimentConfig) -> SpectralConfig {
    SpectralConfig::with_restarts(cfg.restarts)
}

/// Learns the affinity for one configuration.
pub fn fit_affinity(
    cfg: &ExperimentConfig,
    params: CellParams,
    x: &DMatrix<f64>,
    truth: Option<&[usize]>,
    g: usize,
) -> Result<(AffinityMatrix, Option<IterationTrace>)> {
    let lsr = lsr_config(cfg, params.alpha);
    let iteration = IterationConfig {
        filter_order: params.k,
        epsilon: cfg.epsilon,
        max_iter: cfg.max_iter,
        source: cfg.source.into(),
    };
    let spectral_cfg = spectral(cfg);
    let mut score_graph = |w: &AffinityMatrix| -> Result<Option<Scores>> {
        match truth {
            Some(t) if cfg.trace_metrics => {
                let pred = cluster(w, g, &mut SeededRng::new(params.seed), &spectral_cfg)?;
                Ok(Some(score_all(pred.labels(), t)?))
            }
            _ => Ok(None),
        }
    };
    match cfg.algo {
        Algorithm::Lsr => Ok((lsr_affinity(x, &lsr)?, None)),
        Algorithm::Trr => {
            let trr = TrrConfig { base: lsr, p: p_of(cfg)? };
            Ok((trr_affinity(x, &trr)?, None))
        }
        Algorithm::Flsr => {
            let fit = run_flsr_observed(x, &lsr, &iteration, Some(&mut score_graph))?;
            Ok((fit.affinity, Some(fit.trace)))
        }
        Algorithm::Ftrr => {
            let trr = TrrConfig { base: lsr, p: p_of(cfg)? };
            let fit = run_ftrr_observed(x, &trr, &iteration, Some(&mut score_graph))?;
            Ok((fit.affinity, Some(fit.trace)))
        }
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fits once, then clusters `repeat` times with seeds `seed, seed + 1, ...`.
///
/// The reported labels come from the first repeat.
pub fn run_experiment(cfg: &ExperimentConfig, params: CellParams, data: &LabeledDataset) -> Result<RunOutcome> {
    let g = cluster_count(cfg, data)?;
    if g > data.n() {
        return Err(Error::usage(format!("g = {g} exceeds the {} samples", data.n())));
    }
    let truth = data.labels.as_deref();

    let start = Instant::now();
    let (affinity, trace) = fit_affinity(cfg, params, &data.features, truth, g)?;
    let fit_time = start.elapsed();

    let start = Instant::now();
    let spectral_cfg = spectral(cfg);
    let mut runs = Vec::with_capacity(cfg.repeat);
    for r in 0..cfg.repeat as u64 {
        let mut rng = SeededRng::new(params.seed.wrapping_add(r));
        runs.push(cluster(&affinity, g, &mut rng, &spectral_cfg)?.into_labels());
    }
    let cluster_time = start.elapsed();

    let scores = match truth {
        Some(t) => {
            let all = runs
                .iter()
                .map(|pred| score_all(pred, t))
                .collect::<Result<Vec<_>>>()?;
            let (acc, acc_sd) = mean_std(&all.iter().map(|s| s.acc).collect::<Vec<_>>());
            let (nmi, nmi_sd) = mean_std(&all.iter().map(|s| s.nmi).collect::<Vec<_>>());
            let (pur, pur_sd) = mean_std(&all.iter().map(|s| s.pur).collect::<Vec<_>>());
            Some((
                Scores { acc, nmi, pur },
                Scores {
                    acc: acc_sd,
                    nmi: nmi_sd,
                    pur: pur_sd,
                },
            ))
        }
        None => None,
    };
    let labels = runs.swap_remove(0);
    Ok(RunOutcome {
        labels,
        scores,
        trace,
        fit_time,
        cluster_time,
    })
}
