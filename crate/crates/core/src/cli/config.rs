use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;

use crate::error::{Error, Result};
use crate::selfexpress::{FilterSource, DEFAULT_EPSILON, DEFAULT_MAX_ITER};

pub const DEFAULT_RESTARTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Lsr,
    Trr,
    Flsr,
    Ftrr,
}

impl Algorithm {
    pub fn is_filtered(self) -> bool {
        matches!(self, Algorithm::Flsr | Algorithm::Ftrr)
    }

    pub fn is_thresholded(self) -> bool {
        matches!(self, Algorithm::Trr | Algorithm::Ftrr)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Lsr => "lsr",
            Algorithm::Trr => "trr",
            Algorithm::Flsr => "flsr",
            Algorithm::Ftrr => "ftrr",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        <Algorithm as ValueEnum>::from_str(s, true).map_err(|_| Error::usage(format!("algo: unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum SourceArg {
    #[default]
    Raw,
    Previous,
}

impl From<SourceArg> for FilterSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Raw => FilterSource::Raw,
            SourceArg::Previous => FilterSource::Previous,
        }
    }
}

impl fmt::Display for SourceArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceArg::Raw => "raw",
            SourceArg::Previous => "previous",
        })
    }
}

/// Partially specified settings, from a config file or from flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub data: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub has_labels: Option<bool>,
    pub algo: Option<Algorithm>,
    pub alpha: Option<f64>,
    pub k: Option<u32>,
    pub p: Option<usize>,
    pub g: Option<usize>,
    pub epsilon: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub source: Option<SourceArg>,
    pub zero_diag: Option<bool>,
    pub standardize: Option<bool>,
    pub repeat: Option<usize>,
    pub trace_metrics: Option<bool>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::usage(format!("{key}: cannot parse {value:?}")))
}

impl ConfigLayer {
    /// Values from `other` win where present.
    pub fn overlay(mut self, other: ConfigLayer) -> ConfigLayer {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            data, labels, has_labels, algo, alpha, k, p, g, epsilon, max_iter, seed, restarts,
            source, zero_diag, standardize, repeat, trace_metrics
        );
        self
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data" => self.data = Some(PathBuf::from(value)),
            "labels" => self.labels = Some(PathBuf::from(value)),
            "has_labels" => self.has_labels = Some(parse_value(key, value)?),
            "algo" => self.algo = Some(value.parse()?),
            "alpha" => self.alpha = Some(parse_value(key, value)?),
            "k" => self.k = Some(parse_value(key, value)?),
            "p" => self.p = Some(parse_value(key, value)?),
            "g" => self.g = Some(parse_value(key, value)?),
            "epsilon" => self.epsilon = Some(parse_value(key, value)?),
            "max_iter" => self.max_iter = Some(parse_value(key, value)?),
            "seed" => self.seed = Some(parse_value(key, value)?),
            "restarts" => self.restarts = Some(parse_value(key, value)?),
            "source" => {
                self.source = Some(
                    SourceArg::from_str(value, true)
                        .map_err(|_| Error::usage(format!("source: unknown value {value:?}")))?,
                )
            }
            "zero_diag" => self.zero_diag = Some(parse_value(key, value)?),
            "standardize" => self.standardize = Some(parse_value(key, value)?),
            "repeat" => self.repeat = Some(parse_value(key, value)?),
            "trace_metrics" => self.trace_metrics = Some(parse_value(key, value)?),
            other => return Err(Error::usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    ///
    /// Keys may carry a `config.` prefix. Keys with any other dotted prefix
    /// (`result.`, `metrics.`, `trace.`, `timing.`) are ignored, so a cluster
    /// report can be fed back in as a config file.
    pub fn parse(text: &str) -> Result<ConfigLayer> {
        let mut layer = ConfigLayer::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::usage(format!(
                    "config line {}: expected `key = value`, found {raw:?}",
                    i + 1
                )));
            };
            let key = key.trim();
            let key = match key.split_once('.') {
                Some(("config", rest)) => rest,
                Some(_) => continue,
                None => key,
            };
            layer.set(key, value.trim())?;
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<ConfigLayer> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Fully resolved settings for `cluster`, `sweep` and `embed`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    pub labels: Option<PathBuf>,
    pub has_labels: bool,
    pub algo: Algorithm,
    pub alpha: f64,
    pub k: Option<u32>,
    pub p: Option<usize>,
    /// `None` means "use the number of label classes".
    pub g: Option<usize>,
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub restarts: usize,
    pub source: SourceArg,
    pub zero_diag: bool,
    pub standardize: bool,
    pub repeat: usize,
    pub trace_metrics: bool,
}

impl ExperimentConfig {
    /// Resolves a merged layer. With `grid_supplies_alpha_k` (sweeps) the
    /// per-cell grid provides `alpha` and `k`, so they may be absent.
    pub fn resolve(layer: ConfigLayer, grid_supplies_alpha_k: bool) -> Result<Self> {
        let data = layer.data.ok_or_else(|| Error::usage("data required"))?;
        let algo = layer.algo.ok_or_else(|| Error::usage("algo required"))?;
        let alpha = match (layer.alpha, grid_supplies_alpha_k) {
            (Some(a), _) => a,
            (None, true) => f64::NAN,
            (None, false) => return Err(Error::usage("alpha required")),
        };
        if algo.is_filtered() && layer.k.is_none() && !grid_supplies_alpha_k {
            return Err(Error::usage("k required"));
        }
        if algo.is_thresholded() && layer.p.is_none() {
            return Err(Error::usage("p required"));
        }
        let cfg = Self {
            data,
            labels: layer.labels,
            has_labels: layer.has_labels.unwrap_or(false),
            algo,
            alpha,
            k: layer.k,
            p: layer.p,
            g: layer.g,
            epsilon: layer.epsilon.unwrap_or(DEFAULT_EPSILON),
            max_iter: layer.max_iter.unwrap_or(DEFAULT_MAX_ITER),
            seed: layer.seed.unwrap_or(0),
            restarts: layer.restarts.unwrap_or(DEFAULT_RESTARTS),
            source: layer.source.unwrap_or_default(),
            zero_diag: layer.zero_diag.unwrap_or(false),
            standardize: layer.standardize.unwrap_or(false),
            repeat: layer.repeat.unwrap_or(1),
            trace_metrics: layer.trace_metrics.unwrap_or(false),
        };
        cfg.check_ranges(grid_supplies_alpha_k)?;
        Ok(cfg)
    }

    fn check_ranges(&self, grid: bool) -> Result<()> {
        if !grid && !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::usage(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.p == Some(0) {
            return Err(Error::usage("p must be at least 1"));
        }
        if self.g.is_some_and(|g| g == 0) {
            return Err(Error::usage("g must be at least 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::usage(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iter == 0 {
            return Err(Error::usage("max_iter must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::usage("restarts must be at least 1"));
        }
        if self.repeat == 0 {
            return Err(Error::usage("repeat must be at least 1"));
        }
        if self.labels.is_some() && self.has_labels {
            return Err(Error::usage("labels: give either a label file or has_labels, not both"));
        }
        Ok(())
    }

    /// `config.*` lines that reproduce this run when read back.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("data".to_string(), self.data.display().to_string()),
        ];
        if let Some(l) = &self.labels {
            out.push(("labels".into(), l.display().to_string()));
        }
        out.push(("has_labels".into(), self.has_labels.to_string()));
        out.push(("algo".into(), self.algo.to_string()));
        out.push(("alpha".into(), format!("{:?}", self.alpha)));
        if let Some(k) = self.k {
            out.push(("k".into(), k.to_string()));
        }
        if let Some(p) = self.p {
            out.push(("p".into(), p.to_string()));
        }
        if let Some(g) = self.g {
            out.push(("g".into(), g.to_string()));
        }
        out.push(("epsilon".into(), format!("{:?}", self.epsilon)));
        out.push(("max_iter".into(), self.max_iter.to_string()));
        out.push(("seed".into(), self.seed.to_string()));
        out.push(("restarts".into(), self.restarts.to_string()));
        out.push(("source".into(), self.source.to_string()));
        out.push(("zero_diag".into(), self.zero_diag.to_string()));
        out.push(("standardize".into(), self.standardize.to_string()));
        out.push(("repeat".into(), self.repeat.to_string()));
        out.push(("trace_metrics".into(), self.trace_metrics.to_string()));
        out.into_iter().map(|(k, v)| (format!("config.{k}"), v)).collect()
    }
}
