use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use super::lsr::{affinity_from_coefficients, lsr_coefficients, trr_threshold, LsrConfig, TrrConfig};
use crate::error::{Error, Result};
use crate::graph::{normalized_laplacian, AffinityMatrix, GraphFilter};
use crate::metrics::Scores;

pub const DEFAULT_EPSILON: f64 = 1e-5;
pub const DEFAULT_MAX_ITER: usize = 50;

/// Which matrix the graph filter is applied to at every iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterSource {
    /// `X_{t+1} = (I - L_t/2)^k X` on the raw features.
    #[default]
    Raw,
    /// `X_{t+1} = (I - L_t/2)^k X_t`, compounding the smoothing.
    Previous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    pub filter_order: u32,
    /// Stop once `|W_t - W_{t-1}|_F^2 < epsilon`.
    pub epsilon: f64,
    pub max_iter: usize,
    pub source: FilterSource,
}

impl IterationConfig {
    pub fn new(filter_order: u32) -> Self {
        Self {
            filter_order,
            epsilon: DEFAULT_EPSILON,
            max_iter: DEFAULT_MAX_ITER,
            source: FilterSource::Raw,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::parameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::parameter("max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub iteration: usize,
    /// `|W_t - W_{t-1}|_F^2`, with `W_0 = 0`.
    pub residual: f64,
    pub elapsed: Duration,
    pub scores: Option<Scores>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    /// Iteration whose affinity was returned.
    pub selected: usize,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.records.last().map(|r| r.residual)
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub affinity: AffinityMatrix,
    pub trace: IterationTrace,
}

/// Output of one pass of the alternating scheme.
#[derive(Debug, Clone)]
pub struct IterationStep {
    pub iteration: usize,
    pub affinity: AffinityMatrix,
    pub residual: f64,
}

/// Stepwise driver: learn `Z_t` on `X_t`, form `W_t` and `L_t`, filter.
///
/// `X_1` is the raw feature matrix.
#[derive(Debug, Clone)]
pub struct FilterIteration<'a> {
    raw: &'a DMatrix<f64>,
    lsr: LsrConfig,
    order: u32,
    source: FilterSource,
    xbar: DMatrix<f64>,
    previous: Option<DMatrix<f64>>,
    iteration: usize,
}

impl<'a> FilterIteration<'a> {
    pub fn new(raw: &'a DMatrix<f64>, lsr: LsrConfig, order: u32, source: FilterSource) -> Self {
        Self {
            raw,
            lsr,
            order,
            source,
            xbar: raw.clone(),
            previous: None,
            iteration: 0,
        }
    }

    /// `X_t` that the next [`step`](Self::step) learns from.
    pub fn representation(&self) -> &DMatrix<f64> {
        &self.xbar
    }

    pub fn step(&mut self) -> Result<IterationStep> {
        self.iteration += 1;
        let z = lsr_coefficients(&self.xbar, &self.lsr)?;
        // |Z| is symmetric up to roundoff; the averaged form makes it exact
        let affinity = affinity_from_coefficients(z.values())?;
        let w = affinity.weights();
        let residual = match &self.previous {
            Some(prev) => (w - prev).norm_squared(),
            None => w.norm_squared(),
        };
        let filter = GraphFilter::new(self.order, normalized_laplacian(&affinity));
        self.xbar = match self.source {
            FilterSource::Raw => filter.apply(self.raw)?,
            FilterSource::Previous => filter.apply(&self.xbar)?,
        };
        self.previous = Some(w.clone());
        Ok(IterationStep {
            iteration: self.iteration,
            affinity,
            residual,
        })
    }
}

/// Per-iteration callback, e.g. to score intermediate graphs.
pub type Observer<'o> = dyn FnMut(&AffinityMatrix) -> Result<Option<Scores>> + 'o;

/// Alternating graph filtering and LSR until the affinity stops changing.
///
/// Without convergence after `max_iter` passes the affinity with the
/// smallest residual is returned and `trace.converged` is false.
pub fn run_flsr(x: &DMatrix<f64>, lsr: &LsrConfig, it: &IterationConfig) -> Result<FitOutcome> {
    run_flsr_observed(x, lsr, it, None)
}

pub fn run_flsr_observed(
    x: &DMatrix<f64>,
    lsr: &LsrConfig,
    it: &IterationConfig,
    mut observer: Option<&mut Observer<'_>>,
) -> Result<FitOutcome> {
    lsr.validate()?;
    it.validate()?;
    let mut driver = FilterIteration::new(x, *lsr, it.filter_order, it.source);
    let mut trace = IterationTrace::default();
    let mut best: Option<(f64, usize, AffinityMatrix)> = None;

    for _ in 0..it.max_iter {
        let start = Instant::now();
        let step = driver.step()?;
        let elapsed = start.elapsed();
        let scores = match observer.as_mut() {
            Some(f) => f(&step.affinity)?,
            None => None,
        };
        trace.records.push(IterationRecord {
            iteration: step.iteration,
            residual: step.residual,
            elapsed,
            scores,
        });
        if step.residual < it.epsilon {
            trace.converged = true;
            trace.selected = step.iteration;
            return Ok(FitOutcome {
                affinity: step.affinity,
                trace,
            });
        }
        if best.as_ref().is_none_or(|(r, _, _)| step.residual < *r) {
            best = Some((step.residual, step.iteration, step.affinity));
        }
    }

    let (_, selected, affinity) = best.expect("max_iter >= 1");
    trace.selected = selected;
    Ok(FitOutcome { affinity, trace })
}

/// [`run_flsr`] followed by top-`p` row thresholding and re-symmetrization.
pub fn run_ftrr(x: &DMatrix<f64>, trr: &TrrConfig, it: &IterationConfig) -> Result<FitOutcome> {
    run_ftrr_observed(x, trr, it, None)
}

pub fn run_ftrr_observed(
    x: &DMatrix<f64>,
    trr: &TrrConfig,
    it: &IterationConfig,
    observer: Option<&mut Observer<'_>>,
) -> Result<FitOutcome> {
    trr.validate(x.nrows())?;
    let fit = run_flsr_observed(x, &trr.base, it, observer)?;
    let kept = trr_threshold(fit.affinity.weights(), trr.p)?;
    Ok(FitOutcome {
        affinity: affinity_from_coefficients(&kept)?,
        trace: fit.trace,
    })
}
