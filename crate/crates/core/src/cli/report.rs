use std::fmt::Write as _;
use std::time::Duration;

use super::config::ExperimentConfig;
use super::pipeline::RunOutcome;
use crate::data::LabeledDataset;

pub const REPORT_HEADER: &str = "# smoothclust cluster report v1";

/// Wall-clock durations of the pipeline stages.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimes {
    pub load: Duration,
    pub total: Duration,
}

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

/// Renders the line-oriented `key = value` report.
///
/// Everything outside `timing.*` is a deterministic function of the
/// configuration and input files.
pub fn render_report(
    cfg: &ExperimentConfig,
    data: &LabeledDataset,
    g: usize,
    outcome: &RunOutcome,
    times: StageTimes,
) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    for (k, v) in cfg.echo() {
        line(&k, v);
    }
    line("result.dataset", data.name.clone());
    line("result.n", data.n().to_string());
    line("result.m", data.m().to_string());
    line("result.g", g.to_string());
    line("result.iterations", outcome.iterations().to_string());
    line("result.converged", outcome.converged().to_string());
    if let Some(t) = &outcome.trace {
        line("result.selected_iteration", t.selected.to_string());
        if let Some(r) = t.final_residual() {
            line("result.final_residual", format!("{r:?}"));
        }
    }
    if let Some((mean, sd)) = &outcome.scores {
        line("metrics.acc", format!("{:?}", mean.acc));
        line("metrics.nmi", format!("{:?}", mean.nmi));
        line("metrics.pur", format!("{:?}", mean.pur));
        if cfg.repeat > 1 {
            line("metrics.acc_std", format!("{:?}", sd.acc));
            line("metrics.nmi_std", format!("{:?}", sd.nmi));
            line("metrics.pur_std", format!("{:?}", sd.pur));
        }
    }
    if let Some(t) = &outcome.trace {
        for r in &t.records {
            line(&format!("trace.{}.residual", r.iteration), format!("{:?}", r.residual));
            if let Some(s) = &r.scores {
                line(&format!("trace.{}.acc", r.iteration), format!("{:?}", s.acc));
                line(&format!("trace.{}.nmi", r.iteration), format!("{:?}", s.nmi));
                line(&format!("trace.{}.pur", r.iteration), format!("{:?}", s.pur));
            }
        }
    }
    line("timing.load_ms", ms(times.load));
    line("timing.fit_ms", ms(outcome.fit_time));
    line("timing.cluster_ms", ms(outcome.cluster_time));
    if let Some(t) = &outcome.trace {
        for r in &t.records {
            line(&format!("timing.trace.{}_ms", r.iteration), ms(r.elapsed));
        }
    }
    line("timing.total_ms", ms(times.total));
    out
}

/// Drops `timing.*` lines, leaving the reproducible part of a report.
pub fn strip_timings(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.trim_start().starts_with("timing."))
        .map(|l| format!("{l}\n"))
        .collect()
}
