use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::ablate::{run_ablation, AblationConfig, NoiseSpec, ABLATION_HEADER};
use super::config::ExperimentConfig;
use super::pipeline::{cluster_count, load_dataset, run_experiment, CellParams, RunOutcome};
use super::report::{render_report, StageTimes};
use super::{AblateArgs, ClusterArgs, EmbedArgs, GenArgs, GenKind, SweepArgs};
use crate::data::{
    gen_piecewise_images, gen_subspaces, load_features, load_labels, save_csv, save_labels,
    ImageFixtureSpec, SubspaceSpec,
};
use crate::error::{Error, Result};
use crate::selfexpress::{FilterIteration, LsrConfig};

pub const SWEEP_HEADER: [&str; 8] = [
    "alpha", "k", "acc", "nmi", "pur", "iterations", "converged", "status",
];

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(err) => Error::io(path, err),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn float(v: f64) -> String {
    format!("{v:?}")
}

pub fn cmd_cluster(args: &ClusterArgs) -> Result<()> {
    let total = Instant::now();
    let cfg = ExperimentConfig::resolve(args.experiment.layer()?, false)?;
    let start = Instant::now();
    let data = load_dataset(&cfg)?;
    let load = start.elapsed();
    let g = cluster_count(&cfg, &data)?;
    let outcome = run_experiment(&cfg, CellParams::from_config(&cfg), &data)?;

    create_dir(&args.out)?;
    save_labels(&args.out.join("labels.csv"), &outcome.labels)?;
    let times = StageTimes {
        load,
        total: total.elapsed(),
    };
    let report = render_report(&cfg, &data, g, &outcome, times);
    write_text(&args.out.join("report.txt"), &report)?;

    match &outcome.scores {
        Some((s, _)) => eprintln!(
            "{} on {}: acc {:.4} nmi {:.4} pur {:.4}, {} iteration(s)",
            cfg.algo,
            data.name,
            s.acc,
            s.nmi,
            s.pur,
            outcome.iterations()
        ),
        None => eprintln!("{} on {}: {} iteration(s), no labels", cfg.algo, data.name, outcome.iterations()),
    }
    Ok(())
}

fn sweep_row(alpha: f64, k: u32, result: &Result<RunOutcome>) -> Vec<String> {
    let mut row = vec![float(alpha), k.to_string()];
    match result {
        Ok(out) => {
            match &out.scores {
                Some((s, _)) => row.extend([float(s.acc), float(s.nmi), float(s.pur)]),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
            row.push(out.iterations().to_string());
            row.push(out.converged().to_string());
            row.push("ok".into());
        }
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), 5));
            row.push(format!("error: {e}"));
        }
    }
    row
}

/// Cells run in parallel; cell `i` (alpha-major order) uses seed `seed + i`.
pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = ExperimentConfig::resolve(args.experiment.layer()?, true)?;
    if args.alphas.is_empty() || args.ks.is_empty() {
        return Err(Error::usage("alphas and ks must be non-empty"));
    }
    let data = load_dataset(&cfg)?;
    cluster_count(&cfg, &data)?;

    let cells: Vec<(f64, u32)> = args
        .alphas
        .iter()
        .flat_map(|&a| args.ks.iter().map(move |&k| (a, k)))
        .collect();
    let rows: Vec<Vec<String>> = cells
        .par_iter()
        .enumerate()
        .map(|(i, &(alpha, k))| {
            let params = CellParams {
                alpha,
                k,
                seed: cfg.seed.wrapping_add(i as u64),
            };
            sweep_row(alpha, k, &run_experiment(&cfg, params, &data))
        })
        .collect();

    let failed = rows.iter().filter(|r| r[7] != "ok").count();
    write_table(&args.out, &SWEEP_HEADER, &rows)?;
    eprintln!("{} cells, {failed} failed", rows.len());
    Ok(())
}

pub fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    let mut data = load_features(&args.data, args.has_labels)?;
    if let Some(path) = &args.labels {
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
    if data.labels.is_none() {
        return Err(Error::usage("ablate needs labels (--labels or --has-labels)"));
    }
    let cfg = AblationConfig {
        height: args.height,
        width: args.width,
        noise: (!args.no_noise).then_some(NoiseSpec {
            mean: args.noise_mean,
            sigma: args.noise_sigma,
        }),
        k_max: args.k_max,
        knn: args.knn,
        alpha: args.alpha,
        g: args.g,
        seed: args.seed,
        restarts: args.restarts,
        dynamic_range: args.dynamic_range,
    };
    let rows = run_ablation(&data, &cfg)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                float(r.psnr),
                float(r.ssim),
                float(r.fisher),
                float(r.scores.acc),
                float(r.scores.nmi),
                float(r.scores.pur),
            ]
        })
        .collect();
    write_table(&args.out, &ABLATION_HEADER, &table)?;
    eprintln!("{} filter orders written to {}", rows.len(), args.out.display());
    Ok(())
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let data = match args.kind {
        GenKind::Subspaces => gen_subspaces(&SubspaceSpec {
            ambient_dim: args.ambient_dim,
            subspace_dim: args.subspace_dim,
            clusters: args.clusters,
            samples_per_cluster: args.per_cluster,
            noise_sigma: args.noise_sigma,
            seed: args.seed,
            orthogonal: args.orthogonal,
        }),
        GenKind::Images => gen_piecewise_images(&ImageFixtureSpec {
            height: args.height,
            width: args.width,
            classes: args.classes,
            per_class: args.per_class,
            max_shift: args.max_shift,
            gain_jitter: args.gain_jitter,
            seed: args.seed,
        }),
    }
    .map_err(|e| match e {
        Error::Parameter(m) => Error::usage(m),
        other => other,
    })?;
    create_dir(&args.out)?;
    save_csv(&args.out.join("features.csv"), &data.features, None)?;
    if let Some(labels) = &data.labels {
        save_labels(&args.out.join("labels.csv"), labels)?;
    }
    eprintln!("{}: {} samples x {} features", data.name, data.n(), data.m());
    Ok(())
}

/// `xbar_iter{t}.csv` holds the representation after `t` passes, i.e. the
/// features filtered on the graph of iteration `t`; `t = 0` is the input.
pub fn cmd_embed(args: &EmbedArgs) -> Result<()> {
    let cfg = ExperimentConfig::resolve(args.experiment.layer()?, false)?;
    let data = load_dataset(&cfg)?;
    let wanted: BTreeSet<usize> = args.iters.iter().copied().collect();
    let Some(&last) = wanted.iter().next_back() else {
        return Err(Error::usage("iters must be non-empty"));
    };
    if last > cfg.max_iter {
        return Err(Error::usage(format!(
            "iters: {last} exceeds max_iter = {}",
            cfg.max_iter
        )));
    }
    let order = if cfg.algo.is_filtered() { cfg.k.unwrap_or(0) } else { 0 };
    let lsr = LsrConfig {
        alpha: cfg.alpha,
        zero_diag: cfg.zero_diag,
    };
    lsr.validate()?;
    let mut driver = FilterIteration::new(&data.features, lsr, order, cfg.source.into());

    create_dir(&args.out)?;
    for t in 0..=last {
        if t > 0 {
            driver.step()?;
        }
        if wanted.contains(&t) {
            save_csv(&args.out.join(format!("xbar_iter{t}.csv")), driver.representation(), None)?;
        }
    }
    eprintln!("wrote {} representation(s) to {}", wanted.len(), args.out.display());
    Ok(())
}
