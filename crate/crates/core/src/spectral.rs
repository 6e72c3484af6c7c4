//! Spectral clustering of an affinity graph: normalized-Laplacian
//! embedding, row normalization, and seeded k-means with restarts.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{normalized_laplacian, AffinityMatrix};
use crate::numerics::{sym_eig, SeededRng};

/// `n x g` coordinates, one unit-norm row per sample (zero rows stay zero).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    pub coordinates: DMatrix<f64>,
    /// Laplacian eigenvalues of the retained eigenvectors, ascending.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    clusters: usize,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<usize>, clusters: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= clusters) {
            return Err(Error::contract(format!(
                "label {bad} out of range for {clusters} clusters"
            )));
        }
        Ok(Self { labels, clusters })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }
}

/// Eigenvectors for the `g` smallest eigenvalues of `L(W)`, row-normalized.
///
/// Each eigenvector's sign is fixed so its first non-negligible component
/// is positive.
pub fn spectral_embed(w: &AffinityMatrix, g: usize) -> Result<SpectralEmbedding> {
    let n = w.n();
    if g == 0 || g > n {
        return Err(Error::parameter(format!(
            "cluster count must lie in [1, {n}], got {g}"
        )));
    }
    let eig = sym_eig(&normalized_laplacian(w).to_dense())?;
    let mut coords = eig.eigenvectors.columns(0, g).into_owned();
    for mut col in coords.column_iter_mut() {
        let scale = col.amax();
        if let Some(first) = col.iter().find(|v| v.abs() > 1e-12 * scale).copied() {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
    for mut row in coords.row_iter_mut() {
        let norm = row.norm();
        if norm > 1e-300 {
            row /= norm;
        }
    }
    Ok(SpectralEmbedding {
        coordinates: coords,
        eigenvalues: eig.eigenvalues.iter().take(g).copied().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when inertia improves by less than this fraction.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iter: 300,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub assignment: ClusterAssignment,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each assignment step of the winning restart.
    pub history: Vec<f64>,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, center: &DMatrix<f64>, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(center.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn nearest(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.nrows() {
        let d = sq_dist(points, i, centers, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_centers(points: &DMatrix<f64>, g: usize, rng: &mut SeededRng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut closest: Vec<f64> = (0..n)
        .map(|i| sq_dist(points, i, points, chosen[0]))
        .collect();
    while chosen.len() < g {
        let total: f64 = closest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in closest.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        chosen.push(next);
        for (i, d) in closest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, points, next));
        }
    }
    points.select_rows(chosen.iter())
}

fn update_centers(points: &DMatrix<f64>, labels: &[usize], centers: &mut DMatrix<f64>) {
    let g = centers.nrows();
    let mut counts = vec![0usize; g];
    let mut sums = DMatrix::zeros(g, points.ncols());
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        let mut row = sums.row_mut(l);
        row += points.row(i);
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            centers.set_row(c, &(sums.row(c) / count as f64));
        }
    }
}

fn lloyd(points: &DMatrix<f64>, g: usize, rng: &mut SeededRng, cfg: &KMeansConfig) -> KMeansResult {
    let n = points.nrows();
    let mut centers = seed_centers(points, g, rng);
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let mut next = vec![0usize; n];
        let mut cost = vec![0.0; n];
        for i in 0..n {
            let (c, d) = nearest(points, i, &centers);
            next[i] = c;
            cost[i] = d;
        }
        // move the farthest point of a multi-member cluster into each empty one
        let mut sizes = vec![0usize; g];
        next.iter().for_each(|&l| sizes[l] += 1);
        for empty in 0..g {
            if sizes[empty] > 0 {
                continue;
            }
            let donor = (0..n)
                .filter(|&i| sizes[next[i]] > 1)
                .max_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(b.cmp(&a)));
            if let Some(i) = donor {
                sizes[next[i]] -= 1;
                next[i] = empty;
                sizes[empty] = 1;
                cost[i] = 0.0;
                centers.set_row(empty, &points.row(i));
            }
        }
        let inertia: f64 = cost.iter().sum();
        let unchanged = next == labels;
        labels = next;
        update_centers(points, &labels, &mut centers);
        let stalled = history
            .last()
            .is_some_and(|&prev: &f64| prev - inertia <= cfg.tol * prev);
        history.push(inertia);
        if unchanged || stalled {
            break;
        }
    }

    let inertia = (0..n).map(|i| sq_dist(points, i, &centers, labels[i])).sum();
    KMeansResult {
        assignment: ClusterAssignment {
            labels,
            clusters: g,
        },
        inertia,
        iterations,
        history,
    }
}

/// k-means with `++` seeding; the restart with the lowest inertia wins.
///
/// Restart `r` draws from a generator seeded by the `r`-th value of `rng`,
/// so results do not depend on the thread pool.
pub fn kmeans(
    points: &DMatrix<f64>,
    g: usize,
    rng: &mut SeededRng,
    cfg: &KMeansConfig,
) -> Result<KMeansResult> {
    let n = points.nrows();
    if n == 0 {
        return Err(Error::parameter("k-means input is empty"));
    }
    if g == 0 || g > n {
        return Err(Error::parameter(format!(
            "cluster count must lie in [1, {n}], got {g}"
        )));
    }
    if cfg.restarts == 0 || cfg.max_iter == 0 {
        return Err(Error::parameter("restarts and max_iter must be at least 1"));
    }
    let seeds: Vec<u64> = (0..cfg.restarts).map(|_| rng.next_u64()).collect();
    let runs: Vec<KMeansResult> = seeds
        .par_iter()
        .map(|&s| lloyd(points, g, &mut SeededRng::new(s), cfg))
        .collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.inertia.total_cmp(&b.inertia).then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .expect("restarts >= 1");
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectralConfig {
    pub kmeans: KMeansConfig,
}

impl SpectralConfig {
    pub fn with_restarts(restarts: usize) -> Self {
        Self {
            kmeans: KMeansConfig {
                restarts,
                ..KMeansConfig::default()
            },
        }
    }
}

/// Spectral embedding followed by k-means on the embedded rows.
pub fn cluster(
    w: &AffinityMatrix,
    g: usize,
    rng: &mut SeededRng,
    cfg: &SpectralConfig,
) -> Result<ClusterAssignment> {
    let embedding = spectral_embed(w, g)?;
    Ok(kmeans(&embedding.coordinates, g, rng, &cfg.kmeans)?.assignment)
}
