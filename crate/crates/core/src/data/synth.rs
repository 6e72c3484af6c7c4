use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::numerics::{standard_normal, SeededRng};

/// Union-of-subspaces fixture: `clusters` random `subspace_dim`-dimensional
/// subspaces of `R^ambient_dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceSpec {
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub clusters: usize,
    pub samples_per_cluster: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Draw mutually orthogonal subspaces (needs `clusters * subspace_dim <= ambient_dim`).
    pub orthogonal: bool,
}

impl SubspaceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.subspace_dim == 0 || self.subspace_dim >= self.ambient_dim {
            return Err(Error::parameter(format!(
                "subspace dimension must lie in [1, {}), got {}",
                self.ambient_dim, self.subspace_dim
            )));
        }
        if self.clusters < 2 {
            return Err(Error::parameter("need at least 2 clusters"));
        }
        if self.samples_per_cluster == 0 {
            return Err(Error::parameter("samples_per_cluster must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::parameter("noise sigma must be finite and nonnegative"));
        }
        if self.orthogonal && self.clusters * self.subspace_dim > self.ambient_dim {
            return Err(Error::parameter(format!(
                "{} orthogonal {}-dimensional subspaces do not fit in dimension {}",
                self.clusters, self.subspace_dim, self.ambient_dim
            )));
        }
        Ok(())
    }
}

fn orthonormal_columns(rng: &mut SeededRng, rows: usize, cols: usize) -> DMatrix<f64> {
    let q = standard_normal(rng, rows, cols).qr().q();
    q.columns(0, cols).into_owned()
}

/// Samples `x = B c + sigma * e` per cluster, rows grouped by cluster.
///
/// Bases come from QR of seeded Gaussian matrices; coefficients and noise
/// are standard normal.
pub fn gen_subspaces(spec: &SubspaceSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let (m, d, g, s) = (
        spec.ambient_dim,
        spec.subspace_dim,
        spec.clusters,
        spec.samples_per_cluster,
    );
    let mut rng = SeededRng::new(spec.seed);
    let bases: Vec<DMatrix<f64>> = if spec.orthogonal {
        let q = orthonormal_columns(&mut rng, m, g * d);
        (0..g).map(|c| q.columns(c * d, d).into_owned()).collect()
    } else {
        (0..g).map(|_| orthonormal_columns(&mut rng, m, d)).collect()
    };

    let mut features = DMatrix::zeros(g * s, m);
    let mut labels = Vec::with_capacity(g * s);
    for (c, basis) in bases.iter().enumerate() {
        let coeffs = standard_normal(&mut rng, d, s);
        let mut block = (basis * coeffs).transpose();
        if spec.noise_sigma > 0.0 {
            block += standard_normal(&mut rng, s, m) * spec.noise_sigma;
        }
        features.rows_mut(c * s, s).copy_from(&block);
        labels.extend(std::iter::repeat_n(c, s));
    }
    let name = format!("subspaces-g{g}-d{d}-m{m}-seed{}", spec.seed);
    LabeledDataset::new(name, features, Some(labels))
}

/// `x + N(mean, sigma^2)` elementwise, drawn in row-major order.
pub fn add_gaussian_noise(x: &DMatrix<f64>, mean: f64, sigma: f64, seed: u64) -> Result<DMatrix<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) || !mean.is_finite() {
        return Err(Error::parameter(format!(
            "noise needs finite mean and sigma >= 0, got N({mean}, {sigma}^2)"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut out = x.clone();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            let e: f64 = StandardNormal.sample(&mut rng);
            out[(i, j)] += mean + sigma * e;
        }
    }
    Ok(out)
}

/// Reshapes each sample row into a `height x width` image, row-major.
pub fn as_images(x: &DMatrix<f64>, height: usize, width: usize) -> Result<Vec<DMatrix<f64>>> {
    if height * width != x.ncols() {
        return Err(Error::parameter(format!(
            "{height}x{width} images need {} features, found {}",
            height * width,
            x.ncols()
        )));
    }
    Ok(x.row_iter()
        .map(|row| DMatrix::from_row_slice(height, width, &row.iter().copied().collect::<Vec<_>>()))
        .collect())
}

/// Row-major pixel values.
pub fn flatten_image(img: &DMatrix<f64>) -> Vec<f64> {
    img.transpose().as_slice().to_vec()
}

/// Piecewise-smooth grayscale image classes in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageFixtureSpec {
    pub height: usize,
    pub width: usize,
    pub classes: usize,
    pub per_class: usize,
    /// Largest per-sample displacement of the rectangles, in pixels.
    pub max_shift: f64,
    /// Per-sample gain is drawn from `1 +- gain_jitter`.
    pub gain_jitter: f64,
    pub seed: u64,
}

impl Default for ImageFixtureSpec {
    fn default() -> Self {
        Self {
            height: 16,
            width: 16,
            classes: 4,
            per_class: 200,
            max_shift: 2.0,
            gain_jitter: 0.15,
            seed: 0,
        }
    }
}

struct Blob {
    top: f64,
    left: f64,
    height: f64,
    width: f64,
    level: f64,
}

struct Template {
    base: f64,
    slope_x: f64,
    slope_y: f64,
    blobs: Vec<Blob>,
}

fn smoothstep_inside(v: f64, lo: f64, hi: f64) -> f64 {
    // soft edge of about one pixel on each side
    let a = (v - lo + 0.5).clamp(0.0, 1.0);
    let b = (hi - v + 0.5).clamp(0.0, 1.0);
    a.min(b)
}

fn render(t: &Template, spec: &ImageFixtureSpec, shift: (f64, f64), gain: f64) -> Vec<f64> {
    let (h, w) = (spec.height as f64, spec.width as f64);
    let mut pixels = Vec::with_capacity(spec.height * spec.width);
    for r in 0..spec.height {
        for c in 0..spec.width {
            let (y, x) = (r as f64, c as f64);
            let mut v = t.base + t.slope_x * x / w + t.slope_y * y / h;
            for b in &t.blobs {
                let (top, left) = (b.top + shift.0, b.left + shift.1);
                let inside = smoothstep_inside(y, top, top + b.height)
                    * smoothstep_inside(x, left, left + b.width);
                v += inside * (b.level - v);
            }
            pixels.push((v * gain).clamp(0.0, 1.0));
        }
    }
    pixels
}

/// Each class is a smooth gradient with a few flat rectangles; samples
/// jitter the rectangle positions and the overall gain.
pub fn gen_piecewise_images(spec: &ImageFixtureSpec) -> Result<LabeledDataset> {
    if spec.height < 4 || spec.width < 4 || spec.classes < 2 || spec.per_class < 2 {
        return Err(Error::parameter(
            "image fixture needs at least 4x4 pixels, 2 classes, 2 samples per class",
        ));
    }
    if !(spec.max_shift >= 0.0 && spec.max_shift.is_finite())
        || !(0.0..1.0).contains(&spec.gain_jitter)
    {
        return Err(Error::parameter(format!(
            "need max_shift >= 0 and gain_jitter in [0, 1), got {} and {}",
            spec.max_shift, spec.gain_jitter
        )));
    }
    let mut rng = SeededRng::new(spec.seed);
    let (h, w) = (spec.height as f64, spec.width as f64);
    let templates: Vec<Template> = (0..spec.classes)
        .map(|_| Template {
            base: rng.gen_range(0.1..0.3),
            slope_x: rng.gen_range(-0.15..0.15),
            slope_y: rng.gen_range(-0.15..0.15),
            blobs: (0..3)
                .map(|_| {
                    let height = rng.gen_range(0.2 * h..0.5 * h);
                    let width = rng.gen_range(0.2 * w..0.5 * w);
                    Blob {
                        top: rng.gen_range(1.0..(h - height - 1.0)),
                        left: rng.gen_range(1.0..(w - width - 1.0)),
                        height,
                        width,
                        level: rng.gen_range(0.45..0.9),
                    }
                })
                .collect(),
        })
        .collect();

    let n = spec.classes * spec.per_class;
    let m = spec.height * spec.width;
    let mut features = DMatrix::zeros(n, m);
    let mut labels = Vec::with_capacity(n);
    for (c, t) in templates.iter().enumerate() {
        for s in 0..spec.per_class {
            let shift = (
                rng.gen_range(-spec.max_shift..=spec.max_shift),
                rng.gen_range(-spec.max_shift..=spec.max_shift),
            );
            let gain = 1.0 + rng.gen_range(-spec.gain_jitter..=spec.gain_jitter);
            let row = c * spec.per_class + s;
            for (j, v) in render(t, spec, shift, gain).into_iter().enumerate() {
                features[(row, j)] = v;
            }
            labels.push(c);
        }
    }
    let name = format!(
        "images-{}x{}-c{}-seed{}",
        spec.height, spec.width, spec.classes, spec.seed
    );
    LabeledDataset::new(name, features, Some(labels))
}
