use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;

/// Reference/candidate images of equal shape plus the pixel dynamic range.
#[derive(Debug, Clone)]
pub struct ImagePair<'a> {
    pub reference: &'a DMatrix<f64>,
    pub candidate: &'a DMatrix<f64>,
    pub dynamic_range: f64,
}

impl<'a> ImagePair<'a> {
    /// `dynamic_range` defaults to `max(reference) - min(reference)`.
    pub fn new(
        reference: &'a DMatrix<f64>,
        candidate: &'a DMatrix<f64>,
        dynamic_range: Option<f64>,
    ) -> Result<Self> {
        if reference.shape() != candidate.shape() {
            return Err(Error::parameter(format!(
                "image shapes differ: {:?} vs {:?}",
                reference.shape(),
                candidate.shape()
            )));
        }
        if reference.is_empty() {
            return Err(Error::parameter("images are empty"));
        }
        let range = dynamic_range.unwrap_or_else(|| reference.max() - reference.min());
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::parameter(format!(
                "dynamic range must be positive, got {range}"
            )));
        }
        Ok(Self {
            reference,
            candidate,
            dynamic_range: range,
        })
    }
}

/// Peak signal-to-noise ratio in dB; `f64::INFINITY` for identical images.
pub fn psnr(pair: &ImagePair<'_>) -> f64 {
    let mse = (pair.reference - pair.candidate).norm_squared() / pair.reference.len() as f64;
    if mse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (pair.dynamic_range * pair.dynamic_range / mse).log10()
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut w: Vec<f64> = (0..SSIM_WINDOW * SSIM_WINDOW)
        .map(|idx| {
            let dy = (idx / SSIM_WINDOW) as f64 - half;
            let dx = (idx % SSIM_WINDOW) as f64 - half;
            (-(dx * dx + dy * dy) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

fn ssim_from_moments(mx: f64, my: f64, vx: f64, vy: f64, cxy: f64, c1: f64, c2: f64) -> f64 {
    ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

/// Mean structural similarity over all 11x11 Gaussian-weighted windows.
///
/// Images smaller than the window in either dimension fall back to one
/// global, uniformly weighted window.
pub fn ssim(pair: &ImagePair<'_>) -> f64 {
    let c1 = (SSIM_K1 * pair.dynamic_range).powi(2);
    let c2 = (SSIM_K2 * pair.dynamic_range).powi(2);
    let (x, y) = (pair.reference, pair.candidate);
    let (h, w) = x.shape();

    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        let n = x.len() as f64;
        let mx = x.sum() / n;
        let my = y.sum() / n;
        let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
        for (a, b) in x.iter().zip(y.iter()) {
            vx += (a - mx) * (a - mx);
            vy += (b - my) * (b - my);
            cxy += (a - mx) * (b - my);
        }
        return ssim_from_moments(mx, my, vx / n, vy / n, cxy / n, c1, c2);
    }

    let kernel = gaussian_window();
    let mut total = 0.0;
    let mut count = 0usize;
    for top in 0..=(h - SSIM_WINDOW) {
        for left in 0..=(w - SSIM_WINDOW) {
            let (mut mx, mut my) = (0.0, 0.0);
            let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
            for r in 0..SSIM_WINDOW {
                for c in 0..SSIM_WINDOW {
                    let k = kernel[r * SSIM_WINDOW + c];
                    let a = x[(top + r, left + c)];
                    let b = y[(top + r, left + c)];
                    mx += k * a;
                    my += k * b;
                    sxx += k * a * a;
                    syy += k * b * b;
                    sxy += k * a * b;
                }
            }
            let vx = (sxx - mx * mx).max(0.0);
            let vy = (syy - my * my).max(0.0);
            let cxy = sxy - mx * my;
            total += ssim_from_moments(mx, my, vx, vy, cxy, c1, c2);
            count += 1;
        }
    }
    total / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{standard_normal, SeededRng};

    #[test]
    fn identical_images() {
        let mut rng = SeededRng::new(1);
        let img = standard_normal(&mut rng, 16, 16);
        let pair = ImagePair::new(&img, &img, None).unwrap();
        assert_eq!(psnr(&pair), f64::INFINITY);
        assert!((ssim(&pair) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_pixel_psnr() {
        let a = DMatrix::from_element(1, 1, 0.0);
        let b = DMatrix::from_element(1, 1, 0.5);
        let pair = ImagePair::new(&a, &b, Some(1.0)).unwrap();
        assert!((psnr(&pair) - 10.0 * 4f64.log10()).abs() < 1e-12);
        assert!((psnr(&pair) - 6.0206).abs() < 1e-4);
    }

    #[test]
    fn constant_images_use_luminance_term() {
        let (c, delta, range) = (0.4, 0.1, 1.0);
        let a = DMatrix::from_element(4, 4, c);
        let b = DMatrix::from_element(4, 4, c + delta);
        let pair = ImagePair::new(&a, &b, Some(range)).unwrap();
        let c1 = (SSIM_K1 * range).powi(2);
        let expected = (2.0 * c * (c + delta) + c1) / (c * c + (c + delta) * (c + delta) + c1);
        assert!((ssim(&pair) - expected).abs() < 1e-12);
    }

    #[test]
    fn windowed_constant_images_match_global_formula() {
        let a = DMatrix::from_element(12, 13, 0.2);
        let b = DMatrix::from_element(12, 13, 0.7);
        let pair = ImagePair::new(&a, &b, Some(1.0)).unwrap();
        let c1 = (SSIM_K1 * 1.0f64).powi(2);
        let expected = (2.0 * 0.2 * 0.7 + c1) / (0.04 + 0.49 + c1);
        assert!((ssim(&pair) - expected).abs() < 1e-12);
    }

    #[test]
    fn psnr_drops_with_noise() {
        let mut rng = SeededRng::new(31);
        let img = standard_normal(&mut rng, 16, 16);
        let noise = standard_normal(&mut rng, 16, 16);
        let values: Vec<f64> = [0.01, 0.1, 1.0]
            .iter()
            .map(|&s| {
                let noisy = &img + &noise * s;
                psnr(&ImagePair::new(&img, &noisy, None).unwrap())
            })
            .collect();
        assert!(values[0] > values[1] && values[1] > values[2]);
    }

    #[test]
    fn ssim_in_range_for_anticorrelated() {
        let mut rng = SeededRng::new(2);
        let noise = standard_normal(&mut rng, 16, 16);
        let img = noise.add_scalar(5.0);
        let neg = (-&noise).add_scalar(5.0);
        let s = ssim(&ImagePair::new(&img, &neg, None).unwrap());
        assert!((-1.0..=1.0).contains(&s));
        assert!(s < 0.0);
    }

    #[test]
    fn shape_and_range_errors() {
        let a = DMatrix::zeros(2, 2);
        let b = DMatrix::zeros(2, 3);
        assert!(matches!(ImagePair::new(&a, &b, None), Err(Error::Parameter(_))));
        assert!(matches!(ImagePair::new(&a, &a, None), Err(Error::Parameter(_))));
        assert!(ImagePair::new(&a, &a, Some(1.0)).is_ok());
    }
}
