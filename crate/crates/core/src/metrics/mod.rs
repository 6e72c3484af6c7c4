//! Partition scores (ACC, NMI, purity), representation scores (Fisher,
//! PSNR, SSIM), and the assignment solver behind ACC.

mod clustering;
mod fisher;
mod hungarian;
mod image;

pub use clustering::{accuracy, nmi, purity, score_all, ContingencyTable, Scores};
pub use fisher::{fisher_score, mean_pairwise_fisher, FISHER_RIDGE};
pub use hungarian::{hungarian_assign, Assignment};
pub use image::{psnr, ssim, ImagePair, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW};
