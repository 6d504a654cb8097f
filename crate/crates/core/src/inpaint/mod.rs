//! Inpainting-quality evaluation: ROI construction, surrogate mask
//! generation, and masked MSE/PSNR/SSIM.

mod scores;

pub use scores::{rank_sum, read_scores_csv, write_scores_csv, CaseScores, RankEntry};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid3, Region};
use crate::morphology::{dilate, StructuringElement};
use crate::regions::region_mask;
use crate::{BinaryMask, LabelVolume, Volume3};

/// Merges all tumor labels {1,2,3} into one mask, dilated by a ball of the
/// given radius to cover mass effects.
pub fn merge_and_dilate_roi(labels: &LabelVolume, radius: usize) -> Result<BinaryMask> {
    let merged = region_mask(labels, Region::Wt)?;
    Ok(dilate(&merged, StructuringElement::ball(radius)))
}

/// Placement parameters for surrogate inpainting masks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SurrogateMaskConfig {
    /// Number of balls to place.
    pub count: usize,
    /// Inclusive ball-radius range in voxels.
    pub radius_range: (usize, usize),
}

impl Default for SurrogateMaskConfig {
    fn default() -> Self {
        Self { count: 3, radius_range: (2, 5) }
    }
}

/// Builds a surrogate inpainting mask inside healthy tissue: a union of
/// `count` random balls with centers drawn from `brain \ tumor_roi`
/// (deterministic in `seed`), clipped to the brain and kept disjoint from
/// the tumor ROI.
pub fn gen_surrogate_mask(
    brain: &BinaryMask,
    tumor_roi: &BinaryMask,
    seed: u64,
    cfg: &SurrogateMaskConfig,
) -> Result<BinaryMask> {
    if brain.dims() != tumor_roi.dims() {
        return Err(Error::Shape(format!(
            "brain dims {:?} differ from tumor ROI {:?}",
            brain.dims().as_array(),
            tumor_roi.dims().as_array()
        )));
    }
    let (lo, hi) = cfg.radius_range;
    if lo > hi {
        return Err(Error::Config(format!("radius range ({lo}, {hi}) is inverted")));
    }
    let dims = brain.dims();
    let healthy: Vec<usize> = (0..dims.len())
        .filter(|&i| brain.data()[i] && !tumor_roi.data()[i])
        .collect();
    if healthy.is_empty() {
        return Err(Error::Infeasible(
            "no healthy voxels: the brain is entirely covered by the tumor ROI".into(),
        ));
    }

    const MAX_ATTEMPTS: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let mut out = vec![false; dims.len()];
        for _ in 0..cfg.count {
            let center = healthy[rng.gen_range(0..healthy.len())];
            let radius = rng.gen_range(lo..=hi);
            let (cz, cy, cx) = dims.coords(center);
            for (dz, dy, dx) in StructuringElement::ball(radius).offsets() {
                let (z, y, x) = (cz as i64 + dz, cy as i64 + dy, cx as i64 + dx);
                if !dims.contains(z, y, x) {
                    continue;
                }
                let i = dims.index(z as usize, y as usize, x as usize);
                if brain.data()[i] && !tumor_roi.data()[i] {
                    out[i] = true;
                }
            }
        }
        if out.iter().any(|v| *v) {
            return Grid3::new(dims, brain.spacing(), out);
        }
    }
    Err(Error::Infeasible(format!(
        "could not place a nonempty surrogate mask after {MAX_ATTEMPTS} attempts"
    )))
}

fn check_metric_inputs(pred: &Volume3, reference: &Volume3, mask: &BinaryMask) -> Result<()> {
    if pred.dims() != reference.dims() || pred.dims() != mask.dims() {
        return Err(Error::Shape(format!(
            "metric inputs disagree: pred {:?}, ref {:?}, mask {:?}",
            pred.dims().as_array(),
            reference.dims().as_array(),
            mask.dims().as_array()
        )));
    }
    if !mask.any() {
        return Err(Error::EmptyMask("masked metrics need a nonempty mask".into()));
    }
    Ok(())
}

/// Mean squared error over the masked voxels only.
pub fn masked_mse(pred: &Volume3, reference: &Volume3, mask: &BinaryMask) -> Result<f64> {
    check_metric_inputs(pred, reference, mask)?;
    let mut sum = 0.0f64;
    let mut n = 0u64;
    for ((p, r), m) in pred.data().iter().zip(reference.data().iter()).zip(mask.data().iter()) {
        if *m {
            let d = *p as f64 - *r as f64;
            sum += d * d;
            n += 1;
        }
    }
    Ok(sum / n as f64)
}

/// Peak signal-to-noise ratio over the mask in dB: `10 log10(peak^2 / mse)`,
/// `+inf` when the masked MSE is zero.
pub fn masked_psnr(pred: &Volume3, reference: &Volume3, mask: &BinaryMask, peak: f64) -> Result<f64> {
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::Config(format!("peak must be finite and > 0, got {peak}")));
    }
    let mse = masked_mse(pred, reference, mask)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// SSIM window and stabilizer constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SsimConfig {
    /// Cubic window edge; must be odd.
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
    /// Dynamic range of the data.
    pub l: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self { window: 7, k1: 0.01, k2: 0.03, l: 1.0 }
    }
}

impl SsimConfig {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.l) * (self.k1 * self.l)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.l) * (self.k2 * self.l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::Config(format!("SSIM window must be odd, got {}", self.window)));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.l > 0.0) {
            return Err(Error::Config("SSIM constants K1, K2 and L must be positive".into()));
        }
        Ok(())
    }
}

/// Mean local SSIM over the mask: a uniform cubic window is centered at
/// every masked voxel (shrinking at grid borders, and free to extend over
/// unmasked voxels), with population statistics inside the window.
pub fn masked_ssim(
    pred: &Volume3,
    reference: &Volume3,
    mask: &BinaryMask,
    cfg: &SsimConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_metric_inputs(pred, reference, mask)?;
    let dims = pred.dims();
    let half = (cfg.window / 2) as i64;
    let (c1, c2) = (cfg.c1(), cfg.c2());

    let mut total = 0.0f64;
    let mut centers = 0u64;
    for (i, m) in mask.data().iter().enumerate() {
        if !m {
            continue;
        }
        let (z, y, x) = dims.coords(i);
        let z0 = (z as i64 - half).max(0) as usize;
        let z1 = (z as i64 + half).min(dims.depth as i64 - 1) as usize;
        let y0 = (y as i64 - half).max(0) as usize;
        let y1 = (y as i64 + half).min(dims.height as i64 - 1) as usize;
        let x0 = (x as i64 - half).max(0) as usize;
        let x1 = (x as i64 + half).min(dims.width as i64 - 1) as usize;

        let mut sp = 0.0;
        let mut sr = 0.0;
        let mut spp = 0.0;
        let mut srr = 0.0;
        let mut spr = 0.0;
        let mut n = 0.0;
        for wz in z0..=z1 {
            for wy in y0..=y1 {
                for wx in x0..=x1 {
                    let j = dims.index(wz, wy, wx);
                    let p = pred.data()[j] as f64;
                    let r = reference.data()[j] as f64;
                    sp += p;
                    sr += r;
                    spp += p * p;
                    srr += r * r;
                    spr += p * r;
                    n += 1.0;
                }
            }
        }
        let mu_p = sp / n;
        let mu_r = sr / n;
        let var_p = spp / n - mu_p * mu_p;
        let var_r = srr / n - mu_r * mu_r;
        let cov = spr / n - mu_p * mu_r;
        let local = ((2.0 * mu_p * mu_r + c1) * (2.0 * cov + c2))
            / ((mu_p * mu_p + mu_r * mu_r + c1) * (var_p + var_r + c2));
        total += local;
        centers += 1;
    }
    Ok(total / centers as f64)
}
