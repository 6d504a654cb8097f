//! Legacy and lesion-wise segmentation metrics: DSC and HD95 per region,
//! with fixed penalties for unmatched lesions and per-case averaging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Region;
use crate::morphology::{
    connected_components, dilate, distance_transform, mask_from_indices, surface_voxels,
    Connectivity, StructuringElement,
};
use crate::regions::region_mask;
use crate::{BinaryMask, LabelVolume};

/// Parameters of the lesion-wise evaluation protocol. The penalty constants
/// are the published ones (DSC 0, HD95 374); dilation radius and minimum
/// lesion volume are configuration defaults, not published values.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LesionWiseConfig {
    /// Ball radius (voxels) used to dilate ground-truth lesions before
    /// matching.
    pub dilation_radius: usize,
    /// Lesions (and false-positive components) smaller than this many voxels
    /// are ignored.
    pub min_lesion_volume: usize,
    /// HD95 assigned to unmatched lesions and false positives.
    pub penalty_hd95: f64,
    /// DSC assigned to unmatched lesions and false positives.
    pub penalty_dsc: f64,
    pub connectivity: Connectivity,
}

impl Default for LesionWiseConfig {
    fn default() -> Self {
        Self {
            dilation_radius: 3,
            min_lesion_volume: 50,
            penalty_hd95: 374.0,
            penalty_dsc: 0.0,
            connectivity: Connectivity::TwentySix,
        }
    }
}

impl LesionWiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty_hd95.is_finite() && self.penalty_hd95 >= 0.0) {
            return Err(Error::Config(format!("penalty_hd95 must be >= 0, got {}", self.penalty_hd95)));
        }
        if !(self.penalty_dsc.is_finite() && self.penalty_dsc >= 0.0) {
            return Err(Error::Config(format!("penalty_dsc must be >= 0, got {}", self.penalty_dsc)));
        }
        Ok(())
    }
}

/// Which evaluation protocol produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricsMode {
    Legacy,
    LesionWise,
}

impl std::fmt::Display for MetricsMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MetricsMode::Legacy => "legacy",
            MetricsMode::LesionWise => "lesion_wise",
        })
    }
}

/// DSC and HD95 for one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionMetrics {
    pub dsc: f64,
    pub hd95: f64,
}

/// Per-case metrics: one entry per region plus their arithmetic mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub case_id: String,
    pub mode: MetricsMode,
    /// Region scores in [`Region::ALL`] order (ET, TC, WT).
    pub per_region: [RegionMetrics; 3],
    pub avg: RegionMetrics,
}

impl MetricsReport {
    pub fn new(case_id: String, mode: MetricsMode, per_region: [RegionMetrics; 3]) -> Self {
        let avg = RegionMetrics {
            dsc: per_region.iter().map(|r| r.dsc).sum::<f64>() / 3.0,
            hd95: per_region.iter().map(|r| r.hd95).sum::<f64>() / 3.0,
        };
        Self { case_id, mode, per_region, avg }
    }

    pub fn region(&self, region: Region) -> RegionMetrics {
        let i = Region::ALL.iter().position(|r| *r == region).unwrap();
        self.per_region[i]
    }

    /// CSV rows `case_id,mode,region,dsc,hd95` (regions then Avg). DSC is
    /// scaled by 100 when `percent` is set.
    pub fn csv_rows(&self, percent: bool) -> Vec<String> {
        let scale = if percent { 100.0 } else { 1.0 };
        let mut rows: Vec<String> = Region::ALL
            .iter()
            .zip(self.per_region.iter())
            .map(|(region, m)| {
                format!("{},{},{},{},{}", self.case_id, self.mode, region, m.dsc * scale, m.hd95)
            })
            .collect();
        rows.push(format!(
            "{},{},Avg,{},{}",
            self.case_id,
            self.mode,
            self.avg.dsc * scale,
            self.avg.hd95
        ));
        rows
    }
}

fn check_same_dims(pred: &BinaryMask, gt: &BinaryMask) -> Result<()> {
    if pred.dims() != gt.dims() {
        return Err(Error::Shape(format!(
            "prediction dims {:?} differ from ground truth {:?}",
            pred.dims().as_array(),
            gt.dims().as_array()
        )));
    }
    Ok(())
}

/// Dice similarity coefficient `2|A∩B| / (|A|+|B|)`; 1.0 when both masks are
/// empty.
pub fn dice(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    check_same_dims(pred, gt)?;
    let mut inter = 0u64;
    let mut total = 0u64;
    for (a, b) in pred.data().iter().zip(gt.data().iter()) {
        inter += (*a && *b) as u64;
        total += *a as u64 + *b as u64;
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / total as f64)
}

/// Nearest-rank 95th percentile of an ascending-sorted list: the 0-based
/// index is `ceil(0.95 * n) - 1`, computed in integer arithmetic.
pub fn percentile95_nearest_rank(sorted: &[f64]) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let idx = (19 * n).div_ceil(20) - 1;
    sorted[idx]
}

/// 95th percentile Hausdorff distance in mm: pools the directed
/// surface-to-surface distances of both masks, sorts them, and takes the
/// nearest-rank 95th percentile.
pub fn hd95(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    check_same_dims(pred, gt)?;
    if pred.spacing() != gt.spacing() {
        return Err(Error::Shape(format!(
            "prediction spacing {:?} differs from ground truth {:?}",
            pred.spacing().as_array(),
            gt.spacing().as_array()
        )));
    }
    if !pred.any() || !gt.any() {
        return Err(Error::EmptyMask(
            "hd95 needs nonempty masks; callers apply the penalty policy".into(),
        ));
    }
    let surf_pred = surface_voxels(pred);
    let surf_gt = surface_voxels(gt);
    let dist_to_gt = distance_transform::<f64>(&mask_from_indices(gt, &surf_gt))?;
    let dist_to_pred = distance_transform::<f64>(&mask_from_indices(pred, &surf_pred))?;

    let mut pooled = Vec::with_capacity(surf_pred.len() + surf_gt.len());
    pooled.extend(surf_pred.iter().map(|&i| dist_to_gt.data()[i]));
    pooled.extend(surf_gt.iter().map(|&i| dist_to_pred.data()[i]));
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(percentile95_nearest_rank(&pooled))
}

/// Whole-mask dice/hd95 with the empty-mask policy: both empty scores
/// (1.0, 0.0); exactly one empty scores (0.0, penalty).
fn whole_mask_scores(pred: &BinaryMask, gt: &BinaryMask, penalty_hd95: f64) -> Result<RegionMetrics> {
    match (pred.any(), gt.any()) {
        (false, false) => Ok(RegionMetrics { dsc: 1.0, hd95: 0.0 }),
        (true, true) => Ok(RegionMetrics { dsc: dice(pred, gt)?, hd95: hd95(pred, gt)? }),
        _ => Ok(RegionMetrics { dsc: 0.0, hd95: penalty_hd95 }),
    }
}

fn check_case_geometry(pred: &LabelVolume, gt: &LabelVolume) -> Result<()> {
    if pred.dims() != gt.dims() {
        return Err(Error::Shape(format!(
            "prediction dims {:?} differ from ground truth {:?}",
            pred.dims().as_array(),
            gt.dims().as_array()
        )));
    }
    if pred.spacing() != gt.spacing() {
        return Err(Error::Shape(format!(
            "prediction spacing {:?} differs from ground truth {:?}",
            pred.spacing().as_array(),
            gt.spacing().as_array()
        )));
    }
    Ok(())
}

/// Legacy per-case metrics: whole-mask dice and hd95 for each region.
pub fn legacy_case_metrics(
    case_id: &str,
    pred: &LabelVolume,
    gt: &LabelVolume,
    penalty_hd95: f64,
) -> Result<MetricsReport> {
    check_case_geometry(pred, gt)?;
    let mut per_region = [RegionMetrics { dsc: 0.0, hd95: 0.0 }; 3];
    for (slot, region) in per_region.iter_mut().zip(Region::ALL) {
        let pred_mask = region_mask(pred, region)?;
        let gt_mask = region_mask(gt, region)?;
        *slot = whole_mask_scores(&pred_mask, &gt_mask, penalty_hd95)?;
    }
    Ok(MetricsReport::new(case_id.to_string(), MetricsMode::Legacy, per_region))
}

/// The per-lesion and per-false-positive score entries for one region.
/// Every entry is either a matched-pair (dice, hd95) score or exactly
/// `(penalty_dsc, penalty_hd95)`. See [`lesionwise_case_metrics`] for the
/// matching rules.
pub fn lesionwise_region_entries(
    pred_mask: &BinaryMask,
    gt_mask: &BinaryMask,
    cfg: &LesionWiseConfig,
) -> Result<Vec<RegionMetrics>> {
    let dilated = dilate(gt_mask, StructuringElement::ball(cfg.dilation_radius));
    let dilated_set = connected_components(&dilated, cfg.connectivity);
    let extent_of = dilated_set.label_map();

    // Group ground-truth voxels by their enclosing dilated component.
    let mut lesion_voxels: Vec<Vec<usize>> = vec![Vec::new(); dilated_set.len()];
    for i in gt_mask.true_indices() {
        let extent = extent_of[i];
        debug_assert!(extent >= 1, "gt voxel must lie inside the dilated mask");
        lesion_voxels[extent as usize - 1].push(i);
    }
    // Kept lesions: undilated volume at or above the threshold.
    let kept: Vec<(u32, &Vec<usize>)> = lesion_voxels
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_empty() && v.len() >= cfg.min_lesion_volume)
        .map(|(k, v)| (k as u32 + 1, v))
        .collect();

    let pred_set = connected_components(pred_mask, cfg.connectivity);

    // Which dilated extents each prediction component touches.
    let pred_extents: Vec<std::collections::BTreeSet<u32>> = pred_set
        .components()
        .iter()
        .map(|c| c.voxels.iter().map(|&i| extent_of[i]).filter(|&e| e != 0).collect())
        .collect();
    let kept_ids: std::collections::BTreeSet<u32> = kept.iter().map(|(id, _)| *id).collect();

    let mut entries: Vec<RegionMetrics> = Vec::new();

    for (extent_id, gt_voxels) in &kept {
        let mut union: Vec<usize> = Vec::new();
        for (c, extents) in pred_set.components().iter().zip(pred_extents.iter()) {
            if extents.contains(extent_id) {
                union.extend_from_slice(&c.voxels);
            }
        }
        if union.is_empty() {
            entries.push(RegionMetrics { dsc: cfg.penalty_dsc, hd95: cfg.penalty_hd95 });
        } else {
            let lesion = mask_from_indices(gt_mask, gt_voxels);
            let matched = mask_from_indices(pred_mask, &union);
            entries.push(RegionMetrics {
                dsc: dice(&matched, &lesion)?,
                hd95: hd95(&matched, &lesion)?,
            });
        }
    }

    for (c, extents) in pred_set.components().iter().zip(pred_extents.iter()) {
        let touches_kept = extents.iter().any(|e| kept_ids.contains(e));
        if !touches_kept && c.volume_voxels() >= cfg.min_lesion_volume {
            entries.push(RegionMetrics { dsc: cfg.penalty_dsc, hd95: cfg.penalty_hd95 });
        }
    }

    Ok(entries)
}

/// Mean over the region's lesion-wise entries; a region with no entries at
/// all scores (1.0, 0.0).
fn lesionwise_region_scores(
    pred_mask: &BinaryMask,
    gt_mask: &BinaryMask,
    cfg: &LesionWiseConfig,
) -> Result<RegionMetrics> {
    let entries = lesionwise_region_entries(pred_mask, gt_mask, cfg)?;
    if entries.is_empty() {
        return Ok(RegionMetrics { dsc: 1.0, hd95: 0.0 });
    }
    let n = entries.len() as f64;
    Ok(RegionMetrics {
        dsc: entries.iter().map(|e| e.dsc).sum::<f64>() / n,
        hd95: entries.iter().map(|e| e.hd95).sum::<f64>() / n,
    })
}

/// Lesion-wise per-case metrics.
///
/// Per region: ground-truth lesions are the connected components of the
/// dilated GT mask (each undilated GT voxel belongs to its enclosing dilated
/// component); lesions below `min_lesion_volume` are dropped. Every kept
/// lesion is scored against the union of prediction components intersecting
/// its dilated extent, or takes the penalty pair when nothing intersects.
/// Prediction components that intersect no kept lesion's extent and are at
/// least `min_lesion_volume` voxels count as false positives with the penalty
/// pair. The region score is the arithmetic mean over all entries; a region
/// with no entries at all scores (1.0, 0.0).
pub fn lesionwise_case_metrics(
    case_id: &str,
    pred: &LabelVolume,
    gt: &LabelVolume,
    cfg: &LesionWiseConfig,
) -> Result<MetricsReport> {
    cfg.validate()?;
    check_case_geometry(pred, gt)?;
    let mut per_region = [RegionMetrics { dsc: 0.0, hd95: 0.0 }; 3];
    for (slot, region) in per_region.iter_mut().zip(Region::ALL) {
        let pred_mask = region_mask(pred, region)?;
        let gt_mask = region_mask(gt, region)?;
        *slot = lesionwise_region_scores(&pred_mask, &gt_mask, cfg)?;
    }
    Ok(MetricsReport::new(case_id.to_string(), MetricsMode::LesionWise, per_region))
}
