//! Label/region conversions, ensemble fusion, and enhancing-tumor
//! post-processing.
//!
//! Labels and the three overlapping regions relate by WT = {1,2,3},
//! TC = {1,3}, ET = {3}. Decoding is hierarchical (ET, then TC, then WT),
//! which keeps the emitted label maps nested by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{label, Grid3, ProbabilityStack, Region};
use crate::morphology::{connected_components, Connectivity};
use crate::{BinaryMask, LabelVolume};

/// Thresholds for decoding region probabilities into labels.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub tau_wt: f64,
    pub tau_tc: f64,
    pub tau_et: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self { tau_wt: 0.5, tau_tc: 0.5, tau_et: 0.5 }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("tau_wt", self.tau_wt), ("tau_tc", self.tau_tc), ("tau_et", self.tau_et)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("{name} must lie strictly inside (0,1), got {t}")));
            }
        }
        Ok(())
    }
}

/// Thresholds for the enhancing-tumor cleanup pass. The counts are
/// configuration, not claims: the reference values behind them are not
/// published, so they surface in every report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PostprocessConfig {
    /// Keep ET only when at least this many ET voxels survive component
    /// filtering.
    pub et_total_min: usize,
    /// Minimum ET connected-component volume in voxels.
    pub et_component_min: usize,
    /// Label that removed ET voxels become.
    pub relabel_target: u8,
    pub connectivity: Connectivity,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        Self {
            et_total_min: 200,
            et_component_min: 10,
            relabel_target: label::NC,
            connectivity: Connectivity::TwentySix,
        }
    }
}

impl PostprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.relabel_target > label::ED {
            return Err(Error::Config(format!(
                "relabel_target must be 0 (background), 1 (NC) or 2 (ED), got {}",
                self.relabel_target
            )));
        }
        Ok(())
    }
}

/// Extracts one region of a label volume as a binary mask.
pub fn region_mask(labels: &LabelVolume, region: Region) -> Result<BinaryMask> {
    let data = labels
        .data()
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if label::is_valid(value) {
                Ok(region.contains_label(value))
            } else {
                Err(Error::Label { index, value })
            }
        })
        .collect::<Result<Vec<bool>>>()?;
    labels.with_data(data)
}

/// Expands a label volume into the three overlapping region channels,
/// binary-valued.
pub fn labels_to_regions(labels: &LabelVolume) -> Result<ProbabilityStack> {
    let to_channel = |region: Region| -> Result<Grid3<f32>> {
        let mask = region_mask(labels, region)?;
        let data = mask.data().iter().map(|&b| if b { 1.0f32 } else { 0.0 }).collect();
        labels.with_data(data)
    };
    ProbabilityStack::new(to_channel(Region::Wt)?, to_channel(Region::Tc)?, to_channel(Region::Et)?)
}

/// Decodes region probabilities into labels: ET wins at `tau_et`, then TC
/// maps to NC (TC minus ET is NC by the label scheme), then WT maps to ED.
pub fn regions_to_labels(stack: &ProbabilityStack, cfg: &DecodeConfig) -> Result<LabelVolume> {
    cfg.validate()?;
    let wt = stack.channel(Region::Wt).data();
    let tc = stack.channel(Region::Tc).data();
    let et = stack.channel(Region::Et).data();
    let data = (0..wt.len())
        .map(|i| {
            if et[i] as f64 >= cfg.tau_et {
                label::ET
            } else if tc[i] as f64 >= cfg.tau_tc {
                label::NC
            } else if wt[i] as f64 >= cfg.tau_wt {
                label::ED
            } else {
                label::BACKGROUND
            }
        })
        .collect();
    stack.channel(Region::Wt).with_data(data)
}

/// Per-channel, per-voxel weighted arithmetic mean of probability stacks.
/// Accumulates in f64 and clamps to [0,1] before narrowing back to f32.
pub fn fuse_ensemble(stacks: &[ProbabilityStack], weights: Option<&[f64]>) -> Result<ProbabilityStack> {
    if stacks.is_empty() {
        return Err(Error::Arity("ensemble fusion requires at least one stack".into()));
    }
    if let Some(w) = weights {
        if w.len() != stacks.len() {
            return Err(Error::Arity(format!(
                "{} weights supplied for {} stacks",
                w.len(),
                stacks.len()
            )));
        }
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("weights must be finite and non-negative".into()));
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("weights must not sum to zero".into()));
        }
    }
    let first = &stacks[0];
    for s in &stacks[1..] {
        if s.dims() != first.dims() {
            return Err(Error::Shape(format!(
                "stack dims {:?} differ from {:?}",
                s.dims().as_array(),
                first.dims().as_array()
            )));
        }
    }

    let uniform = vec![1.0; stacks.len()];
    let w = weights.unwrap_or(&uniform);
    let total: f64 = w.iter().sum();
    let n = first.dims().len();

    let fuse_channel = |region: Region| -> Result<Grid3<f32>> {
        let mut acc = vec![0.0f64; n];
        for (stack, &wi) in stacks.iter().zip(w.iter()) {
            let data = stack.channel(region).data();
            for (a, &v) in acc.iter_mut().zip(data.iter()) {
                *a += wi * v as f64;
            }
        }
        let data = acc
            .into_iter()
            .map(|v| ((v / total).clamp(0.0, 1.0)) as f32)
            .collect();
        first.channel(region).with_data(data)
    };

    ProbabilityStack::new(
        fuse_channel(Region::Wt)?,
        fuse_channel(Region::Tc)?,
        fuse_channel(Region::Et)?,
    )
}

/// Cleans up enhancing-tumor predictions: drops ET connected components
/// smaller than `et_component_min`, then relabels all remaining ET when the
/// surviving total is below `et_total_min`. Checking the total after
/// component filtering makes the pass idempotent. Non-ET voxels are never
/// touched.
pub fn postprocess_enhancing(labels: &LabelVolume, cfg: &PostprocessConfig) -> Result<LabelVolume> {
    cfg.validate()?;
    let et_mask = region_mask(labels, Region::Et)?;
    let mut data = labels.data().to_vec();

    let components = connected_components(&et_mask, cfg.connectivity);
    let mut surviving = 0usize;
    for c in components.components() {
        if c.volume_voxels() < cfg.et_component_min {
            for &i in &c.voxels {
                data[i] = cfg.relabel_target;
            }
        } else {
            surviving += c.volume_voxels();
        }
    }
    if surviving < cfg.et_total_min {
        for v in data.iter_mut() {
            if *v == label::ET {
                *v = cfg.relabel_target;
            }
        }
    }
    labels.with_data(data)
}
