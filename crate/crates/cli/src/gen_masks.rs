//! `gen-masks`: surrogate inpainting masks placed in healthy tissue.

use std::path::PathBuf;

use gliovox_core::inpaint::{gen_surrogate_mask, merge_and_dilate_roi, SurrogateMaskConfig};
use gliovox_core::io::{load_image_auto, load_labels_auto, save_labels_auto};
use gliovox_core::Result;

use crate::report::SCHEMA_VERSION;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Tumor label volume; labels {1,2,3} merge into the exclusion ROI.
    #[arg(long)]
    pub labels: PathBuf,

    /// Brain mask volume (voxels > 0.5 are brain).
    #[arg(long)]
    pub brain: PathBuf,

    /// Ball radius (voxels) for dilating the tumor ROI.
    #[arg(long, default_value_t = 3)]
    pub dilation: usize,

    /// Number of balls in the surrogate mask.
    #[arg(long, default_value_t = 3)]
    pub count: usize,

    #[arg(long = "radius-min", default_value_t = 2)]
    pub radius_min: usize,

    #[arg(long = "radius-max", default_value_t = 5)]
    pub radius_max: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output mask volume (uint8 0/1).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<u8> {
    let labels = load_labels_auto(&args.labels)?;
    let brain_vol = load_image_auto(&args.brain)?;
    let brain = brain_vol.with_data(brain_vol.data().iter().map(|&v| v > 0.5).collect())?;

    let tumor_roi = merge_and_dilate_roi(&labels, args.dilation)?;
    let cfg = SurrogateMaskConfig {
        count: args.count,
        radius_range: (args.radius_min, args.radius_max),
    };
    let mask = gen_surrogate_mask(&brain, &tumor_roi, args.seed, &cfg)?;

    let as_labels = mask.with_data(mask.data().iter().map(|&b| b as u8).collect())?;
    save_labels_auto(&as_labels, &args.out)?;

    let provenance = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "labels": args.labels.display().to_string(),
        "brain": args.brain.display().to_string(),
        "dilation": args.dilation,
        "count": args.count,
        "radius_range": [args.radius_min, args.radius_max],
        "seed": args.seed,
        "mask_voxels": mask.count_true(),
    });
    std::fs::write(
        args.out.with_extension("provenance.json"),
        serde_json::to_string_pretty(&provenance).expect("provenance serializes"),
    )?;
    Ok(0)
}
