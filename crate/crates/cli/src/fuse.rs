//! `fuse`: ensemble fusion of probability stacks, hierarchical decoding to
//! labels, and enhancing-tumor post-processing, with a provenance sidecar.

use std::path::PathBuf;

use gliovox_core::grid::ProbabilityStack;
use gliovox_core::io::{load_image_auto, save_labels_auto};
use gliovox_core::regions::{
    fuse_ensemble, postprocess_enhancing, regions_to_labels, DecodeConfig, PostprocessConfig,
};
use gliovox_core::morphology::Connectivity;
use gliovox_core::{Error, Result};

use crate::report::SCHEMA_VERSION;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// One probability stack as `wt.nii,tc.nii,et.nii` (three channel
    /// volumes). Repeat per ensemble member.
    #[arg(long, required = true)]
    pub stack: Vec<String>,

    /// Comma-separated non-negative fusion weights, one per stack
    /// (default: uniform).
    #[arg(long)]
    pub weights: Option<String>,

    #[arg(long = "tau-wt", default_value_t = 0.5)]
    pub tau_wt: f64,

    #[arg(long = "tau-tc", default_value_t = 0.5)]
    pub tau_tc: f64,

    #[arg(long = "tau-et", default_value_t = 0.5)]
    pub tau_et: f64,

    /// Keep enhancing tumor only when at least this many voxels survive
    /// component filtering.
    #[arg(long = "et-total-min", default_value_t = 200)]
    pub et_total_min: usize,

    /// Remove enhancing-tumor components smaller than this many voxels.
    #[arg(long = "et-component-min", default_value_t = 10)]
    pub et_component_min: usize,

    /// Label that removed enhancing-tumor voxels become (0, 1 or 2).
    #[arg(long = "relabel-target", default_value_t = 1)]
    pub relabel_target: u8,

    #[arg(long, default_value_t = 26)]
    pub connectivity: u8,

    /// Output label volume (.nii or raw .json/.bin).
    #[arg(long)]
    pub out: PathBuf,
}

fn load_stack(spec: &str) -> Result<ProbabilityStack> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Arity(format!(
            "--stack expects three comma-separated paths (wt,tc,et), got {spec:?}"
        )));
    }
    ProbabilityStack::new(
        load_image_auto(std::path::Path::new(parts[0]))?,
        load_image_auto(std::path::Path::new(parts[1]))?,
        load_image_auto(std::path::Path::new(parts[2]))?,
    )
}

fn parse_weights(spec: &str, n: usize) -> Result<Vec<f64>> {
    let weights: Vec<f64> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("bad weight {s:?}")))
        })
        .collect::<Result<_>>()?;
    if weights.len() != n {
        return Err(Error::Arity(format!("{} weights for {n} stacks", weights.len())));
    }
    Ok(weights)
}

pub fn run(args: Args) -> Result<u8> {
    let stacks: Vec<ProbabilityStack> =
        args.stack.iter().map(|s| load_stack(s)).collect::<Result<_>>()?;
    let weights = args.weights.as_deref().map(|w| parse_weights(w, stacks.len())).transpose()?;

    let decode = DecodeConfig { tau_wt: args.tau_wt, tau_tc: args.tau_tc, tau_et: args.tau_et };
    let postprocess = PostprocessConfig {
        et_total_min: args.et_total_min,
        et_component_min: args.et_component_min,
        relabel_target: args.relabel_target,
        connectivity: Connectivity::from_u8(args.connectivity)?,
    };

    let fused = fuse_ensemble(&stacks, weights.as_deref())?;
    let labels = regions_to_labels(&fused, &decode)?;
    let cleaned = postprocess_enhancing(&labels, &postprocess)?;
    save_labels_auto(&cleaned, &args.out)?;

    // Every parameter that shaped the output, next to the output.
    let provenance = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "stacks": args.stack,
        "weights": weights,
        "decode": { "tau_wt": decode.tau_wt, "tau_tc": decode.tau_tc, "tau_et": decode.tau_et },
        "postprocess": {
            "et_total_min": postprocess.et_total_min,
            "et_component_min": postprocess.et_component_min,
            "relabel_target": postprocess.relabel_target,
            "connectivity": args.connectivity,
        },
        "out": args.out.display().to_string(),
    });
    let sidecar = args.out.with_extension("provenance.json");
    std::fs::write(&sidecar, serde_json::to_string_pretty(&provenance).expect("provenance serializes"))?;
    Ok(0)
}
