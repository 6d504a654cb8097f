//! `eval-inpaint`: masked MSE/PSNR/SSIM per (model, case), per-model
//! aggregates, and rank-sum ranking across models.

use std::path::PathBuf;

use rayon::prelude::*;

use gliovox_core::inpaint::{
    masked_mse, masked_psnr, masked_ssim, rank_sum, write_scores_csv, CaseScores, SsimConfig,
};
use gliovox_core::io::load_image_auto;
use gliovox_core::{BinaryMask, Error, Result};

use crate::eval_seg::{with_pool, FormatArg};
use crate::manifest::{load_manifest, model_id_for, CaseEntry};
use crate::report::{FailureRow, InpaintReport, ModelAggregates, ScoreRow, SCHEMA_VERSION};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON manifest per model: [{"case_id", "pred_path", "gt_path",
    /// "mask_path"}, ...]. Repeat for multiple models.
    #[arg(long, required = true)]
    pub manifest: Vec<PathBuf>,

    /// Model identifier per manifest, positional; defaults to the manifest
    /// file stem.
    #[arg(long = "model-id")]
    pub model_ids: Vec<String>,

    /// SSIM window edge (odd).
    #[arg(long = "ssim-window", default_value_t = 7)]
    pub ssim_window: usize,

    /// Dynamic range used by PSNR and the SSIM stabilizers.
    #[arg(long, default_value_t = 1.0)]
    pub peak: f64,

    /// Maximum concurrent cases.
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Report output path (JSON report, or the score-table CSV with
    /// `--format csv`).
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
}

/// Loads a mask volume: any supported image whose voxels are thresholded at
/// 0.5.
fn load_mask(path: &std::path::Path) -> Result<BinaryMask> {
    let v = load_image_auto(path)?;
    let data = v.data().iter().map(|&x| x > 0.5).collect();
    v.with_data(data)
}

fn score_case(model_id: &str, entry: &CaseEntry, cfg: &SsimConfig, peak: f64) -> Result<CaseScores> {
    let mask_path = entry.mask_path.as_ref().ok_or_else(|| {
        Error::Format(format!("case {:?} has no mask_path; eval-inpaint requires one", entry.case_id))
    })?;
    let pred = load_image_auto(&entry.pred_path)?;
    let reference = load_image_auto(&entry.gt_path)?;
    let mask = load_mask(mask_path)?;
    let mse = masked_mse(&pred, &reference, &mask)?;
    let psnr = masked_psnr(&pred, &reference, &mask, peak)?;
    let ssim = masked_ssim(&pred, &reference, &mask, cfg)?;
    Ok(CaseScores {
        model_id: model_id.to_string(),
        case_id: entry.case_id.clone(),
        mse,
        psnr,
        ssim,
    })
}

fn aggregates(model_id: &str, scores: &[&CaseScores], peak: f64) -> ModelAggregates {
    let n = scores.len() as f64;
    let mean_mse = scores.iter().map(|s| s.mse).sum::<f64>() / n;
    let mean_psnr = scores.iter().map(|s| s.psnr).sum::<f64>() / n;
    let pooled_psnr = if mean_mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mean_mse).log10()
    };
    ModelAggregates {
        model_id: model_id.to_string(),
        mean_mse,
        mean_psnr,
        pooled_psnr,
        mean_ssim: scores.iter().map(|s| s.ssim).sum::<f64>() / n,
    }
}

pub fn run(args: Args) -> Result<u8> {
    if !args.model_ids.is_empty() && args.model_ids.len() != args.manifest.len() {
        return Err(Error::Arity(format!(
            "{} --model-id values for {} manifests",
            args.model_ids.len(),
            args.manifest.len()
        )));
    }
    let ssim_cfg = SsimConfig { window: args.ssim_window, l: args.peak, ..Default::default() };
    ssim_cfg.validate()?;

    let mut jobs_list: Vec<(String, CaseEntry)> = Vec::new();
    for (i, path) in args.manifest.iter().enumerate() {
        let model_id = model_id_for(path, args.model_ids.get(i).map(|s| s.as_str()));
        for entry in load_manifest(path)? {
            jobs_list.push((model_id.clone(), entry));
        }
    }

    let outcomes: Vec<(String, String, Result<CaseScores>)> = with_pool(args.jobs, || {
        jobs_list
            .par_iter()
            .map(|(model_id, entry)| {
                (
                    model_id.clone(),
                    entry.case_id.clone(),
                    score_case(model_id, entry, &ssim_cfg, args.peak),
                )
            })
            .collect()
    })?;

    let mut scores: Vec<CaseScores> = Vec::new();
    let mut failures = Vec::new();
    for (model_id, case_id, outcome) in outcomes {
        match outcome {
            Ok(s) => scores.push(s),
            Err(e) => failures.push(FailureRow {
                case_id: format!("{model_id}/{case_id}"),
                error: e.to_string(),
            }),
        }
    }

    let model_ids: Vec<String> = {
        let mut ids: Vec<String> = scores.iter().map(|s| s.model_id.clone()).collect();
        ids.dedup();
        let mut unique = std::collections::BTreeSet::new();
        ids.retain(|id| unique.insert(id.clone()));
        ids
    };
    let agg: Vec<ModelAggregates> = model_ids
        .iter()
        .map(|id| {
            let per_model: Vec<&CaseScores> = scores.iter().filter(|s| &s.model_id == id).collect();
            aggregates(id, &per_model, args.peak)
        })
        .collect();

    // Rank only when the table is complete and at least two models scored.
    let ranking = if model_ids.len() >= 2 && failures.is_empty() {
        Some(rank_sum(&scores)?)
    } else {
        None
    };

    let config = serde_json::json!({
        "ssim_window": ssim_cfg.window,
        "k1": ssim_cfg.k1,
        "k2": ssim_cfg.k2,
        "peak": args.peak,
        "manifests": args.manifest.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });

    match args.format {
        FormatArg::Json => {
            let report = InpaintReport {
                schema_version: SCHEMA_VERSION,
                config,
                scores: scores
                    .iter()
                    .map(|s| ScoreRow {
                        model_id: s.model_id.clone(),
                        case_id: s.case_id.clone(),
                        mse: s.mse,
                        psnr: s.psnr,
                        ssim: s.ssim,
                    })
                    .collect(),
                aggregates: agg,
                ranking,
                failures: failures
                    .iter()
                    .map(|f| FailureRow { case_id: f.case_id.clone(), error: f.error.clone() })
                    .collect(),
            };
            std::fs::write(&args.out, serde_json::to_string_pretty(&report).expect("report serializes"))?;
        }
        FormatArg::Csv => {
            write_scores_csv(&scores, &args.out)?;
            if let Some(ranking) = &ranking {
                let path = args.out.with_extension("ranking.json");
                std::fs::write(&path, serde_json::to_string_pretty(ranking).expect("ranking serializes"))?;
            }
        }
    }

    if failures.is_empty() {
        Ok(0)
    } else {
        for f in &failures {
            eprintln!("case {} failed: {}", f.case_id, f.error);
        }
        Ok(2)
    }
}
