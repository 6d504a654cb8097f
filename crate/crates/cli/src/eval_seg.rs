//! `eval-seg`: batch segmentation evaluation over a case manifest.

use std::path::PathBuf;

use clap::ValueEnum;
use rayon::prelude::*;

use gliovox_core::grid::{Grid3, Spacing3};
use gliovox_core::io::load_labels_auto;
use gliovox_core::metrics::{
    legacy_case_metrics, lesionwise_case_metrics, LesionWiseConfig, MetricsMode, MetricsReport,
};
use gliovox_core::morphology::Connectivity;
use gliovox_core::{Error, Result};

use crate::manifest::{load_manifest, CaseEntry};
use crate::report::{case_row, mean_row, seg_csv, FailureRow, SegReport, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Legacy,
    LesionWise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON manifest: [{"case_id", "pred_path", "gt_path"}, ...]
    #[arg(long)]
    pub manifest: PathBuf,

    /// Evaluation protocol.
    #[arg(long, value_enum, default_value = "lesion-wise")]
    pub mode: ModeArg,

    /// Ball radius (voxels) for lesion dilation before matching.
    #[arg(long, default_value_t = 3)]
    pub dilation: usize,

    /// Minimum lesion volume in voxels; smaller lesions and false positives
    /// are ignored.
    #[arg(long = "min-lesion", default_value_t = 50)]
    pub min_lesion: usize,

    /// HD95 penalty for unmatched lesions and false positives.
    #[arg(long = "penalty-hd", default_value_t = 374.0)]
    pub penalty_hd: f64,

    /// DSC penalty for unmatched lesions and false positives.
    #[arg(long = "penalty-dsc", default_value_t = 0.0)]
    pub penalty_dsc: f64,

    /// Connected-component neighborhood: 6, 18 or 26.
    #[arg(long, default_value_t = 26)]
    pub connectivity: u8,

    /// Report DSC as a percentage.
    #[arg(long)]
    pub percent: bool,

    /// Measure HD95 in voxel units instead of mm (ignores the files'
    /// spacing).
    #[arg(long = "unit-voxels")]
    pub unit_voxels: bool,

    /// Maximum concurrent cases (default: one thread per core).
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Report output path.
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
}

fn evaluate_case(
    entry: &CaseEntry,
    mode: ModeArg,
    cfg: &LesionWiseConfig,
    unit_voxels: bool,
) -> Result<MetricsReport> {
    let mut pred = load_labels_auto(&entry.pred_path)?;
    let mut gt = load_labels_auto(&entry.gt_path)?;
    if unit_voxels {
        pred = Grid3::new(pred.dims(), Spacing3::unit(), pred.into_data())?;
        gt = Grid3::new(gt.dims(), Spacing3::unit(), gt.into_data())?;
    }
    match mode {
        ModeArg::Legacy => legacy_case_metrics(&entry.case_id, &pred, &gt, cfg.penalty_hd95),
        ModeArg::LesionWise => lesionwise_case_metrics(&entry.case_id, &pred, &gt, cfg),
    }
}

/// Runs `f` on a rayon pool sized by `jobs` (or the default pool).
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("could not build a {n}-thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Some(_) => Err(Error::Config("--jobs must be at least 1".into())),
        None => Ok(f()),
    }
}

pub fn run(args: Args) -> Result<u8> {
    let cfg = LesionWiseConfig {
        dilation_radius: args.dilation,
        min_lesion_volume: args.min_lesion,
        penalty_hd95: args.penalty_hd,
        penalty_dsc: args.penalty_dsc,
        connectivity: Connectivity::from_u8(args.connectivity)?,
    };
    cfg.validate()?;
    let entries = load_manifest(&args.manifest)?;

    // Manifest order is preserved: rayon's indexed collect keeps positions.
    let outcomes: Vec<(String, Result<MetricsReport>)> = with_pool(args.jobs, || {
        entries
            .par_iter()
            .map(|e| (e.case_id.clone(), evaluate_case(e, args.mode, &cfg, args.unit_voxels)))
            .collect()
    })?;

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (case_id, outcome) in outcomes {
        match outcome {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(FailureRow { case_id, error: e.to_string() }),
        }
    }

    let mode = match args.mode {
        ModeArg::Legacy => MetricsMode::Legacy,
        ModeArg::LesionWise => MetricsMode::LesionWise,
    };
    let mean = mean_row(&reports, args.percent);
    let config = serde_json::json!({
        "mode": mode,
        "dilation_radius": cfg.dilation_radius,
        "min_lesion_volume": cfg.min_lesion_volume,
        "penalty_hd95": cfg.penalty_hd95,
        "penalty_dsc": cfg.penalty_dsc,
        "connectivity": args.connectivity,
        "percent": args.percent,
        "unit_voxels": args.unit_voxels,
        "manifest": args.manifest.display().to_string(),
    });

    match args.format {
        FormatArg::Json => {
            let report = SegReport {
                schema_version: SCHEMA_VERSION,
                mode,
                config,
                cases: reports.iter().map(|r| case_row(r, args.percent)).collect(),
                mean,
                failures: failures.iter().map(|f| FailureRow { case_id: f.case_id.clone(), error: f.error.clone() }).collect(),
            };
            std::fs::write(&args.out, serde_json::to_string_pretty(&report).expect("report serializes"))?;
        }
        FormatArg::Csv => {
            std::fs::write(&args.out, seg_csv(&reports, &mean, mode, args.percent))?;
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
