//! Report serialization: versioned JSON schemas shared by the subcommands.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use gliovox_core::metrics::{MetricsMode, MetricsReport, RegionMetrics};
use gliovox_core::Region;

pub const SCHEMA_VERSION: u32 = 1;

/// Serializes `+inf` as the string `"inf"`, finite values as numbers.
pub fn ser_maybe_inf<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegionScores {
    pub dsc: f64,
    pub hd95: f64,
}

impl RegionScores {
    fn from_metrics(m: RegionMetrics, scale: f64) -> Self {
        Self { dsc: m.dsc * scale, hd95: m.hd95 }
    }
}

#[derive(Debug, Serialize)]
pub struct CaseRow {
    pub case_id: String,
    pub regions: BTreeMap<&'static str, RegionScores>,
    pub avg: RegionScores,
}

#[derive(Debug, Serialize)]
pub struct MeanRow {
    pub regions: BTreeMap<&'static str, RegionScores>,
    pub avg: RegionScores,
}

#[derive(Debug, Serialize)]
pub struct FailureRow {
    pub case_id: String,
    pub error: String,
}

/// Full eval-seg report.
#[derive(Debug, Serialize)]
pub struct SegReport {
    pub schema_version: u32,
    pub mode: MetricsMode,
    pub config: serde_json::Value,
    pub cases: Vec<CaseRow>,
    /// Dataset-level mean over the successful cases; absent when none
    /// succeeded.
    pub mean: Option<MeanRow>,
    pub failures: Vec<FailureRow>,
}

fn region_map(report: &MetricsReport, scale: f64) -> BTreeMap<&'static str, RegionScores> {
    Region::ALL
        .iter()
        .map(|r| (r.name(), RegionScores::from_metrics(report.region(*r), scale)))
        .collect()
}

pub fn case_row(report: &MetricsReport, percent: bool) -> CaseRow {
    let scale = if percent { 100.0 } else { 1.0 };
    CaseRow {
        case_id: report.case_id.clone(),
        regions: region_map(report, scale),
        avg: RegionScores::from_metrics(report.avg, scale),
    }
}

/// Arithmetic mean over per-case reports, region by region.
pub fn mean_row(reports: &[MetricsReport], percent: bool) -> Option<MeanRow> {
    if reports.is_empty() {
        return None;
    }
    let scale = if percent { 100.0 } else { 1.0 };
    let n = reports.len() as f64;
    let mean_of = |extract: &dyn Fn(&MetricsReport) -> RegionMetrics| RegionScores {
        dsc: reports.iter().map(|r| extract(r).dsc).sum::<f64>() / n * scale,
        hd95: reports.iter().map(|r| extract(r).hd95).sum::<f64>() / n,
    };
    let regions = Region::ALL
        .iter()
        .map(|r| (r.name(), mean_of(&|rep: &MetricsReport| rep.region(*r))))
        .collect();
    Some(MeanRow { regions, avg: mean_of(&|rep: &MetricsReport| rep.avg) })
}

/// eval-seg CSV: the per-case rows plus mean rows under the case id `mean`.
pub fn seg_csv(reports: &[MetricsReport], mean: &Option<MeanRow>, mode: MetricsMode, percent: bool) -> String {
    let mut out = String::from("case_id,mode,region,dsc,hd95\n");
    for report in reports {
        for row in report.csv_rows(percent) {
            out.push_str(&row);
            out.push('\n');
        }
    }
    if let Some(mean) = mean {
        for region in Region::ALL {
            let m = &mean.regions[region.name()];
            out.push_str(&format!("mean,{mode},{region},{},{}\n", m.dsc, m.hd95));
        }
        out.push_str(&format!("mean,{mode},Avg,{},{}\n", mean.avg.dsc, mean.avg.hd95));
    }
    out
}

/// One score row in the eval-inpaint report.
#[derive(Debug, Serialize)]
pub struct ScoreRow {
    pub model_id: String,
    pub case_id: String,
    pub mse: f64,
    #[serde(serialize_with = "ser_maybe_inf")]
    pub psnr: f64,
    pub ssim: f64,
}

/// Per-model aggregates: PSNR both as the mean of per-case values and as
/// the PSNR of the pooled (mean) MSE.
#[derive(Debug, Serialize)]
pub struct ModelAggregates {
    pub model_id: String,
    pub mean_mse: f64,
    #[serde(serialize_with = "ser_maybe_inf")]
    pub mean_psnr: f64,
    #[serde(serialize_with = "ser_maybe_inf")]
    pub pooled_psnr: f64,
    pub mean_ssim: f64,
}

#[derive(Debug, Serialize)]
pub struct InpaintReport {
    pub schema_version: u32,
    pub config: serde_json::Value,
    pub scores: Vec<ScoreRow>,
    pub aggregates: Vec<ModelAggregates>,
    /// Present when at least two models were scored.
    pub ranking: Option<Vec<gliovox_core::inpaint::RankEntry>>,
    pub failures: Vec<FailureRow>,
}
