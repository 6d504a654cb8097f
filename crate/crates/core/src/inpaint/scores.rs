//! Score tables and equally weighted rank-sum model ranking.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Inpainting quality scores for one (model, case) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseScores {
    pub model_id: String,
    pub case_id: String,
    pub mse: f64,
    /// dB; `+inf` exactly when `mse` is zero.
    pub psnr: f64,
    pub ssim: f64,
}

impl CaseScores {
    pub fn validate(&self) -> Result<()> {
        if !(self.mse.is_finite() && self.mse >= 0.0) {
            return Err(Error::Range(format!("mse must be finite and >= 0, got {}", self.mse)));
        }
        if self.psnr.is_nan() || self.psnr == f64::NEG_INFINITY {
            return Err(Error::Range(format!("psnr must be a real value or +inf, got {}", self.psnr)));
        }
        if (self.mse == 0.0) != (self.psnr == f64::INFINITY) {
            return Err(Error::Range(format!(
                "mse {} and psnr {} violate the zero-mse/infinite-psnr pairing",
                self.mse, self.psnr
            )));
        }
        if !(-1.0..=1.0).contains(&self.ssim) {
            return Err(Error::Range(format!("ssim must lie in [-1,1], got {}", self.ssim)));
        }
        Ok(())
    }
}

/// Writes a score table as CSV `model_id,case_id,mse,psnr,ssim` (header
/// included); infinite PSNR serializes as `inf`.
pub fn write_scores_csv(scores: &[CaseScores], path: &Path) -> Result<()> {
    let mut out = String::from("model_id,case_id,mse,psnr,ssim\n");
    for s in scores {
        out.push_str(&format!("{},{},{},{},{}\n", s.model_id, s.case_id, s.mse, s.psnr, s.ssim));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a score table written by [`write_scores_csv`] (the header row is
/// optional).
pub fn read_scores_csv(path: &Path) -> Result<Vec<CaseScores>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("model_id,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Format(format!(
                "{}:{}: expected 5 CSV fields, got {}",
                path.display(),
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| {
                Error::Format(format!("{}:{}: bad {what} value {s:?}", path.display(), lineno + 1))
            })
        };
        let scores = CaseScores {
            model_id: fields[0].to_string(),
            case_id: fields[1].to_string(),
            mse: parse(fields[2], "mse")?,
            psnr: parse(fields[3], "psnr")?,
            ssim: parse(fields[4], "ssim")?,
        };
        scores.validate()?;
        out.push(scores);
    }
    Ok(out)
}

/// One model's final ranking.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    pub model_id: String,
    pub rank_sum: f64,
    /// 1-based position after tie-breaking by model id.
    pub final_rank: usize,
    /// Set when another model shares the same rank sum.
    pub tied: bool,
}

/// Fractional ranks (1 = best) with mean ranks on ties.
fn fractional_ranks(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        if higher_is_better {
            values[j].total_cmp(&values[i])
        } else {
            values[i].total_cmp(&values[j])
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // Positions start..=end share the mean of ranks start+1..=end+1.
        let mean = (start + 1 + end + 1) as f64 / 2.0;
        for &idx in &order[start..=end] {
            ranks[idx] = mean;
        }
        start = end + 1;
    }
    ranks
}

/// Equally weighted rank-sum over the three metrics: per case and metric,
/// models are ranked (1 = best: lowest MSE, highest PSNR/SSIM, mean ranks on
/// ties); the sums over all cases and metrics order the models ascending,
/// ties broken lexicographically and flagged.
pub fn rank_sum(scores: &[CaseScores]) -> Result<Vec<RankEntry>> {
    if scores.is_empty() {
        return Err(Error::Incomplete("empty score table".into()));
    }
    for s in scores {
        s.validate()?;
    }
    let models: Vec<String> = scores
        .iter()
        .map(|s| s.model_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cases: Vec<String> = scores
        .iter()
        .map(|s| s.case_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut table: std::collections::BTreeMap<(&str, &str), &CaseScores> = Default::default();
    for s in scores {
        if table.insert((s.model_id.as_str(), s.case_id.as_str()), s).is_some() {
            return Err(Error::Incomplete(format!(
                "duplicate cell for model {:?}, case {:?}",
                s.model_id, s.case_id
            )));
        }
    }

    let mut sums = vec![0.0f64; models.len()];
    type MetricSpec = (fn(&CaseScores) -> f64, bool);
    let metrics: [MetricSpec; 3] = [
        (|s: &CaseScores| s.mse, false),
        (|s: &CaseScores| s.psnr, true),
        (|s: &CaseScores| s.ssim, true),
    ];
    for case in &cases {
        let cells: Vec<&CaseScores> = models
            .iter()
            .map(|m| {
                table.get(&(m.as_str(), case.as_str())).copied().ok_or_else(|| {
                    Error::Incomplete(format!("model {m:?} has no score for case {case:?}"))
                })
            })
            .collect::<Result<_>>()?;
        for (extract, higher_is_better) in metrics {
            let values: Vec<f64> = cells.iter().map(|c| extract(c)).collect();
            for (sum, rank) in sums.iter_mut().zip(fractional_ranks(&values, higher_is_better)) {
                *sum += rank;
            }
        }
    }

    let mut order: Vec<usize> = (0..models.len()).collect();
    order.sort_by(|&i, &j| sums[i].total_cmp(&sums[j]).then_with(|| models[i].cmp(&models[j])));
    let entries = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| RankEntry {
            model_id: models[i].clone(),
            rank_sum: sums[i],
            final_rank: pos + 1,
            tied: sums.iter().enumerate().any(|(j, s)| j != i && *s == sums[i]),
        })
        .collect();
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(model: &str, case: &str, mse: f64, psnr: f64, ssim: f64) -> CaseScores {
        CaseScores {
            model_id: model.into(),
            case_id: case.into(),
            mse,
            psnr,
            ssim,
        }
    }

    #[test]
    fn single_model_rank_sum_is_cases_times_metrics() {
        let scores = vec![
            s("m", "c1", 0.1, 10.0, 0.5),
            s("m", "c2", 0.2, 7.0, 0.4),
        ];
        let ranking = rank_sum(&scores).unwrap();
        assert_eq!(ranking.len(), 1);
        assert_eq!(ranking[0].rank_sum, 2.0 * 3.0);
        assert_eq!(ranking[0].final_rank, 1);
        assert!(!ranking[0].tied);
    }

    #[test]
    fn strictly_dominant_model_takes_all_firsts() {
        let scores = vec![
            s("good", "c1", 0.01, 20.0, 0.9),
            s("good", "c2", 0.02, 17.0, 0.8),
            s("bad", "c1", 0.1, 10.0, 0.5),
            s("bad", "c2", 0.2, 7.0, 0.4),
        ];
        let ranking = rank_sum(&scores).unwrap();
        assert_eq!(ranking[0].model_id, "good");
        assert_eq!(ranking[0].rank_sum, 2.0 * 3.0);
        assert_eq!(ranking[1].model_id, "bad");
        assert_eq!(ranking[1].rank_sum, 2.0 * 6.0);
    }

    #[test]
    fn three_models_two_cases_with_one_tie() {
        // Hand-ranked: on c1 the ssim of B and C ties (mean rank 2.5 each).
        // Sums: A = 3*1 + 3*3 = 12, B = 2+2+2.5 + 3*1 = 9.5, C = 3+3+2.5 + 3*2 = 14.5.
        let scores = vec![
            s("A", "c1", 0.01, 20.0, 0.9),
            s("B", "c1", 0.02, 17.0, 0.8),
            s("C", "c1", 0.03, 15.2, 0.8),
            s("A", "c2", 0.05, 13.0, 0.5),
            s("B", "c2", 0.01, 20.0, 0.95),
            s("C", "c2", 0.02, 17.0, 0.7),
        ];
        let ranking = rank_sum(&scores).unwrap();
        assert_eq!(ranking[0].model_id, "B");
        assert_eq!(ranking[0].rank_sum, 9.5);
        assert_eq!(ranking[1].model_id, "A");
        assert_eq!(ranking[1].rank_sum, 12.0);
        assert_eq!(ranking[2].model_id, "C");
        assert_eq!(ranking[2].rank_sum, 14.5);
        assert!(ranking.iter().all(|e| !e.tied));
        assert_eq!(
            ranking.iter().map(|e| e.final_rank).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn equal_models_tie_and_break_lexicographically() {
        let scores = vec![
            s("beta", "c1", 0.1, 10.0, 0.5),
            s("alpha", "c1", 0.1, 10.0, 0.5),
        ];
        let ranking = rank_sum(&scores).unwrap();
        assert_eq!(ranking[0].model_id, "alpha");
        assert_eq!(ranking[1].model_id, "beta");
        assert!(ranking[0].tied && ranking[1].tied);
        assert_eq!(ranking[0].rank_sum, ranking[1].rank_sum);
    }

    #[test]
    fn missing_cell_is_incomplete() {
        let scores = vec![
            s("a", "c1", 0.1, 10.0, 0.5),
            s("b", "c1", 0.2, 7.0, 0.4),
            s("a", "c2", 0.1, 10.0, 0.5),
        ];
        assert!(matches!(rank_sum(&scores), Err(Error::Incomplete(_))));
    }

    #[test]
    fn ordering_invariant_under_monotone_metric_transform() {
        let base = vec![
            s("A", "c1", 0.01, 20.0, 0.9),
            s("B", "c1", 0.02, 17.0, 0.8),
            s("C", "c1", 0.03, 15.2, 0.8),
            s("A", "c2", 0.05, 13.0, 0.5),
            s("B", "c2", 0.01, 20.0, 0.95),
            s("C", "c2", 0.02, 17.0, 0.7),
        ];
        let transformed: Vec<CaseScores> = base
            .iter()
            .map(|x| s(&x.model_id, &x.case_id, x.mse, 2.0 * x.psnr + 1.0, x.ssim))
            .collect();
        let a = rank_sum(&base).unwrap();
        let b = rank_sum(&transformed).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.model_id, y.model_id);
            assert_eq!(x.rank_sum, y.rank_sum);
        }
    }

    #[test]
    fn infinite_psnr_ranks_first() {
        let scores = vec![
            s("perfect", "c1", 0.0, f64::INFINITY, 1.0),
            s("noisy", "c1", 0.1, 10.0, 0.5),
        ];
        let ranking = rank_sum(&scores).unwrap();
        assert_eq!(ranking[0].model_id, "perfect");
    }

    #[test]
    fn csv_roundtrip_with_infinite_psnr() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        let scores = vec![
            s("m1", "c1", 0.0, f64::INFINITY, 1.0),
            s("m1", "c2", 0.25, 6.020599913279624, 0.5),
        ];
        write_scores_csv(&scores, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("model_id,case_id,mse,psnr,ssim\n"));
        assert!(text.contains(",inf,"));
        let back = read_scores_csv(&path).unwrap();
        assert_eq!(back, scores);
    }

    #[test]
    fn csv_rejects_inconsistent_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "m,c,0.0,10,0.5\n").unwrap(); // mse 0 but finite psnr
        assert!(matches!(read_scores_csv(&path), Err(Error::Range(_))));
    }

    #[test]
    fn validate_rejects_out_of_range_values() {
        assert!(s("m", "c", -0.1, 10.0, 0.5).validate().is_err());
        assert!(s("m", "c", 0.1, f64::NAN, 0.5).validate().is_err());
        assert!(s("m", "c", 0.1, 10.0, 1.5).validate().is_err());
        assert!(s("m", "c", 0.1, 10.0, 0.5).validate().is_ok());
    }
}
