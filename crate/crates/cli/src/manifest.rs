//! Case manifests: JSON arrays of `{case_id, pred_path, gt_path[, mask_path]}`.
//!
//! Relative paths are resolved against the manifest file's directory, so a
//! manifest can live next to its volumes.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use gliovox_core::{Error, Result};

#[derive(Debug, Deserialize)]
struct RawEntry {
    case_id: String,
    pred_path: String,
    gt_path: String,
    #[serde(default)]
    mask_path: Option<String>,
}

/// One evaluation case with resolved paths.
#[derive(Debug, Clone)]
pub struct CaseEntry {
    pub case_id: String,
    pub pred_path: PathBuf,
    pub gt_path: PathBuf,
    pub mask_path: Option<PathBuf>,
}

/// Loads and validates a manifest: unique case ids, resolved paths.
pub fn load_manifest(path: &Path) -> Result<Vec<CaseEntry>> {
    let text = std::fs::read_to_string(path)?;
    let raw: Vec<RawEntry> = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if raw.is_empty() {
        return Err(Error::Format(format!("{}: manifest lists no cases", path.display())));
    }
    let mut seen = BTreeSet::new();
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &str| -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    raw.into_iter()
        .map(|e| {
            if !seen.insert(e.case_id.clone()) {
                return Err(Error::Format(format!(
                    "{}: duplicate case_id {:?}",
                    path.display(),
                    e.case_id
                )));
            }
            Ok(CaseEntry {
                case_id: e.case_id,
                pred_path: resolve(&e.pred_path),
                gt_path: resolve(&e.gt_path),
                mask_path: e.mask_path.as_deref().map(resolve),
            })
        })
        .collect()
}

/// Model identifier for an inpainting manifest: the file stem unless
/// overridden.
pub fn model_id_for(path: &Path, explicit: Option<&str>) -> String {
    if let Some(id) = explicit {
        return id.to_string();
    }
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
