//! Volume file I/O: a NIfTI-1 subset and a raw JSON sidecar + binary format.
//!
//! Both formats round-trip `(dims, spacing, payload)` bit-exactly. Loading
//! rejects non-finite image voxels and out-of-scheme label values, so every
//! loaded grid satisfies its type invariants.

mod nifti;
mod raw;

use std::path::Path;

use crate::error::{Error, Result};
use crate::{LabelVolume, Volume3};

pub use nifti::{load_nifti_image, load_nifti_labels, save_nifti_image, save_nifti_labels};
pub use raw::{load_raw_image, load_raw_labels, save_raw_image, save_raw_labels};

/// On-disk volume formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeFormat {
    /// Single-file uncompressed NIfTI-1 (`.nii`).
    Nifti,
    /// `<name>.json` sidecar plus `<name>.bin` little-endian payload.
    Raw,
}

/// Picks the format from the file extension: `.nii` is NIfTI, `.json`/`.bin`
/// are raw.
pub fn detect_format(path: &Path) -> Result<VolumeFormat> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("nii") => Ok(VolumeFormat::Nifti),
        Some("json") | Some("bin") => Ok(VolumeFormat::Raw),
        other => Err(Error::Unsupported(format!(
            "cannot infer volume format from extension {:?} of {}",
            other,
            path.display()
        ))),
    }
}

/// Loads a scalar image volume.
pub fn load_image(path: &Path, format: VolumeFormat) -> Result<Volume3> {
    match format {
        VolumeFormat::Nifti => load_nifti_image(path),
        VolumeFormat::Raw => load_raw_image(path),
    }
}

/// Loads a label volume; values must be within the {0,1,2,3} scheme.
pub fn load_labels(path: &Path, format: VolumeFormat) -> Result<LabelVolume> {
    match format {
        VolumeFormat::Nifti => load_nifti_labels(path),
        VolumeFormat::Raw => load_raw_labels(path),
    }
}

/// Saves a scalar image volume (float32 payload).
pub fn save_image(v: &Volume3, path: &Path, format: VolumeFormat) -> Result<()> {
    match format {
        VolumeFormat::Nifti => save_nifti_image(v, path),
        VolumeFormat::Raw => save_raw_image(v, path),
    }
}

/// Saves a label volume (uint8 payload).
pub fn save_labels(v: &LabelVolume, path: &Path, format: VolumeFormat) -> Result<()> {
    match format {
        VolumeFormat::Nifti => save_nifti_labels(v, path),
        VolumeFormat::Raw => save_raw_labels(v, path),
    }
}

/// Convenience: load an image, inferring the format from the extension.
pub fn load_image_auto(path: &Path) -> Result<Volume3> {
    load_image(path, detect_format(path)?)
}

/// Convenience: load labels, inferring the format from the extension.
pub fn load_labels_auto(path: &Path) -> Result<LabelVolume> {
    load_labels(path, detect_format(path)?)
}

/// Convenience: save an image, inferring the format from the extension.
pub fn save_image_auto(v: &Volume3, path: &Path) -> Result<()> {
    save_image(v, path, detect_format(path)?)
}

/// Convenience: save labels, inferring the format from the extension.
pub fn save_labels_auto(v: &LabelVolume, path: &Path) -> Result<()> {
    save_labels(v, path, detect_format(path)?)
}
