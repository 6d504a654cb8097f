//! Raw volume format: `<name>.json` sidecar plus `<name>.bin` payload.
//!
//! Sidecar keys are exactly `dims` (3 ints, order depth/height/width),
//! `spacing` (3 floats, mm) and `dtype` (`"u8"`, `"i16"` or `"f32"`).
//! The payload is the flat row-major voxel sequence, little-endian.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{label, Dims3, Grid3, Spacing3};
use crate::{LabelVolume, Volume3};

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    dims: [usize; 3],
    spacing: [f64; 3],
    dtype: String,
}

/// Strips a `.json`/`.bin` extension so either file (or the bare stem) can
/// name the volume.
fn base_path(path: &Path) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("bin") => path.with_extension(""),
        _ => path.to_path_buf(),
    }
}

fn sidecar_paths(path: &Path) -> (PathBuf, PathBuf) {
    let base = base_path(path);
    (base.with_extension("json"), base.with_extension("bin"))
}

fn read_parts(path: &Path) -> Result<(Sidecar, Vec<u8>)> {
    let (json_path, bin_path) = sidecar_paths(path);
    let sidecar: Sidecar = serde_json::from_slice(&std::fs::read(&json_path)?)
        .map_err(|e| Error::Format(format!("{}: {e}", json_path.display())))?;
    let body = std::fs::read(&bin_path)?;
    Ok((sidecar, body))
}

fn geometry(sidecar: &Sidecar) -> (Dims3, Spacing3) {
    let [d, h, w] = sidecar.dims;
    let [sd, sh, sw] = sidecar.spacing;
    (Dims3::new(d, h, w), Spacing3::new(sd, sh, sw))
}

fn check_len(path: &Path, body: &[u8], n: usize, elem: usize) -> Result<()> {
    if body.len() != n * elem {
        return Err(Error::Format(format!(
            "{}: payload is {} bytes, dims require {}",
            path.display(),
            body.len(),
            n * elem
        )));
    }
    Ok(())
}

pub fn load_raw_image(path: &Path) -> Result<Volume3> {
    let (sidecar, body) = read_parts(path)?;
    let (dims, spacing) = geometry(&sidecar);
    let n = dims.len();
    let data: Vec<f32> = match sidecar.dtype.as_str() {
        "f32" => {
            check_len(path, &body, n, 4)?;
            (0..n)
                .map(|i| f32::from_le_bytes([body[4 * i], body[4 * i + 1], body[4 * i + 2], body[4 * i + 3]]))
                .collect()
        }
        "i16" => {
            check_len(path, &body, n, 2)?;
            (0..n)
                .map(|i| i16::from_le_bytes([body[2 * i], body[2 * i + 1]]) as f32)
                .collect()
        }
        "u8" => {
            check_len(path, &body, n, 1)?;
            body.iter().map(|b| *b as f32).collect()
        }
        other => {
            return Err(Error::Unsupported(format!(
                "{}: dtype {other:?} (supported: u8, i16, f32)",
                path.display()
            )))
        }
    };
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::Format(format!(
            "{}: non-finite voxel value at flat index {i}",
            path.display()
        )));
    }
    Grid3::new(dims, spacing, data)
}

pub fn load_raw_labels(path: &Path) -> Result<LabelVolume> {
    let (sidecar, body) = read_parts(path)?;
    if sidecar.dtype != "u8" {
        return Err(Error::Unsupported(format!(
            "{}: label volumes must be dtype u8, got {:?}",
            path.display(),
            sidecar.dtype
        )));
    }
    let (dims, spacing) = geometry(&sidecar);
    check_len(path, &body, dims.len(), 1)?;
    if let Some((index, value)) = body.iter().enumerate().find(|(_, v)| !label::is_valid(**v)) {
        return Err(Error::Label { index, value: *value });
    }
    Grid3::new(dims, spacing, body)
}

fn write_parts(path: &Path, sidecar: &Sidecar, body: &[u8]) -> Result<()> {
    let (json_path, bin_path) = sidecar_paths(path);
    let json = serde_json::to_vec_pretty(sidecar)
        .map_err(|e| Error::Format(format!("sidecar serialization: {e}")))?;
    std::fs::write(&json_path, json)?;
    std::fs::write(&bin_path, body)?;
    Ok(())
}

pub fn save_raw_image(v: &Volume3, path: &Path) -> Result<()> {
    let sidecar = Sidecar {
        dims: v.dims().as_array(),
        spacing: v.spacing().as_array(),
        dtype: "f32".into(),
    };
    let mut body = Vec::with_capacity(v.len() * 4);
    for x in v.data() {
        body.extend_from_slice(&x.to_le_bytes());
    }
    write_parts(path, &sidecar, &body)
}

pub fn save_raw_labels(v: &LabelVolume, path: &Path) -> Result<()> {
    let sidecar = Sidecar {
        dims: v.dims().as_array(),
        spacing: v.spacing().as_array(),
        dtype: "u8".into(),
    };
    write_parts(path, &sidecar, v.data())
}
