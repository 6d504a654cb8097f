//! NIfTI-1 reader/writer, restricted to the subset the toolkit needs:
//! single-file (`n+1`), uncompressed, little-endian, datatypes uint8/int16/
//! float32. Orientation fields (qform/sform) are ignored; evaluation runs in
//! voxel space with spacing taken from `pixdim`.
//!
//! Axis convention: the file's fastest-varying axis (`dim[1]`) maps to
//! `width`, `dim[2]` to `height`, and `dim[3]` to `depth`, so the payload is
//! copied flat without reordering and save/load round-trips bit-exactly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{label, Dims3, Grid3, Spacing3};
use crate::{LabelVolume, Volume3};

const HEADER_LEN: usize = 348;
const MAGIC_OFFSET: usize = 344;
const DIM_OFFSET: usize = 40;
const DATATYPE_OFFSET: usize = 70;
const BITPIX_OFFSET: usize = 72;
const PIXDIM_OFFSET: usize = 76;
const VOX_OFFSET_OFFSET: usize = 108;
const SCL_SLOPE_OFFSET: usize = 112;
const SCL_INTER_OFFSET: usize = 116;
const DEFAULT_VOX_OFFSET: u64 = 352;

const DT_UINT8: i16 = 2;
const DT_INT16: i16 = 4;
const DT_FLOAT32: i16 = 16;

fn read_i16(buf: &[u8], off: usize) -> i16 {
    i16::from_le_bytes([buf[off], buf[off + 1]])
}

fn read_i32(buf: &[u8], off: usize) -> i32 {
    i32::from_le_bytes([buf[off], buf[off + 1], buf[off + 2], buf[off + 3]])
}

fn read_f32(buf: &[u8], off: usize) -> f32 {
    f32::from_le_bytes([buf[off], buf[off + 1], buf[off + 2], buf[off + 3]])
}

struct ParsedHeader {
    dims: Dims3,
    spacing: Spacing3,
    datatype: i16,
    scl_slope: f32,
    scl_inter: f32,
    vox_offset: u64,
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<ParsedHeader> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "{}: file shorter than the 348-byte NIfTI-1 header ({} bytes)",
            path.display(),
            bytes.len()
        )));
    }
    let magic = &bytes[MAGIC_OFFSET..MAGIC_OFFSET + 4];
    if magic == b"ni1\0" {
        return Err(Error::Unsupported(format!(
            "{}: two-file NIfTI (magic \"ni1\") is not supported",
            path.display()
        )));
    }
    if magic != b"n+1\0" {
        return Err(Error::Format(format!(
            "{}: bad magic {:?}, expected \"n+1\"",
            path.display(),
            magic
        )));
    }
    let sizeof_hdr = read_i32(bytes, 0);
    if sizeof_hdr != HEADER_LEN as i32 {
        return Err(Error::Format(format!(
            "{}: sizeof_hdr = {} (expected 348; big-endian files are not supported)",
            path.display(),
            sizeof_hdr
        )));
    }

    let ndim = read_i16(bytes, DIM_OFFSET);
    if !(1..=7).contains(&ndim) {
        return Err(Error::Format(format!("{}: dim[0] = {ndim} out of range", path.display())));
    }
    let mut dim = [1i16; 7];
    for (i, d) in dim.iter_mut().enumerate() {
        if (i as i16) < ndim {
            *d = read_i16(bytes, DIM_OFFSET + 2 * (i + 1));
        }
    }
    if dim.iter().take(3).any(|d| *d < 1) {
        return Err(Error::Format(format!(
            "{}: non-positive spatial dim {:?}",
            path.display(),
            &dim[..3]
        )));
    }
    if dim.iter().skip(3).any(|d| *d > 1) {
        return Err(Error::Unsupported(format!(
            "{}: volumes with more than three non-trivial dimensions are not supported",
            path.display()
        )));
    }
    // dim[1] is the file's fastest axis; it becomes width.
    let dims = Dims3::new(dim[2] as usize, dim[1] as usize, dim[0] as usize);

    let px = [
        read_f32(bytes, PIXDIM_OFFSET + 4),
        read_f32(bytes, PIXDIM_OFFSET + 8),
        read_f32(bytes, PIXDIM_OFFSET + 12),
    ];
    if px.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::Format(format!(
            "{}: non-positive pixdim {:?}",
            path.display(),
            px
        )));
    }
    let spacing = Spacing3::new(px[2] as f64, px[1] as f64, px[0] as f64);

    let datatype = read_i16(bytes, DATATYPE_OFFSET);
    if ![DT_UINT8, DT_INT16, DT_FLOAT32].contains(&datatype) {
        return Err(Error::Unsupported(format!(
            "{}: datatype {} (supported: 2=uint8, 4=int16, 16=float32)",
            path.display(),
            datatype
        )));
    }

    let vox_offset_f = read_f32(bytes, VOX_OFFSET_OFFSET);
    // Single-file NIfTI-1 places the payload at 352 or later.
    if !(vox_offset_f.is_finite()
        && vox_offset_f >= DEFAULT_VOX_OFFSET as f32
        && vox_offset_f.fract() == 0.0)
    {
        return Err(Error::Format(format!(
            "{}: invalid vox_offset {} (expected an integer >= 352)",
            path.display(),
            vox_offset_f
        )));
    }

    Ok(ParsedHeader {
        dims,
        spacing,
        datatype,
        scl_slope: read_f32(bytes, SCL_SLOPE_OFFSET),
        scl_inter: read_f32(bytes, SCL_INTER_OFFSET),
        vox_offset: vox_offset_f as u64,
    })
}

fn payload<'a>(bytes: &'a [u8], hdr: &ParsedHeader, elem_size: usize, path: &Path) -> Result<&'a [u8]> {
    let start = hdr.vox_offset as usize;
    let needed = hdr.dims.len() * elem_size;
    if bytes.len() < start || bytes.len() - start < needed {
        return Err(Error::Format(format!(
            "{}: payload holds {} bytes but dims {:?} need {}",
            path.display(),
            bytes.len().saturating_sub(start),
            hdr.dims.as_array(),
            needed
        )));
    }
    Ok(&bytes[start..start + needed])
}

/// Loads a scalar image. int16/uint8 payloads are scaled by
/// `scl_slope`/`scl_inter` when the slope is nonzero.
pub fn load_nifti_image(path: &Path) -> Result<Volume3> {
    let bytes = std::fs::read(path)?;
    let hdr = parse_header(&bytes, path)?;
    let n = hdr.dims.len();

    let scale = |raw: f32| -> f32 {
        if hdr.scl_slope != 0.0 {
            raw * hdr.scl_slope + hdr.scl_inter
        } else {
            raw
        }
    };

    let data: Vec<f32> = match hdr.datatype {
        DT_FLOAT32 => {
            let body = payload(&bytes, &hdr, 4, path)?;
            (0..n).map(|i| read_f32(body, 4 * i)).collect()
        }
        DT_INT16 => {
            let body = payload(&bytes, &hdr, 2, path)?;
            (0..n).map(|i| scale(read_i16(body, 2 * i) as f32)).collect()
        }
        DT_UINT8 => {
            let body = payload(&bytes, &hdr, 1, path)?;
            body.iter().map(|b| scale(*b as f32)).collect()
        }
        _ => unreachable!("datatype validated in parse_header"),
    };

    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::Format(format!(
            "{}: non-finite voxel value {} at flat index {i}",
            path.display(),
            data[i]
        )));
    }
    Grid3::new(hdr.dims, hdr.spacing, data)
}

/// Loads a label volume. Requires datatype uint8, identity scaling, and all
/// values inside the {0,1,2,3} scheme.
pub fn load_nifti_labels(path: &Path) -> Result<LabelVolume> {
    let bytes = std::fs::read(path)?;
    let hdr = parse_header(&bytes, path)?;
    if hdr.datatype != DT_UINT8 {
        return Err(Error::Unsupported(format!(
            "{}: label volumes must be uint8 (datatype 2), got {}",
            path.display(),
            hdr.datatype
        )));
    }
    if !(hdr.scl_slope == 0.0 || hdr.scl_slope == 1.0) || hdr.scl_inter != 0.0 {
        return Err(Error::Format(format!(
            "{}: label volume carries a nontrivial scl_slope/scl_inter ({}, {})",
            path.display(),
            hdr.scl_slope,
            hdr.scl_inter
        )));
    }
    let body = payload(&bytes, &hdr, 1, path)?;
    if let Some((index, value)) = body.iter().enumerate().find(|(_, v)| !label::is_valid(**v)) {
        return Err(Error::Label { index, value: *value });
    }
    Grid3::new(hdr.dims, hdr.spacing, body.to_vec())
}

fn build_header(dims: Dims3, spacing: Spacing3, datatype: i16, bitpix: i16) -> Result<[u8; HEADER_LEN]> {
    for d in dims.as_array() {
        if d == 0 || d > i16::MAX as usize {
            return Err(Error::Unsupported(format!(
                "dims {:?} do not fit the NIfTI-1 16-bit dim fields",
                dims.as_array()
            )));
        }
    }
    let mut hdr = [0u8; HEADER_LEN];
    hdr[0..4].copy_from_slice(&(HEADER_LEN as i32).to_le_bytes());
    let dim: [i16; 8] = [
        3,
        dims.width as i16,
        dims.height as i16,
        dims.depth as i16,
        1,
        1,
        1,
        1,
    ];
    for (i, d) in dim.iter().enumerate() {
        hdr[DIM_OFFSET + 2 * i..DIM_OFFSET + 2 * i + 2].copy_from_slice(&d.to_le_bytes());
    }
    hdr[DATATYPE_OFFSET..DATATYPE_OFFSET + 2].copy_from_slice(&datatype.to_le_bytes());
    hdr[BITPIX_OFFSET..BITPIX_OFFSET + 2].copy_from_slice(&bitpix.to_le_bytes());
    let pixdim: [f32; 8] = [
        1.0,
        spacing.width as f32,
        spacing.height as f32,
        spacing.depth as f32,
        1.0,
        1.0,
        1.0,
        1.0,
    ];
    for (i, p) in pixdim.iter().enumerate() {
        hdr[PIXDIM_OFFSET + 4 * i..PIXDIM_OFFSET + 4 * i + 4].copy_from_slice(&p.to_le_bytes());
    }
    hdr[VOX_OFFSET_OFFSET..VOX_OFFSET_OFFSET + 4]
        .copy_from_slice(&(DEFAULT_VOX_OFFSET as f32).to_le_bytes());
    hdr[SCL_SLOPE_OFFSET..SCL_SLOPE_OFFSET + 4].copy_from_slice(&1.0f32.to_le_bytes());
    hdr[SCL_INTER_OFFSET..SCL_INTER_OFFSET + 4].copy_from_slice(&0.0f32.to_le_bytes());
    hdr[MAGIC_OFFSET..MAGIC_OFFSET + 4].copy_from_slice(b"n+1\0");
    Ok(hdr)
}

fn write_file(path: &Path, hdr: &[u8], body: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(DEFAULT_VOX_OFFSET as usize + body.len());
    out.extend_from_slice(hdr);
    // Four zero bytes: the "no extensions" indicator, padding to vox_offset 352.
    out.extend_from_slice(&[0u8; 4]);
    out.extend_from_slice(body);
    std::fs::write(path, out)?;
    Ok(())
}

/// Saves a scalar image as little-endian float32.
pub fn save_nifti_image(v: &Volume3, path: &Path) -> Result<()> {
    let hdr = build_header(v.dims(), v.spacing(), DT_FLOAT32, 32)?;
    let mut body = Vec::with_capacity(v.len() * 4);
    for x in v.data() {
        body.extend_from_slice(&x.to_le_bytes());
    }
    write_file(path, &hdr, &body)
}

/// Saves a label volume as uint8 (datatype code 2).
pub fn save_nifti_labels(v: &LabelVolume, path: &Path) -> Result<()> {
    let hdr = build_header(v.dims(), v.spacing(), DT_UINT8, 8)?;
    write_file(path, &hdr, v.data())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Dims3, Spacing3};

    fn tmpfile(name: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        (dir, path)
    }

    /// Header built field-by-field, independent of `build_header`.
    fn handmade_header(dims: [i16; 3], datatype: i16, bitpix: i16, pixdim: [f32; 3]) -> Vec<u8> {
        let mut hdr = vec![0u8; 348];
        hdr[0..4].copy_from_slice(&348i32.to_le_bytes());
        hdr[40..42].copy_from_slice(&3i16.to_le_bytes());
        for (i, d) in dims.iter().enumerate() {
            hdr[42 + 2 * i..44 + 2 * i].copy_from_slice(&d.to_le_bytes());
        }
        hdr[70..72].copy_from_slice(&datatype.to_le_bytes());
        hdr[72..74].copy_from_slice(&bitpix.to_le_bytes());
        for (i, p) in pixdim.iter().enumerate() {
            hdr[80 + 4 * i..84 + 4 * i].copy_from_slice(&p.to_le_bytes());
        }
        hdr[108..112].copy_from_slice(&352.0f32.to_le_bytes());
        hdr[344..348].copy_from_slice(b"n+1\0");
        hdr
    }

    #[test]
    fn image_roundtrip_bit_exact() {
        let dims = Dims3::new(3, 4, 5);
        let data: Vec<f32> = (0..dims.len()).map(|i| (i as f32) * 0.25 - 3.0).collect();
        let v = Grid3::new(dims, Spacing3::new(1.0, 1.0, 2.5), data.clone()).unwrap();
        let (_dir, path) = tmpfile("img.nii");
        save_nifti_image(&v, &path).unwrap();
        let back = load_nifti_image(&path).unwrap();
        assert_eq!(back.dims(), dims);
        assert_eq!(back.spacing(), v.spacing());
        assert_eq!(back.data(), data.as_slice());
    }

    #[test]
    fn label_roundtrip_uses_uint8() {
        let dims = Dims3::new(2, 3, 4);
        let data: Vec<u8> = (0..dims.len()).map(|i| (i % 4) as u8).collect();
        let v = Grid3::new(dims, Spacing3::unit(), data.clone()).unwrap();
        let (_dir, path) = tmpfile("labels.nii");
        save_nifti_labels(&v, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(read_i16(&bytes, DATATYPE_OFFSET), DT_UINT8);
        let back = load_nifti_labels(&path).unwrap();
        assert_eq!(back.data(), data.as_slice());
    }

    #[test]
    fn loads_handmade_header() {
        let mut bytes = handmade_header([4, 4, 4], 16, 32, [1.0, 1.0, 1.0]);
        bytes.extend_from_slice(&[0u8; 4]);
        for i in 0..64 {
            bytes.extend_from_slice(&(i as f32).to_le_bytes());
        }
        let (_dir, path) = tmpfile("hand.nii");
        std::fs::write(&path, &bytes).unwrap();
        let v = load_nifti_image(&path).unwrap();
        assert_eq!(v.dims(), Dims3::new(4, 4, 4));
        assert_eq!(v.spacing(), Spacing3::unit());
        assert_eq!(v.data()[63], 63.0);
    }

    #[test]
    fn rejects_two_file_magic() {
        let mut bytes = handmade_header([2, 2, 2], 16, 32, [1.0, 1.0, 1.0]);
        bytes[344..348].copy_from_slice(b"ni1\0");
        bytes.extend_from_slice(&[0u8; 4 + 8 * 4]);
        let (_dir, path) = tmpfile("two_file.nii");
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_nifti_image(&path), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rejects_payload_shorter_than_dims() {
        let mut bytes = handmade_header([4, 4, 4], 16, 32, [1.0, 1.0, 1.0]);
        bytes.extend_from_slice(&[0u8; 4]);
        bytes.extend_from_slice(&[0u8; 64]); // 16 voxels, need 64
        let (_dir, path) = tmpfile("short.nii");
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_nifti_image(&path), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_unsupported_datatype() {
        let mut bytes = handmade_header([2, 2, 2], 64, 64, [1.0, 1.0, 1.0]); // float64
        bytes.extend_from_slice(&[0u8; 4 + 8 * 8]);
        let (_dir, path) = tmpfile("f64.nii");
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_nifti_image(&path), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rejects_non_finite_voxels() {
        let mut bytes = handmade_header([2, 2, 2], 16, 32, [1.0, 1.0, 1.0]);
        bytes.extend_from_slice(&[0u8; 4]);
        for i in 0..8 {
            let v = if i == 5 { f32::NAN } else { 1.0 };
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let (_dir, path) = tmpfile("nan.nii");
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_nifti_image(&path), Err(Error::Format(_))));
    }

    #[test]
    fn int16_scaling_applied_when_slope_nonzero() {
        let mut bytes = handmade_header([2, 1, 1], 4, 16, [1.0, 1.0, 1.0]);
        bytes[112..116].copy_from_slice(&0.5f32.to_le_bytes()); // scl_slope
        bytes[116..120].copy_from_slice(&10.0f32.to_le_bytes()); // scl_inter
        bytes.extend_from_slice(&[0u8; 4]);
        bytes.extend_from_slice(&4i16.to_le_bytes());
        bytes.extend_from_slice(&(-2i16).to_le_bytes());
        let (_dir, path) = tmpfile("scaled.nii");
        std::fs::write(&path, &bytes).unwrap();
        let v = load_nifti_image(&path).unwrap();
        assert_eq!(v.data(), &[12.0, 9.0]);
    }

    #[test]
    fn labels_reject_out_of_scheme_values() {
        let mut bytes = handmade_header([2, 2, 2], 2, 8, [1.0, 1.0, 1.0]);
        bytes.extend_from_slice(&[0u8; 4]);
        bytes.extend_from_slice(&[0, 1, 2, 3, 0, 0, 0, 5]);
        let (_dir, path) = tmpfile("badlabel.nii");
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_nifti_labels(&path),
            Err(Error::Label { index: 7, value: 5 })
        ));
    }
}
