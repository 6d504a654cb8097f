//! Exact Euclidean distance transform.
//!
//! Separable lower-envelope (parabola) passes over squared distances, one per
//! axis, each weighted by that axis' spacing. The result is the exact
//! spacing-weighted distance in mm from every voxel to its nearest true
//! voxel. Internals run in f64; the output grid is generic over the scalar.

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::scalar::Real;
use crate::BinaryMask;

/// One-dimensional squared-distance transform along a line with positions
/// `i * spacing`: `out[i] = min_j (f[j] + (spacing * (i - j))^2)`.
///
/// Parabolas with infinite height (no seed yet) are skipped; a line with no
/// finite entry stays at infinity.
fn envelope_pass(f: &[f64], out: &mut [f64], spacing: f64, hull: &mut Vec<usize>, bounds: &mut Vec<f64>) {
    let n = f.len();
    hull.clear();
    bounds.clear();

    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let xq = q as f64 * spacing;
        if hull.is_empty() {
            hull.push(q);
            bounds.push(f64::NEG_INFINITY);
            bounds.push(f64::INFINITY);
            continue;
        }
        loop {
            let p = *hull.last().unwrap();
            let xp = p as f64 * spacing;
            // Intersection abscissa of the parabolas rooted at p and q.
            let s = ((f[q] + xq * xq) - (f[p] + xp * xp)) / (2.0 * (xq - xp));
            if s <= bounds[hull.len() - 1] {
                hull.pop();
                bounds.pop();
            } else {
                hull.push(q);
                *bounds.last_mut().unwrap() = s;
                bounds.push(f64::INFINITY);
                break;
            }
        }
    }

    if hull.is_empty() {
        out[..n].fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (i, o) in out.iter_mut().take(n).enumerate() {
        let xi = i as f64 * spacing;
        while bounds[k + 1] < xi {
            k += 1;
        }
        let p = hull[k];
        let dx = xi - p as f64 * spacing;
        *o = f[p] + dx * dx;
    }
}

/// Exact spacing-weighted Euclidean distance (mm) from every voxel to the
/// nearest true voxel; zero on true voxels.
pub fn distance_transform<R: Real>(mask: &BinaryMask) -> Result<Grid3<R>> {
    if !mask.any() {
        return Err(Error::EmptyMask("distance transform requires at least one true voxel".into()));
    }
    let dims = mask.dims();
    let spacing = mask.spacing();
    let (d, h, w) = (dims.depth, dims.height, dims.width);

    let mut sq: Vec<f64> = mask
        .data()
        .iter()
        .map(|&v| if v { 0.0 } else { f64::INFINITY })
        .collect();

    let max_extent = d.max(h).max(w);
    let mut line = vec![0.0f64; max_extent];
    let mut out_line = vec![0.0f64; max_extent];
    let mut hull: Vec<usize> = Vec::with_capacity(max_extent);
    let mut bounds: Vec<f64> = Vec::with_capacity(max_extent + 1);

    // Width pass: contiguous lines.
    for base in (0..sq.len()).step_by(w) {
        envelope_pass(&sq[base..base + w], &mut out_line, spacing.width, &mut hull, &mut bounds);
        sq[base..base + w].copy_from_slice(&out_line[..w]);
    }

    // Height pass: stride = width within each z-slice.
    for z in 0..d {
        for x in 0..w {
            let base = z * h * w + x;
            for y in 0..h {
                line[y] = sq[base + y * w];
            }
            envelope_pass(&line[..h], &mut out_line, spacing.height, &mut hull, &mut bounds);
            for y in 0..h {
                sq[base + y * w] = out_line[y];
            }
        }
    }

    // Depth pass: stride = height * width.
    let slice = h * w;
    for yx in 0..slice {
        for z in 0..d {
            line[z] = sq[yx + z * slice];
        }
        envelope_pass(&line[..d], &mut out_line, spacing.depth, &mut hull, &mut bounds);
        for z in 0..d {
            sq[yx + z * slice] = out_line[z];
        }
    }

    let data: Vec<R> = sq.iter().map(|&v| R::from_f64_lossy(v.sqrt())).collect();
    Grid3::new(dims, spacing, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Dims3, Grid3, Spacing3};

    fn mask_at(dims: Dims3, spacing: Spacing3, truthy: &[(usize, usize, usize)]) -> BinaryMask {
        let mut data = vec![false; dims.len()];
        for &(z, y, x) in truthy {
            data[dims.index(z, y, x)] = true;
        }
        Grid3::new(dims, spacing, data).unwrap()
    }

    /// All-pairs reference, used here on tiny fixtures only.
    fn brute_force(mask: &BinaryMask) -> Vec<f64> {
        let dims = mask.dims();
        let sp = mask.spacing();
        let seeds: Vec<(usize, usize, usize)> =
            mask.true_indices().iter().map(|&i| dims.coords(i)).collect();
        (0..dims.len())
            .map(|i| {
                let (z, y, x) = dims.coords(i);
                seeds
                    .iter()
                    .map(|&(sz, sy, sx)| {
                        let dz = (z as f64 - sz as f64) * sp.depth;
                        let dy = (y as f64 - sy as f64) * sp.height;
                        let dx = (x as f64 - sx as f64) * sp.width;
                        (dz * dz + dy * dy + dx * dx).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn empty_mask_is_an_error() {
        let mask = mask_at(Dims3::new(2, 2, 2), Spacing3::unit(), &[]);
        assert!(matches!(distance_transform::<f64>(&mask), Err(Error::EmptyMask(_))));
    }

    #[test]
    fn zero_on_true_voxels_and_known_distances() {
        let dims = Dims3::new(5, 5, 5);
        let mask = mask_at(dims, Spacing3::unit(), &[(0, 0, 0)]);
        let dt = distance_transform::<f64>(&mask).unwrap();
        assert_eq!(*dt.get(0, 0, 0), 0.0);
        assert_eq!(*dt.get(0, 0, 3), 3.0);
        assert!((*dt.get(1, 1, 1) - 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn anisotropic_spacing_weights_axes() {
        let dims = Dims3::new(4, 4, 4);
        let mask = mask_at(dims, Spacing3::new(2.0, 1.0, 1.0), &[(1, 1, 1)]);
        let dt = distance_transform::<f64>(&mask).unwrap();
        assert_eq!(*dt.get(2, 1, 1), 2.0); // one step along depth costs spacing.depth
        assert_eq!(*dt.get(1, 2, 1), 1.0);
        assert_eq!(*dt.get(1, 1, 2), 1.0);
    }

    #[test]
    fn matches_brute_force_on_scattered_seeds() {
        let dims = Dims3::new(6, 5, 7);
        let mask = mask_at(
            dims,
            Spacing3::new(1.0, 1.5, 0.5),
            &[(0, 0, 0), (5, 4, 6), (2, 3, 1), (4, 0, 5)],
        );
        let dt = distance_transform::<f64>(&mask).unwrap();
        let reference = brute_force(&mask);
        for (got, want) in dt.data().iter().zip(reference.iter()) {
            assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
        }
    }

    #[test]
    fn f32_output_variant_is_close() {
        let dims = Dims3::new(3, 3, 3);
        let mask = mask_at(dims, Spacing3::unit(), &[(0, 0, 0)]);
        let dt = distance_transform::<f32>(&mask).unwrap();
        assert!((*dt.get(1, 1, 1) - (3.0f32).sqrt()).abs() < 1e-6);
    }
}
