//! Binary-mask morphology: connected components, dilation, surface
//! extraction, and the exact Euclidean distance transform.

mod edt;

pub use edt::distance_transform;

use crate::error::{Error, Result};
use crate::grid::{Dims3, Grid3, Spacing3};
use crate::BinaryMask;

/// Voxel neighborhood used for connected components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Connectivity {
    /// Face neighbors only.
    Six,
    /// Face and edge neighbors.
    Eighteen,
    /// Face, edge and corner neighbors.
    #[default]
    TwentySix,
}

impl Connectivity {
    pub fn offsets(&self) -> Vec<(i64, i64, i64)> {
        let max_manhattan = match self {
            Connectivity::Six => 1,
            Connectivity::Eighteen => 2,
            Connectivity::TwentySix => 3,
        };
        let mut out = Vec::new();
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let m = dz.abs() + dy.abs() + dx.abs();
                    if m > 0 && m <= max_manhattan {
                        out.push((dz, dy, dx));
                    }
                }
            }
        }
        out
    }

    pub fn as_u8(&self) -> u8 {
        match self {
            Connectivity::Six => 6,
            Connectivity::Eighteen => 18,
            Connectivity::TwentySix => 26,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            6 => Ok(Connectivity::Six),
            18 => Ok(Connectivity::Eighteen),
            26 => Ok(Connectivity::TwentySix),
            other => Err(Error::Config(format!("connectivity must be 6, 18 or 26, got {other}"))),
        }
    }
}

/// Shape of a morphological structuring element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// Offsets with squared Euclidean norm <= radius^2.
    Ball,
    /// Offsets with Chebyshev norm <= radius.
    Cube,
}

/// Structuring element for dilation, sized in voxels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    pub kind: ElementKind,
    pub radius: usize,
}

impl StructuringElement {
    pub fn ball(radius: usize) -> Self {
        Self { kind: ElementKind::Ball, radius }
    }

    pub fn cube(radius: usize) -> Self {
        Self { kind: ElementKind::Cube, radius }
    }

    /// Footprint offsets, including the origin.
    pub fn offsets(&self) -> Vec<(i64, i64, i64)> {
        let r = self.radius as i64;
        let r2 = r * r;
        let mut out = Vec::new();
        for dz in -r..=r {
            for dy in -r..=r {
                for dx in -r..=r {
                    let keep = match self.kind {
                        ElementKind::Ball => dz * dz + dy * dy + dx * dx <= r2,
                        ElementKind::Cube => true,
                    };
                    if keep {
                        out.push((dz, dy, dx));
                    }
                }
            }
        }
        out
    }
}

/// One connected component of a binary mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LesionComponent {
    /// 1-based id; ids are consecutive in descending-volume order.
    pub id: usize,
    /// Flat voxel indices, ascending.
    pub voxels: Vec<usize>,
}

impl LesionComponent {
    pub fn volume_voxels(&self) -> usize {
        self.voxels.len()
    }

    pub fn min_index(&self) -> usize {
        self.voxels[0]
    }
}

/// The connected components of a mask, ordered by descending volume
/// (ties by smallest minimum flat index).
#[derive(Debug, Clone)]
pub struct LesionSet {
    dims: Dims3,
    spacing: Spacing3,
    components: Vec<LesionComponent>,
}

impl LesionSet {
    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    pub fn spacing(&self) -> Spacing3 {
        self.spacing
    }

    pub fn components(&self) -> &[LesionComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Physical volume of one component in mm^3.
    pub fn volume_mm3(&self, component: &LesionComponent) -> f64 {
        component.volume_voxels() as f64 * self.spacing.voxel_volume()
    }

    /// Rebuilds a component as a standalone mask on the source geometry.
    pub fn component_mask(&self, component: &LesionComponent) -> BinaryMask {
        let mut data = vec![false; self.dims.len()];
        for &i in &component.voxels {
            data[i] = true;
        }
        Grid3::new(self.dims, self.spacing, data).expect("component indices are in range")
    }

    /// Per-voxel component labels: 0 = background, otherwise the component id.
    pub fn label_map(&self) -> Vec<u32> {
        let mut map = vec![0u32; self.dims.len()];
        for c in &self.components {
            for &i in &c.voxels {
                map[i] = c.id as u32;
            }
        }
        map
    }
}

/// Partitions the true voxels of `mask` into maximal connected components.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> LesionSet {
    let dims = mask.dims();
    let offsets = connectivity.offsets();
    let data = mask.data();
    let mut visited = vec![false; data.len()];
    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();

    for start in 0..data.len() {
        if !data[start] || visited[start] {
            continue;
        }
        let mut voxels = Vec::new();
        visited[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            voxels.push(i);
            let (z, y, x) = dims.coords(i);
            for &(dz, dy, dx) in &offsets {
                let (nz, ny, nx) = (z as i64 + dz, y as i64 + dy, x as i64 + dx);
                if !dims.contains(nz, ny, nx) {
                    continue;
                }
                let ni = dims.index(nz as usize, ny as usize, nx as usize);
                if data[ni] && !visited[ni] {
                    visited[ni] = true;
                    stack.push(ni);
                }
            }
        }
        voxels.sort_unstable();
        raw.push(voxels);
    }

    raw.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let components = raw
        .into_iter()
        .enumerate()
        .map(|(i, voxels)| LesionComponent { id: i + 1, voxels })
        .collect();
    LesionSet { dims, spacing: mask.spacing(), components }
}

/// Morphological dilation: a voxel is true iff any source-true voxel lies
/// within the element footprint centered there. Clips at grid boundaries.
pub fn dilate(mask: &BinaryMask, element: StructuringElement) -> BinaryMask {
    let dims = mask.dims();
    let offsets = element.offsets();
    let mut out = vec![false; dims.len()];
    for (i, v) in mask.data().iter().enumerate() {
        if !v {
            continue;
        }
        let (z, y, x) = dims.coords(i);
        for &(dz, dy, dx) in &offsets {
            let (nz, ny, nx) = (z as i64 + dz, y as i64 + dy, x as i64 + dx);
            if dims.contains(nz, ny, nx) {
                out[dims.index(nz as usize, ny as usize, nx as usize)] = true;
            }
        }
    }
    Grid3::new(dims, mask.spacing(), out).expect("dilation preserves geometry")
}

/// True voxels with at least one 6-neighbor that is false or outside the grid.
pub fn surface_voxels(mask: &BinaryMask) -> Vec<usize> {
    let dims = mask.dims();
    let data = mask.data();
    let offsets = Connectivity::Six.offsets();
    let mut out = Vec::new();
    for (i, v) in data.iter().enumerate() {
        if !v {
            continue;
        }
        let (z, y, x) = dims.coords(i);
        let exposed = offsets.iter().any(|&(dz, dy, dx)| {
            let (nz, ny, nx) = (z as i64 + dz, y as i64 + dy, x as i64 + dx);
            !dims.contains(nz, ny, nx) || !data[dims.index(nz as usize, ny as usize, nx as usize)]
        });
        if exposed {
            out.push(i);
        }
    }
    out
}

/// Builds a mask with the given true voxels on the geometry of `like`.
pub fn mask_from_indices<T>(like: &Grid3<T>, indices: &[usize]) -> BinaryMask {
    let mut data = vec![false; like.dims().len()];
    for &i in indices {
        data[i] = true;
    }
    Grid3::new(like.dims(), like.spacing(), data).expect("indices in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Dims3, Spacing3};

    fn mask_from(dims: Dims3, truthy: &[(usize, usize, usize)]) -> BinaryMask {
        let mut data = vec![false; dims.len()];
        for &(z, y, x) in truthy {
            data[dims.index(z, y, x)] = true;
        }
        Grid3::new(dims, Spacing3::unit(), data).unwrap()
    }

    #[test]
    fn single_voxel_is_one_component() {
        let mask = mask_from(Dims3::new(4, 4, 4), &[(1, 2, 3)]);
        let set = connected_components(&mask, Connectivity::TwentySix);
        assert_eq!(set.len(), 1);
        assert_eq!(set.components()[0].volume_voxels(), 1);
        assert_eq!(set.components()[0].id, 1);
    }

    #[test]
    fn diagonal_voxels_depend_on_connectivity() {
        let mask = mask_from(Dims3::new(3, 3, 3), &[(0, 0, 0), (1, 1, 1)]);
        assert_eq!(connected_components(&mask, Connectivity::TwentySix).len(), 1);
        assert_eq!(connected_components(&mask, Connectivity::Six).len(), 2);
        // (0,0,0)-(1,1,1) is a corner step: not an edge neighbor either.
        assert_eq!(connected_components(&mask, Connectivity::Eighteen).len(), 2);
        let edge = mask_from(Dims3::new(3, 3, 3), &[(0, 0, 0), (0, 1, 1)]);
        assert_eq!(connected_components(&edge, Connectivity::Eighteen).len(), 1);
        assert_eq!(connected_components(&edge, Connectivity::Six).len(), 2);
    }

    #[test]
    fn empty_mask_has_no_components() {
        let mask = mask_from(Dims3::new(2, 2, 2), &[]);
        assert!(connected_components(&mask, Connectivity::TwentySix).is_empty());
    }

    #[test]
    fn components_ordered_by_volume_then_min_index() {
        // Two singletons and one 2-voxel bar.
        let mask = mask_from(
            Dims3::new(1, 5, 5),
            &[(0, 0, 4), (0, 2, 0), (0, 2, 1), (0, 4, 4)],
        );
        let set = connected_components(&mask, Connectivity::Six);
        assert_eq!(set.len(), 3);
        assert_eq!(set.components()[0].volume_voxels(), 2);
        // Singletons tie on volume; lower flat index first.
        assert!(set.components()[1].min_index() < set.components()[2].min_index());
        assert_eq!(
            set.components().iter().map(|c| c.id).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn union_of_components_equals_mask() {
        let dims = Dims3::new(4, 4, 4);
        let mask = mask_from(dims, &[(0, 0, 0), (0, 0, 1), (2, 2, 2), (3, 3, 3)]);
        let set = connected_components(&mask, Connectivity::Six);
        let mut union = vec![false; dims.len()];
        for c in set.components() {
            for &i in &c.voxels {
                assert!(!union[i], "components overlap at {i}");
                union[i] = true;
            }
        }
        assert_eq!(&union, mask.data());
    }

    #[test]
    fn dilate_radius_zero_is_identity() {
        let mask = mask_from(Dims3::new(3, 3, 3), &[(1, 1, 1), (0, 2, 2)]);
        let out = dilate(&mask, StructuringElement::ball(0));
        assert_eq!(out.data(), mask.data());
    }

    #[test]
    fn ball_radius_one_dilation_of_center_voxel() {
        let mask = mask_from(Dims3::new(5, 5, 5), &[(2, 2, 2)]);
        let out = dilate(&mask, StructuringElement::ball(1));
        // Offsets with squared norm <= 1: origin + 6 face neighbors.
        assert_eq!(out.count_true(), 7);
        assert!(*out.get(2, 2, 2) && *out.get(1, 2, 2) && *out.get(2, 2, 3));
        assert!(!*out.get(1, 1, 2));
    }

    #[test]
    fn cube_radius_one_dilation_of_center_voxel() {
        let mask = mask_from(Dims3::new(5, 5, 5), &[(2, 2, 2)]);
        let out = dilate(&mask, StructuringElement::cube(1));
        assert_eq!(out.count_true(), 27);
    }

    #[test]
    fn dilation_clips_at_boundary() {
        let mask = mask_from(Dims3::new(3, 3, 3), &[(0, 0, 0)]);
        let out = dilate(&mask, StructuringElement::ball(1));
        assert_eq!(out.count_true(), 4); // origin + 3 in-bounds face neighbors
    }

    #[test]
    fn dilation_is_extensive_and_monotone() {
        let small = mask_from(Dims3::new(4, 4, 4), &[(1, 1, 1)]);
        let large = mask_from(Dims3::new(4, 4, 4), &[(1, 1, 1), (2, 3, 3)]);
        let ds = dilate(&small, StructuringElement::ball(2));
        let dl = dilate(&large, StructuringElement::ball(2));
        for i in 0..small.len() {
            assert!(!small.data()[i] || ds.data()[i]); // extensive
            assert!(!ds.data()[i] || dl.data()[i]); // monotone
        }
    }

    #[test]
    fn surface_of_single_voxel_is_itself() {
        let dims = Dims3::new(3, 3, 3);
        let mask = mask_from(dims, &[(1, 1, 1)]);
        assert_eq!(surface_voxels(&mask), vec![dims.index(1, 1, 1)]);
    }

    #[test]
    fn surface_of_solid_cube_excludes_center() {
        let dims = Dims3::new(7, 7, 7);
        let mut truthy = Vec::new();
        for z in 2..5 {
            for y in 2..5 {
                for x in 2..5 {
                    truthy.push((z, y, x));
                }
            }
        }
        let mask = mask_from(dims, &truthy);
        let surf = surface_voxels(&mask);
        assert_eq!(surf.len(), 26);
        assert!(!surf.contains(&dims.index(3, 3, 3)));
    }

    #[test]
    fn surface_of_full_grid_is_boundary_shell() {
        let dims = Dims3::new(4, 4, 4);
        let mask = Grid3::filled(dims, Spacing3::unit(), true).unwrap();
        let surf = surface_voxels(&mask);
        // Everything except the 2x2x2 interior.
        assert_eq!(surf.len(), 64 - 8);
    }
}
