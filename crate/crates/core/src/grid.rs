//! Canonical 3D grid data model.
//!
//! A [`Grid3`] is a dense row-major grid (width fastest) with physical voxel
//! spacing in millimetres. Flat index and `(z, y, x)` coordinates relate by
//! `index = (z * height + y) * width + x`. Grids are immutable after
//! construction, so shared read access is safe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid extents, ordered `(depth, height, width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims3 {
    pub depth: usize,
    pub height: usize,
    pub width: usize,
}

impl Dims3 {
    pub fn new(depth: usize, height: usize, width: usize) -> Self {
        Self { depth, height, width }
    }

    /// Total voxel count.
    pub fn len(&self) -> usize {
        self.depth * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of `(z, y, x)`.
    pub fn index(&self, z: usize, y: usize, x: usize) -> usize {
        (z * self.height + y) * self.width + x
    }

    /// Inverse of [`Dims3::index`].
    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let x = index % self.width;
        let y = (index / self.width) % self.height;
        let z = index / (self.width * self.height);
        (z, y, x)
    }

    pub fn contains(&self, z: i64, y: i64, x: i64) -> bool {
        z >= 0
            && y >= 0
            && x >= 0
            && (z as usize) < self.depth
            && (y as usize) < self.height
            && (x as usize) < self.width
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.depth, self.height, self.width]
    }
}

/// Physical voxel spacing in millimetres, ordered `(depth, height, width)`
/// to match [`Dims3`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spacing3 {
    pub depth: f64,
    pub height: f64,
    pub width: f64,
}

impl Spacing3 {
    pub fn new(depth: f64, height: f64, width: f64) -> Self {
        Self { depth, height, width }
    }

    /// Isotropic 1 mm spacing.
    pub fn unit() -> Self {
        Self::new(1.0, 1.0, 1.0)
    }

    /// Volume of one voxel in mm^3.
    pub fn voxel_volume(&self) -> f64 {
        self.depth * self.height * self.width
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("depth", self.depth), ("height", self.height), ("width", self.width)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Range(format!("spacing.{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.depth, self.height, self.width]
    }
}

/// Dense 3D grid of voxels of type `T`, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3<T> {
    dims: Dims3,
    spacing: Spacing3,
    data: Vec<T>,
}

impl<T> Grid3<T> {
    /// Builds a grid, checking that `data.len()` matches `dims` and the
    /// spacing is positive.
    pub fn new(dims: Dims3, spacing: Spacing3, data: Vec<T>) -> Result<Self> {
        spacing.validate()?;
        if data.len() != dims.len() {
            return Err(Error::Shape(format!(
                "data length {} does not match dims {:?} (expected {})",
                data.len(),
                dims.as_array(),
                dims.len()
            )));
        }
        Ok(Self { dims, spacing, data })
    }

    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    pub fn spacing(&self) -> Spacing3 {
        self.spacing
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, z: usize, y: usize, x: usize) -> &T {
        &self.data[self.dims.index(z, y, x)]
    }

    /// Same dims/spacing, new payload.
    pub fn with_data<U>(&self, data: Vec<U>) -> Result<Grid3<U>> {
        Grid3::new(self.dims, self.spacing, data)
    }

    /// True when `other` has identical dims and spacing.
    pub fn same_geometry<U>(&self, other: &Grid3<U>) -> bool {
        self.dims == other.dims && self.spacing == other.spacing
    }
}

impl<T: Clone> Grid3<T> {
    /// Grid filled with a constant value.
    pub fn filled(dims: Dims3, spacing: Spacing3, value: T) -> Result<Self> {
        Self::new(dims, spacing, vec![value; dims.len()])
    }
}

impl Grid3<bool> {
    /// Number of true voxels.
    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|v| **v).count()
    }

    /// Flat indices of the true voxels, ascending.
    pub fn true_indices(&self) -> Vec<usize> {
        self.data
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.then_some(i))
            .collect()
    }

    pub fn any(&self) -> bool {
        self.data.iter().any(|v| *v)
    }
}

/// Tumor label codes used by [`crate::LabelVolume`].
pub mod label {
    /// Healthy tissue / background.
    pub const BACKGROUND: u8 = 0;
    /// Non-enhancing tumor component.
    pub const NC: u8 = 1;
    /// Peritumoral edema.
    pub const ED: u8 = 2;
    /// Enhancing tumor.
    pub const ET: u8 = 3;

    pub fn is_valid(v: u8) -> bool {
        v <= ET
    }
}

/// A voxel whose value falls outside the {0,1,2,3} label scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LabelViolation {
    pub index: usize,
    pub value: u8,
}

/// Maximum number of violations reported by [`validate_label_volume`].
pub const MAX_LABEL_VIOLATIONS: usize = 100;

/// Scans a label volume for out-of-scheme values. Returns an empty list when
/// the volume is valid; otherwise up to [`MAX_LABEL_VIOLATIONS`] entries in
/// flat-index order.
pub fn validate_label_volume(v: &Grid3<u8>) -> Vec<LabelViolation> {
    v.data()
        .iter()
        .enumerate()
        .filter(|(_, value)| !label::is_valid(**value))
        .take(MAX_LABEL_VIOLATIONS)
        .map(|(index, value)| LabelViolation { index, value: *value })
        .collect()
}

/// The three nested evaluation regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Whole tumor: labels {1, 2, 3}.
    Wt,
    /// Tumor core: labels {1, 3}.
    Tc,
    /// Enhancing tumor: label {3}.
    Et,
}

impl Region {
    /// Report order (matches the usual ET/TC/WT column layout).
    pub const ALL: [Region; 3] = [Region::Et, Region::Tc, Region::Wt];

    pub fn name(&self) -> &'static str {
        match self {
            Region::Wt => "WT",
            Region::Tc => "TC",
            Region::Et => "ET",
        }
    }

    /// Whether a label code belongs to this region.
    pub fn contains_label(&self, v: u8) -> bool {
        match self {
            Region::Wt => matches!(v, label::NC | label::ED | label::ET),
            Region::Tc => matches!(v, label::NC | label::ET),
            Region::Et => v == label::ET,
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Three aligned probability channels in [0,1], one per region (WT/TC/ET).
#[derive(Debug, Clone)]
pub struct ProbabilityStack {
    wt: Grid3<f32>,
    tc: Grid3<f32>,
    et: Grid3<f32>,
}

impl ProbabilityStack {
    pub fn new(wt: Grid3<f32>, tc: Grid3<f32>, et: Grid3<f32>) -> Result<Self> {
        if !(wt.same_geometry(&tc) && wt.same_geometry(&et)) {
            return Err(Error::Shape("probability channels must share dims and spacing".into()));
        }
        for (region, grid) in [(Region::Wt, &wt), (Region::Tc, &tc), (Region::Et, &et)] {
            if let Some(bad) = grid.data().iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
                return Err(Error::Range(format!(
                    "{region} channel value {bad} outside [0,1]"
                )));
            }
        }
        Ok(Self { wt, tc, et })
    }

    pub fn dims(&self) -> Dims3 {
        self.wt.dims()
    }

    pub fn spacing(&self) -> Spacing3 {
        self.wt.spacing()
    }

    pub fn channel(&self, region: Region) -> &Grid3<f32> {
        match region {
            Region::Wt => &self.wt,
            Region::Tc => &self.tc,
            Region::Et => &self.et,
        }
    }
}
