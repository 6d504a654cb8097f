//! Volumetric brain-tumor analysis toolkit.
//!
//! Provides the building blocks for evaluating glioma segmentations and
//! inpainted MRI volumes: a 3D grid data model with NIfTI-1 and raw file I/O,
//! binary-mask morphology (connected components, dilation, exact Euclidean
//! distance transform), legacy and lesion-wise DSC/HD95 metrics, label/region
//! codecs with ensemble fusion and enhancing-tumor post-processing, masked
//! image-quality metrics (MSE/PSNR/SSIM) with rank-sum model ranking and
//! paired t-tests, and gradient-checked numeric kernels for the network
//! building blocks (group normalization, axial attention, strided 3D
//! convolution, patch tokenization, sigmoid-BCE, skip fusion).
//!
//! Grid and kernel math is generic over the scalar type (`f32`/`f64` via
//! [`Real`]); the concrete aliases used by the evaluation pipeline live at
//! the crate root. All metric arithmetic runs in 64-bit floats.

pub mod checks;
pub mod error;
pub mod grid;
pub mod inpaint;
pub mod io;
pub mod kernels;
pub mod metrics;
pub mod morphology;
pub mod regions;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use grid::{Dims3, Grid3, ProbabilityStack, Region, Spacing3};
pub use scalar::Real;

/// Dense 3D image volume: 32-bit float voxels with physical spacing.
pub type Volume3 = Grid3<f32>;

/// 3D grid of discrete tumor labels (0=background, 1=NC, 2=ED, 3=ET).
pub type LabelVolume = Grid3<u8>;

/// 3D binary mask with the same dims/spacing layout as [`Volume3`].
pub type BinaryMask = Grid3<bool>;

/// 64-bit scalar field, used for distance maps and metric intermediates.
pub type ScalarField = Grid3<f64>;

/// Dense tensor over 64-bit floats, the default for kernel math.
pub type Tensor64 = kernels::Tensor<f64>;

/// Dense tensor over 32-bit floats.
pub type Tensor32 = kernels::Tensor<f32>;
