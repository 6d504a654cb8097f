//! Dense row-major tensor, the carrier for all kernel math.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Flat row-major tensor of scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<R> {
    shape: Vec<usize>,
    data: Vec<R>,
}

impl<R: Real> Tensor<R> {
    /// Builds a tensor, checking length and finiteness.
    pub fn new(shape: Vec<usize>, data: Vec<R>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if shape.contains(&0) {
            return Err(Error::Shape(format!("zero-sized dimension in shape {shape:?}")));
        }
        if data.len() != numel {
            return Err(Error::Shape(format!(
                "data length {} does not match shape {:?} (expected {numel})",
                data.len(),
                shape
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Range("tensor holds a non-finite value".into()));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel = shape.iter().product();
        Self { shape, data: vec![R::zero(); numel] }
    }

    /// Scalar wrapped as a rank-1 tensor of length one.
    pub fn scalar(value: R) -> Self {
        Self { shape: vec![1], data: vec![value] }
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(usize) -> R) -> Self {
        let numel: usize = shape.iter().product();
        let data = (0..numel).map(&mut f).collect();
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[R] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [R] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<R> {
        self.data
    }

    /// Flat offset of a 4D index `[a, b, c, d]`.
    pub fn idx4(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        debug_assert_eq!(self.shape.len(), 4);
        ((a * self.shape[1] + b) * self.shape[2] + c) * self.shape[3] + d
    }

    /// Flat offset of a 5D index.
    pub fn idx5(&self, a: usize, b: usize, c: usize, d: usize, e: usize) -> usize {
        debug_assert_eq!(self.shape.len(), 5);
        (((a * self.shape[1] + b) * self.shape[2] + c) * self.shape[3] + d) * self.shape[4] + e
    }

    /// Elementwise sum of squared differences, for test assertions.
    pub fn sq_distance(&self, other: &Tensor<R>) -> R {
        debug_assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(R::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b))
    }

    /// Inner product with an equally-shaped tensor.
    pub fn dot(&self, other: &Tensor<R>) -> R {
        debug_assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(R::zero(), |acc, (a, b)| acc + *a * *b)
    }

    pub fn same_shape(&self, other: &Tensor<R>) -> bool {
        self.shape == other.shape
    }
}
