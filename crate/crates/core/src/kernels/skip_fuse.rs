//! Skip-connection fusion: elementwise addition or channel concatenation.

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipFuseMode {
    /// Elementwise sum; shapes must match exactly.
    Add,
    /// Concatenation along the channel axis (axis 0); `a`'s channels first.
    Concat,
}

pub fn skip_fuse<R: Real>(a: &Tensor<R>, b: &Tensor<R>, mode: SkipFuseMode) -> Result<Tensor<R>> {
    match mode {
        SkipFuseMode::Add => {
            if !a.same_shape(b) {
                return Err(Error::Shape(format!(
                    "add requires identical shapes, got {:?} and {:?}",
                    a.shape(),
                    b.shape()
                )));
            }
            let data = a.data().iter().zip(b.data().iter()).map(|(x, y)| *x + *y).collect();
            Tensor::new(a.shape().to_vec(), data)
        }
        SkipFuseMode::Concat => {
            if a.shape().len() != b.shape().len() || a.shape().is_empty() {
                return Err(Error::Shape(format!(
                    "concat requires equal ranks, got {:?} and {:?}",
                    a.shape(),
                    b.shape()
                )));
            }
            if a.shape()[1..] != b.shape()[1..] {
                return Err(Error::Shape(format!(
                    "concat requires identical non-channel extents, got {:?} and {:?}",
                    a.shape(),
                    b.shape()
                )));
            }
            let mut shape = a.shape().to_vec();
            shape[0] += b.shape()[0];
            let mut data = Vec::with_capacity(a.numel() + b.numel());
            data.extend_from_slice(a.data());
            data.extend_from_slice(b.data());
            Tensor::new(shape, data)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_with_zeros_is_identity_and_commutative() {
        let a = Tensor::from_fn(vec![2, 3, 3, 3], |i| (i as f64).sin());
        let zeros = Tensor::zeros(vec![2, 3, 3, 3]);
        assert_eq!(skip_fuse(&a, &zeros, SkipFuseMode::Add).unwrap().data(), a.data());

        let b = Tensor::from_fn(vec![2, 3, 3, 3], |i| (i as f64).cos());
        let ab = skip_fuse(&a, &b, SkipFuseMode::Add).unwrap();
        let ba = skip_fuse(&b, &a, SkipFuseMode::Add).unwrap();
        assert_eq!(ab.data(), ba.data());
    }

    #[test]
    fn concat_stacks_channels_in_order() {
        let a = Tensor::from_fn(vec![2, 4, 4, 4], |i| i as f64);
        let b = Tensor::from_fn(vec![3, 4, 4, 4], |i| -(i as f64));
        let c = skip_fuse(&a, &b, SkipFuseMode::Concat).unwrap();
        assert_eq!(c.shape(), &[5, 4, 4, 4]);
        assert_eq!(&c.data()[..a.numel()], a.data());
        assert_eq!(&c.data()[a.numel()..], b.data());
    }

    #[test]
    fn shape_mismatches_rejected() {
        let a = Tensor::<f64>::zeros(vec![2, 4, 4, 4]);
        let b = Tensor::<f64>::zeros(vec![2, 4, 4, 5]);
        assert!(matches!(skip_fuse(&a, &b, SkipFuseMode::Add), Err(Error::Shape(_))));
        assert!(matches!(skip_fuse(&a, &b, SkipFuseMode::Concat), Err(Error::Shape(_))));
    }
}
