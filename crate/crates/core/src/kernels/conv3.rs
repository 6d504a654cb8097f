//! 3x3x3 downsampling convolution (stride 2, zero padding 1), as direct
//! cross-correlation with exact input and kernel gradients.

use super::grad_check::DifferentiableOp;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

const K: usize = 3;
const STRIDE: usize = 2;
const PAD: i64 = 1;

fn check_shapes<R: Real>(x: &Tensor<R>, kernel: &Tensor<R>) -> Result<()> {
    if x.shape().len() != 4 {
        return Err(Error::Shape(format!("input must be [Cin,D,H,W], got {:?}", x.shape())));
    }
    if kernel.shape().len() != 5 || kernel.shape()[2..] != [K, K, K] {
        return Err(Error::Shape(format!(
            "kernel must be [Cout,Cin,3,3,3], got {:?}",
            kernel.shape()
        )));
    }
    if kernel.shape()[1] != x.shape()[0] {
        return Err(Error::Shape(format!(
            "kernel Cin {} does not match input channels {}",
            kernel.shape()[1],
            x.shape()[0]
        )));
    }
    Ok(())
}

fn out_extent(n: usize) -> usize {
    n.div_ceil(STRIDE)
}

/// Cross-correlation with stride 2 and zero padding 1; output spatial
/// extents are the ceilinged halves of the input's.
pub fn conv3_downsample<R: Real>(x: &Tensor<R>, kernel: &Tensor<R>) -> Result<Tensor<R>> {
    check_shapes(x, kernel)?;
    let (cin, d, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
    let cout = kernel.shape()[0];
    let (od_n, oh_n, ow_n) = (out_extent(d), out_extent(h), out_extent(w));
    let mut out = Tensor::zeros(vec![cout, od_n, oh_n, ow_n]);

    for co in 0..cout {
        for od in 0..od_n {
            for oh in 0..oh_n {
                for ow in 0..ow_n {
                    let mut acc = R::zero();
                    for ci in 0..cin {
                        for kd in 0..K {
                            let iz = (od * STRIDE + kd) as i64 - PAD;
                            if iz < 0 || iz >= d as i64 {
                                continue;
                            }
                            for kh in 0..K {
                                let iy = (oh * STRIDE + kh) as i64 - PAD;
                                if iy < 0 || iy >= h as i64 {
                                    continue;
                                }
                                for kw in 0..K {
                                    let ix = (ow * STRIDE + kw) as i64 - PAD;
                                    if ix < 0 || ix >= w as i64 {
                                        continue;
                                    }
                                    let xi = x.idx4(ci, iz as usize, iy as usize, ix as usize);
                                    let ki = kernel.idx5(co, ci, kd, kh, kw);
                                    acc = acc + x.data()[xi] * kernel.data()[ki];
                                }
                            }
                        }
                    }
                    let oi = out.idx4(co, od, oh, ow);
                    out.data_mut()[oi] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Exact gradients for input and kernel given the upstream gradient.
pub fn conv3_downsample_backward<R: Real>(
    x: &Tensor<R>,
    kernel: &Tensor<R>,
    upstream: &Tensor<R>,
) -> Result<(Tensor<R>, Tensor<R>)> {
    check_shapes(x, kernel)?;
    let (cin, d, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
    let cout = kernel.shape()[0];
    let (od_n, oh_n, ow_n) = (out_extent(d), out_extent(h), out_extent(w));
    if upstream.shape() != [cout, od_n, oh_n, ow_n] {
        return Err(Error::Shape(format!(
            "upstream shape {:?} does not match output [{cout},{od_n},{oh_n},{ow_n}]",
            upstream.shape()
        )));
    }

    let mut dx = Tensor::zeros(x.shape().to_vec());
    let mut dk = Tensor::zeros(kernel.shape().to_vec());

    for co in 0..cout {
        for od in 0..od_n {
            for oh in 0..oh_n {
                for ow in 0..ow_n {
                    let g = upstream.data()[upstream.idx4(co, od, oh, ow)];
                    for ci in 0..cin {
                        for kd in 0..K {
                            let iz = (od * STRIDE + kd) as i64 - PAD;
                            if iz < 0 || iz >= d as i64 {
                                continue;
                            }
                            for kh in 0..K {
                                let iy = (oh * STRIDE + kh) as i64 - PAD;
                                if iy < 0 || iy >= h as i64 {
                                    continue;
                                }
                                for kw in 0..K {
                                    let ix = (ow * STRIDE + kw) as i64 - PAD;
                                    if ix < 0 || ix >= w as i64 {
                                        continue;
                                    }
                                    let xi = x.idx4(ci, iz as usize, iy as usize, ix as usize);
                                    let ki = kernel.idx5(co, ci, kd, kh, kw);
                                    dx.data_mut()[xi] = dx.data()[xi] + g * kernel.data()[ki];
                                    dk.data_mut()[ki] = dk.data()[ki] + g * x.data()[xi];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((dx, dk))
}

/// [`DifferentiableOp`] wrapper with inputs `[x, kernel]`.
#[derive(Debug, Clone, Copy)]
pub struct Conv3DownsampleOp;

impl<R: Real> DifferentiableOp<R> for Conv3DownsampleOp {
    fn name(&self) -> &'static str {
        "conv3_downsample"
    }

    fn forward(&self, inputs: &[Tensor<R>]) -> Result<Tensor<R>> {
        conv3_downsample(&inputs[0], &inputs[1])
    }

    fn backward(&self, inputs: &[Tensor<R>], upstream: &Tensor<R>) -> Result<Vec<Option<Tensor<R>>>> {
        let (dx, dk) = conv3_downsample_backward(&inputs[0], &inputs[1], upstream)?;
        Ok(vec![Some(dx), Some(dk)])
    }
}
