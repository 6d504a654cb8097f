//! Group normalization over `[C, D, H, W]` tensors with exact analytic
//! gradients.

use serde::{Deserialize, Serialize};

use super::grad_check::DifferentiableOp;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Group count and variance stabilizer. 32 groups is the working default.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GroupNormConfig {
    pub groups: usize,
    pub eps: f64,
}

impl Default for GroupNormConfig {
    fn default() -> Self {
        Self { groups: 32, eps: 1e-5 }
    }
}

fn check_shapes<R: Real>(
    x: &Tensor<R>,
    gamma: &Tensor<R>,
    beta: &Tensor<R>,
    cfg: &GroupNormConfig,
) -> Result<(usize, usize)> {
    if x.shape().len() != 4 {
        return Err(Error::Shape(format!("group_norm expects [C,D,H,W], got {:?}", x.shape())));
    }
    let channels = x.shape()[0];
    if cfg.groups == 0 || !channels.is_multiple_of(cfg.groups) {
        return Err(Error::Config(format!(
            "channel count {channels} is not divisible by {} groups",
            cfg.groups
        )));
    }
    if gamma.shape() != [channels] || beta.shape() != [channels] {
        return Err(Error::Shape(format!(
            "gamma/beta must be [{channels}], got {:?} and {:?}",
            gamma.shape(),
            beta.shape()
        )));
    }
    let spatial = x.shape()[1] * x.shape()[2] * x.shape()[3];
    Ok((channels, spatial))
}

/// Per-group statistics: mean and 1/sqrt(var + eps).
fn group_stats<R: Real>(x: &[R], group_len: usize, groups: usize, eps: R) -> Vec<(R, R)> {
    (0..groups)
        .map(|g| {
            let chunk = &x[g * group_len..(g + 1) * group_len];
            let m = R::from_usize_lossy(group_len);
            let mean = chunk.iter().fold(R::zero(), |a, v| a + *v) / m;
            let var = chunk.iter().fold(R::zero(), |a, v| a + (*v - mean) * (*v - mean)) / m;
            (mean, (var + eps).sqrt().recip())
        })
        .collect()
}

/// y = gamma * (x - mean_g) / sqrt(var_g + eps) + beta, with statistics over
/// each group's channels and all voxels.
pub fn group_norm<R: Real>(
    x: &Tensor<R>,
    gamma: &Tensor<R>,
    beta: &Tensor<R>,
    cfg: &GroupNormConfig,
) -> Result<Tensor<R>> {
    let (channels, spatial) = check_shapes(x, gamma, beta, cfg)?;
    let group_len = (channels / cfg.groups) * spatial;
    let eps = R::from_f64_lossy(cfg.eps);
    let stats = group_stats(x.data(), group_len, cfg.groups, eps);

    let mut out = vec![R::zero(); x.numel()];
    for c in 0..channels {
        let (mean, inv_sigma) = stats[c / (channels / cfg.groups)];
        let (g, b) = (gamma.data()[c], beta.data()[c]);
        for s in 0..spatial {
            let i = c * spatial + s;
            out[i] = g * (x.data()[i] - mean) * inv_sigma + b;
        }
    }
    Tensor::new(x.shape().to_vec(), out)
}

/// Exact gradients of [`group_norm`] for x, gamma and beta given the
/// upstream gradient.
pub fn group_norm_backward<R: Real>(
    x: &Tensor<R>,
    gamma: &Tensor<R>,
    beta: &Tensor<R>,
    cfg: &GroupNormConfig,
    upstream: &Tensor<R>,
) -> Result<(Tensor<R>, Tensor<R>, Tensor<R>)> {
    let (channels, spatial) = check_shapes(x, gamma, beta, cfg)?;
    if !upstream.same_shape(x) {
        return Err(Error::Shape("upstream gradient shape must match x".into()));
    }
    let ch_per_group = channels / cfg.groups;
    let group_len = ch_per_group * spatial;
    let eps = R::from_f64_lossy(cfg.eps);
    let stats = group_stats(x.data(), group_len, cfg.groups, eps);

    let xd = x.data();
    let dy = upstream.data();
    let mut dgamma = vec![R::zero(); channels];
    let mut dbeta = vec![R::zero(); channels];
    for c in 0..channels {
        let (mean, inv_sigma) = stats[c / ch_per_group];
        for s in 0..spatial {
            let i = c * spatial + s;
            let xhat = (xd[i] - mean) * inv_sigma;
            dgamma[c] = dgamma[c] + dy[i] * xhat;
            dbeta[c] = dbeta[c] + dy[i];
        }
    }

    let mut dx = vec![R::zero(); x.numel()];
    let m = R::from_usize_lossy(group_len);
    for (g, &(mean, inv_sigma)) in stats.iter().enumerate() {
        // Sums of dxhat and dxhat * xhat over the group.
        let mut s1 = R::zero();
        let mut s2 = R::zero();
        for c in g * ch_per_group..(g + 1) * ch_per_group {
            let gm = gamma.data()[c];
            for s in 0..spatial {
                let i = c * spatial + s;
                let xhat = (xd[i] - mean) * inv_sigma;
                let dxhat = dy[i] * gm;
                s1 = s1 + dxhat;
                s2 = s2 + dxhat * xhat;
            }
        }
        for c in g * ch_per_group..(g + 1) * ch_per_group {
            let gm = gamma.data()[c];
            for s in 0..spatial {
                let i = c * spatial + s;
                let xhat = (xd[i] - mean) * inv_sigma;
                let dxhat = dy[i] * gm;
                dx[i] = (dxhat - (s1 + xhat * s2) / m) * inv_sigma;
            }
        }
    }

    Ok((
        Tensor::new(x.shape().to_vec(), dx)?,
        Tensor::new(vec![channels], dgamma)?,
        Tensor::new(vec![channels], dbeta)?,
    ))
}

/// [`DifferentiableOp`] wrapper with inputs `[x, gamma, beta]`.
#[derive(Debug, Clone)]
pub struct GroupNormOp {
    pub cfg: GroupNormConfig,
}

impl<R: Real> DifferentiableOp<R> for GroupNormOp {
    fn name(&self) -> &'static str {
        "group_norm"
    }

    fn forward(&self, inputs: &[Tensor<R>]) -> Result<Tensor<R>> {
        group_norm(&inputs[0], &inputs[1], &inputs[2], &self.cfg)
    }

    fn backward(&self, inputs: &[Tensor<R>], upstream: &Tensor<R>) -> Result<Vec<Option<Tensor<R>>>> {
        let (dx, dgamma, dbeta) =
            group_norm_backward(&inputs[0], &inputs[1], &inputs[2], &self.cfg, upstream)?;
        Ok(vec![Some(dx), Some(dgamma), Some(dbeta)])
    }
}
