//! Desk-scale, gradient-checked numeric kernels for the architecture's
//! building blocks: group normalization, sigmoid-BCE, strided 3x3x3
//! convolution, patch tokenization, axial attention, and skip fusion.
//!
//! Every operation is generic over the scalar via [`crate::Real`]; the
//! gradient-check harness ([`grad_check`]) is the arbiter of backward-pass
//! correctness. f64 is the default instantiation.

mod attention;
mod bce;
mod conv3;
mod grad_check;
mod group_norm;
mod patchify;
mod skip_fuse;
mod tensor;

pub use attention::{
    axial_attention, axial_attention_backward, axial_attention_counted, AttentionGrads, Axis,
    AxialAttentionConfig,
};
pub use bce::{sigmoid_bce_with_logits, SigmoidBceOp};
pub use conv3::{conv3_downsample, conv3_downsample_backward, Conv3DownsampleOp};
pub use grad_check::{grad_check, DifferentiableOp, GradCheckOptions, GradCheckReport};
pub use group_norm::{group_norm, group_norm_backward, GroupNormConfig, GroupNormOp};
pub use patchify::{patchify, unpatchify};
pub use skip_fuse::{skip_fuse, SkipFuseMode};
pub use tensor::Tensor;

pub use attention::AxialAttentionOp;
