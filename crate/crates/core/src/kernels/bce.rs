//! Numerically stable sigmoid + binary cross-entropy on logits.

use super::grad_check::DifferentiableOp;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Mean binary cross-entropy over logits, with the gradient w.r.t. the
/// logits. Uses the overflow-free form
/// `max(z,0) - z*t + ln(1 + exp(-|z|))`; the gradient is
/// `(sigmoid(z) - t) / N`.
pub fn sigmoid_bce_with_logits<R: Real>(
    logits: &Tensor<R>,
    targets: &Tensor<R>,
) -> Result<(R, Tensor<R>)> {
    if !logits.same_shape(targets) {
        return Err(Error::Shape(format!(
            "logits shape {:?} differs from targets {:?}",
            logits.shape(),
            targets.shape()
        )));
    }
    if targets.data().iter().any(|t| *t < R::zero() || *t > R::one()) {
        return Err(Error::Range("targets must lie in [0,1]".into()));
    }
    let n = R::from_usize_lossy(logits.numel());
    let mut loss = R::zero();
    let mut grad = vec![R::zero(); logits.numel()];
    for (i, (&z, &t)) in logits.data().iter().zip(targets.data().iter()).enumerate() {
        loss = loss + z.max(R::zero()) - z * t + (R::one() + (-z.abs()).exp()).ln();
        let sig = R::one() / (R::one() + (-z).exp());
        grad[i] = (sig - t) / n;
    }
    Ok((loss / n, Tensor::new(logits.shape().to_vec(), grad)?))
}

/// [`DifferentiableOp`] wrapper with inputs `[logits, targets]`; the loss is
/// exposed as a one-element tensor and targets are not differentiated.
#[derive(Debug, Clone, Copy)]
pub struct SigmoidBceOp;

impl<R: Real> DifferentiableOp<R> for SigmoidBceOp {
    fn name(&self) -> &'static str {
        "sigmoid_bce_with_logits"
    }

    fn forward(&self, inputs: &[Tensor<R>]) -> Result<Tensor<R>> {
        let (loss, _) = sigmoid_bce_with_logits(&inputs[0], &inputs[1])?;
        Ok(Tensor::scalar(loss))
    }

    fn backward(&self, inputs: &[Tensor<R>], upstream: &Tensor<R>) -> Result<Vec<Option<Tensor<R>>>> {
        let (_, grad) = sigmoid_bce_with_logits(&inputs[0], &inputs[1])?;
        let g = upstream.data()[0];
        let scaled: Vec<R> = grad.data().iter().map(|v| *v * g).collect();
        Ok(vec![Some(Tensor::new(grad.shape().to_vec(), scaled)?), None])
    }
}
