//! Central-difference gradient checking for the kernel operations.

use serde::Serialize;

use super::tensor::Tensor;
use crate::error::Result;
use crate::scalar::Real;

/// An operation with a forward pass and an exact analytic backward pass.
/// Inputs that are not differentiated (e.g. BCE targets) return `None` from
/// `backward`.
pub trait DifferentiableOp<R: Real> {
    fn name(&self) -> &'static str;
    fn forward(&self, inputs: &[Tensor<R>]) -> Result<Tensor<R>>;
    fn backward(&self, inputs: &[Tensor<R>], upstream: &Tensor<R>) -> Result<Vec<Option<Tensor<R>>>>;
}

/// Step size and tolerance for [`grad_check`].
#[derive(Debug, Clone, Copy)]
pub struct GradCheckOptions {
    /// Central-difference step.
    pub h: f64,
    /// Relative tolerance on `|numeric - analytic| / max(1, |analytic|)`.
    pub tol: f64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self { h: 1e-4, tol: 1e-5 }
    }
}

/// Outcome of one gradient check, serializable to JSON.
#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub op: String,
    pub shapes: Vec<Vec<usize>>,
    pub h: f64,
    pub tol: f64,
    pub max_rel_err: f64,
    pub pass: bool,
}

/// Deterministic unit-scale probe direction, so the scalar projection
/// `L = <forward(x), G>` exercises every output element.
fn probe<R: Real>(shape: &[usize], numel: usize) -> Tensor<R> {
    let _ = shape;
    Tensor::from_fn(shape.to_vec(), |i| {
        let h = (i as u64).wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(numel as u64);
        R::from_f64_lossy(((h >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0)
    })
}

/// Compares the analytic backward pass of `op` against central differences
/// of the scalar projection `<forward, probe>` at every differentiable input
/// element. The error metric is `max |numeric - analytic| / max(1,
/// |analytic|)` over all elements.
pub fn grad_check<R: Real>(
    op: &dyn DifferentiableOp<R>,
    inputs: &[Tensor<R>],
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    let y0 = op.forward(inputs)?;
    let g = probe::<R>(y0.shape(), y0.numel());
    let analytic = op.backward(inputs, &g)?;
    let h = R::from_f64_lossy(opts.h);

    let mut max_rel = 0.0f64;
    for (input_idx, grad) in analytic.iter().enumerate() {
        let Some(grad) = grad else { continue };
        for e in 0..inputs[input_idx].numel() {
            let mut shifted: Vec<Tensor<R>> = inputs.to_vec();
            let mut plus = inputs[input_idx].data().to_vec();
            plus[e] = plus[e] + h;
            shifted[input_idx] = Tensor::new(inputs[input_idx].shape().to_vec(), plus)?;
            let lp = op.forward(&shifted)?.dot(&g);

            let mut minus = inputs[input_idx].data().to_vec();
            minus[e] = minus[e] - h;
            shifted[input_idx] = Tensor::new(inputs[input_idx].shape().to_vec(), minus)?;
            let lm = op.forward(&shifted)?.dot(&g);

            let numeric = (lp - lm).to_f64_lossy() / (2.0 * opts.h);
            let ana = grad.data()[e].to_f64_lossy();
            let rel = (numeric - ana).abs() / ana.abs().max(1.0);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }

    Ok(GradCheckReport {
        op: op.name().to_string(),
        shapes: inputs.iter().map(|t| t.shape().to_vec()).collect(),
        h: opts.h,
        tol: opts.tol,
        max_rel_err: max_rel,
        pass: max_rel <= opts.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Result;

    /// y = 3x, whose derivative is exact.
    struct ScaleOp;

    impl DifferentiableOp<f64> for ScaleOp {
        fn name(&self) -> &'static str {
            "scale3"
        }

        fn forward(&self, inputs: &[Tensor<f64>]) -> Result<Tensor<f64>> {
            let data = inputs[0].data().iter().map(|v| 3.0 * v).collect();
            Tensor::new(inputs[0].shape().to_vec(), data)
        }

        fn backward(
            &self,
            inputs: &[Tensor<f64>],
            upstream: &Tensor<f64>,
        ) -> Result<Vec<Option<Tensor<f64>>>> {
            let data = upstream.data().iter().map(|v| 3.0 * v).collect();
            Ok(vec![Some(Tensor::new(inputs[0].shape().to_vec(), data)?)])
        }
    }

    /// ScaleOp with its gradient corrupted by 1%.
    struct CorruptScaleOp;

    impl DifferentiableOp<f64> for CorruptScaleOp {
        fn name(&self) -> &'static str {
            "scale3_corrupt"
        }

        fn forward(&self, inputs: &[Tensor<f64>]) -> Result<Tensor<f64>> {
            ScaleOp.forward(inputs)
        }

        fn backward(
            &self,
            inputs: &[Tensor<f64>],
            upstream: &Tensor<f64>,
        ) -> Result<Vec<Option<Tensor<f64>>>> {
            let grads = ScaleOp.backward(inputs, upstream)?;
            Ok(grads
                .into_iter()
                .map(|g| {
                    g.map(|t| {
                        let data = t.data().iter().map(|v| v * 1.01).collect();
                        Tensor::new(t.shape().to_vec(), data).unwrap()
                    })
                })
                .collect())
        }
    }

    #[test]
    fn linear_map_passes_tightly() {
        let x = Tensor::from_fn(vec![2, 3], |i| i as f64 * 0.3 - 1.0);
        let report = grad_check(&ScaleOp, &[x], &GradCheckOptions::default()).unwrap();
        assert!(report.pass);
        assert!(report.max_rel_err < 1e-10, "max_rel_err = {}", report.max_rel_err);
    }

    #[test]
    fn corrupted_backward_fails() {
        let x = Tensor::from_fn(vec![4], |i| i as f64 + 1.0);
        let report = grad_check(&CorruptScaleOp, &[x], &GradCheckOptions::default()).unwrap();
        assert!(!report.pass);
        assert_eq!(report.op, "scale3_corrupt");
    }

    #[test]
    fn report_serializes_expected_fields() {
        let x = Tensor::from_fn(vec![2], |i| i as f64);
        let report = grad_check(&ScaleOp, &[x], &GradCheckOptions::default()).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in ["op", "shapes", "h", "tol", "max_rel_err", "pass"] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
    }
}
