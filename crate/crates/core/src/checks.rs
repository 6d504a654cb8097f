//! Runtime verification suites: finite-difference gradient checks for the
//! kernels and brute-force oracle comparisons for the metrics.
//!
//! The [`reference`] submodule holds independent exhaustive implementations
//! (triple-loop dice, all-pairs HD95, all-pairs distance transform). They
//! share no code with the production paths they check.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::grid::{Dims3, Grid3, Spacing3};
use crate::kernels::{
    axial_attention, axial_attention_counted, grad_check, group_norm, patchify, unpatchify,
    AxialAttentionConfig, AxialAttentionOp, Axis, Conv3DownsampleOp, DifferentiableOp,
    GradCheckOptions, GroupNormConfig, GroupNormOp, SigmoidBceOp, Tensor,
};
use crate::metrics::{dice, hd95};
use crate::morphology::distance_transform;
use crate::BinaryMask;

/// Independent brute-force oracles.
pub mod reference {
    use crate::grid::Dims3;
    use crate::BinaryMask;

    fn spacing_distance(dims: Dims3, sp: [f64; 3], i: usize, j: usize) -> f64 {
        let (az, ay, ax) = dims.coords(i);
        let (bz, by, bx) = dims.coords(j);
        let dz = (az as f64 - bz as f64) * sp[0];
        let dy = (ay as f64 - by as f64) * sp[1];
        let dx = (ax as f64 - bx as f64) * sp[2];
        (dz * dz + dy * dy + dx * dx).sqrt()
    }

    /// Dice by direct voxel counting.
    pub fn dice_brute(a: &BinaryMask, b: &BinaryMask) -> f64 {
        let mut inter = 0u64;
        let mut na = 0u64;
        let mut nb = 0u64;
        for (x, y) in a.data().iter().zip(b.data().iter()) {
            if *x {
                na += 1;
            }
            if *y {
                nb += 1;
            }
            if *x && *y {
                inter += 1;
            }
        }
        if na + nb == 0 {
            return 1.0;
        }
        2.0 * inter as f64 / (na + nb) as f64
    }

    /// Surface voxels by the 6-neighbor exposure rule, written out directly.
    fn surface(mask: &BinaryMask) -> Vec<usize> {
        let dims = mask.dims();
        let mut out = Vec::new();
        for (i, v) in mask.data().iter().enumerate() {
            if !v {
                continue;
            }
            let (z, y, x) = dims.coords(i);
            let mut exposed = false;
            for (dz, dy, dx) in [(-1i64, 0i64, 0i64), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1)]
            {
                let (nz, ny, nx) = (z as i64 + dz, y as i64 + dy, x as i64 + dx);
                if !dims.contains(nz, ny, nx)
                    || !mask.data()[dims.index(nz as usize, ny as usize, nx as usize)]
                {
                    exposed = true;
                    break;
                }
            }
            if exposed {
                out.push(i);
            }
        }
        out
    }

    /// HD95 by all-pairs surface distances and an explicit nearest-rank pick.
    pub fn hd95_brute(a: &BinaryMask, b: &BinaryMask) -> f64 {
        let dims = a.dims();
        let sp = a.spacing().as_array();
        let sa = surface(a);
        let sb = surface(b);
        let mut pooled = Vec::with_capacity(sa.len() + sb.len());
        for &i in &sa {
            pooled.push(
                sb.iter()
                    .map(|&j| spacing_distance(dims, sp, i, j))
                    .fold(f64::INFINITY, f64::min),
            );
        }
        for &j in &sb {
            pooled.push(
                sa.iter()
                    .map(|&i| spacing_distance(dims, sp, i, j))
                    .fold(f64::INFINITY, f64::min),
            );
        }
        pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let n = pooled.len();
        let idx = (0.95 * n as f64).ceil() as usize - 1;
        pooled[idx]
    }

    /// Distance transform by scanning every seed for every voxel.
    pub fn distance_transform_brute(mask: &BinaryMask) -> Vec<f64> {
        let dims = mask.dims();
        let sp = mask.spacing().as_array();
        let seeds = mask.true_indices();
        (0..dims.len())
            .map(|i| {
                seeds
                    .iter()
                    .map(|&s| spacing_distance(dims, sp, i, s))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }
}

/// Wraps an op and corrupts its analytic gradients by a constant factor;
/// used to prove that the gradient checker actually rejects wrong backward
/// passes.
pub struct ScaledBackwardOp<O> {
    pub inner: O,
    pub factor: f64,
}

impl<O: DifferentiableOp<f64>> DifferentiableOp<f64> for ScaledBackwardOp<O> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn forward(&self, inputs: &[Tensor<f64>]) -> Result<Tensor<f64>> {
        self.inner.forward(inputs)
    }

    fn backward(&self, inputs: &[Tensor<f64>], upstream: &Tensor<f64>) -> Result<Vec<Option<Tensor<f64>>>> {
        let grads = self.inner.backward(inputs, upstream)?;
        Ok(grads
            .into_iter()
            .map(|g| {
                g.map(|t| {
                    let data = t.data().iter().map(|v| v * self.factor).collect();
                    Tensor::new(t.shape().to_vec(), data).expect("scaling preserves shape")
                })
            })
            .collect())
    }
}

/// Which verification suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Kernels,
    Metrics,
    All,
}

/// Deliberate fault for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultInjection {
    /// Scale every analytic gradient by 1.01.
    ScaledGradient,
}

/// One verification step.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: serde_json::Value,
}

/// Outcome of a verification run.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub pass: bool,
    pub results: Vec<CheckResult>,
}

fn rand_tensor(rng: &mut ChaCha8Rng, shape: Vec<usize>, scale: f64) -> Tensor<f64> {
    let numel = shape.iter().product();
    let data = (0..numel).map(|_| rng.gen_range(-scale..scale)).collect();
    Tensor::new(shape, data).expect("random tensor is finite")
}

fn grad_result(report: crate::kernels::GradCheckReport, name: String) -> CheckResult {
    CheckResult {
        pass: report.pass,
        detail: serde_json::to_value(&report).expect("report serializes"),
        name,
    }
}

fn gn_inputs(rng: &mut ChaCha8Rng, channels: usize, spatial: [usize; 3]) -> Vec<Tensor<f64>> {
    vec![
        rand_tensor(rng, vec![channels, spatial[0], spatial[1], spatial[2]], 2.0),
        rand_tensor(rng, vec![channels], 1.0),
        rand_tensor(rng, vec![channels], 1.0),
    ]
}

fn kernel_grad_checks(results: &mut Vec<CheckResult>, fault: Option<FaultInjection>) {
    let opts = GradCheckOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);

    // group_norm across five (channels, groups, spatial) combinations,
    // including the 64-channel/32-group configuration.
    let gn_shapes: [(usize, usize, [usize; 3]); 5] = [
        (4, 2, [2, 3, 2]),
        (6, 3, [3, 2, 2]),
        (8, 4, [2, 2, 3]),
        (64, 32, [4, 4, 4]),
        (2, 1, [3, 3, 3]),
    ];
    for (channels, groups, spatial) in gn_shapes {
        let op = GroupNormOp { cfg: GroupNormConfig { groups, eps: 1e-5 } };
        let inputs = gn_inputs(&mut rng, channels, spatial);
        let name = format!("grad/group_norm/c{channels}g{groups}");
        let report = match fault {
            Some(FaultInjection::ScaledGradient) => {
                grad_check(&ScaledBackwardOp { inner: op, factor: 1.01 }, &inputs, &opts)
            }
            None => grad_check(&op, &inputs, &opts),
        };
        match report {
            Ok(r) => results.push(grad_result(r, name)),
            Err(e) => results.push(CheckResult {
                name,
                pass: false,
                detail: serde_json::json!({ "error": e.to_string() }),
            }),
        }
    }

    // sigmoid BCE: logits free, targets random in [0,1].
    let bce_shapes: [Vec<usize>; 5] =
        [vec![6], vec![2, 5], vec![3, 2, 2], vec![1, 4, 4], vec![2, 2, 2, 2]];
    for shape in bce_shapes {
        let logits = rand_tensor(&mut rng, shape.clone(), 3.0);
        let numel: usize = shape.iter().product();
        let targets = Tensor::new(
            shape.clone(),
            (0..numel).map(|_| rng.gen_range(0.0..=1.0)).collect(),
        )
        .expect("targets in range");
        let name = format!("grad/sigmoid_bce/{shape:?}");
        match grad_check(&SigmoidBceOp, &[logits, targets], &opts) {
            Ok(r) => results.push(grad_result(r, name)),
            Err(e) => results.push(CheckResult {
                name,
                pass: false,
                detail: serde_json::json!({ "error": e.to_string() }),
            }),
        }
    }

    // conv3 downsample: odd and even extents, multiple channel counts.
    let conv_shapes: [(usize, usize, [usize; 3]); 5] = [
        (1, 1, [3, 3, 3]),
        (2, 1, [4, 3, 2]),
        (1, 2, [5, 2, 3]),
        (2, 2, [4, 4, 4]),
        (3, 2, [2, 5, 3]),
    ];
    for (cin, cout, sp) in conv_shapes {
        let x = rand_tensor(&mut rng, vec![cin, sp[0], sp[1], sp[2]], 1.0);
        let k = rand_tensor(&mut rng, vec![cout, cin, 3, 3, 3], 1.0);
        let name = format!("grad/conv3_downsample/cin{cin}cout{cout}");
        match grad_check(&Conv3DownsampleOp, &[x, k], &opts) {
            Ok(r) => results.push(grad_result(r, name)),
            Err(e) => results.push(CheckResult {
                name,
                pass: false,
                detail: serde_json::json!({ "error": e.to_string() }),
            }),
        }
    }

    // axial attention along each axis, with and without position embeddings.
    let attn_cases: [(Axis, usize, usize, usize, [usize; 3], bool); 5] = [
        (Axis::Width, 1, 2, 3, [2, 2, 4], false),
        (Axis::Height, 2, 2, 4, [2, 3, 2], false),
        (Axis::Depth, 2, 3, 4, [4, 2, 2], true),
        (Axis::Width, 2, 2, 8, [1, 2, 4], true),
        (Axis::Depth, 1, 4, 6, [3, 2, 2], false),
    ];
    for (axis, heads, head_dim, channels, sp, with_pos) in attn_cases {
        let cfg = AxialAttentionConfig { axis, heads, head_dim };
        let p = cfg.proj_dim();
        let mut inputs = vec![
            rand_tensor(&mut rng, vec![channels, sp[0], sp[1], sp[2]], 1.0),
            rand_tensor(&mut rng, vec![p, channels], 0.7),
            rand_tensor(&mut rng, vec![p, channels], 0.7),
            rand_tensor(&mut rng, vec![p, channels], 0.7),
            rand_tensor(&mut rng, vec![channels, p], 0.7),
        ];
        if with_pos {
            let line_len = match axis {
                Axis::Depth => sp[0],
                Axis::Height => sp[1],
                Axis::Width => sp[2],
            };
            inputs.push(rand_tensor(&mut rng, vec![line_len, channels], 0.5));
        }
        let op = AxialAttentionOp { cfg, has_pos: with_pos };
        let name = format!("grad/axial_attention/{axis:?}h{heads}d{head_dim}pos{with_pos}");
        match grad_check(&op, &inputs, &opts) {
            Ok(r) => results.push(grad_result(r, name)),
            Err(e) => results.push(CheckResult {
                name,
                pass: false,
                detail: serde_json::json!({ "error": e.to_string() }),
            }),
        }
    }
}

fn kernel_closed_form_checks(results: &mut Vec<CheckResult>) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);

    // Group-norm output statistics pre-affine, eps effect accounted.
    {
        let channels = 64;
        let cfg = GroupNormConfig { groups: 32, eps: 1e-5 };
        let x = rand_tensor(&mut rng, vec![channels, 4, 4, 4], 2.0);
        let gamma = Tensor::new(vec![channels], vec![1.0; channels]).unwrap();
        let beta = Tensor::new(vec![channels], vec![0.0; channels]).unwrap();
        let y = group_norm(&x, &gamma, &beta, &cfg).unwrap();
        let group_len = (channels / cfg.groups) * 64;
        let mut max_mean = 0.0f64;
        let mut max_var_err = 0.0f64;
        for g in 0..cfg.groups {
            let chunk = &y.data()[g * group_len..(g + 1) * group_len];
            let m = group_len as f64;
            let mean = chunk.iter().sum::<f64>() / m;
            let var = chunk.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
            let xin = &x.data()[g * group_len..(g + 1) * group_len];
            let xmean = xin.iter().sum::<f64>() / m;
            let xvar = xin.iter().map(|v| (v - xmean) * (v - xmean)).sum::<f64>() / m;
            max_mean = max_mean.max(mean.abs());
            max_var_err = max_var_err.max((var * (xvar + cfg.eps) / xvar - 1.0).abs());
        }
        results.push(CheckResult {
            name: "closed_form/group_norm_statistics".into(),
            pass: max_mean < 1e-10 && max_var_err < 1e-8,
            detail: serde_json::json!({ "max_abs_mean": max_mean, "max_var_err": max_var_err }),
        });
    }

    // Attention over a length-1 axis equals the value pathway.
    {
        let cfg = AxialAttentionConfig { axis: Axis::Depth, heads: 2, head_dim: 3 };
        let c = 5;
        let p = cfg.proj_dim();
        let x = rand_tensor(&mut rng, vec![c, 1, 3, 2], 1.0);
        let wq = rand_tensor(&mut rng, vec![p, c], 0.7);
        let wk = rand_tensor(&mut rng, vec![p, c], 0.7);
        let wv = rand_tensor(&mut rng, vec![p, c], 0.7);
        let wo = rand_tensor(&mut rng, vec![c, p], 0.7);
        let y = axial_attention(&x, &wq, &wk, &wv, &wo, None, &cfg).unwrap();
        let volume = 6;
        let mut max_err = 0.0f64;
        for s in 0..volume {
            for ci in 0..c {
                let mut want = 0.0;
                for pi in 0..p {
                    let mut vproj = 0.0;
                    for cj in 0..c {
                        vproj += x.data()[cj * volume + s] * wv.data()[pi * c + cj];
                    }
                    want += vproj * wo.data()[ci * p + pi];
                }
                max_err = max_err.max((y.data()[ci * volume + s] - want).abs());
            }
        }
        results.push(CheckResult {
            name: "closed_form/attention_extent_one_value_pathway".into(),
            pass: max_err < 1e-12,
            detail: serde_json::json!({ "max_abs_err": max_err }),
        });
    }

    // Locality: editing another line leaves a line bit-identical.
    {
        let cfg = AxialAttentionConfig { axis: Axis::Width, heads: 1, head_dim: 4 };
        let c = 3;
        let p = cfg.proj_dim();
        let x = rand_tensor(&mut rng, vec![c, 2, 2, 5], 1.0);
        let wq = rand_tensor(&mut rng, vec![p, c], 0.7);
        let wk = rand_tensor(&mut rng, vec![p, c], 0.7);
        let wv = rand_tensor(&mut rng, vec![p, c], 0.7);
        let wo = rand_tensor(&mut rng, vec![c, p], 0.7);
        let y = axial_attention(&x, &wq, &wk, &wv, &wo, None, &cfg).unwrap();
        let volume = 20;
        let mut data = x.data().to_vec();
        data[(2 * 2 + 1) * 5 + 3] += 5.0; // last line of channel 0
        let x2 = Tensor::new(x.shape().to_vec(), data).unwrap();
        let y2 = axial_attention(&x2, &wq, &wk, &wv, &wo, None, &cfg).unwrap();
        let mut identical = true;
        for ci in 0..c {
            for l in 0..5 {
                let idx = ci * volume + l; // first line (z=0, y=0)
                identical &= y.data()[idx].to_bits() == y2.data()[idx].to_bits();
            }
        }
        results.push(CheckResult {
            name: "closed_form/attention_locality_bit_exact".into(),
            pass: identical,
            detail: serde_json::json!({ "identical": identical }),
        });
    }

    // Doubling a non-attended axis exactly doubles the multiply count.
    {
        let cfg = AxialAttentionConfig { axis: Axis::Width, heads: 2, head_dim: 2 };
        let c = 3;
        let p = cfg.proj_dim();
        let wq = rand_tensor(&mut rng, vec![p, c], 0.7);
        let wk = rand_tensor(&mut rng, vec![p, c], 0.7);
        let wv = rand_tensor(&mut rng, vec![p, c], 0.7);
        let wo = rand_tensor(&mut rng, vec![c, p], 0.7);
        let x1 = rand_tensor(&mut rng, vec![c, 2, 3, 4], 1.0);
        let x2 = rand_tensor(&mut rng, vec![c, 4, 3, 4], 1.0);
        let (_, m1) = axial_attention_counted(&x1, &wq, &wk, &wv, &wo, None, &cfg).unwrap();
        let (_, m2) = axial_attention_counted(&x2, &wq, &wk, &wv, &wo, None, &cfg).unwrap();
        results.push(CheckResult {
            name: "closed_form/attention_linear_scaling".into(),
            pass: m2 == 2 * m1,
            detail: serde_json::json!({ "muls_base": m1, "muls_doubled_axis": m2 }),
        });
    }

    // Patchify round-trip is bit-exact.
    {
        let x = rand_tensor(&mut rng, vec![3, 4, 6, 2], 1.0);
        let tokens = patchify(&x, 2).unwrap();
        let back = unpatchify(&tokens, 3, (4, 6, 2), 2).unwrap();
        let pass = back.data() == x.data();
        results.push(CheckResult {
            name: "closed_form/patchify_roundtrip_bit_exact".into(),
            pass,
            detail: serde_json::json!({ "tokens": tokens.shape() }),
        });
    }
}

/// Random blob-like mask: a union of one to three balls.
fn random_blob_mask(rng: &mut ChaCha8Rng, dims: Dims3, spacing: Spacing3) -> BinaryMask {
    let mut data = vec![false; dims.len()];
    let balls = rng.gen_range(1..=3);
    for _ in 0..balls {
        let cz = rng.gen_range(0..dims.depth) as i64;
        let cy = rng.gen_range(0..dims.height) as i64;
        let cx = rng.gen_range(0..dims.width) as i64;
        let r = rng.gen_range(1..=4) as i64;
        for dz in -r..=r {
            for dy in -r..=r {
                for dx in -r..=r {
                    if dz * dz + dy * dy + dx * dx > r * r {
                        continue;
                    }
                    let (z, y, x) = (cz + dz, cy + dy, cx + dx);
                    if dims.contains(z, y, x) {
                        data[dims.index(z as usize, y as usize, x as usize)] = true;
                    }
                }
            }
        }
    }
    Grid3::new(dims, spacing, data).expect("geometry is fixed")
}

/// A pair of related nonempty masks on a random geometry.
fn random_mask_pair(rng: &mut ChaCha8Rng) -> (BinaryMask, BinaryMask) {
    let dims = Dims3::new(16, 16, 16);
    let spacing = if rng.gen_bool(0.5) {
        Spacing3::unit()
    } else {
        Spacing3::new(
            rng.gen_range(1..=3) as f64 * 0.5,
            rng.gen_range(1..=3) as f64 * 0.5,
            rng.gen_range(1..=3) as f64 * 0.5,
        )
    };
    let gt = random_blob_mask(rng, dims, spacing);
    let pred = if rng.gen_bool(0.5) {
        // Perturbed copy: shift the ground truth by a small offset.
        let (sz, sy, sx) = (
            rng.gen_range(-2i64..=2),
            rng.gen_range(-2i64..=2),
            rng.gen_range(-2i64..=2),
        );
        let mut data = vec![false; dims.len()];
        for i in gt.true_indices() {
            let (z, y, x) = dims.coords(i);
            let (nz, ny, nx) = (z as i64 + sz, y as i64 + sy, x as i64 + sx);
            if dims.contains(nz, ny, nx) {
                data[dims.index(nz as usize, ny as usize, nx as usize)] = true;
            }
        }
        if data.iter().any(|v| *v) {
            Grid3::new(dims, spacing, data).unwrap()
        } else {
            random_blob_mask(rng, dims, spacing)
        }
    } else {
        random_blob_mask(rng, dims, spacing)
    };
    (pred, gt)
}

/// Dice and HD95 against the brute-force oracles on randomized 16^3 pairs.
pub fn metric_oracle_comparison(pairs: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut max_dice_diff = 0.0f64;
    let mut max_hd_diff = 0.0f64;
    for _ in 0..pairs {
        let (pred, gt) = random_mask_pair(&mut rng);
        let d = dice(&pred, &gt).unwrap();
        let d_ref = reference::dice_brute(&pred, &gt);
        max_dice_diff = max_dice_diff.max((d - d_ref).abs());
        let h = hd95(&pred, &gt).unwrap();
        let h_ref = reference::hd95_brute(&pred, &gt);
        max_hd_diff = max_hd_diff.max((h - h_ref).abs());
    }
    CheckResult {
        name: format!("oracle/dice_hd95_brute_force_{pairs}_pairs"),
        pass: max_dice_diff <= 1e-12 && max_hd_diff < 1e-9,
        detail: serde_json::json!({
            "pairs": pairs,
            "max_dice_abs_diff": max_dice_diff,
            "max_hd95_abs_diff": max_hd_diff,
        }),
    }
}

/// Exact EDT against the all-pairs oracle on small random grids.
pub fn edt_oracle_comparison(grids: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD157);
    let mut max_diff = 0.0f64;
    for _ in 0..grids {
        let dims = Dims3::new(
            rng.gen_range(4..=16),
            rng.gen_range(4..=16),
            rng.gen_range(4..=16),
        );
        let spacing = Spacing3::new(
            rng.gen_range(1..=4) as f64 * 0.5,
            rng.gen_range(1..=4) as f64 * 0.5,
            rng.gen_range(1..=4) as f64 * 0.5,
        );
        let mask = random_blob_mask(&mut rng, dims, spacing);
        let dt = distance_transform::<f64>(&mask).unwrap();
        let reference = reference::distance_transform_brute(&mask);
        for (got, want) in dt.data().iter().zip(reference.iter()) {
            max_diff = max_diff.max((got - want).abs());
        }
    }
    CheckResult {
        name: format!("oracle/distance_transform_brute_force_{grids}_grids"),
        pass: max_diff < 1e-9,
        detail: serde_json::json!({ "grids": grids, "max_abs_diff": max_diff }),
    }
}

/// Runs a verification suite. `fault` corrupts the kernel gradients so the
/// failure path can be exercised end to end.
pub fn run_checks(suite: Suite, fault: Option<FaultInjection>) -> CheckReport {
    let mut results = Vec::new();
    if matches!(suite, Suite::Kernels | Suite::All) {
        kernel_grad_checks(&mut results, fault);
        kernel_closed_form_checks(&mut results);
    }
    if matches!(suite, Suite::Metrics | Suite::All) {
        results.push(metric_oracle_comparison(200));
        results.push(edt_oracle_comparison(20));
    }
    let pass = results.iter().all(|r| r.pass);
    CheckReport {
        suite: match suite {
            Suite::Kernels => "kernels",
            Suite::Metrics => "metrics",
            Suite::All => "all",
        }
        .to_string(),
        pass,
        results,
    }
}
