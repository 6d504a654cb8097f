//! Patch tokenization: split a `[C,D,H,W]` volume into cubic patches, one
//! flattened token per patch, with an exact inverse.

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_divisible(shape: &[usize], p: usize) -> Result<()> {
    if shape.len() != 4 {
        return Err(Error::Shape(format!("patchify expects [C,D,H,W], got {shape:?}")));
    }
    if p == 0 {
        return Err(Error::Config("patch edge must be positive".into()));
    }
    for (axis, extent) in ["D", "H", "W"].iter().zip(&shape[1..]) {
        if extent % p != 0 {
            return Err(Error::Config(format!(
                "axis {axis} extent {extent} is not divisible by patch edge {p}"
            )));
        }
    }
    Ok(())
}

/// Tokens of shape `[(D/p)(H/p)(W/p), C*p^3]`. Token order is row-major over
/// the patch grid; within a token, channel-major then local (z,y,x) offsets.
pub fn patchify<R: Real>(x: &Tensor<R>, p: usize) -> Result<Tensor<R>> {
    check_divisible(x.shape(), p)?;
    let (c_n, d, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
    let (gd, gh, gw) = (d / p, h / p, w / p);
    let tokens = gd * gh * gw;
    let token_len = c_n * p * p * p;
    let mut out = vec![R::zero(); tokens * token_len];

    for (t, (pz, py, px)) in (0..gd)
        .flat_map(|a| (0..gh).flat_map(move |b| (0..gw).map(move |c| (a, b, c))))
        .enumerate()
    {
        let mut k = t * token_len;
        for ch in 0..c_n {
            for lz in 0..p {
                for ly in 0..p {
                    for lx in 0..p {
                        out[k] = x.data()[x.idx4(ch, pz * p + lz, py * p + ly, px * p + lx)];
                        k += 1;
                    }
                }
            }
        }
    }
    Tensor::new(vec![tokens, token_len], out)
}

/// Exact inverse of [`patchify`] for the given original geometry.
pub fn unpatchify<R: Real>(
    tokens: &Tensor<R>,
    channels: usize,
    dims: (usize, usize, usize),
    p: usize,
) -> Result<Tensor<R>> {
    let (d, h, w) = dims;
    check_divisible(&[channels, d, h, w], p)?;
    let (gd, gh, gw) = (d / p, h / p, w / p);
    let token_len = channels * p * p * p;
    if tokens.shape() != [gd * gh * gw, token_len] {
        return Err(Error::Shape(format!(
            "token tensor {:?} does not match [{}, {token_len}]",
            tokens.shape(),
            gd * gh * gw
        )));
    }
    let mut out = Tensor::zeros(vec![channels, d, h, w]);
    for (t, (pz, py, px)) in (0..gd)
        .flat_map(|a| (0..gh).flat_map(move |b| (0..gw).map(move |c| (a, b, c))))
        .enumerate()
    {
        let mut k = t * token_len;
        for ch in 0..channels {
            for lz in 0..p {
                for ly in 0..p {
                    for lx in 0..p {
                        let i = out.idx4(ch, pz * p + lz, py * p + ly, px * p + lx);
                        out.data_mut()[i] = tokens.data()[k];
                        k += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_count_and_length() {
        let x = Tensor::from_fn(vec![1, 4, 4, 4], |i| i as f64);
        let t = patchify(&x, 2).unwrap();
        assert_eq!(t.shape(), &[8, 8]);
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let x = Tensor::from_fn(vec![3, 4, 6, 2], |i| (i as f64) * 0.1 - 3.0);
        let t = patchify(&x, 2).unwrap();
        let back = unpatchify(&t, 3, (4, 6, 2), 2).unwrap();
        assert_eq!(back.data(), x.data());
    }

    #[test]
    fn full_extent_patch_is_flattened_volume() {
        let x = Tensor::from_fn(vec![2, 3, 3, 3], |i| i as f64);
        let t = patchify(&x, 3).unwrap();
        assert_eq!(t.shape(), &[1, 54]);
        assert_eq!(t.data(), x.data());
    }

    #[test]
    fn indivisible_extent_rejected() {
        let x = Tensor::<f64>::zeros(vec![1, 4, 4, 5]);
        assert!(matches!(patchify(&x, 2), Err(Error::Config(_))));
    }
}
