//! Pooling: 2x2 max-pooling over spatial dims, global spatial pooling per
//! channel, and per-pixel reductions across channels. Max operations break
//! ties by the first maximum in row-major scan order, and the backwards
//! recompute that same argmax so the gradient routes to exactly one element.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Reduction used by [`global_pool`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolKind {
    Avg,
    Max,
}

fn spatial_dims<F: Scalar>(input: &Tensor<F>, op: &'static str) -> Result<(usize, usize, usize, usize, bool)> {
    match *input.shape() {
        [c, h, w] => Ok((1, c, h, w, false)),
        [n, c, h, w] => Ok((n, c, h, w, true)),
        _ => Err(FerError::shape(
            op,
            format!("expected [C,H,W] or [N,C,H,W], got {:?}", input.shape()),
        )),
    }
}

/// 2x2 max-pooling with stride 2. Requires even spatial dimensions; halves
/// height and width.
pub fn maxpool2d<F: Scalar>(input: &Tensor<F>) -> Result<Tensor<F>> {
    let (n, c, h, w, batched) = spatial_dims(input, "maxpool2d")?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(FerError::shape(
            "maxpool2d",
            format!("spatial dims must be even, got {h}x{w}"),
        ));
    }
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(n * c * oh * ow);
    for plane_idx in 0..n * c {
        let plane = &input.data()[plane_idx * h * w..][..h * w];
        for oy in 0..oh {
            for ox in 0..ow {
                let base = (oy * 2) * w + ox * 2;
                let mut best = plane[base];
                for &cand in &[plane[base + 1], plane[base + w], plane[base + w + 1]] {
                    if cand > best {
                        best = cand;
                    }
                }
                out.push(best);
            }
        }
    }
    let shape = if batched { vec![n, c, oh, ow] } else { vec![c, oh, ow] };
    Tensor::new(shape, out)
}

/// Gradient of [`maxpool2d`]: each output gradient flows to the first
/// maximum of its 2x2 window in scan order (left-to-right, top-to-bottom).
pub fn maxpool2d_backward<F: Scalar>(input: &Tensor<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
    let (n, c, h, w, _) = spatial_dims(input, "maxpool2d_backward")?;
    let (oh, ow) = (h / 2, w / 2);
    if grad_out.len() != n * c * oh * ow {
        return Err(FerError::shape(
            "maxpool2d_backward",
            format!("grad shape {:?} does not match pooled input", grad_out.shape()),
        ));
    }
    let mut d_input = vec![F::zero(); input.len()];
    for plane_idx in 0..n * c {
        let plane = &input.data()[plane_idx * h * w..][..h * w];
        let d_plane = &mut d_input[plane_idx * h * w..][..h * w];
        let g_plane = &grad_out.data()[plane_idx * oh * ow..][..oh * ow];
        for oy in 0..oh {
            for ox in 0..ow {
                let base = (oy * 2) * w + ox * 2;
                let offsets = [0, 1, w, w + 1];
                let mut best = 0;
                for (slot, &off) in offsets.iter().enumerate().skip(1) {
                    if plane[base + off] > plane[base + offsets[best]] {
                        best = slot;
                    }
                }
                d_plane[base + offsets[best]] += g_plane[oy * ow + ox];
            }
        }
    }
    Tensor::new(input.shape().to_vec(), d_input)
}

/// Collapse the spatial dimensions of each channel to a single value, by
/// mean or by max. `[C,H,W] -> [C]` and `[N,C,H,W] -> [N,C]`.
pub fn global_pool<F: Scalar>(input: &Tensor<F>, kind: PoolKind) -> Result<Tensor<F>> {
    let (n, c, h, w, batched) = spatial_dims(input, "global_pool")?;
    let plane = h * w;
    let mut out = Vec::with_capacity(n * c);
    for idx in 0..n * c {
        let p = &input.data()[idx * plane..][..plane];
        let v = match kind {
            PoolKind::Avg => {
                let mut acc = F::zero();
                for &x in p {
                    acc += x;
                }
                acc / F::from_usize(plane)
            }
            PoolKind::Max => {
                let mut best = p[0];
                for &x in &p[1..] {
                    if x > best {
                        best = x;
                    }
                }
                best
            }
        };
        out.push(v);
    }
    let shape = if batched { vec![n, c] } else { vec![c] };
    Tensor::new(shape, out)
}

/// Gradient of [`global_pool`]. Avg spreads each channel gradient uniformly
/// over its plane; max routes it to the first maximum in scan order.
pub fn global_pool_backward<F: Scalar>(
    input: &Tensor<F>,
    grad_out: &Tensor<F>,
    kind: PoolKind,
) -> Result<Tensor<F>> {
    let (n, c, h, w, _) = spatial_dims(input, "global_pool_backward")?;
    let plane = h * w;
    if grad_out.len() != n * c {
        return Err(FerError::shape(
            "global_pool_backward",
            format!("grad shape {:?} does not match {} channels", grad_out.shape(), n * c),
        ));
    }
    let mut d_input = vec![F::zero(); input.len()];
    for idx in 0..n * c {
        let p = &input.data()[idx * plane..][..plane];
        let d = &mut d_input[idx * plane..][..plane];
        let g = grad_out.data()[idx];
        match kind {
            PoolKind::Avg => {
                let share = g / F::from_usize(plane);
                for slot in d.iter_mut() {
                    *slot += share;
                }
            }
            PoolKind::Max => {
                let mut best = 0;
                for (i, &x) in p.iter().enumerate().skip(1) {
                    if x > p[best] {
                        best = i;
                    }
                }
                d[best] += g;
            }
        }
    }
    Tensor::new(input.shape().to_vec(), d_input)
}

/// Mean across channels at each pixel: `[N,C,H,W] -> [N,1,H,W]`.
pub fn channel_mean<F: Scalar>(input: &Tensor<F>) -> Result<Tensor<F>> {
    let &[n, c, h, w] = input.shape() else {
        return Err(FerError::shape(
            "channel_mean",
            format!("expected [N,C,H,W], got {:?}", input.shape()),
        ));
    };
    let plane = h * w;
    let inv_c = F::one() / F::from_usize(c);
    let mut out = vec![F::zero(); n * plane];
    for ni in 0..n {
        let dst = &mut out[ni * plane..][..plane];
        for ci in 0..c {
            let src = &input.data()[(ni * c + ci) * plane..][..plane];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
        for d in dst.iter_mut() {
            *d *= inv_c;
        }
    }
    Tensor::new(vec![n, 1, h, w], out)
}

/// Gradient of [`channel_mean`]: each pixel's gradient is shared equally by
/// all channels.
pub fn channel_mean_backward<F: Scalar>(input: &Tensor<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
    let &[n, c, h, w] = input.shape() else {
        return Err(FerError::shape(
            "channel_mean_backward",
            format!("expected [N,C,H,W], got {:?}", input.shape()),
        ));
    };
    let plane = h * w;
    if grad_out.shape() != [n, 1, h, w] {
        return Err(FerError::shape(
            "channel_mean_backward",
            format!("grad shape {:?} does not match [{n},1,{h},{w}]", grad_out.shape()),
        ));
    }
    let inv_c = F::one() / F::from_usize(c);
    let mut d_input = vec![F::zero(); input.len()];
    for ni in 0..n {
        let g = &grad_out.data()[ni * plane..][..plane];
        for ci in 0..c {
            let d = &mut d_input[(ni * c + ci) * plane..][..plane];
            for (slot, &gv) in d.iter_mut().zip(g) {
                *slot += gv * inv_c;
            }
        }
    }
    Tensor::new(input.shape().to_vec(), d_input)
}

/// Max across channels at each pixel: `[N,C,H,W] -> [N,1,H,W]`. Ties go to
/// the lowest channel index.
pub fn channel_max<F: Scalar>(input: &Tensor<F>) -> Result<Tensor<F>> {
    let &[n, c, h, w] = input.shape() else {
        return Err(FerError::shape(
            "channel_max",
            format!("expected [N,C,H,W], got {:?}", input.shape()),
        ));
    };
    let plane = h * w;
    let mut out = vec![F::zero(); n * plane];
    for ni in 0..n {
        let dst = &mut out[ni * plane..][..plane];
        dst.copy_from_slice(&input.data()[ni * c * plane..][..plane]);
        for ci in 1..c {
            let src = &input.data()[(ni * c + ci) * plane..][..plane];
            for (d, &s) in dst.iter_mut().zip(src) {
                if s > *d {
                    *d = s;
                }
            }
        }
    }
    Tensor::new(vec![n, 1, h, w], out)
}

/// Gradient of [`channel_max`]: each pixel's gradient goes to the lowest
/// channel attaining the maximum there.
pub fn channel_max_backward<F: Scalar>(input: &Tensor<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
    let &[n, c, h, w] = input.shape() else {
        return Err(FerError::shape(
            "channel_max_backward",
            format!("expected [N,C,H,W], got {:?}", input.shape()),
        ));
    };
    let plane = h * w;
    if grad_out.shape() != [n, 1, h, w] {
        return Err(FerError::shape(
            "channel_max_backward",
            format!("grad shape {:?} does not match [{n},1,{h},{w}]", grad_out.shape()),
        ));
    }
    let mut d_input = vec![F::zero(); input.len()];
    for ni in 0..n {
        let g = &grad_out.data()[ni * plane..][..plane];
        for pix in 0..plane {
            let mut best = 0;
            for ci in 1..c {
                if input.data()[(ni * c + ci) * plane + pix]
                    > input.data()[(ni * c + best) * plane + pix]
                {
                    best = ci;
                }
            }
            d_input[(ni * c + best) * plane + pix] += g[pix];
        }
    }
    Tensor::new(input.shape().to_vec(), d_input)
}
