//! Feature-vector concatenation and broadcast multiplication, the two glue
//! ops of the fusion and attention paths.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Concatenate `[N,D_i]` tensors along the feature axis into `[N, sum D_i]`.
/// All parts must share the batch size; order is preserved.
pub fn concat_features<F: Scalar>(parts: &[&Tensor<F>]) -> Result<Tensor<F>> {
    if parts.is_empty() {
        return Err(FerError::invalid("concat_features needs at least one part"));
    }
    let mut n = 0;
    let mut widths = Vec::with_capacity(parts.len());
    for (i, p) in parts.iter().enumerate() {
        let &[pn, pd] = p.shape() else {
            return Err(FerError::shape(
                "concat_features",
                format!("part {i} must be [N,D], got {:?}", p.shape()),
            ));
        };
        if i == 0 {
            n = pn;
        } else if pn != n {
            return Err(FerError::shape(
                "concat_features",
                format!("part {i} has batch {pn}, expected {n}"),
            ));
        }
        widths.push(pd);
    }
    let total: usize = widths.iter().sum();
    let mut out = Vec::with_capacity(n * total);
    for ni in 0..n {
        for (p, &d) in parts.iter().zip(&widths) {
            out.extend_from_slice(&p.data()[ni * d..][..d]);
        }
    }
    Tensor::new(vec![n, total], out)
}

/// Split a `[N, sum D_i]` gradient back into per-part `[N,D_i]` gradients,
/// the exact adjoint of [`concat_features`].
pub fn concat_features_backward<F: Scalar>(
    grad_out: &Tensor<F>,
    widths: &[usize],
) -> Result<Vec<Tensor<F>>> {
    let &[n, total] = grad_out.shape() else {
        return Err(FerError::shape(
            "concat_features_backward",
            format!("grad must be [N,D], got {:?}", grad_out.shape()),
        ));
    };
    if widths.iter().sum::<usize>() != total {
        return Err(FerError::shape(
            "concat_features_backward",
            format!("widths {widths:?} do not sum to {total}"),
        ));
    }
    let mut parts: Vec<Vec<F>> = widths.iter().map(|&d| Vec::with_capacity(n * d)).collect();
    for ni in 0..n {
        let mut off = ni * total;
        for (buf, &d) in parts.iter_mut().zip(widths) {
            buf.extend_from_slice(&grad_out.data()[off..off + d]);
            off += d;
        }
    }
    parts
        .into_iter()
        .zip(widths)
        .map(|(buf, &d)| Tensor::new(vec![n, d], buf))
        .collect()
}

enum Broadcast {
    PerChannel,
    PerPixel,
}

fn broadcast_kind<F: Scalar>(map: &Tensor<F>, feature: &Tensor<F>) -> Result<(Broadcast, usize, usize, usize, usize)> {
    let (n, c, h, w) = match *feature.shape() {
        [c, h, w] => (1, c, h, w),
        [n, c, h, w] => (n, c, h, w),
        _ => {
            return Err(FerError::shape(
                "broadcast_mul",
                format!("feature must be [C,H,W] or [N,C,H,W], got {:?}", feature.shape()),
            ))
        }
    };
    let batched = feature.rank() == 4;
    let kind = match (batched, map.shape()) {
        (false, s) if s == [c, 1, 1] => Broadcast::PerChannel,
        (false, s) if s == [1, h, w] => Broadcast::PerPixel,
        (true, s) if s == [n, c, 1, 1] => Broadcast::PerChannel,
        (true, s) if s == [n, 1, h, w] => Broadcast::PerPixel,
        _ => {
            return Err(FerError::shape(
                "broadcast_mul",
                format!(
                    "map shape {:?} does not broadcast over feature {:?}",
                    map.shape(),
                    feature.shape()
                ),
            ))
        }
    };
    Ok((kind, n, c, h, w))
}

/// Multiply a feature tensor by an attention map that broadcasts over either
/// the spatial axes (`map [.., C, 1, 1]`, one scale per channel) or the
/// channel axis (`map [.., 1, H, W]`, one scale per pixel).
pub fn broadcast_mul<F: Scalar>(map: &Tensor<F>, feature: &Tensor<F>) -> Result<Tensor<F>> {
    let (kind, n, c, h, w) = broadcast_kind(map, feature)?;
    let plane = h * w;
    let mut out = vec![F::zero(); feature.len()];
    for ni in 0..n {
        for ci in 0..c {
            let f = &feature.data()[(ni * c + ci) * plane..][..plane];
            let o = &mut out[(ni * c + ci) * plane..][..plane];
            match kind {
                Broadcast::PerChannel => {
                    let s = map.data()[ni * c + ci];
                    for (dst, &x) in o.iter_mut().zip(f) {
                        *dst = s * x;
                    }
                }
                Broadcast::PerPixel => {
                    let m = &map.data()[ni * plane..][..plane];
                    for ((dst, &x), &s) in o.iter_mut().zip(f).zip(m) {
                        *dst = s * x;
                    }
                }
            }
        }
    }
    Tensor::new(feature.shape().to_vec(), out)
}

/// Gradients of [`broadcast_mul`]: returns `(d_map, d_feature)`. The map
/// gradient sums the products over the axes the map was broadcast across.
pub fn broadcast_mul_backward<F: Scalar>(
    map: &Tensor<F>,
    feature: &Tensor<F>,
    grad_out: &Tensor<F>,
) -> Result<(Tensor<F>, Tensor<F>)> {
    let (kind, n, c, h, w) = broadcast_kind(map, feature)?;
    if grad_out.shape() != feature.shape() {
        return Err(FerError::shape(
            "broadcast_mul_backward",
            format!("grad shape {:?} does not match feature {:?}", grad_out.shape(), feature.shape()),
        ));
    }
    let plane = h * w;
    let mut d_map = vec![F::zero(); map.len()];
    let mut d_feature = vec![F::zero(); feature.len()];
    for ni in 0..n {
        for ci in 0..c {
            let base = (ni * c + ci) * plane;
            let f = &feature.data()[base..][..plane];
            let g = &grad_out.data()[base..][..plane];
            let df = &mut d_feature[base..][..plane];
            match kind {
                Broadcast::PerChannel => {
                    let s = map.data()[ni * c + ci];
                    let mut acc = F::zero();
                    for ((slot, &x), &gv) in df.iter_mut().zip(f).zip(g) {
                        *slot = s * gv;
                        acc += gv * x;
                    }
                    d_map[ni * c + ci] += acc;
                }
                Broadcast::PerPixel => {
                    let m = &map.data()[ni * plane..][..plane];
                    let dm = &mut d_map[ni * plane..][..plane];
                    for i in 0..plane {
                        df[i] = m[i] * g[i];
                        dm[i] += g[i] * f[i];
                    }
                }
            }
        }
    }
    Ok((
        Tensor::new(map.shape().to_vec(), d_map)?,
        Tensor::new(feature.shape().to_vec(), d_feature)?,
    ))
}
