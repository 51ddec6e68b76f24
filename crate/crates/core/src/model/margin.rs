//! Distance-to-nondifferentiability probes. Finite-difference gradient
//! checks are only meaningful away from ReLU kinks and max-selection ties,
//! so forward caches expose how close the batch came to one.

use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Smallest absolute value in a tensor (distance to a ReLU kink).
pub(crate) fn min_abs<F: Scalar>(t: &Tensor<F>) -> F {
    let mut m = F::infinity();
    for &v in t.data() {
        if v.abs() < m {
            m = v.abs();
        }
    }
    m
}

fn top_two_gap<F: Scalar>(values: impl Iterator<Item = F>) -> F {
    let mut best = F::neg_infinity();
    let mut second = F::neg_infinity();
    for v in values {
        if v > best {
            second = best;
            best = v;
        } else if v > second {
            second = v;
        }
    }
    if !second.is_finite() {
        return F::infinity();
    }
    // A tie at exactly zero only arises from an upstream ReLU clamping both
    // entries; they stay pinned at zero under any perturbation smaller than
    // that ReLU's own kink margin, which min_abs measures separately.
    if best == F::zero() && second == F::zero() {
        return F::infinity();
    }
    best - second
}

/// Smallest top-two gap over all 2x2 max-pool windows of a `[C,H,W]` or
/// `[N,C,H,W]` tensor with even spatial dims.
pub(crate) fn min_pool_gap<F: Scalar>(t: &Tensor<F>) -> F {
    let (planes, h, w) = match *t.shape() {
        [c, h, w] => (c, h, w),
        [n, c, h, w] => (n * c, h, w),
        _ => return F::infinity(),
    };
    let mut m = F::infinity();
    for p in 0..planes {
        let plane = &t.data()[p * h * w..][..h * w];
        for oy in 0..h / 2 {
            for ox in 0..w / 2 {
                let base = oy * 2 * w + ox * 2;
                let gap = top_two_gap(
                    [plane[base], plane[base + 1], plane[base + w], plane[base + w + 1]]
                        .into_iter(),
                );
                if gap < m {
                    m = gap;
                }
            }
        }
    }
    m
}

/// Smallest top-two gap of the per-channel global max of a `[N,C,H,W]`
/// tensor.
pub(crate) fn min_global_max_gap<F: Scalar>(t: &Tensor<F>) -> F {
    let &[n, c, h, w] = t.shape() else { return F::infinity() };
    let plane = h * w;
    let mut m = F::infinity();
    for idx in 0..n * c {
        let gap = top_two_gap(t.data()[idx * plane..][..plane].iter().copied());
        if gap < m {
            m = gap;
        }
    }
    m
}

/// Smallest top-two gap of the cross-channel max at each pixel of a
/// `[N,C,H,W]` tensor.
pub(crate) fn min_channel_max_gap<F: Scalar>(t: &Tensor<F>) -> F {
    let &[n, c, h, w] = t.shape() else { return F::infinity() };
    let plane = h * w;
    let mut m = F::infinity();
    for ni in 0..n {
        for pix in 0..plane {
            let gap = top_two_gap((0..c).map(|ci| t.data()[(ni * c + ci) * plane + pix]));
            if gap < m {
                m = gap;
            }
        }
    }
    m
}
