//! 2-D convolution (cross-correlation) with stride 1 and zero same-padding,
//! so spatial size is preserved. Kernels are square with odd side length.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;
use crate::tensor::{axpy, dot, Tensor};

struct ConvDims {
    batch: usize,
    c_in: usize,
    c_out: usize,
    h: usize,
    w: usize,
    k: usize,
    pad: usize,
    batched: bool,
}

fn check_dims<F: Scalar>(
    input: &Tensor<F>,
    weight: &Tensor<F>,
    bias: &Tensor<F>,
) -> Result<ConvDims> {
    let (batch, c_in, h, w, batched) = match *input.shape() {
        [c, h, w] => (1, c, h, w, false),
        [n, c, h, w] => (n, c, h, w, true),
        _ => {
            return Err(FerError::shape(
                "conv2d",
                format!("input must be [C,H,W] or [N,C,H,W], got {:?}", input.shape()),
            ))
        }
    };
    let &[c_out, wc_in, kh, kw] = weight.shape() else {
        return Err(FerError::shape(
            "conv2d",
            format!("weight must be [Cout,Cin,K,K], got {:?}", weight.shape()),
        ));
    };
    if kh != kw || kh % 2 == 0 {
        return Err(FerError::shape(
            "conv2d",
            format!("kernel must be square with odd side, got {kh}x{kw}"),
        ));
    }
    if wc_in != c_in {
        return Err(FerError::shape(
            "conv2d",
            format!("input has {c_in} channels but weight expects {wc_in}"),
        ));
    }
    if bias.shape() != [c_out] {
        return Err(FerError::shape(
            "conv2d",
            format!("bias must be [{c_out}], got {:?}", bias.shape()),
        ));
    }
    Ok(ConvDims { batch, c_in, c_out, h, w, k: kh, pad: (kh - 1) / 2, batched })
}

/// Forward convolution: `out[n,co,y,x] = bias[co] + sum over ci,dy,dx of
/// input[n,ci,y+dy-p,x+dx-p] * weight[co,ci,dy,dx]`, with zero padding
/// outside the frame. Output shape matches the input's batch/spatial shape
/// with `Cout` channels.
pub fn conv2d<F: Scalar>(
    input: &Tensor<F>,
    weight: &Tensor<F>,
    bias: &Tensor<F>,
) -> Result<Tensor<F>> {
    let d = check_dims(input, weight, bias)?;
    let plane = d.h * d.w;
    let mut out = vec![F::zero(); d.batch * d.c_out * plane];
    for n in 0..d.batch {
        for co in 0..d.c_out {
            let out_plane = &mut out[(n * d.c_out + co) * plane..][..plane];
            out_plane.fill(bias.data()[co]);
            for ci in 0..d.c_in {
                let in_plane = &input.data()[(n * d.c_in + ci) * plane..][..plane];
                let w_base = (co * d.c_in + ci) * d.k * d.k;
                for dy in 0..d.k {
                    let sy_off = dy as isize - d.pad as isize;
                    for dx in 0..d.k {
                        let sx_off = dx as isize - d.pad as isize;
                        let wv = weight.data()[w_base + dy * d.k + dx];
                        let x0 = (-sx_off).max(0) as usize;
                        let x1 = (d.w as isize).min(d.w as isize - sx_off) as usize;
                        if x0 >= x1 {
                            continue;
                        }
                        let y0 = (-sy_off).max(0) as usize;
                        let y1 = (d.h as isize).min(d.h as isize - sy_off) as usize;
                        for y in y0..y1 {
                            let sy = (y as isize + sy_off) as usize;
                            let src_row = sy * d.w;
                            let src = &in_plane
                                [src_row + (x0 as isize + sx_off) as usize..]
                                [..x1 - x0];
                            let dst = &mut out_plane[y * d.w + x0..][..x1 - x0];
                            axpy(wv, src, dst);
                        }
                    }
                }
            }
        }
    }
    let shape: Vec<usize> = if d.batched {
        vec![d.batch, d.c_out, d.h, d.w]
    } else {
        vec![d.c_out, d.h, d.w]
    };
    Tensor::new(shape, out)
}

/// Gradients of [`conv2d`] with respect to input, weight and bias, given the
/// gradient of the loss with respect to the output. Returns
/// `(d_input, d_weight, d_bias)` with the same shapes as the forward
/// arguments.
pub fn conv2d_backward<F: Scalar>(
    input: &Tensor<F>,
    weight: &Tensor<F>,
    grad_out: &Tensor<F>,
) -> Result<(Tensor<F>, Tensor<F>, Tensor<F>)> {
    let bias_probe = Tensor::zeros(vec![weight.shape()[0]]);
    let d = check_dims(input, weight, &bias_probe)?;
    let plane = d.h * d.w;
    let expect: Vec<usize> = if d.batched {
        vec![d.batch, d.c_out, d.h, d.w]
    } else {
        vec![d.c_out, d.h, d.w]
    };
    if grad_out.shape() != expect.as_slice() {
        return Err(FerError::shape(
            "conv2d_backward",
            format!("grad shape {:?} does not match output {:?}", grad_out.shape(), expect),
        ));
    }

    let mut d_input = vec![F::zero(); input.len()];
    let mut d_weight = vec![F::zero(); weight.len()];
    let mut d_bias = vec![F::zero(); d.c_out];

    for n in 0..d.batch {
        for co in 0..d.c_out {
            let g_plane = &grad_out.data()[(n * d.c_out + co) * plane..][..plane];
            let mut bias_sum = F::zero();
            for &g in g_plane {
                bias_sum += g;
            }
            d_bias[co] += bias_sum;
            for ci in 0..d.c_in {
                let in_plane = &input.data()[(n * d.c_in + ci) * plane..][..plane];
                let di_plane = &mut d_input[(n * d.c_in + ci) * plane..][..plane];
                let w_base = (co * d.c_in + ci) * d.k * d.k;
                for dy in 0..d.k {
                    let sy_off = dy as isize - d.pad as isize;
                    for dx in 0..d.k {
                        let sx_off = dx as isize - d.pad as isize;
                        let wv = weight.data()[w_base + dy * d.k + dx];
                        let x0 = (-sx_off).max(0) as usize;
                        let x1 = (d.w as isize).min(d.w as isize - sx_off) as usize;
                        if x0 >= x1 {
                            continue;
                        }
                        let y0 = (-sy_off).max(0) as usize;
                        let y1 = (d.h as isize).min(d.h as isize - sy_off) as usize;
                        let mut w_grad = F::zero();
                        for y in y0..y1 {
                            let sy = (y as isize + sy_off) as usize;
                            let src0 = sy * d.w + (x0 as isize + sx_off) as usize;
                            let g_row = &g_plane[y * d.w + x0..][..x1 - x0];
                            w_grad += dot(g_row, &in_plane[src0..][..x1 - x0]);
                            axpy(wv, g_row, &mut di_plane[src0..][..x1 - x0]);
                        }
                        d_weight[w_base + dy * d.k + dx] += w_grad;
                    }
                }
            }
        }
    }

    Ok((
        Tensor::new(input.shape().to_vec(), d_input)?,
        Tensor::new(weight.shape().to_vec(), d_weight)?,
        Tensor::new(vec![d.c_out], d_bias)?,
    ))
}
