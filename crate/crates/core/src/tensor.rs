//! Dense row-major tensor with an optional gradient buffer.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;

/// Dense n-dimensional array. Values are stored row-major; the gradient
/// buffer, when present, always has the same shape as the data.
#[derive(Debug, Clone)]
pub struct Tensor<F: Scalar> {
    shape: Vec<usize>,
    data: Vec<F>,
    grad: Option<Vec<F>>,
}

impl<F: Scalar> Tensor<F> {
    /// Builds a tensor, checking that `data` fills `shape` exactly.
    pub fn new(shape: Vec<usize>, data: Vec<F>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if shape.iter().any(|&d| d == 0) {
            return Err(FerError::shape("Tensor::new", format!("zero dimension in {shape:?}")));
        }
        if n != data.len() {
            return Err(FerError::shape(
                "Tensor::new",
                format!("shape {shape:?} holds {n} values, got {}", data.len()),
            ));
        }
        Ok(Tensor { shape, data, grad: None })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n: usize = shape.iter().product();
        Tensor { shape, data: vec![F::zero(); n], grad: None }
    }

    pub fn filled(shape: Vec<usize>, value: F) -> Self {
        let n: usize = shape.iter().product();
        Tensor { shape, data: vec![value; n], grad: None }
    }

    /// 1-D tensor from a slice.
    pub fn from_slice(values: &[F]) -> Self {
        Tensor { shape: vec![values.len()], data: values.to_vec(), grad: None }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<F> {
        self.data
    }

    /// Value at a multi-index (row-major). Test and diagnostics helper.
    pub fn at(&self, index: &[usize]) -> F {
        debug_assert_eq!(index.len(), self.shape.len());
        let mut off = 0;
        for (i, &ix) in index.iter().enumerate() {
            debug_assert!(ix < self.shape[i]);
            off = off * self.shape[i] + ix;
        }
        self.data[off]
    }

    /// Reinterprets the value buffer under a new shape of equal volume.
    pub fn reshaped(mut self, shape: Vec<usize>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(FerError::shape(
                "Tensor::reshaped",
                format!("cannot view {:?} as {shape:?}", self.shape),
            ));
        }
        self.shape = shape;
        self.grad = None;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(F) -> F) -> Self {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
            grad: None,
        }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, F> {
        self.data.iter()
    }

    /// Element-wise sum of two tensors of identical shape.
    pub fn add(&self, other: &Tensor<F>) -> Result<Self> {
        if self.shape != other.shape {
            return Err(FerError::shape(
                "Tensor::add",
                format!("{:?} vs {:?}", self.shape, other.shape),
            ));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Tensor::new(self.shape.clone(), data)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    // Gradient buffer.

    pub fn grad(&self) -> Option<&[F]> {
        self.grad.as_deref()
    }

    pub fn grad_mut(&mut self) -> Option<&mut [F]> {
        self.grad.as_deref_mut()
    }

    /// Mutable values alongside a read-only view of the gradient, for
    /// updates that consume the gradient while writing the values.
    pub fn data_and_grad(&mut self) -> (&mut [F], Option<&[F]>) {
        (&mut self.data, self.grad.as_deref())
    }

    /// Adds `delta` into the gradient buffer, creating it at zero first.
    pub fn accumulate_grad(&mut self, delta: &Tensor<F>) -> Result<()> {
        if delta.shape != self.shape {
            return Err(FerError::shape(
                "Tensor::accumulate_grad",
                format!("grad shape {:?} vs value shape {:?}", delta.shape, self.shape),
            ));
        }
        let grad = self.grad.get_or_insert_with(|| vec![F::zero(); self.data.len()]);
        for (g, &d) in grad.iter_mut().zip(delta.data.iter()) {
            *g += d;
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        self.grad = None;
    }
}

/// Dot product with four independent accumulator lanes. The lane layout is
/// fixed, so results are identical across runs and optimization levels.
#[inline]
pub(crate) fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut lanes = [F::zero(); 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        lanes[0] += xa[0] * xb[0];
        lanes[1] += xa[1] * xb[1];
        lanes[2] += xa[2] * xb[2];
        lanes[3] += xa[3] * xb[3];
    }
    let mut sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    let tail = n - ca.remainder().len();
    for k in tail..n {
        sum += a[k] * b[k];
    }
    sum
}

/// `out[i] += s * v[i]`.
#[inline]
pub(crate) fn axpy<F: Scalar>(s: F, v: &[F], out: &mut [F]) {
    debug_assert_eq!(v.len(), out.len());
    for (o, &x) in out.iter_mut().zip(v.iter()) {
        *o += s * x;
    }
}

/// Index of the largest value; ties resolve to the lowest index so every
/// caller breaks them the same way.
pub(crate) fn argmax<F: Scalar>(values: &[F]) -> usize {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    best
}
