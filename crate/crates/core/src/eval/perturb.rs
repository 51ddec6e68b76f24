//! Deterministic image corruptions for probing prediction robustness.

use std::fmt;

use crate::error::{FerError, Result};
use crate::features::GrayImage;
use crate::scalar::Scalar;
use crate::IMAGE_SIDE;

/// A deterministic corruption applied to an input image.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbSpec {
    /// Sets a rectangle of pixels to zero; everything outside it is
    /// untouched.
    Occlusion { top: usize, left: usize, height: usize, width: usize },
    /// Multiplies every pixel by `factor`, clamping back into `[0, 1]`.
    Brightness { factor: f64 },
}

impl PerturbSpec {
    /// Occludes the mouth region: the bottom third of the frame.
    pub fn mouth_occlusion() -> Self {
        PerturbSpec::Occlusion { top: 32, left: 0, height: 16, width: IMAGE_SIDE }
    }

    /// Occludes the eye region: a band across the upper face.
    pub fn eye_occlusion() -> Self {
        PerturbSpec::Occlusion { top: 12, left: 0, height: 13, width: IMAGE_SIDE }
    }

    /// Occludes the entire frame.
    pub fn full_occlusion() -> Self {
        PerturbSpec::Occlusion { top: 0, left: 0, height: IMAGE_SIDE, width: IMAGE_SIDE }
    }

    /// Raises brightness by half.
    pub fn brighten() -> Self {
        PerturbSpec::Brightness { factor: 1.5 }
    }

    /// Halves brightness.
    pub fn dim() -> Self {
        PerturbSpec::Brightness { factor: 0.5 }
    }

    /// Rejects rectangles that escape the standard frame, empty rectangles,
    /// and non-positive or non-finite brightness factors.
    pub fn validate(&self) -> Result<()> {
        match *self {
            PerturbSpec::Occlusion { top, left, height, width } => {
                rect_within(top, left, height, width, IMAGE_SIDE, IMAGE_SIDE)
            }
            PerturbSpec::Brightness { factor } => {
                if factor > 0.0 && factor.is_finite() {
                    Ok(())
                } else {
                    Err(FerError::invalid(format!(
                        "brightness factor must be positive and finite, got {factor}"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for PerturbSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PerturbSpec::Occlusion { top, left, height, width } => {
                write!(f, "occlusion rows {top}..{} cols {left}..{}", top + height, left + width)
            }
            PerturbSpec::Brightness { factor } => write!(f, "brightness x{factor}"),
        }
    }
}

fn rect_within(
    top: usize,
    left: usize,
    height: usize,
    width: usize,
    rows: usize,
    cols: usize,
) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(FerError::invalid("occlusion rectangle must cover at least one pixel"));
    }
    let bottom = top.checked_add(height).filter(|&end| end <= rows);
    let right = left.checked_add(width).filter(|&end| end <= cols);
    if bottom.is_none() || right.is_none() {
        return Err(FerError::invalid(format!(
            "occlusion rectangle {height}x{width} at ({top}, {left}) escapes the \
             {rows}x{cols} frame"
        )));
    }
    Ok(())
}

/// Applies one perturbation to an image, leaving the original untouched.
/// Occlusion writes zeros inside the rectangle and copies every other pixel
/// verbatim; brightness multiplies and clamps into `[0, 1]`.
pub fn perturb_image<F: Scalar>(image: &GrayImage<F>, spec: &PerturbSpec) -> Result<GrayImage<F>> {
    match *spec {
        PerturbSpec::Occlusion { top, left, height, width } => {
            rect_within(top, left, height, width, image.height(), image.width())?;
            let cols = image.width();
            let mut pixels = image.pixels().to_vec();
            for row in top..top + height {
                for col in left..left + width {
                    pixels[row * cols + col] = F::zero();
                }
            }
            GrayImage::new(image.height(), image.width(), pixels)
        }
        PerturbSpec::Brightness { factor } => {
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(FerError::invalid(format!(
                    "brightness factor must be positive and finite, got {factor}"
                )));
            }
            let scale = F::from_f64(factor);
            let pixels = image
                .pixels()
                .iter()
                .map(|&v| (v * scale).min(F::one()).max(F::zero()))
                .collect();
            GrayImage::new(image.height(), image.width(), pixels)
        }
    }
}
