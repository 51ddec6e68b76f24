//! Grayscale image container and preprocessing into the network's 48x48
//! unit-range input format.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;
use crate::IMAGE_SIDE;

/// A grayscale image with pixel values in `[0, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<F: Scalar> {
    height: usize,
    width: usize,
    pixels: Vec<F>,
}

impl<F: Scalar> GrayImage<F> {
    /// Wrap unit-range pixel data. Rejects dimension mismatches and any
    /// pixel outside `[0, 1]` (NaN included).
    pub fn new(height: usize, width: usize, pixels: Vec<F>) -> Result<Self> {
        if height == 0 || width == 0 || pixels.len() != height * width {
            return Err(FerError::shape(
                "GrayImage",
                format!("{}x{} does not match {} pixels", height, width, pixels.len()),
            ));
        }
        if !pixels.iter().all(|&p| p >= F::zero() && p <= F::one()) {
            return Err(FerError::invalid("image pixels must lie in [0, 1]"));
        }
        Ok(GrayImage { height, width, pixels })
    }

    /// Convert 8-bit pixels to unit range by dividing by 255.
    pub fn from_u8(height: usize, width: usize, raw: &[u8]) -> Result<Self> {
        if height == 0 || width == 0 || raw.len() != height * width {
            return Err(FerError::shape(
                "GrayImage",
                format!("{}x{} does not match {} bytes", height, width, raw.len()),
            ));
        }
        let scale = F::from_f64(1.0 / 255.0);
        let pixels = raw.iter().map(|&b| F::from_usize(b as usize) * scale).collect();
        Ok(GrayImage { height, width, pixels })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Row-major pixel slice.
    pub fn pixels(&self) -> &[F] {
        &self.pixels
    }

    pub fn get(&self, y: usize, x: usize) -> F {
        self.pixels[y * self.width + x]
    }

    /// Sample at real-valued coordinates with bilinear interpolation,
    /// returning zero outside the frame. Coordinates are pixel-centre based:
    /// `(0, 0)` is the centre of the top-left pixel.
    pub fn sample_bilinear_zero(&self, y: F, x: F) -> F {
        let h = F::from_usize(self.height);
        let w = F::from_usize(self.width);
        if y <= -F::one() || x <= -F::one() || y >= h || x >= w {
            return F::zero();
        }
        let y0 = y.floor();
        let x0 = x.floor();
        let fy = y - y0;
        let fx = x - x0;
        let mut acc = F::zero();
        for (dy, wy) in [(0isize, F::one() - fy), (1, fy)] {
            for (dx, wx) in [(0isize, F::one() - fx), (1, fx)] {
                let yy = y0.to_f64() as isize + dy;
                let xx = x0.to_f64() as isize + dx;
                if yy < 0 || xx < 0 || yy >= self.height as isize || xx >= self.width as isize {
                    continue;
                }
                acc += wy * wx * self.get(yy as usize, xx as usize);
            }
        }
        acc
    }

    /// Sample with bilinear interpolation, clamping coordinates to the
    /// frame, so constant regions extend past the border.
    fn sample_bilinear_clamped(&self, y: F, x: F) -> F {
        let clamp = |v: F, hi: usize| {
            let hi = F::from_usize(hi - 1);
            if v < F::zero() {
                F::zero()
            } else if v > hi {
                hi
            } else {
                v
            }
        };
        let y = clamp(y, self.height);
        let x = clamp(x, self.width);
        let y0 = y.floor();
        let x0 = x.floor();
        let y1 = (y0 + F::one()).min(F::from_usize(self.height - 1));
        let x1 = (x0 + F::one()).min(F::from_usize(self.width - 1));
        let fy = y - y0;
        let fx = x - x0;
        let (y0, y1) = (y0.to_f64() as usize, y1.to_f64() as usize);
        let (x0, x1) = (x0.to_f64() as usize, x1.to_f64() as usize);
        let top = self.get(y0, x0) * (F::one() - fx) + self.get(y0, x1) * fx;
        let bot = self.get(y1, x0) * (F::one() - fx) + self.get(y1, x1) * fx;
        top * (F::one() - fy) + bot * fy
    }
}

/// Convert raw 8-bit grayscale of any size into the network's input format:
/// unit-range pixels, resized to 48x48 with bilinear interpolation when the
/// source is not already that size. A constant image stays constant.
pub fn preprocess_image<F: Scalar>(raw: &[u8], height: usize, width: usize) -> Result<GrayImage<F>> {
    let src = GrayImage::<F>::from_u8(height, width, raw)?;
    if height == IMAGE_SIDE && width == IMAGE_SIDE {
        return Ok(src);
    }
    let mut pixels = Vec::with_capacity(IMAGE_SIDE * IMAGE_SIDE);
    let sy = height as f64 / IMAGE_SIDE as f64;
    let sx = width as f64 / IMAGE_SIDE as f64;
    for y in 0..IMAGE_SIDE {
        for x in 0..IMAGE_SIDE {
            let src_y = F::from_f64((y as f64 + 0.5) * sy - 0.5);
            let src_x = F::from_f64((x as f64 + 0.5) * sx - 0.5);
            let v = src.sample_bilinear_clamped(src_y, src_x);
            // Interpolation of in-range values stays in range up to rounding.
            pixels.push(v.max(F::zero()).min(F::one()));
        }
    }
    GrayImage::new(IMAGE_SIDE, IMAGE_SIDE, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn native_size_is_scaled_only() {
        let raw: Vec<u8> = (0..48 * 48).map(|i| (i % 256) as u8).collect();
        let img = preprocess_image::<f64>(&raw, 48, 48).unwrap();
        assert_eq!(img.height(), 48);
        assert_eq!(img.width(), 48);
        assert!((img.get(0, 10) - 10.0 / 255.0).abs() < 1e-15);
        assert!((img.get(0, 0) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn constant_image_resizes_to_constant() {
        let raw = vec![100u8; 96 * 96];
        let img = preprocess_image::<f64>(&raw, 96, 96).unwrap();
        for &p in img.pixels() {
            assert!((p - 100.0 / 255.0).abs() < 1e-12);
        }
    }

    #[test]
    fn upscale_preserves_linear_ramp_interior() {
        // A horizontal ramp stays a ramp under bilinear resampling.
        let raw: Vec<u8> = (0..24 * 24).map(|i| ((i % 24) * 10) as u8).collect();
        let img = preprocess_image::<f64>(&raw, 24, 24).unwrap();
        // Interior columns must be monotone left to right.
        for x in 1..47 {
            assert!(img.get(24, x) >= img.get(24, x - 1));
        }
    }

    #[test]
    fn rejects_out_of_range_pixels() {
        assert!(GrayImage::new(1, 2, vec![0.5, 1.5]).is_err());
        assert!(GrayImage::new(1, 2, vec![0.5, f64::NAN]).is_err());
    }

    #[test]
    fn rejects_size_mismatch() {
        assert!(GrayImage::<f64>::from_u8(2, 2, &[0, 0, 0]).is_err());
    }

    #[test]
    fn zero_padded_sampling_falls_off_outside() {
        let img = GrayImage::<f64>::new(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(img.sample_bilinear_zero(0.0, 0.0), 1.0);
        assert_eq!(img.sample_bilinear_zero(-5.0, 0.0), 0.0);
        // Halfway off the edge blends with zero.
        assert!((img.sample_bilinear_zero(-0.5, 0.0) - 0.5).abs() < 1e-12);
    }
}
