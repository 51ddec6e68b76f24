//! Histogram-of-oriented-gradients descriptor for 48x48 images.
//!
//! Pipeline: centred `[-1, 0, 1]` gradients with replicated borders, unsigned
//! orientation over `[0, 180)` degrees split into 9 bins with linear
//! interpolation between neighbouring bin centres, 8x8-pixel cells (a 6x6
//! cell grid), and 2x2-cell blocks at stride 1 (a 5x5 block grid), each block
//! L2-normalized. Output width: 5 * 5 * 2 * 2 * 9 = 900.

use crate::error::{FerError, Result};
use crate::features::image::GrayImage;
use crate::scalar::Scalar;
use crate::{HOG_DIM, IMAGE_SIDE};

const CELL: usize = 8;
const CELLS: usize = IMAGE_SIDE / CELL;
const BINS: usize = 9;
const BIN_WIDTH_DEG: f64 = 180.0 / BINS as f64;
const BLOCKS: usize = CELLS - 1;
const NORM_EPS: f64 = 1e-6;

/// Compute the 900-wide HOG descriptor of a 48x48 image. Blocks are emitted
/// row-major, cells within a block row-major, bins in angle order.
pub fn extract_hog<F: Scalar>(image: &GrayImage<F>) -> Result<Vec<F>> {
    if image.height() != IMAGE_SIDE || image.width() != IMAGE_SIDE {
        return Err(FerError::shape(
            "extract_hog",
            format!("expected {IMAGE_SIDE}x{IMAGE_SIDE} image, got {}x{}", image.height(), image.width()),
        ));
    }

    // Per-cell orientation histograms.
    let mut cells = vec![[0.0f64; BINS]; CELLS * CELLS];
    let side = IMAGE_SIDE as isize;
    let at = |y: isize, x: isize| -> f64 {
        // Replicate the border pixel for out-of-frame taps.
        let y = y.clamp(0, side - 1) as usize;
        let x = x.clamp(0, side - 1) as usize;
        image.get(y, x).to_f64()
    };
    for y in 0..IMAGE_SIDE {
        for x in 0..IMAGE_SIDE {
            let (yi, xi) = (y as isize, x as isize);
            let gx = at(yi, xi + 1) - at(yi, xi - 1);
            let gy = at(yi + 1, xi) - at(yi - 1, xi);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let mut angle = gy.atan2(gx).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            if angle >= 180.0 {
                angle -= 180.0;
            }
            // Position in units of bin centres (centre b sits at b * 20 deg);
            // split the vote linearly between the two nearest centres.
            let u = angle / BIN_WIDTH_DEG;
            let lo = u.floor();
            let frac = u - lo;
            let b_lo = lo as usize % BINS;
            let b_hi = (b_lo + 1) % BINS;
            let cell = (y / CELL) * CELLS + x / CELL;
            cells[cell][b_lo] += mag * (1.0 - frac);
            cells[cell][b_hi] += mag * frac;
        }
    }

    // 2x2-cell blocks at stride 1, each L2-normalized.
    let mut out = Vec::with_capacity(HOG_DIM);
    for by in 0..BLOCKS {
        for bx in 0..BLOCKS {
            let mut block = [0.0f64; 4 * BINS];
            for (slot, (cy, cx)) in
                [(by, bx), (by, bx + 1), (by + 1, bx), (by + 1, bx + 1)].iter().enumerate()
            {
                block[slot * BINS..(slot + 1) * BINS]
                    .copy_from_slice(&cells[cy * CELLS + cx]);
            }
            let norm = (block.iter().map(|v| v * v).sum::<f64>() + NORM_EPS).sqrt();
            for v in block {
                out.push(F::from_f64(v / norm));
            }
        }
    }
    debug_assert_eq!(out.len(), HOG_DIM);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_from_fn(f: impl Fn(usize, usize) -> f64) -> GrayImage<f64> {
        let mut pixels = Vec::with_capacity(IMAGE_SIDE * IMAGE_SIDE);
        for y in 0..IMAGE_SIDE {
            for x in 0..IMAGE_SIDE {
                pixels.push(f(y, x));
            }
        }
        GrayImage::new(IMAGE_SIDE, IMAGE_SIDE, pixels).unwrap()
    }

    #[test]
    fn output_width_is_900() {
        let img = image_from_fn(|y, x| ((y * 7 + x * 13) % 29) as f64 / 29.0);
        assert_eq!(extract_hog(&img).unwrap().len(), HOG_DIM);
    }

    #[test]
    fn constant_image_gives_all_zeros() {
        let img = image_from_fn(|_, _| 0.6);
        let hog = extract_hog(&img).unwrap();
        assert!(hog.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn descriptor_entries_are_non_negative_and_finite() {
        let img = image_from_fn(|y, x| ((y * 31 + x * 17) % 97) as f64 / 96.0);
        let hog = extract_hog(&img).unwrap();
        assert!(hog.iter().all(|&v| v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn block_norms_are_at_most_one() {
        let img = image_from_fn(|y, x| (y as f64 / 47.0) * (x as f64 / 47.0));
        let hog = extract_hog(&img).unwrap();
        for block in hog.chunks(36) {
            let norm: f64 = block.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn vertical_step_edge_votes_into_the_horizontal_gradient_bin() {
        // Dark left half, bright right half: gradients point along +x, so
        // the angle is 0 degrees, which is exactly the centre of bin 0.
        let img = image_from_fn(|_, x| if x < 24 { 0.0 } else { 1.0 });
        let hog = extract_hog(&img).unwrap();
        let total: f64 = hog.iter().sum();
        let bin0: f64 = hog.chunks(9).map(|h| h[0]).sum();
        assert!(total > 0.0);
        assert!(bin0 / total >= 0.9, "bin-0 share {}", bin0 / total);
    }

    #[test]
    fn horizontal_step_edge_splits_between_the_vertical_bins() {
        // Gradient along +y is 90 degrees: exactly between centres 80 and
        // 100, so bins 4 and 5 share the mass equally.
        let img = image_from_fn(|y, _| if y < 24 { 0.0 } else { 1.0 });
        let hog = extract_hog(&img).unwrap();
        let total: f64 = hog.iter().sum();
        let split: f64 = hog.chunks(9).map(|h| h[4] + h[5]).sum();
        assert!(split / total >= 0.9);
    }

    #[test]
    fn rejects_wrong_size() {
        let img = GrayImage::new(2, 2, vec![0.0; 4]).unwrap();
        assert!(extract_hog(&img).is_err());
    }
}
