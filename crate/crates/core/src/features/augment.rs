//! Seeded rigid-motion augmentation: small random rotations about the image
//! centre plus small translations, applied consistently to the image and its
//! landmarks. Every draw is a pure function of `(seed, sample_id,
//! draw_index)`, so augmented datasets are reproducible element by element.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::features::image::GrayImage;
use crate::features::landmarks::LandmarkSet;
use crate::scalar::Scalar;

/// Ranges for the random rigid motion and the dataset expansion factor.
#[derive(Debug, Clone, Copy)]
pub struct AugmentSpec {
    /// Maximum absolute translation along each axis, in pixels.
    pub max_translate_px: f64,
    /// Maximum absolute rotation, in degrees.
    pub max_rotate_deg: f64,
    /// Number of variants emitted per source sample, identity included.
    pub expansion: usize,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        AugmentSpec { max_translate_px: 4.0, max_rotate_deg: 15.0, expansion: 30 }
    }
}

fn draw_rng(seed: u64, sample_id: u64, draw_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&sample_id.to_le_bytes());
    key[16..24].copy_from_slice(&draw_index.to_le_bytes());
    key[24..32].copy_from_slice(b"aug-draw");
    ChaCha8Rng::from_seed(key)
}

/// Rotate by `angle_deg` about the image centre, then translate by
/// `(dx, dy)` pixels. The image is resampled bilinearly through the inverse
/// map with zero fill outside the source frame; landmarks are mapped through
/// the forward transform.
pub fn apply_rigid_transform<F: Scalar>(
    image: &GrayImage<F>,
    landmarks: &LandmarkSet<F>,
    angle_deg: f64,
    dx: f64,
    dy: f64,
) -> Result<(GrayImage<F>, LandmarkSet<F>)> {
    let h = image.height();
    let w = image.width();
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let theta = angle_deg.to_radians();
    let (sin, cos) = theta.sin_cos();

    // Inverse map: undo the translation, then rotate by -theta about centre.
    let mut pixels = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let px = x as f64 - dx - cx;
            let py = y as f64 - dy - cy;
            let sx = cos * px + sin * py + cx;
            let sy = -sin * px + cos * py + cy;
            pixels.push(image.sample_bilinear_zero(F::from_f64(sy), F::from_f64(sx)));
        }
    }
    // Resampling convexly combines in-range pixels with zero fill, so the
    // result is already in range up to rounding.
    let pixels = pixels
        .into_iter()
        .map(|p| p.max(F::zero()).min(F::one()))
        .collect();
    let out_image = GrayImage::new(h, w, pixels)?;

    let out_landmarks = landmarks.map_points(|x, y| {
        let px = x.to_f64() - cx;
        let py = y.to_f64() - cy;
        let nx = cos * px - sin * py + cx + dx;
        let ny = sin * px + cos * py + cy + dy;
        (F::from_f64(nx), F::from_f64(ny))
    });
    Ok((out_image, out_landmarks))
}

/// Produce variant `draw_index` of a sample. Draw 0 is always the identity,
/// so an expansion of 1 reproduces the original dataset; draws 1 and up
/// sample a rotation angle, then an x translation, then a y translation,
/// uniformly from the ranges in `spec`.
pub fn augment_sample<F: Scalar>(
    image: &GrayImage<F>,
    landmarks: &LandmarkSet<F>,
    spec: &AugmentSpec,
    seed: u64,
    sample_id: u64,
    draw_index: u64,
) -> Result<(GrayImage<F>, LandmarkSet<F>)> {
    if draw_index == 0 {
        return Ok((image.clone(), landmarks.clone()));
    }
    let mut rng = draw_rng(seed, sample_id, draw_index);
    let angle = rng.random_range(-spec.max_rotate_deg..=spec.max_rotate_deg);
    let dx = rng.random_range(-spec.max_translate_px..=spec.max_translate_px);
    let dy = rng.random_range(-spec.max_translate_px..=spec.max_translate_px);
    apply_rigid_transform(image, landmarks, angle, dx, dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{IMAGE_SIDE, NUM_LANDMARKS};

    fn test_image() -> GrayImage<f64> {
        let mut pixels = vec![0.0; IMAGE_SIDE * IMAGE_SIDE];
        pixels[20 * IMAGE_SIDE + 30] = 1.0;
        GrayImage::new(IMAGE_SIDE, IMAGE_SIDE, pixels).unwrap()
    }

    fn test_landmarks() -> LandmarkSet<f64> {
        LandmarkSet::new(
            (0..NUM_LANDMARKS).map(|i| (10.0 + (i % 8) as f64, 12.0 + (i / 8) as f64)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn draw_zero_is_the_identity() {
        let img = test_image();
        let lm = test_landmarks();
        let (i2, l2) = augment_sample(&img, &lm, &AugmentSpec::default(), 7, 3, 0).unwrap();
        assert_eq!(i2.pixels(), img.pixels());
        assert_eq!(l2.points(), lm.points());
    }

    #[test]
    fn draws_are_reproducible_and_distinct() {
        let img = test_image();
        let lm = test_landmarks();
        let spec = AugmentSpec::default();
        let (a1, _) = augment_sample(&img, &lm, &spec, 7, 3, 1).unwrap();
        let (a2, _) = augment_sample(&img, &lm, &spec, 7, 3, 1).unwrap();
        let (b, _) = augment_sample(&img, &lm, &spec, 7, 3, 2).unwrap();
        let (c, _) = augment_sample(&img, &lm, &spec, 8, 3, 1).unwrap();
        assert_eq!(a1.pixels(), a2.pixels());
        assert_ne!(a1.pixels(), b.pixels());
        assert_ne!(a1.pixels(), c.pixels());
    }

    #[test]
    fn pure_translation_moves_the_bright_pixel() {
        let img = test_image();
        let lm = test_landmarks();
        let (shifted, moved) = apply_rigid_transform(&img, &lm, 0.0, 3.0, -2.0).unwrap();
        assert_eq!(shifted.get(18, 33), 1.0);
        assert_eq!(shifted.get(20, 30), 0.0);
        assert_eq!(moved.points()[0], (13.0, 10.0));
    }

    #[test]
    fn rotation_keeps_landmarks_consistent_with_the_image() {
        // Put the bright pixel at a landmark, rotate, and check the moved
        // landmark lands on the moved bright pixel.
        let mut pixels = vec![0.0; IMAGE_SIDE * IMAGE_SIDE];
        pixels[20 * IMAGE_SIDE + 30] = 1.0;
        let img = GrayImage::new(IMAGE_SIDE, IMAGE_SIDE, pixels).unwrap();
        let lm = LandmarkSet::new(vec![(30.0, 20.0); NUM_LANDMARKS]).unwrap();
        let (rimg, rlm) = apply_rigid_transform(&img, &lm, 30.0, 1.0, 2.0).unwrap();
        let (lx, ly) = rlm.points()[0];
        // Resampling spreads the delta over at most 4 pixels, so the value
        // read back at the tracked landmark keeps at least 1/4 of the mass.
        let v = rimg.sample_bilinear_zero(ly, lx);
        assert!(v >= 0.25 - 1e-12, "landmark no longer tracks the bright pixel: {v}");
        // And the image maximum must sit in the landmark's neighbourhood.
        let (mut best, mut best_yx) = (-1.0, (0usize, 0usize));
        for y in 0..IMAGE_SIDE {
            for x in 0..IMAGE_SIDE {
                if rimg.get(y, x) > best {
                    best = rimg.get(y, x);
                    best_yx = (y, x);
                }
            }
        }
        assert!((best_yx.0 as f64 - ly).abs() <= 1.0 && (best_yx.1 as f64 - lx).abs() <= 1.0);
    }

    #[test]
    fn out_of_frame_content_becomes_zero() {
        let img = GrayImage::new(IMAGE_SIDE, IMAGE_SIDE, vec![1.0; IMAGE_SIDE * IMAGE_SIDE]).unwrap();
        let lm = test_landmarks();
        let (shifted, _) = apply_rigid_transform(&img, &lm, 0.0, 10.0, 0.0).unwrap();
        // The ten leftmost columns came from outside the frame.
        for x in 0..9 {
            assert_eq!(shifted.get(24, x), 0.0);
        }
        assert_eq!(shifted.get(24, 20), 1.0);
    }

    #[test]
    fn inverse_rotation_round_trips_interior_landmarks() {
        let lm = test_landmarks();
        let img = test_image();
        let (i1, l1) = apply_rigid_transform(&img, &lm, 12.0, 0.0, 0.0).unwrap();
        let (_, l2) = apply_rigid_transform(&i1, &l1, -12.0, 0.0, 0.0).unwrap();
        for (a, b) in lm.points().iter().zip(l2.points()) {
            assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
        }
    }
}
