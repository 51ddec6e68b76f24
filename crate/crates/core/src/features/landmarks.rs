//! Facial landmark container and similarity normalization.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;
use crate::{LANDMARK_DIM, NUM_LANDMARKS};

/// The 68 landmark points of one face, in image coordinates `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet<F: Scalar> {
    points: Vec<(F, F)>,
}

impl<F: Scalar> LandmarkSet<F> {
    /// Wrap exactly 68 finite points.
    pub fn new(points: Vec<(F, F)>) -> Result<Self> {
        if points.len() != NUM_LANDMARKS {
            return Err(FerError::shape(
                "LandmarkSet",
                format!("expected {NUM_LANDMARKS} points, got {}", points.len()),
            ));
        }
        if !points.iter().all(|&(x, y)| x.is_finite() && y.is_finite()) {
            return Err(FerError::non_finite("landmark coordinates"));
        }
        Ok(LandmarkSet { points })
    }

    /// Parse an interleaved `[x1, y1, x2, y2, ...]` buffer of length 136.
    pub fn from_flat(flat: &[F]) -> Result<Self> {
        if flat.len() != LANDMARK_DIM {
            return Err(FerError::shape(
                "LandmarkSet",
                format!("expected {LANDMARK_DIM} coordinates, got {}", flat.len()),
            ));
        }
        Self::new(flat.chunks(2).map(|c| (c[0], c[1])).collect())
    }

    pub fn points(&self) -> &[(F, F)] {
        &self.points
    }

    /// Apply a point map to every landmark.
    pub fn map_points(&self, f: impl Fn(F, F) -> (F, F)) -> Self {
        LandmarkSet { points: self.points.iter().map(|&(x, y)| f(x, y)).collect() }
    }
}

/// Normalize landmarks to a canonical similarity frame: subtract the
/// centroid, divide by the root-mean-square point radius, and flatten to an
/// interleaved 136-vector. The result is invariant to translation and
/// uniform scaling of the input. Rejects configurations with zero spread
/// (all points coincident), where the scale is undefined.
pub fn normalize_landmarks<F: Scalar>(landmarks: &LandmarkSet<F>) -> Result<Vec<F>> {
    let n = F::from_usize(NUM_LANDMARKS);
    let mut cx = F::zero();
    let mut cy = F::zero();
    for &(x, y) in landmarks.points() {
        cx += x;
        cy += y;
    }
    cx /= n;
    cy /= n;
    let mut sq = F::zero();
    for &(x, y) in landmarks.points() {
        let (dx, dy) = (x - cx, y - cy);
        sq += dx * dx + dy * dy;
    }
    let rms = (sq / n).sqrt();
    if !(rms > F::zero()) {
        return Err(FerError::invalid(
            "landmarks have zero spread; cannot normalize scale",
        ));
    }
    let mut out = Vec::with_capacity(LANDMARK_DIM);
    for &(x, y) in landmarks.points() {
        out.push((x - cx) / rms);
        out.push((y - cy) / rms);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(cx: f64, cy: f64, r: f64) -> LandmarkSet<f64> {
        let pts = (0..NUM_LANDMARKS)
            .map(|i| {
                let t = i as f64 / NUM_LANDMARKS as f64 * std::f64::consts::TAU;
                (cx + r * t.cos(), cy + r * (2.0 * t).sin() * 0.5)
            })
            .collect();
        LandmarkSet::new(pts).unwrap()
    }

    #[test]
    fn output_is_centred_with_unit_rms_radius() {
        let lm = ring(24.0, 20.0, 9.0);
        let v = normalize_landmarks(&lm).unwrap();
        assert_eq!(v.len(), LANDMARK_DIM);
        let (mut sx, mut sy, mut sq) = (0.0, 0.0, 0.0);
        for p in v.chunks(2) {
            sx += p[0];
            sy += p[1];
            sq += p[0] * p[0] + p[1] * p[1];
        }
        assert!(sx.abs() < 1e-12 && sy.abs() < 1e-12);
        assert!((sq / NUM_LANDMARKS as f64 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invariant_to_translation_and_scale() {
        let a = normalize_landmarks(&ring(24.0, 24.0, 9.0)).unwrap();
        let b = normalize_landmarks(&ring(3.0, -40.0, 9.0)).unwrap();
        let c = normalize_landmarks(&ring(24.0, 24.0, 2.25)).unwrap();
        for i in 0..LANDMARK_DIM {
            assert!((a[i] - b[i]).abs() < 1e-12);
            assert!((a[i] - c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_carries_through_to_the_output() {
        let theta = 0.7f64;
        let base = ring(24.0, 24.0, 9.0);
        let rotated = base.map_points(|x, y| {
            let (dx, dy) = (x - 24.0, y - 24.0);
            (24.0 + theta.cos() * dx - theta.sin() * dy, 24.0 + theta.sin() * dx + theta.cos() * dy)
        });
        let a = normalize_landmarks(&base).unwrap();
        let b = normalize_landmarks(&rotated).unwrap();
        for (pa, pb) in a.chunks(2).zip(b.chunks(2)) {
            let rx = theta.cos() * pa[0] - theta.sin() * pa[1];
            let ry = theta.sin() * pa[0] + theta.cos() * pa[1];
            assert!((rx - pb[0]).abs() < 1e-12 && (ry - pb[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_zero_spread() {
        let pts = vec![(5.0, 5.0); NUM_LANDMARKS];
        let lm = LandmarkSet::new(pts).unwrap();
        assert!(normalize_landmarks(&lm).is_err());
    }

    #[test]
    fn rejects_wrong_count_and_non_finite() {
        assert!(LandmarkSet::new(vec![(0.0, 0.0); 10]).is_err());
        let mut pts = vec![(0.0, 0.0); NUM_LANDMARKS];
        pts[3] = (f64::INFINITY, 0.0);
        assert!(LandmarkSet::new(pts).is_err());
    }
}
