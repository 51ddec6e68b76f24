//! One-vs-rest ROC curves with trapezoidal area-under-curve.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::NUM_CLASSES;

/// One operating point of a ROC curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// False-positive rate at this threshold.
    pub fpr: f64,
    /// True-positive rate at this threshold.
    pub tpr: f64,
}

/// A single class's ROC curve, swept from the strictest threshold to the
/// loosest, and the trapezoidal area underneath it.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// Curve points from `(0, 0)` to `(1, 1)`.
    pub points: Vec<RocPoint>,
    /// Trapezoidal area under the curve.
    pub auc: f64,
}

/// One-vs-rest ROC analysis of `[N, 7]` score rows against true labels.
/// A class missing either positives or negatives has no defined curve and
/// yields `None`. Tied scores collapse into a single threshold step, so the
/// result depends only on the ordering of each class's scores.
pub fn roc_auc<F: Scalar>(
    scores: &Tensor<F>,
    labels: &[usize],
) -> Result<[Option<RocCurve>; NUM_CLASSES]> {
    let shape = scores.shape();
    if shape.len() != 2 || shape[1] != NUM_CLASSES {
        return Err(FerError::shape(
            "roc scores",
            format!("expected [N, {NUM_CLASSES}], got {shape:?}"),
        ));
    }
    let n = shape[0];
    if n == 0 {
        return Err(FerError::invalid("cannot sweep ROC thresholds over zero samples"));
    }
    if labels.len() != n {
        return Err(FerError::invalid(format!(
            "{n} score rows against {} labels",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&label| label >= NUM_CLASSES) {
        return Err(FerError::invalid(format!(
            "labels must be below {NUM_CLASSES}, got {bad}"
        )));
    }
    if !scores.all_finite() {
        return Err(FerError::invalid("scores must be finite"));
    }
    let data = scores.data();
    let mut curves: [Option<RocCurve>; NUM_CLASSES] = Default::default();
    for (class, slot) in curves.iter_mut().enumerate() {
        let column: Vec<f64> = (0..n).map(|row| data[row * NUM_CLASSES + class].to_f64()).collect();
        let positive: Vec<bool> = labels.iter().map(|&label| label == class).collect();
        *slot = one_vs_rest(&column, &positive);
    }
    Ok(curves)
}

/// Sweeps thresholds over one class's scores, descending, ties grouped.
fn one_vs_rest(scores: &[f64], positive: &[bool]) -> Option<RocCurve> {
    let positives = positive.iter().filter(|&&p| p).count();
    let negatives = positive.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let mut true_positives = 0usize;
    let mut false_positives = 0usize;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        for &index in &order[start..end] {
            if positive[index] {
                true_positives += 1;
            } else {
                false_positives += 1;
            }
        }
        points.push(RocPoint {
            fpr: false_positives as f64 / negatives as f64,
            tpr: true_positives as f64 / positives as f64,
        });
        start = end;
    }
    let auc = points
        .windows(2)
        .map(|pair| (pair[1].fpr - pair[0].fpr) * (pair[1].tpr + pair[0].tpr) / 2.0)
        .sum();
    Some(RocCurve { points, auc })
}

/// Renders defined curves as CSV lines under a `class,fpr,tpr` header.
pub fn roc_csv(curves: &[Option<RocCurve>; NUM_CLASSES]) -> String {
    let mut out = String::from("class,fpr,tpr\n");
    for (class, curve) in curves.iter().enumerate() {
        let Some(curve) = curve else { continue };
        for point in &curve.points {
            out.push_str(&format!("{class},{},{}\n", point.fpr, point.tpr));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn score_tensor(rows: Vec<[f64; NUM_CLASSES]>) -> Tensor<f64> {
        let n = rows.len();
        Tensor::new(vec![n, NUM_CLASSES], rows.into_iter().flatten().collect()).unwrap()
    }

    fn uniform_scores(n: usize, seed: u64) -> (Tensor<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * NUM_CLASSES).map(|_| rng.random_range(0.0..1.0)).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..NUM_CLASSES)).collect();
        (Tensor::new(vec![n, NUM_CLASSES], data).unwrap(), labels)
    }

    #[test]
    fn perfectly_separated_scores_reach_auc_one() {
        let scores = score_tensor(vec![
            [0.9, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.8, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.2, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.1, 0.9, 0.0, 0.0, 0.0, 0.0, 0.0],
        ]);
        let curves = roc_auc(&scores, &[0, 0, 1, 1]).unwrap();
        assert_eq!(curves[0].as_ref().unwrap().auc, 1.0);
        assert_eq!(curves[1].as_ref().unwrap().auc, 1.0);
    }

    #[test]
    fn inverted_scores_reach_auc_zero() {
        let scores = score_tensor(vec![
            [0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.9, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ]);
        let curves = roc_auc(&scores, &[0, 0, 1, 1]).unwrap();
        assert_eq!(curves[0].as_ref().unwrap().auc, 0.0);
    }

    #[test]
    fn tied_scores_collapse_into_one_diagonal_step() {
        let scores = score_tensor(vec![[0.5; NUM_CLASSES]; 6]);
        let curves = roc_auc(&scores, &[0, 0, 1, 1, 2, 2]).unwrap();
        let curve = curves[0].as_ref().unwrap();
        assert_eq!(curve.points, vec![RocPoint { fpr: 0.0, tpr: 0.0 }, RocPoint { fpr: 1.0, tpr: 1.0 }]);
        assert_eq!(curve.auc, 0.5);
    }

    #[test]
    fn a_class_absent_from_the_labels_has_no_curve() {
        let (scores, _) = uniform_scores(10, 3);
        let labels = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let curves = roc_auc(&scores, &labels).unwrap();
        assert!(curves[0].is_some());
        assert!(curves[1].is_some());
        for class in 2..NUM_CLASSES {
            assert!(curves[class].is_none());
        }
    }

    #[test]
    fn a_class_with_no_negatives_has_no_curve() {
        let (scores, _) = uniform_scores(4, 4);
        let curves = roc_auc(&scores, &[2, 2, 2, 2]).unwrap();
        assert!(curves.iter().all(Option::is_none));
    }

    #[test]
    fn random_scores_hover_near_one_half() {
        let (scores, labels) = uniform_scores(10_000, 7);
        let curves = roc_auc(&scores, &labels).unwrap();
        for curve in &curves {
            let auc = curve.as_ref().unwrap().auc;
            assert!((auc - 0.5).abs() < 0.05, "random AUC {auc} strayed from 0.5");
        }
    }

    #[test]
    fn auc_depends_only_on_score_order() {
        let (scores, labels) = uniform_scores(200, 9);
        let baseline = roc_auc(&scores, &labels).unwrap();
        let transformed: Vec<f64> = scores.data().iter().map(|&v| (4.0 * v).exp()).collect();
        let transformed = Tensor::new(vec![200, NUM_CLASSES], transformed).unwrap();
        let after = roc_auc(&transformed, &labels).unwrap();
        for (a, b) in baseline.iter().zip(&after) {
            assert_eq!(a.as_ref().unwrap().auc, b.as_ref().unwrap().auc);
        }
    }

    #[test]
    fn curve_points_never_move_backwards() {
        let (scores, labels) = uniform_scores(300, 11);
        for curve in roc_auc(&scores, &labels).unwrap().iter().flatten() {
            let first = curve.points.first().unwrap();
            let last = curve.points.last().unwrap();
            assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
            assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
            for pair in curve.points.windows(2) {
                assert!(pair[1].fpr >= pair[0].fpr);
                assert!(pair[1].tpr >= pair[0].tpr);
            }
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let (scores, _) = uniform_scores(4, 13);
        assert!(roc_auc(&scores, &[0, 1]).is_err());
        assert!(roc_auc(&scores, &[0, 1, 2, 7]).is_err());
        let bad_shape = Tensor::<f64>::zeros(vec![4, 3]);
        assert!(roc_auc(&bad_shape, &[0, 1, 2, 3]).is_err());
        let infinite = Tensor::new(vec![1, NUM_CLASSES], vec![f64::INFINITY; NUM_CLASSES]).unwrap();
        assert!(roc_auc(&infinite, &[0]).is_err());
    }

    #[test]
    fn csv_lists_defined_curves_under_the_header() {
        let scores = score_tensor(vec![
            [0.9, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.1, 0.9, 0.0, 0.0, 0.0, 0.0, 0.0],
        ]);
        let curves = roc_auc(&scores, &[0, 1]).unwrap();
        let csv = roc_csv(&curves);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "class,fpr,tpr");
        assert!(lines[1..].iter().all(|line| line.starts_with("0,") || line.starts_with("1,")));
        assert!(lines.len() > 1);
    }
}
