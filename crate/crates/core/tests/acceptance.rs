//! Acceptance gate for the whole crate: one integration test per release
//! criterion. Each test asserts the property it names and prints a single
//! `ACCEPTANCE <criterion>: PASS` line, so the harness output doubles as
//! the release checklist. Every check here runs on the CPU in 64-bit
//! precision and finishes at desk scale.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ferfuse::data::{batch_tensors, synthetic_dataset, MultimodalSample};
use ferfuse::eval::{roc_auc, robustness_eval, ConfusionMatrix, PerturbScope, PerturbSpec};
use ferfuse::features::{extract_hog, AugmentSpec, GrayImage};
use ferfuse::gradcheck::run_full_suite;
use ferfuse::model::{save_checkpoint, ArchPreset, FerNetwork};
use ferfuse::ops;
use ferfuse::train::{train, TrainConfig};
use ferfuse::{Tensor, HOG_DIM, IMAGE_SIDE, NUM_CLASSES};

fn uniform(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Every analytic gradient agrees with 64-bit central finite differences:
/// each operation within 1e-5 over 100 random points, the full network
/// end to end within 1e-4, all inside a two-minute budget.
#[test]
fn gradients_match_finite_differences() {
    let start = Instant::now();
    let reports = run_full_suite(100, 100).expect("gradient suite");
    let elapsed = start.elapsed();

    assert!(reports.len() >= 10, "expected per-layer coverage, got {} checks", reports.len());
    assert!(reports.iter().any(|r| r.layer == "full_network"), "end-to-end check missing");
    for r in &reports {
        let bound = if r.layer == "full_network" { 1e-4 } else { 1e-5 };
        println!(
            "  {:<24} points {:>4} max_rel_err {:.3e} bound {:.0e}",
            r.layer, r.points, r.max_rel_error, bound
        );
        assert!(r.points >= 100, "{} checked only {} points", r.layer, r.points);
        assert!(
            r.passed(),
            "{} exceeded its tolerance: {:.3e} > {:.0e}",
            r.layer,
            r.max_rel_error,
            r.tolerance
        );
        assert!(
            r.max_rel_error < bound,
            "{} exceeded the acceptance bound: {:.3e} >= {:.0e}",
            r.layer,
            r.max_rel_error,
            bound
        );
    }
    assert!(
        elapsed < Duration::from_secs(120),
        "gradient suite took {:.1}s, budget is 120s",
        elapsed.as_secs_f64()
    );
    println!(
        "ACCEPTANCE gradients_match_finite_differences: PASS ({} checks in {:.1}s)",
        reports.len(),
        elapsed.as_secs_f64()
    );
}

fn conv2d_reference(input: &Tensor<f64>, weight: &Tensor<f64>, bias: &Tensor<f64>) -> Vec<f64> {
    let (n, cin, h, w) = {
        let s = input.shape();
        (s[0], s[1], s[2], s[3])
    };
    let (cout, k) = (weight.shape()[0], weight.shape()[2]);
    let pad = (k - 1) / 2;
    let (x, wt, b) = (input.data(), weight.data(), bias.data());
    let mut out = vec![0.0; n * cout * h * w];
    for i in 0..n {
        for co in 0..cout {
            for oy in 0..h {
                for ox in 0..w {
                    let mut acc = b[co];
                    for ci in 0..cin {
                        for dy in 0..k {
                            for dx in 0..k {
                                let (sy, sx) = (oy + dy, ox + dx);
                                if sy < pad || sx < pad || sy - pad >= h || sx - pad >= w {
                                    continue;
                                }
                                acc += x[((i * cin + ci) * h + sy - pad) * w + sx - pad]
                                    * wt[((co * cin + ci) * k + dy) * k + dx];
                            }
                        }
                    }
                    out[((i * cout + co) * h + oy) * w + ox] = acc;
                }
            }
        }
    }
    out
}

fn dense_reference(input: &Tensor<f64>, weight: &Tensor<f64>, bias: &Tensor<f64>) -> Vec<f64> {
    let (n, d_in) = (input.shape()[0], input.shape()[1]);
    let d_out = weight.shape()[0];
    let mut out = vec![0.0; n * d_out];
    for i in 0..n {
        for o in 0..d_out {
            let mut acc = bias.data()[o];
            for j in 0..d_in {
                acc += input.data()[i * d_in + j] * weight.data()[o * d_in + j];
            }
            out[i * d_out + o] = acc;
        }
    }
    out
}

/// Re-derivation of the 900-wide descriptor from its documented contract:
/// centred gradients with replicated borders, 9 unsigned-orientation bins
/// with linear votes, 8x8 cells, 2x2 blocks at stride 1, L2 norm with the
/// epsilon inside the root. Coded independently of the production path:
/// whole-image gradient fields first, then per-cell accumulation, then
/// flat-indexed block writes.
fn hog_reference(image: &GrayImage<f64>) -> Vec<f64> {
    let n = IMAGE_SIDE;
    let edge = |v: isize| v.clamp(0, n as isize - 1) as usize;
    let mut gx = vec![0.0f64; n * n];
    let mut gy = vec![0.0f64; n * n];
    for y in 0..n {
        for x in 0..n {
            gx[y * n + x] = image.get(y, edge(x as isize + 1)) - image.get(y, edge(x as isize - 1));
            gy[y * n + x] = image.get(edge(y as isize + 1), x) - image.get(edge(y as isize - 1), x);
        }
    }

    let mut hist = vec![0.0f64; 6 * 6 * 9];
    for cy in 0..6 {
        for cx in 0..6 {
            let base = (cy * 6 + cx) * 9;
            for y in cy * 8..cy * 8 + 8 {
                for x in cx * 8..cx * 8 + 8 {
                    let (dx, dy) = (gx[y * n + x], gy[y * n + x]);
                    let mag = (dx * dx + dy * dy).sqrt();
                    if mag == 0.0 {
                        continue;
                    }
                    let mut deg = dy.atan2(dx) * 180.0 / std::f64::consts::PI;
                    if deg < 0.0 {
                        deg += 180.0;
                    }
                    if deg >= 180.0 {
                        deg -= 180.0;
                    }
                    let pos = deg / 20.0;
                    let t = pos - pos.floor();
                    let b0 = pos.floor() as usize % 9;
                    hist[base + b0] += mag * (1.0 - t);
                    hist[base + (b0 + 1) % 9] += mag * t;
                }
            }
        }
    }

    let mut out = Vec::with_capacity(HOG_DIM);
    for by in 0..5 {
        for bx in 0..5 {
            let cells = [(by, bx), (by, bx + 1), (by + 1, bx), (by + 1, bx + 1)];
            let mut sq = 0.0;
            for &(cy, cx) in &cells {
                let base = (cy * 6 + cx) * 9;
                for b in 0..9 {
                    sq += hist[base + b] * hist[base + b];
                }
            }
            let norm = (sq + 1e-6).sqrt();
            for &(cy, cx) in &cells {
                let base = (cy * 6 + cx) * 9;
                for b in 0..9 {
                    out.push(hist[base + b] / norm);
                }
            }
        }
    }
    out
}

/// The numeric kernels agree with brute-force loop oracles: convolution and
/// dense layers to 1e-12 over 1000 random shapes with every dimension at
/// most 8, and the descriptor against an independently coded reference to
/// 1e-9 on 50 random 48x48 images.
#[test]
fn kernels_match_brute_force_oracles() {
    let config = PropConfig { cases: 1000, failure_persistence: None, ..PropConfig::default() };

    let mut runner = TestRunner::new(config.clone());
    runner
        .run(
            &(1usize..=8, 1usize..=8, 1usize..=8, 1usize..=8, 1usize..=8, any::<u64>()),
            |(n, cin, cout, h, w, seed)| {
                let odd: Vec<usize> = (1..=h.min(w)).step_by(2).collect();
                let k = odd[(seed % odd.len() as u64) as usize];
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let input = Tensor::new(vec![n, cin, h, w], uniform(&mut rng, n * cin * h * w)).unwrap();
                let weight =
                    Tensor::new(vec![cout, cin, k, k], uniform(&mut rng, cout * cin * k * k)).unwrap();
                let bias = Tensor::new(vec![cout], uniform(&mut rng, cout)).unwrap();
                let got = ops::conv2d(&input, &weight, &bias).unwrap();
                let want = conv2d_reference(&input, &weight, &bias);
                prop_assert_eq!(got.shape(), &[n, cout, h, w][..]);
                for (i, (a, b)) in got.data().iter().zip(&want).enumerate() {
                    prop_assert!(
                        (a - b).abs() <= 1e-12,
                        "conv2d [{},{},{},{}] k{} entry {}: {} vs {}",
                        n, cin, h, w, k, i, a, b
                    );
                }
                Ok(())
            },
        )
        .unwrap();

    let mut runner = TestRunner::new(config);
    runner
        .run(&(1usize..=8, 1usize..=8, 1usize..=8, any::<u64>()), |(n, d_in, d_out, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let input = Tensor::new(vec![n, d_in], uniform(&mut rng, n * d_in)).unwrap();
            let weight = Tensor::new(vec![d_out, d_in], uniform(&mut rng, d_out * d_in)).unwrap();
            let bias = Tensor::new(vec![d_out], uniform(&mut rng, d_out)).unwrap();
            let got = ops::dense(&input, &weight, &bias).unwrap();
            let want = dense_reference(&input, &weight, &bias);
            prop_assert_eq!(got.shape(), &[n, d_out][..]);
            for (i, (a, b)) in got.data().iter().zip(&want).enumerate() {
                prop_assert!(
                    (a - b).abs() <= 1e-12,
                    "dense [{},{}]x[{},{}] entry {}: {} vs {}",
                    n, d_in, d_out, d_in, i, a, b
                );
            }
            Ok(())
        })
        .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for case in 0..50 {
        let pixels: Vec<f64> =
            (0..IMAGE_SIDE * IMAGE_SIDE).map(|_| rng.random_range(0.0..1.0)).collect();
        let image = GrayImage::new(IMAGE_SIDE, IMAGE_SIDE, pixels).unwrap();
        let got = extract_hog::<f64>(&image).unwrap();
        let want = hog_reference(&image);
        assert_eq!(got.len(), want.len());
        for (i, (a, b)) in got.iter().zip(&want).enumerate() {
            assert!(
                (a - b).abs() <= 1e-9,
                "descriptor image {case} entry {i}: {a} vs {b}"
            );
        }
    }

    println!(
        "ACCEPTANCE kernels_match_brute_force_oracles: PASS \
         (1000 conv2d + 1000 dense cases to 1e-12, 50 descriptor images to 1e-9)"
    );
}

/// The full-size architecture has the contracted widths: every branch
/// embeds into exactly 128 features, the fused vector is exactly 384 wide,
/// pooling walks the spatial side 48 -> 24 -> 12 -> 6, and class
/// probabilities are a valid distribution per row.
#[test]
fn architecture_invariants_hold() {
    let preset = ArchPreset::Full;
    assert_eq!(preset.embedding_dim(), 128);
    assert_eq!(preset.fused_dim(), 384);
    assert_eq!(preset.final_spatial(), 6);
    assert_eq!(IMAGE_SIDE / 2 / 2 / 2, preset.final_spatial());

    let shapes: BTreeMap<String, Vec<usize>> = preset.parameter_shapes().into_iter().collect();
    assert_eq!(shapes["cnn.fc3.weight"][0], 128, "image branch embedding width");
    assert_eq!(shapes["lnn.fc2.weight"][0], 128, "landmark branch embedding width");
    assert_eq!(shapes["hnn.fc3.weight"][0], 128, "descriptor branch embedding width");
    assert_eq!(shapes["head.fc1.weight"], vec![384, 384], "fusion head consumes 3 x 128");
    assert_eq!(shapes["head.out.weight"], vec![NUM_CLASSES, 384]);
    assert_eq!(
        shapes["cnn.fc1.weight"][1],
        128 * 6 * 6,
        "flatten width pins the pooled 6x6 spatial grid"
    );

    let data = synthetic_dataset::<f64>(3, 99).unwrap();
    let net = FerNetwork::<f64>::new(preset, 3).unwrap();
    let (images, landmarks, hog, _) = data.batch(&[0, 1, 2]).unwrap();
    let logits = net.forward_infer(&images, &landmarks, &hog).unwrap();
    assert_eq!(logits.shape(), &[3, NUM_CLASSES]);
    let probs = ops::softmax(&logits).unwrap();
    for row in probs.data().chunks(NUM_CLASSES) {
        let sum: f64 = row.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-6, "class probabilities summed to {sum}");
        assert!(row.iter().all(|&p| p >= 0.0), "negative probability in {row:?}");
    }

    assert_eq!(ArchPreset::Tiny.fused_dim(), 3 * ArchPreset::Tiny.embedding_dim());
    println!("ACCEPTANCE architecture_invariants_hold: PASS");
}

/// A freshly seeded reduced-preset network overfits a 64-sample synthetic
/// dataset to at least 95% training accuracy well within 300 epochs and
/// five CPU minutes, and the loss on a fixed 32-sample batch halves well
/// within 100 epochs.
#[test]
fn training_overfits_synthetic_data() {
    let start = Instant::now();
    let no_expansion = AugmentSpec { expansion: 1, ..AugmentSpec::default() };

    let data = synthetic_dataset::<f64>(64, 21).unwrap();
    let mut config = TrainConfig {
        preset: ArchPreset::Tiny,
        epochs: 80,
        batch_size: 64,
        seed: 42,
        augment: no_expansion,
        ..TrainConfig::default()
    };
    let mut net = FerNetwork::<f64>::new(config.preset, config.seed).unwrap();
    let report = train(&mut net, &data, None, &config, |_| {}).unwrap();
    let best = report.history.iter().map(|r| r.train_acc).fold(0.0, f64::max);
    let hit = report
        .history
        .iter()
        .find(|r| r.train_acc >= 0.95)
        .unwrap_or_else(|| panic!("no epoch of {} reached 95% accuracy; best {best:.3}", config.epochs));
    assert!(hit.epoch <= 300);

    config.epochs = 40;
    config.batch_size = 32;
    config.seed = 7;
    let fixed = synthetic_dataset::<f64>(32, 77).unwrap();
    let mut net = FerNetwork::<f64>::new(config.preset, config.seed).unwrap();
    let report = train(&mut net, &fixed, None, &config, |_| {}).unwrap();
    let first = report.history.first().unwrap().loss;
    let halved = report
        .history
        .iter()
        .find(|r| r.loss <= 0.5 * first)
        .unwrap_or_else(|| panic!("loss never halved from {first:.4} in {} epochs", config.epochs));
    assert!(halved.epoch <= 100);

    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(300),
        "optimization checks took {:.1}s, budget is 300s",
        elapsed.as_secs_f64()
    );
    println!(
        "ACCEPTANCE training_overfits_synthetic_data: PASS \
         (95% at epoch {}, loss halved by epoch {}, {:.1}s)",
        hit.epoch,
        halved.epoch,
        elapsed.as_secs_f64()
    );
}

/// Two runs from the same seeds produce per-epoch losses within 1e-12 and
/// byte-identical checkpoints, with augmentation in the loop.
#[test]
fn training_is_deterministic() {
    let run = || {
        let data = synthetic_dataset::<f64>(8, 33).unwrap();
        let config = TrainConfig {
            preset: ArchPreset::Tiny,
            epochs: 3,
            batch_size: 8,
            seed: 9,
            augment: AugmentSpec { expansion: 2, ..AugmentSpec::default() },
            ..TrainConfig::default()
        };
        let mut net = FerNetwork::<f64>::new(config.preset, config.seed).unwrap();
        let report = train(&mut net, &data, None, &config, |_| {}).unwrap();
        let losses: Vec<f64> = report.history.iter().map(|r| r.loss).collect();
        (losses, net)
    };
    let (losses_a, net_a) = run();
    let (losses_b, net_b) = run();

    assert_eq!(losses_a.len(), losses_b.len());
    for (i, (a, b)) in losses_a.iter().zip(&losses_b).enumerate() {
        assert!(
            (a - b).abs() <= 1e-12,
            "epoch {} losses diverged: {a} vs {b}",
            i + 1
        );
    }

    let dir = tempfile::tempdir().unwrap();
    let (path_a, path_b) = (dir.path().join("a.bin"), dir.path().join("b.bin"));
    save_checkpoint(&net_a, &path_a).unwrap();
    save_checkpoint(&net_b, &path_b).unwrap();
    let bytes_a = std::fs::read(&path_a).unwrap();
    let bytes_b = std::fs::read(&path_b).unwrap();
    assert!(!bytes_a.is_empty());
    assert!(bytes_a == bytes_b, "checkpoints differ between identical runs");
    println!(
        "ACCEPTANCE training_is_deterministic: PASS \
         ({} epoch losses within 1e-12, {}-byte checkpoints identical)",
        losses_a.len(),
        bytes_a.len()
    );
}

/// Accuracy metrics reproduce a hand tally exactly, and the ranking metric
/// scores separated, inverted, and random score sets as 1.0, 0.0, and
/// 0.5 +/- 0.05 respectively.
#[test]
fn metrics_match_hand_tallies() {
    // Six outcomes tallied by hand: class 0 goes 1/2, class 1 goes 1/1,
    // class 2 goes 2/3, overall 4/6.
    let truth = [0usize, 0, 1, 2, 2, 2];
    let predicted = [0usize, 1, 1, 2, 0, 2];
    let cm = ConfusionMatrix::from_predictions(&predicted, &truth).unwrap();
    assert_eq!(cm.cell(0, 0), 1);
    assert_eq!(cm.cell(0, 1), 1);
    assert_eq!(cm.cell(1, 1), 1);
    assert_eq!(cm.cell(2, 0), 1);
    assert_eq!(cm.cell(2, 2), 2);
    assert_eq!(cm.total(), 6);
    let metrics = cm.metrics().unwrap();
    assert_eq!(metrics.overall, 4.0 / 6.0);
    assert_eq!(metrics.per_class[0], Some(1.0 / 2.0));
    assert_eq!(metrics.per_class[1], Some(1.0));
    assert_eq!(metrics.per_class[2], Some(2.0 / 3.0));
    for class in 3..NUM_CLASSES {
        assert_eq!(metrics.per_class[class], None);
    }
    assert_eq!(metrics.macro_average, (1.0 / 2.0 + 1.0 + 2.0 / 3.0) / 3.0);

    // Every class twice, scores that rank positives strictly above
    // negatives, then the same scores inverted.
    let labels: Vec<usize> = (0..NUM_CLASSES).chain(0..NUM_CLASSES).collect();
    let separated: Vec<f64> = labels
        .iter()
        .flat_map(|&l| (0..NUM_CLASSES).map(move |c| if c == l { 0.9 } else { 0.1 }))
        .collect();
    let inverted: Vec<f64> = separated.iter().map(|s| 1.0 - s).collect();
    let n = labels.len();
    let curves = roc_auc(&Tensor::new(vec![n, NUM_CLASSES], separated).unwrap(), &labels).unwrap();
    for (class, curve) in curves.iter().enumerate() {
        let curve = curve.as_ref().unwrap_or_else(|| panic!("class {class} undefined"));
        assert_eq!(curve.auc, 1.0, "separated scores must rank perfectly for class {class}");
    }
    let curves = roc_auc(&Tensor::new(vec![n, NUM_CLASSES], inverted).unwrap(), &labels).unwrap();
    for (class, curve) in curves.iter().enumerate() {
        let curve = curve.as_ref().unwrap_or_else(|| panic!("class {class} undefined"));
        assert_eq!(curve.auc, 0.0, "inverted scores must rank perfectly wrong for class {class}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 10_000;
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..NUM_CLASSES)).collect();
    let scores: Vec<f64> = (0..n * NUM_CLASSES).map(|_| rng.random_range(0.0..1.0)).collect();
    let curves = roc_auc(&Tensor::new(vec![n, NUM_CLASSES], scores).unwrap(), &labels).unwrap();
    for (class, curve) in curves.iter().enumerate() {
        let auc = curve.as_ref().unwrap().auc;
        assert!(
            (auc - 0.5).abs() <= 0.05,
            "random scores gave class {class} an area of {auc}, expected 0.5 +/- 0.05"
        );
    }
    println!("ACCEPTANCE metrics_match_hand_tallies: PASS");
}

/// The perturbation harness is exact: an identity perturbation reproduces
/// the baseline row bitwise, and blacking out the full frame matches a
/// direct rerun on zeroed images, feature recomputation included.
#[test]
fn perturbation_harness_is_exact() {
    let data = synthetic_dataset::<f64>(16, 5).unwrap();
    let config = TrainConfig {
        preset: ArchPreset::Tiny,
        epochs: 3,
        batch_size: 8,
        seed: 11,
        augment: AugmentSpec { expansion: 1, ..AugmentSpec::default() },
        ..TrainConfig::default()
    };
    let mut net = FerNetwork::<f64>::new(config.preset, config.seed).unwrap();
    train(&mut net, &data, None, &config, |_| {}).unwrap();

    let specs = [PerturbSpec::Brightness { factor: 1.0 }, PerturbSpec::full_occlusion()];
    let rows = robustness_eval(&net, &data, &specs, PerturbScope::Features).unwrap();
    assert_eq!(rows.len(), 1 + specs.len());
    assert_eq!(rows[0].label, "baseline");
    let (baseline, identity, occluded) = (&rows[0], &rows[1], &rows[2]);

    assert_eq!(baseline.outcomes.len(), data.len());
    for (a, b) in baseline.outcomes.iter().zip(&identity.outcomes) {
        assert_eq!(a.predicted, b.predicted);
        assert_eq!(a.true_confidence.to_bits(), b.true_confidence.to_bits());
        assert_eq!(a.correct, b.correct);
    }
    assert_eq!(baseline.accuracy.to_bits(), identity.accuracy.to_bits());
    assert_eq!(baseline.mean_true_confidence.to_bits(), identity.mean_true_confidence.to_bits());

    // Direct rerun: zero every frame, let the sample constructor rebuild
    // the derived features, and push one batch through by hand.
    let blanked: Vec<MultimodalSample<f64>> = data
        .samples()
        .iter()
        .map(|s| {
            let zero =
                GrayImage::new(IMAGE_SIDE, IMAGE_SIDE, vec![0.0; IMAGE_SIDE * IMAGE_SIDE]).unwrap();
            MultimodalSample::new(zero, s.landmarks().clone(), s.label()).unwrap()
        })
        .collect();
    let refs: Vec<&MultimodalSample<f64>> = blanked.iter().collect();
    let (images, landmarks, hog, labels) = batch_tensors(&refs).unwrap();
    let probs = ops::softmax(&net.forward_infer(&images, &landmarks, &hog).unwrap()).unwrap();
    for (i, outcome) in occluded.outcomes.iter().enumerate() {
        let row = &probs.data()[i * NUM_CLASSES..(i + 1) * NUM_CLASSES];
        let mut best = 0;
        for (class, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = class;
            }
        }
        assert_eq!(outcome.predicted, best, "sample {i} prediction");
        assert_eq!(
            outcome.true_confidence.to_bits(),
            row[labels[i]].to_bits(),
            "sample {i} confidence"
        );
    }
    println!(
        "ACCEPTANCE perturbation_harness_is_exact: PASS \
         (identity bitwise-equal to baseline; full occlusion matches a direct rerun)"
    );
}

/// The published headline accuracies are declared out of scope, in the
/// test output and durably in the README.
#[test]
fn headline_results_are_out_of_scope() {
    println!(
        "This architecture's published headline accuracies -- 83.37% on the full \
         FER2013 corpus and 99.41% on CK+ -- come from full-scale training runs on \
         those datasets. No desk-scale test can honestly reproduce them, so this \
         suite does not try: it verifies the properties that make such a run \
         trustworthy instead (gradients, kernel oracles, architecture invariants, \
         optimization, determinism, metrics, and the perturbation harness). An \
         optional smoke test against a user-supplied FER2013 subset ships with the \
         command-line crate, gated behind the FERFUSE_FER2013_DIR environment \
         variable."
    );
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md"))
        .expect("README.md at the workspace root");
    for needle in ["83.37", "99.41", "FERFUSE_FER2013_DIR"] {
        assert!(
            readme.contains(needle),
            "README.md must state the reproduction scope; `{needle}` is missing"
        );
    }
    println!("ACCEPTANCE headline_results_are_out_of_scope: PASS");
}
