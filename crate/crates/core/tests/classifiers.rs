//! Behavioural properties of the five classifiers.

use citykpi_core::models::{self, svm, ModelKind, SvmConfig, TrainConfig};
use citykpi_core::rng::SplitMix64;
use citykpi_core::{FeatureMatrix, LabelVector};
use proptest::prelude::*;

fn noisy_linear(seed: u64, n: usize) -> (FeatureMatrix, LabelVector) {
    let mut rng = SplitMix64::new(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.next_f64() * 2.0 - 1.0).collect()).collect();
    let labels =
        rows.iter().map(|r| u8::from(r[0] + 0.5 * r[1] - 0.3 * r[2] + 0.3 * (rng.next_f64() - 0.5) > 0.0)).collect();
    (FeatureMatrix::from_unnamed(rows).unwrap(), LabelVector::new(labels).unwrap())
}

#[test]
fn all_fits_are_bit_identical_on_repeat() {
    let (x, y) = noisy_linear(5, 60);
    let cfg = TrainConfig::default();
    for kind in ModelKind::ALL {
        let a = serde_json::to_string(&models::fit(kind, &x, &y, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&models::fit(kind, &x, &y, &cfg).unwrap()).unwrap();
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn svm_objective_settles_over_epoch_blocks() {
    let (x, y) = noisy_linear(42, 40);
    let (_, trace) = svm::fit_with_trace(&x, &y, &SvmConfig { c: 1.0, epochs: 200 }).unwrap();
    let blocks: Vec<f64> = trace.chunks(20).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    for w in blocks.windows(2) {
        assert!(w[1] <= w[0], "block averages {blocks:?}");
    }
}

#[test]
fn svm_regularisation_share_grows_with_c() {
    let (x, y) = noisy_linear(42, 40);
    let mut last_share = 0.0;
    let mut last_norm = 0.0;
    for c in [0.1, 1.0, 10.0] {
        let m = svm::fit(&x, &y, &SvmConfig { c, epochs: 200 }).unwrap();
        let o = m.objective(&x, &y).unwrap();
        assert!((o.total - (o.regularization + c * o.hinge)).abs() <= 1e-12 * o.total);
        assert!((o.regularization - 0.5 * m.norm().powi(2)).abs() < 1e-12);
        let share = o.regularization / o.total;
        assert!(share >= last_share, "c={c}: share {share} < {last_share}");
        assert!(m.norm() >= last_norm);
        last_share = share;
        last_norm = m.norm();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn raising_threshold_never_turns_zero_into_one(
        seed in 0u64..1000,
        t1 in 0.0f64..=1.0,
        t2 in 0.0f64..=1.0,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let (x, y) = noisy_linear(seed, 30);
        let cfg = TrainConfig { ann: models::AnnConfig { hidden_units: 4, adam: models::AdamConfig { epochs: 30, ..Default::default() } }, ..TrainConfig::default() };
        for kind in ModelKind::ALL {
            let m = models::fit(kind, &x, &y, &cfg).unwrap();
            for row in x.rows() {
                let at_lo = m.predict(row, lo).unwrap();
                let at_hi = m.predict(row, hi).unwrap();
                prop_assert!(at_hi <= at_lo);
            }
        }
    }
}
