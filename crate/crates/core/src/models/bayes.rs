//! Bernoulli naive Bayes over binarised features with add-alpha smoothing.

use serde::{Deserialize, Serialize};

use super::check_width;
use super::config::BnbConfig;
use crate::dataset::{FeatureMatrix, LabelVector};
use crate::error::{KpiError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliNbModel {
    /// `ln P(class)` for classes 0 and 1.
    pub log_prior: [f64; 2],
    /// `ln P(feature = 1 | class)`, indexed `[class][feature]`.
    pub log_theta: [Vec<f64>; 2],
    /// `ln P(feature = 0 | class)`.
    pub log_one_minus_theta: [Vec<f64>; 2],
    /// Values strictly above this count as 1.
    pub binarize_threshold: f64,
}

pub fn fit(x: &FeatureMatrix, y: &LabelVector, config: &BnbConfig) -> Result<BernoulliNbModel> {
    let n_class = [y.count(0), y.count(1)];
    if n_class.contains(&0) {
        return Err(KpiError::SingleClass);
    }
    let p = x.n_cols();
    let mut ones = [vec![0usize; p], vec![0usize; p]];
    for (row, &label) in x.rows().zip(y.as_slice()) {
        for (j, &v) in row.iter().enumerate() {
            if v > config.binarize_threshold {
                ones[label as usize][j] += 1;
            }
        }
    }
    let alpha = config.alpha;
    let n = y.len() as f64;
    let theta = |c: usize, j: usize| (ones[c][j] as f64 + alpha) / (n_class[c] as f64 + 2.0 * alpha);
    let log_theta = [0, 1].map(|c| (0..p).map(|j| theta(c, j).ln()).collect());
    let log_one_minus_theta = [0, 1].map(|c| (0..p).map(|j| (-theta(c, j)).ln_1p()).collect());
    Ok(BernoulliNbModel {
        log_prior: [0, 1].map(|c| (n_class[c] as f64 / n).ln()),
        log_theta,
        log_one_minus_theta,
        binarize_threshold: config.binarize_threshold,
    })
}

impl BernoulliNbModel {
    pub fn n_features(&self) -> usize {
        self.log_theta[0].len()
    }

    /// `ln P(x | class) + ln P(class)` for both classes.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Result<[f64; 2]> {
        check_width(self.n_features(), x.len())?;
        Ok([0, 1].map(|c| {
            let mut acc = self.log_prior[c];
            for (j, &v) in x.iter().enumerate() {
                acc += if v > self.binarize_threshold { self.log_theta[c][j] } else { self.log_one_minus_theta[c][j] };
            }
            acc
        }))
    }

    /// Normalised posterior `P(class | x)` by Bayes' rule.
    pub fn posterior(&self, x: &[f64]) -> Result<[f64; 2]> {
        let jll = self.joint_log_likelihood(x)?;
        let max = jll[0].max(jll[1]);
        let e = jll.map(|l| (l - max).exp());
        let z = e[0] + e[1];
        Ok(e.map(|v| v / z))
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        self.posterior(x).map(|p| p[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn six_points() -> (FeatureMatrix, LabelVector) {
        let x = FeatureMatrix::from_unnamed(vec![vec![1.0], vec![1.0], vec![1.0], vec![0.0], vec![0.0], vec![0.0]])
            .unwrap();
        (x, LabelVector::new(vec![1, 1, 1, 0, 0, 0]).unwrap())
    }

    #[test]
    fn hand_computed_posterior() {
        let (x, y) = six_points();
        let m = fit(&x, &y, &BnbConfig::default()).unwrap();
        assert!((m.log_theta[1][0].exp() - 0.8).abs() < 1e-15);
        assert!((m.log_theta[0][0].exp() - 0.2).abs() < 1e-15);
        assert!((m.log_prior[0].exp() - 0.5).abs() < 1e-15);
        assert!((m.log_prior[1].exp() - 0.5).abs() < 1e-15);
        assert!((m.probability(&[1.0]).unwrap() - 0.8).abs() < 1e-12);
        assert!((m.probability(&[0.0]).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = FeatureMatrix::from_unnamed(vec![vec![1.0], vec![0.0]]).unwrap();
        let y = LabelVector::new(vec![1, 1]).unwrap();
        assert!(matches!(fit(&x, &y, &BnbConfig::default()), Err(KpiError::SingleClass)));
    }

    #[test]
    fn smoothing_keeps_theta_inside_unit_interval() {
        let (x, y) = six_points();
        let m = fit(&x, &y, &BnbConfig { alpha: 1e-9, binarize_threshold: 0.0 }).unwrap();
        for c in 0..2 {
            let t = m.log_theta[c][0].exp();
            assert!(t > 0.0 && t < 1.0);
            assert!((m.log_one_minus_theta[c][0].exp() + t - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn posterior_sums_to_one(
            rows in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 4), 4..30),
            probe in proptest::collection::vec(-3.0f64..3.0, 4),
        ) {
            let labels: Vec<u8> = (0..rows.len()).map(|i| (i % 2) as u8).collect();
            let x = FeatureMatrix::from_unnamed(rows).unwrap();
            let m = fit(&x, &LabelVector::new(labels).unwrap(), &BnbConfig::default()).unwrap();
            let p = m.posterior(&probe).unwrap();
            prop_assert!((p[0] + p[1] - 1.0).abs() <= 1e-12);
            prop_assert!((m.log_prior[0].exp() + m.log_prior[1].exp() - 1.0).abs() <= 1e-12);
        }
    }
}
