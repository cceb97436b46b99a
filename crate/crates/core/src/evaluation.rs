//! Confusion-matrix metrics, the weighted wrapper fitness and k-fold
//! cross-validation.

use serde::{Deserialize, Serialize};

use crate::classifiers::{evaluate_masked, ClassifierSpec};
use crate::dataset::{kfold_indices, Dataset};
use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::par;

/// 2x2 counts with ASD (label 1) as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn from_predictions(truth: &[u8], predicted: &[u8]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                actual: predicted.len(),
            });
        }
        let mut cm = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.record(t, p);
        }
        Ok(cm)
    }

    pub fn record(&mut self, truth: u8, predicted: u8) {
        match (truth, predicted) {
            (1, 1) => self.tp += 1,
            (0, 1) => self.fp += 1,
            (0, _) => self.tn += 1,
            _ => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / n as f64
        }
    }

    /// The same predictions seen with label 0 as the positive class.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }
}

impl std::ops::AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.tn += o.tn;
        self.fn_ += o.fn_;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub recall_autism: f64,
    pub recall_typical: f64,
    pub precision_autism: f64,
    pub precision_typical: f64,
    pub f1_autism: f64,
    pub f1_typical: f64,
    /// Metrics whose denominator was zero and were reported as 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

fn ratio(num: u64, den: u64, name: &str, undefined: &mut Vec<String>) -> f64 {
    if den == 0 {
        undefined.push(name.to_owned());
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64, name: &str, undefined: &mut Vec<String>) -> f64 {
    if p + r == 0.0 {
        undefined.push(name.to_owned());
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    if cm.total() == 0 {
        return Err(Error::EmptyConfusion);
    }
    let mut undefined = Vec::new();
    let recall_autism = ratio(cm.tp, cm.tp + cm.fn_, "recall_autism", &mut undefined);
    let precision_autism = ratio(cm.tp, cm.tp + cm.fp, "precision_autism", &mut undefined);
    let recall_typical = ratio(cm.tn, cm.tn + cm.fp, "recall_typical", &mut undefined);
    let precision_typical = ratio(cm.tn, cm.tn + cm.fn_, "precision_typical", &mut undefined);
    let f1_autism = harmonic(precision_autism, recall_autism, "f1_autism", &mut undefined);
    let f1_typical = harmonic(precision_typical, recall_typical, "f1_typical", &mut undefined);
    Ok(MetricsReport {
        accuracy: cm.accuracy(),
        recall_autism,
        recall_typical,
        precision_autism,
        precision_typical,
        f1_autism,
        f1_typical,
        undefined,
    })
}

pub const DEFAULT_FITNESS_WEIGHT: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessValue {
    pub value: f64,
    /// `weight * accuracy`
    pub accuracy_part: f64,
    /// `(1 - weight) * reduction`
    pub reduction_part: f64,
    pub weight: f64,
}

/// `1 - selected / total`.
pub fn feature_reduction(mask: &FeatureMask, total: usize) -> Result<f64> {
    let selected = mask.count_ones();
    if selected == 0 {
        return Err(Error::EmptyMask);
    }
    if total < selected {
        return Err(Error::InvalidParameter(format!(
            "{selected} selected features exceed total {total}"
        )));
    }
    Ok(reduction_from_counts(selected, total))
}

pub fn reduction_from_counts(selected: usize, total: usize) -> f64 {
    (total - selected) as f64 / total as f64
}

pub fn fitness_from_accuracy(accuracy: f64, selected: usize, total: usize, weight: f64) -> Result<FitnessValue> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::InvalidParameter(format!("fitness weight {weight} outside [0, 1]")));
    }
    if selected == 0 {
        return Err(Error::EmptyMask);
    }
    if total < selected {
        return Err(Error::InvalidParameter(format!(
            "{selected} selected features exceed total {total}"
        )));
    }
    let accuracy_part = weight * accuracy;
    let reduction_part = (1.0 - weight) * reduction_from_counts(selected, total);
    Ok(FitnessValue {
        value: accuracy_part + reduction_part,
        accuracy_part,
        reduction_part,
        weight,
    })
}

/// Weighted wrapper objective:
/// `weight * accuracy + (1 - weight) * (total - selected) / total`.
pub fn fitness(cm: &ConfusionMatrix, mask: &FeatureMask, total_features: usize, weight: f64) -> Result<FitnessValue> {
    fitness_from_accuracy(cm.accuracy(), mask.count_ones(), total_features, weight)
}

/// Render a fraction as a percentage cut (not rounded) to `decimals`
/// places, so 0.698173 prints as "69.81".
pub fn format_percent(fraction: f64, decimals: u32) -> String {
    let scale = 10f64.powi(decimals as i32);
    // nudge absorbs representation error such as 0.29 * 100 = 28.999...
    let cut = (fraction * 100.0 * scale + 1e-7).floor() / scale;
    format!("{cut:.prec$}", prec = decimals as usize)
}

/// Round half-up to `decimals` places.
pub fn round_to(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (value * scale + 0.5).floor() / scale
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvScores {
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Folds whose training rows held a single class.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub single_class_folds: Vec<usize>,
}

impl CvScores {
    pub fn from_accuracies(accuracies: Vec<f64>) -> Self {
        let n = accuracies.len() as f64;
        let mean = accuracies.iter().sum::<f64>() / n;
        let var = accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        Self {
            accuracies,
            mean,
            std: var.sqrt(),
            single_class_folds: Vec::new(),
        }
    }
}

/// Stratified k-fold accuracy of `spec` restricted to `mask`. Scaling is
/// refit on every training fold.
pub fn cross_validate(spec: &ClassifierSpec, d: &Dataset, mask: &FeatureMask, k: usize, seed: u64) -> Result<CvScores> {
    if mask.count_ones() == 0 {
        return Err(Error::EmptyMask);
    }
    let folds = kfold_indices(d, k, seed)?;
    let single: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|(_, (train, _))| {
            let ones = train.iter().filter(|&&i| d.label(i) == 1).count();
            ones == 0 || ones == train.len()
        })
        .map(|(f, _)| f)
        .collect();
    let results = par::map(&folds, |(train, test)| {
        evaluate_masked(spec, d, train, test, mask).map(|cm| cm.accuracy())
    });
    let accuracies = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut scores = CvScores::from_accuracies(accuracies);
    scores.single_class_folds = single;
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn table_row_inversion() {
        let m = metrics(&ConfusionMatrix::new(79, 0, 80, 1)).unwrap();
        assert_eq!(round_to(m.accuracy, 5), 0.99375);
        assert_eq!(round_to(m.recall_autism, 5), 0.9875);
        assert_eq!(round_to(m.precision_autism, 5), 1.0);
        assert_eq!(round_to(m.f1_autism, 5), 0.99371);
        assert!(m.undefined.is_empty());
    }

    #[test]
    fn perfect_classifier() {
        let m = metrics(&ConfusionMatrix::new(40, 0, 40, 0)).unwrap();
        for v in [m.accuracy, m.recall_autism, m.recall_typical, m.precision_autism, m.precision_typical, m.f1_autism, m.f1_typical] {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn all_negative_predictor_flags_zero_division() {
        let m = metrics(&ConfusionMatrix::new(0, 0, 80, 80)).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.recall_autism, 0.0);
        assert_eq!(m.precision_autism, 0.0);
        assert!(m.undefined.contains(&"precision_autism".to_string()));
        assert!(m.undefined.contains(&"f1_autism".to_string()));
    }

    #[test]
    fn empty_matrix_errors() {
        assert!(matches!(metrics(&ConfusionMatrix::default()), Err(Error::EmptyConfusion)));
    }

    #[test]
    fn fitness_reference_points() {
        // exact rationals: 0.8 + 0.2 * 879/1259 and 0.775 + 0.2 * 1255/1259
        let a = fitness_from_accuracy(1.0, 380, 1259, 0.8).unwrap();
        assert_abs_diff_eq!(a.value, 0.939_634_630_659_253_3, epsilon = 1e-15);
        assert_eq!(round_to(a.value, 5), 0.93963);
        let b = fitness_from_accuracy(0.96875, 4, 1259, 0.8).unwrap();
        assert_abs_diff_eq!(b.value, 0.974_364_575_059_571_1, epsilon = 1e-15);
        assert_eq!(round_to(b.value, 5), 0.97436);
        let full = fitness_from_accuracy(0.7, 10, 10, 0.8).unwrap();
        assert_abs_diff_eq!(full.value, 0.8 * 0.7, epsilon = 1e-15);
    }

    #[test]
    fn fitness_rejects_bad_inputs() {
        let cm = ConfusionMatrix::new(1, 0, 1, 0);
        assert!(fitness(&cm, &FeatureMask::full(3), 3, 1.2).is_err());
        assert!(matches!(fitness(&cm, &FeatureMask::empty(3), 3, 0.8), Err(Error::EmptyMask)));
    }

    #[test]
    fn reduction_percentages() {
        let m380 = FeatureMask::from_indices(1259, &(0..380).collect::<Vec<_>>()).unwrap();
        let r = feature_reduction(&m380, 1259).unwrap();
        assert_eq!(round_to(r, 5), 0.69817);
        assert_eq!(format_percent(r, 2), "69.81");
        let m4 = FeatureMask::from_indices(1259, &[0, 1, 2, 3]).unwrap();
        let r = feature_reduction(&m4, 1259).unwrap();
        assert_eq!(round_to(r, 5), 0.99682);
        assert_eq!(format_percent(r, 2), "99.68");
        assert_eq!(feature_reduction(&FeatureMask::full(9), 9).unwrap(), 0.0);
        assert_eq!(format_percent(0.96875, 3), "96.875");
        assert_eq!(format_percent(0.29, 2), "29.00");
    }

    proptest! {
        #[test]
        fn metric_identities(tp in 0u64..200, fp in 0u64..200, tn in 0u64..200, fn_ in 0u64..200) {
            let cm = ConfusionMatrix::new(tp, fp, tn, fn_);
            prop_assume!(cm.total() > 0);
            let m = metrics(&cm).unwrap();
            prop_assert!((m.accuracy - (tp + tn) as f64 / cm.total() as f64).abs() < 1e-15);
            let (p, r) = (m.precision_autism, m.recall_autism);
            if p + r > 0.0 {
                prop_assert!((m.f1_autism - 2.0 * p * r / (p + r)).abs() < 1e-12);
            }
            let s = metrics(&cm.swapped()).unwrap();
            prop_assert_eq!(s.recall_autism, m.recall_typical);
            prop_assert_eq!(s.precision_autism, m.precision_typical);
            prop_assert_eq!(s.recall_typical, m.recall_autism);
            prop_assert_eq!(s.precision_typical, m.precision_autism);
            for v in [m.accuracy, m.recall_autism, m.recall_typical, m.precision_autism, m.precision_typical, m.f1_autism, m.f1_typical] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn fitness_monotonicity(acc in 0.0f64..0.99, sel in 1usize..50, total in 50usize..100, w in 0.01f64..0.99) {
            let base = fitness_from_accuracy(acc, sel, total, w).unwrap().value;
            prop_assert!(fitness_from_accuracy(acc + 0.01, sel, total, w).unwrap().value > base);
            prop_assert!(fitness_from_accuracy(acc, sel + 1, total, w).unwrap().value < base);
        }

        #[test]
        fn cv_mean_ignores_fold_order(v in proptest::collection::vec(0.0f64..1.0, 2..12), rot in 0usize..12) {
            let a = CvScores::from_accuracies(v.clone());
            let mut r = v.clone();
            let len = r.len();
            r.rotate_left(rot % len);
            r.reverse();
            let b = CvScores::from_accuracies(r);
            prop_assert!((a.mean - b.mean).abs() < 1e-12);
        }
    }
}
