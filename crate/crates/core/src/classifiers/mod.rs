//! KNN, random forest and linear SVM, trained on a masked feature subset.

mod forest;
mod knn;
mod svm;

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use forest::{DecisionTree, Node, RandomForest};
pub use knn::Knn;
pub use svm::LinearSvm;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::ConfusionMatrix;
use crate::mask::FeatureMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Rf,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Knn, ClassifierKind::Rf, ClassifierKind::Svm];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Rf => "rf",
            ClassifierKind::Svm => "svm",
        }
    }

    pub fn table_label(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Rf => "RF",
            ClassifierKind::Svm => "SVM",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(ClassifierKind::Knn),
            "rf" | "random_forest" => Ok(ClassifierKind::Rf),
            "svm" => Ok(ClassifierKind::Svm),
            _ => Err(Error::InvalidParameter(format!("unknown classifier `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub knn_k: usize,
    pub rf_trees: usize,
    /// `None` grows trees until leaves are pure.
    pub rf_max_depth: Option<usize>,
    pub svm_epochs: usize,
    pub svm_learning_rate: f64,
    pub svm_regularization: f64,
    pub seed: u64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::Knn,
            knn_k: 5,
            rf_trees: 100,
            rf_max_depth: None,
            svm_epochs: 200,
            svm_learning_rate: 0.01,
            svm_regularization: 0.01,
            seed: 0,
        }
    }
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_owned()));
        if self.knn_k == 0 || self.knn_k % 2 == 0 {
            return bad("knn_k must be odd and at least 1");
        }
        if self.rf_trees == 0 {
            return bad("rf_trees must be at least 1");
        }
        if self.rf_max_depth == Some(0) {
            return bad("rf_max_depth must be at least 1");
        }
        if self.svm_epochs == 0 {
            return bad("svm_epochs must be at least 1");
        }
        if !(self.svm_learning_rate > 0.0) || !(self.svm_regularization >= 0.0) {
            return bad("svm learning rate must be positive and regularization non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Knn(Knn),
    Rf(RandomForest),
    Svm(LinearSvm),
}

/// Min-max parameters for the masked columns, fit on the training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskedScaler {
    pub min: Vec<f64>,
    pub range: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub mask: FeatureMask,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaler: Option<MaskedScaler>,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.params {
            ModelParams::Knn(_) => ClassifierKind::Knn,
            ModelParams::Rf(_) => ClassifierKind::Rf,
            ModelParams::Svm(_) => ClassifierKind::Svm,
        }
    }

    fn prepare<'a>(&self, row: &'a [f64]) -> Cow<'a, [f64]> {
        match &self.scaler {
            None => Cow::Borrowed(row),
            Some(s) => {
                let mut out = row.to_vec();
                for (k, c) in self.mask.indices().into_iter().enumerate() {
                    out[c] = if s.range[k] > 0.0 { (row[c] - s.min[k]) / s.range[k] } else { 0.0 };
                }
                Cow::Owned(out)
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<u8> {
        if row.len() != self.mask.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mask.len(),
                actual: row.len(),
            });
        }
        let row = self.prepare(row);
        let cols = self.mask.indices();
        let x: Vec<f64> = cols.iter().map(|&c| row[c]).collect();
        Ok(match &self.params {
            ModelParams::Knn(m) => m.predict(&x),
            ModelParams::Rf(m) => m.predict(&row),
            ModelParams::Svm(m) => m.predict(&x),
        })
    }
}

/// Masked training matrix, row-major over the selected columns.
pub(crate) struct Projected {
    pub data: Vec<f64>,
    pub width: usize,
    pub labels: Vec<u8>,
    pub columns: Vec<usize>,
}

impl Projected {
    fn new(d: &Dataset, rows: &[usize], mask: &FeatureMask, scaler: Option<&MaskedScaler>) -> Self {
        let columns = mask.indices();
        let width = columns.len();
        let mut data = Vec::with_capacity(rows.len() * width);
        for &r in rows {
            let row = d.row(r);
            for (k, &c) in columns.iter().enumerate() {
                let v = row[c];
                data.push(match scaler {
                    Some(s) if s.range[k] > 0.0 => (v - s.min[k]) / s.range[k],
                    Some(_) => 0.0,
                    None => v,
                });
            }
        }
        let labels = rows.iter().map(|&r| d.label(r)).collect();
        Self { data, width, labels, columns }
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }
}

fn check_inputs(spec: &ClassifierSpec, d: &Dataset, rows: &[usize], mask: &FeatureMask) -> Result<()> {
    spec.validate()?;
    if mask.len() != d.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: d.n_cols(),
            actual: mask.len(),
        });
    }
    if mask.count_ones() == 0 {
        return Err(Error::EmptyMask);
    }
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    if let Some(&r) = rows.iter().find(|&&r| r >= d.n_rows()) {
        return Err(Error::InvalidParameter(format!("row {r} out of range")));
    }
    Ok(())
}

fn fit(spec: &ClassifierSpec, p: &Projected) -> Result<ModelParams> {
    let ones = p.labels.iter().filter(|&&l| l == 1).count();
    let single_class = ones == 0 || ones == p.n_rows();
    Ok(match spec.kind {
        ClassifierKind::Knn => ModelParams::Knn(Knn::fit(p, spec.knn_k)),
        ClassifierKind::Rf if single_class => return Err(Error::SingleClass),
        ClassifierKind::Rf => ModelParams::Rf(RandomForest::fit(p, spec.rf_trees, spec.rf_max_depth, spec.seed)),
        ClassifierKind::Svm if single_class => return Err(Error::SingleClass),
        ClassifierKind::Svm => ModelParams::Svm(LinearSvm::fit(p, spec.svm_epochs, spec.svm_learning_rate, spec.svm_regularization).0),
    })
}

/// Train on raw feature values of `rows` restricted to `mask`.
pub fn train(spec: &ClassifierSpec, d: &Dataset, rows: &[usize], mask: &FeatureMask) -> Result<TrainedModel> {
    check_inputs(spec, d, rows, mask)?;
    let p = Projected::new(d, rows, mask, None);
    Ok(TrainedModel {
        mask: mask.clone(),
        scaler: None,
        params: fit(spec, &p)?,
    })
}

/// Train after min-max scaling the masked columns with parameters fit on
/// `rows`; the model applies the same scaling at prediction time.
pub fn train_scaled(spec: &ClassifierSpec, d: &Dataset, rows: &[usize], mask: &FeatureMask) -> Result<TrainedModel> {
    check_inputs(spec, d, rows, mask)?;
    let cols = mask.indices();
    let mut min = vec![f64::INFINITY; cols.len()];
    let mut max = vec![f64::NEG_INFINITY; cols.len()];
    for &r in rows {
        let row = d.row(r);
        for (k, &c) in cols.iter().enumerate() {
            min[k] = min[k].min(row[c]);
            max[k] = max[k].max(row[c]);
        }
    }
    let range = min.iter().zip(&max).map(|(lo, hi)| hi - lo).collect();
    let scaler = MaskedScaler { min, range };
    let p = Projected::new(d, rows, mask, Some(&scaler));
    Ok(TrainedModel {
        mask: mask.clone(),
        scaler: Some(scaler),
        params: fit(spec, &p)?,
    })
}

pub fn predict(model: &TrainedModel, row: &[f64]) -> Result<u8> {
    model.predict(row)
}

/// Train on `train_rows` (scaling fit there only) and tally predictions on
/// `eval_rows`.
pub fn evaluate_masked(
    spec: &ClassifierSpec,
    d: &Dataset,
    train_rows: &[usize],
    eval_rows: &[usize],
    mask: &FeatureMask,
) -> Result<ConfusionMatrix> {
    if eval_rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let model = train_scaled(spec, d, train_rows, mask)?;
    let mut cm = ConfusionMatrix::default();
    for &r in eval_rows {
        if r >= d.n_rows() {
            return Err(Error::InvalidParameter(format!("row {r} out of range")));
        }
        cm.record(d.label(r), model.predict(d.row(r))?);
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize, Provenance, SynthSpec};
    use proptest::prelude::*;

    fn all_rows(d: &Dataset) -> Vec<usize> {
        (0..d.n_rows()).collect()
    }

    fn halves(d: &Dataset) -> (Vec<usize>, Vec<usize>) {
        (0..d.n_rows()).partition(|&i| i % 2 == 0)
    }

    #[test]
    fn spec_validation() {
        let mut s = ClassifierSpec { knn_k: 4, ..ClassifierSpec::default() };
        assert!(s.validate().is_err());
        s.knn_k = 3;
        s.rf_trees = 0;
        assert!(s.validate().is_err());
        assert!(ClassifierSpec { svm_epochs: 0, ..ClassifierSpec::default() }.validate().is_err());
    }

    #[test]
    fn empty_mask_and_rows_rejected() {
        let (d, _) = synthesize(&SynthSpec::new(20, 3, 1, 2.0, 0)).unwrap();
        let spec = ClassifierSpec::new(ClassifierKind::Knn);
        assert!(matches!(train(&spec, &d, &all_rows(&d), &FeatureMask::empty(3)), Err(Error::EmptyMask)));
        assert!(matches!(train(&spec, &d, &[], &FeatureMask::full(3)), Err(Error::EmptyRows)));
    }

    #[test]
    fn single_class_training() {
        let (d, _) = synthesize(&SynthSpec::new(20, 3, 1, 2.0, 0)).unwrap();
        let ones: Vec<usize> = (0..20).filter(|&i| d.label(i) == 1).collect();
        let mask = FeatureMask::full(3);
        assert!(train(&ClassifierSpec::new(ClassifierKind::Knn), &d, &ones, &mask).is_ok());
        for kind in [ClassifierKind::Rf, ClassifierKind::Svm] {
            assert!(matches!(train(&ClassifierSpec::new(kind), &d, &ones, &mask), Err(Error::SingleClass)));
        }
    }

    #[test]
    fn dimension_mismatch_on_predict() {
        let (d, _) = synthesize(&SynthSpec::new(20, 3, 1, 2.0, 0)).unwrap();
        let m = train(&ClassifierSpec::new(ClassifierKind::Knn), &d, &all_rows(&d), &FeatureMask::full(3)).unwrap();
        assert!(matches!(m.predict(&[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn memorizing_knn_on_duplicates_is_perfect() {
        let (base, _) = synthesize(&SynthSpec::new(30, 4, 2, 1.0, 5)).unwrap();
        let rows: Vec<Vec<f64>> = (0..60).map(|i| base.row(i % 30).to_vec()).collect();
        let labels = (0..60).map(|i| base.label(i % 30)).collect();
        let d = Dataset::new(rows, labels, base.column_names().to_vec(), Provenance::Loaded).unwrap();
        let train: Vec<usize> = (0..30).collect();
        let eval: Vec<usize> = (30..60).collect();
        let spec = ClassifierSpec { knn_k: 1, ..ClassifierSpec::new(ClassifierKind::Knn) };
        let cm = evaluate_masked(&spec, &d, &train, &eval, &FeatureMask::full(4)).unwrap();
        assert_eq!((cm.fp, cm.fn_), (0, 0));
    }

    #[test]
    fn noise_only_is_near_chance() {
        for seed in 0..5 {
            let (d, _) = synthesize(&SynthSpec::new(200, 6, 0, 1.0, seed)).unwrap();
            let (tr, ev) = halves(&d);
            for kind in ClassifierKind::ALL {
                let spec = ClassifierSpec { rf_trees: 25, ..ClassifierSpec::new(kind) };
                let acc = evaluate_masked(&spec, &d, &tr, &ev, &FeatureMask::full(6)).unwrap().accuracy();
                assert!((0.3..=0.7).contains(&acc), "{kind} seed {seed}: {acc}");
            }
        }
    }

    #[test]
    fn separable_synthetic_with_true_mask() {
        let (d, truth) = synthesize(&SynthSpec::new(200, 20, 4, 3.0, 17)).unwrap();
        let (tr, ev) = halves(&d);
        for kind in ClassifierKind::ALL {
            let acc = evaluate_masked(&ClassifierSpec::new(kind), &d, &tr, &ev, &truth).unwrap().accuracy();
            assert!(acc >= 0.95, "{kind}: {acc}");
        }
    }

    #[test]
    fn model_serializes_to_json() {
        let (d, truth) = synthesize(&SynthSpec::new(40, 5, 2, 3.0, 1)).unwrap();
        for kind in ClassifierKind::ALL {
            let spec = ClassifierSpec { rf_trees: 3, ..ClassifierSpec::new(kind) };
            let m = train_scaled(&spec, &d, &all_rows(&d), &truth).unwrap();
            let json = serde_json::to_string(&m).unwrap();
            let back: TrainedModel = serde_json::from_str(&json).unwrap();
            assert_eq!(back.kind(), kind);
            for r in 0..d.n_rows() {
                assert_eq!(back.predict(d.row(r)).unwrap(), m.predict(d.row(r)).unwrap());
            }
        }
    }

    #[test]
    fn scaled_knn_ignores_affine_rescaling() {
        let (d, _) = synthesize(&SynthSpec::new(80, 3, 2, 1.5, 9)).unwrap();
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|r| d.row(r).iter().enumerate().map(|(c, v)| v * (c as f64 * 40.0 + 0.5) - 7.0).collect())
            .collect();
        let stretched = Dataset::new(rows, d.labels().to_vec(), d.column_names().to_vec(), Provenance::Loaded).unwrap();
        let (tr, ev) = halves(&d);
        let spec = ClassifierSpec::new(ClassifierKind::Knn);
        let mask = FeatureMask::full(3);
        let a = train_scaled(&spec, &d, &tr, &mask).unwrap();
        let b = train_scaled(&spec, &stretched, &tr, &mask).unwrap();
        for &r in &ev {
            assert_eq!(a.predict(d.row(r)).unwrap(), b.predict(stretched.row(r)).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn training_is_deterministic(seed in 0u64..1000, kind in prop_oneof![Just(ClassifierKind::Knn), Just(ClassifierKind::Rf), Just(ClassifierKind::Svm)]) {
            let (d, _) = synthesize(&SynthSpec::new(40, 5, 2, 2.0, seed)).unwrap();
            let spec = ClassifierSpec { rf_trees: 5, ..ClassifierSpec::new(kind).with_seed(seed) };
            let rows = all_rows(&d);
            let mask = FeatureMask::full(5);
            prop_assert_eq!(train(&spec, &d, &rows, &mask).unwrap(), train(&spec, &d, &rows, &mask).unwrap());
        }

        #[test]
        fn unmasked_columns_never_matter(seed in 0u64..1000, kind in prop_oneof![Just(ClassifierKind::Knn), Just(ClassifierKind::Rf), Just(ClassifierKind::Svm)]) {
            let (d, _) = synthesize(&SynthSpec::new(40, 4, 2, 2.0, seed)).unwrap();
            let mask = FeatureMask::from_indices(4, &[0, 2]).unwrap();
            let spec = ClassifierSpec { rf_trees: 5, ..ClassifierSpec::new(kind).with_seed(seed) };
            // reverse column 1 and scramble column 3 across rows
            let rows: Vec<Vec<f64>> = (0..40).map(|r| {
                let mut v = d.row(r).to_vec();
                v[1] = d.value(39 - r, 1);
                v[3] = d.value((r * 7 + 3) % 40, 3);
                v
            }).collect();
            let permuted = Dataset::new(rows, d.labels().to_vec(), d.column_names().to_vec(), Provenance::Loaded).unwrap();
            let (tr, ev) = halves(&d);
            let a = train_scaled(&spec, &d, &tr, &mask).unwrap();
            let b = train_scaled(&spec, &permuted, &tr, &mask).unwrap();
            for &r in &ev {
                prop_assert_eq!(a.predict(d.row(r)).unwrap(), b.predict(permuted.row(r)).unwrap());
            }
        }
    }
}
