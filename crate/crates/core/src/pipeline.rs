//! The ranker × selector × classifier sweep.
//!
//! Each combination ranks features on the training and validation rows,
//! seeds the selector with the top-ranked mask, searches with a wrapper
//! fitness scored on the validation rows, then trains on train ∪ validate
//! and reports metrics on the untouched test rows plus k-fold CV on the
//! whole dataset. Test labels are read only to compute reported numbers.

use std::cmp::Ordering;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classifiers::{evaluate_masked, ClassifierKind, ClassifierSpec};
use crate::dataset::{split, Dataset, SplitIndices, DEFAULT_TRAIN_FRAC, DEFAULT_VALIDATE_FRAC};
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate, fitness_from_accuracy, metrics, reduction_from_counts, ConfusionMatrix, CvScores, MetricsReport, DEFAULT_FITNESS_WEIGHT};
use crate::mask::FeatureMask;
use crate::metaheuristics::{run_selector, Algorithm, SelectionResult, SelectorConfig};
use crate::ranking::{default_lead_size, leading_mask, rank_features, RankMethod, RankedFeatures};
use crate::{par, rng};

/// Which classifier scores candidate masks during the search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitnessClassifier {
    /// The combination's own classifier.
    #[default]
    Combination,
    /// KNN regardless of the combination, for speed.
    Knn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub rankers: Vec<RankMethod>,
    pub selectors: Vec<Algorithm>,
    pub classifiers: Vec<ClassifierKind>,
    /// Template for every run; algorithm, seed and leading mask are set per
    /// combination.
    pub selector: SelectorConfig,
    /// Template for every classifier; kind and seed are set per combination.
    pub classifier: ClassifierSpec,
    pub fitness_classifier: FitnessClassifier,
    pub fitness_weight: f64,
    /// Size of the leading mask; `None` means half the features, rounded up.
    pub lead_size: Option<usize>,
    pub train_frac: f64,
    pub validate_frac: f64,
    pub cv_k: usize,
    pub accuracy_gate: f64,
    pub cv_gate: f64,
    /// Selector runs per combination while the validation accuracy stays
    /// below `accuracy_gate`.
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            rankers: RankMethod::ALL.to_vec(),
            selectors: Algorithm::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            selector: SelectorConfig::default(),
            classifier: ClassifierSpec::default(),
            fitness_classifier: FitnessClassifier::Combination,
            fitness_weight: DEFAULT_FITNESS_WEIGHT,
            lead_size: None,
            train_frac: DEFAULT_TRAIN_FRAC,
            validate_frac: DEFAULT_VALIDATE_FRAC,
            cv_k: 10,
            accuracy_gate: 0.85,
            cv_gate: 0.85,
            max_attempts: 3,
            seed: 42,
        }
    }
}

impl GridConfig {
    pub fn single(ranker: RankMethod, selector: Algorithm, classifier: ClassifierKind) -> Self {
        Self {
            rankers: vec![ranker],
            selectors: vec![selector],
            classifiers: vec![classifier],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_owned()));
        if self.rankers.is_empty() || self.selectors.is_empty() || self.classifiers.is_empty() {
            return Err(Error::EmptyGrid);
        }
        for g in [self.accuracy_gate, self.cv_gate] {
            if !(0.0..=1.0).contains(&g) {
                return bad("gates must lie in [0, 1]");
            }
        }
        if !(0.0..=1.0).contains(&self.fitness_weight) {
            return bad("fitness_weight must lie in [0, 1]");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        if self.cv_k < 2 {
            return bad("cv_k must be at least 2");
        }
        if self.lead_size == Some(0) {
            return bad("lead_size must be at least 1");
        }
        self.classifier.validate()
    }

    /// Every combination in `(ranker, selector, classifier)` order.
    pub fn combinations(&self) -> Vec<(RankMethod, Algorithm, ClassifierKind)> {
        let mut out = Vec::new();
        for &r in &self.rankers {
            for &s in &self.selectors {
                for &c in &self.classifiers {
                    out.push((r, s, c));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationOutcome {
    /// Hex bitstring, feature 0 in the most significant bit.
    pub selected_mask: String,
    pub selected_features: Vec<usize>,
    pub n_selected: usize,
    pub n_features: usize,
    pub feature_reduction: f64,
    /// Best wrapper fitness (validation rows).
    pub fitness: f64,
    pub validation_accuracy: f64,
    pub test_confusion: ConfusionMatrix,
    pub test_metrics: MetricsReport,
    pub cv: CvScores,
    pub passed_accuracy_gate: bool,
    pub passed_cv_gate: bool,
    pub evaluations: u64,
    pub leading_mask: String,
}

impl CombinationOutcome {
    pub fn mask(&self) -> FeatureMask {
        FeatureMask::from_hex(&self.selected_mask, self.n_features).expect("mask written by this crate")
    }

    pub fn test_accuracy(&self) -> f64 {
        self.test_metrics.accuracy
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationResult {
    pub ranker: RankMethod,
    pub selector: Algorithm,
    pub classifier: ClassifierKind,
    pub seed: u64,
    pub attempts: usize,
    pub outcome: Option<CombinationOutcome>,
    pub error: Option<String>,
    /// Seconds; left out of serialized results so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time: f64,
}

impl CombinationResult {
    pub fn name(&self) -> String {
        format!("{}/{}/{}", self.ranker.name(), self.selector.name(), self.classifier.name())
    }

    pub fn is_ok(&self) -> bool {
        self.outcome.is_some()
    }
}

/// Seed of combination `index` under `master`.
pub fn combination_seed(master: u64, index: usize) -> u64 {
    rng::derive_seed(master, &[0xC0B0, index as u64])
}

pub fn split_seed(master: u64) -> u64 {
    rng::derive_seed(master, &[0x5B17])
}

/// Best mask found by one selector run, with its validation accuracy.
struct Search {
    result: SelectionResult,
    validation_accuracy: f64,
}

fn search(
    d: &Dataset,
    parts: &SplitIndices,
    fit_spec: &ClassifierSpec,
    selector: &SelectorConfig,
    weight: f64,
) -> Result<Search> {
    let n = d.n_cols();
    let score = |mask: &FeatureMask| -> Result<f64> {
        let cm = evaluate_masked(fit_spec, d, &parts.train, &parts.validate, mask)?;
        Ok(fitness_from_accuracy(cm.accuracy(), mask.count_ones(), n, weight)?.value)
    };
    let result = run_selector(selector, n, score)?;
    let cm = evaluate_masked(fit_spec, d, &parts.train, &parts.validate, &result.best_mask)?;
    Ok(Search { result, validation_accuracy: cm.accuracy() })
}

/// One combination against a fixed partition. `seed` drives the selector,
/// the classifier and the CV folds.
pub fn run_combination_with_split(
    ranker: RankMethod,
    selector: Algorithm,
    classifier: ClassifierKind,
    d: &Dataset,
    parts: &SplitIndices,
    cfg: &GridConfig,
    seed: u64,
) -> CombinationResult {
    let started = Instant::now();
    let mut attempts = 0;
    let outcome = combination_outcome(ranker, selector, classifier, d, parts, cfg, seed, &mut attempts);
    let (outcome, error) = match outcome {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e.to_string())),
    };
    CombinationResult {
        ranker,
        selector,
        classifier,
        seed,
        attempts,
        outcome,
        error,
        wall_time: started.elapsed().as_secs_f64(),
    }
}

/// Search result of one combination before any test-set scoring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub ranked: RankedFeatures,
    pub leading_mask: FeatureMask,
    pub result: SelectionResult,
    pub validation_accuracy: f64,
    pub attempts: usize,
}

/// Rank on train ∪ validate, seed the selector with the top features and
/// search on train → validate, retrying while validation accuracy stays
/// below the gate. Test rows are never read.
#[allow(clippy::too_many_arguments)]
pub fn select_features(
    ranker: RankMethod,
    selector: Algorithm,
    classifier: ClassifierKind,
    d: &Dataset,
    parts: &SplitIndices,
    cfg: &GridConfig,
    seed: u64,
) -> Result<Selection> {
    cfg.validate()?;
    let n = d.n_cols();
    let ranked = rank_features(&d.select_rows(&parts.train_and_validate())?, ranker)?;
    let lead = leading_mask(&ranked, cfg.lead_size.unwrap_or_else(|| default_lead_size(n)).min(n))?;

    let spec = ClassifierSpec { kind: classifier, seed, ..cfg.classifier.clone() };
    let fit_spec = match cfg.fitness_classifier {
        FitnessClassifier::Combination => spec,
        FitnessClassifier::Knn => ClassifierSpec { kind: ClassifierKind::Knn, ..spec },
    };

    let mut best: Option<Search> = None;
    let mut attempts = 0;
    for attempt in 0..cfg.max_attempts {
        attempts = attempt + 1;
        let sel = SelectorConfig {
            algorithm: selector,
            seed: rng::derive_seed(seed, &[attempt as u64]),
            leading_mask: Some(lead.clone()),
            ..cfg.selector.clone()
        };
        let found = search(d, parts, &fit_spec, &sel, cfg.fitness_weight)?;
        let passed = found.validation_accuracy >= cfg.accuracy_gate;
        if best.as_ref().is_none_or(|b| found.result.best_fitness > b.result.best_fitness) {
            best = Some(found);
        }
        if passed {
            break;
        }
    }
    let Search { result, validation_accuracy } = best.expect("max_attempts >= 1");
    Ok(Selection { ranked, leading_mask: lead, result, validation_accuracy, attempts })
}

#[allow(clippy::too_many_arguments)]
fn combination_outcome(
    ranker: RankMethod,
    selector: Algorithm,
    classifier: ClassifierKind,
    d: &Dataset,
    parts: &SplitIndices,
    cfg: &GridConfig,
    seed: u64,
    attempts: &mut usize,
) -> Result<CombinationOutcome> {
    let n = d.n_cols();
    let sel = select_features(ranker, selector, classifier, d, parts, cfg, seed)?;
    *attempts = sel.attempts;
    let Selection { leading_mask: lead, result, validation_accuracy, .. } = sel;
    let mask = result.best_mask;
    let seen = parts.train_and_validate();
    let spec = ClassifierSpec { kind: classifier, seed, ..cfg.classifier.clone() };

    let test_confusion = evaluate_masked(&spec, d, &seen, &parts.test, &mask)?;
    let test_metrics = metrics(&test_confusion)?;
    let cv = cross_validate(&spec, d, &mask, cfg.cv_k, seed)?;
    Ok(CombinationOutcome {
        selected_mask: mask.to_hex(),
        selected_features: mask.indices(),
        n_selected: mask.count_ones(),
        n_features: n,
        feature_reduction: reduction_from_counts(mask.count_ones(), n),
        fitness: result.best_fitness,
        validation_accuracy,
        passed_accuracy_gate: test_metrics.accuracy >= cfg.accuracy_gate,
        passed_cv_gate: cv.mean >= cfg.cv_gate,
        test_confusion,
        test_metrics,
        cv,
        evaluations: result.evaluations,
        leading_mask: lead.to_hex(),
    })
}

/// One combination on the default partition of `d` under `cfg.seed`; equal
/// to the corresponding entry of [`run_grid`] when it is the grid's only
/// combination.
pub fn run_combination(ranker: RankMethod, selector: Algorithm, classifier: ClassifierKind, d: &Dataset, cfg: &GridConfig) -> Result<CombinationResult> {
    let parts = split(d, cfg.train_frac, cfg.validate_frac, split_seed(cfg.seed))?;
    Ok(run_combination_with_split(ranker, selector, classifier, d, &parts, cfg, combination_seed(cfg.seed, 0)))
}

pub fn run_grid(d: &Dataset, cfg: &GridConfig) -> Result<Vec<CombinationResult>> {
    cfg.validate()?;
    let parts = split(d, cfg.train_frac, cfg.validate_frac, split_seed(cfg.seed))?;
    run_grid_with_split(d, &parts, cfg)
}

/// The sweep against an explicit partition. Combinations run concurrently;
/// the result order is always the combination order.
pub fn run_grid_with_split(d: &Dataset, parts: &SplitIndices, cfg: &GridConfig) -> Result<Vec<CombinationResult>> {
    cfg.validate()?;
    let combos = cfg.combinations();
    Ok(par::map_range(combos.len(), |i| {
        let (r, s, c) = combos[i];
        run_combination_with_split(r, s, c, d, parts, cfg, combination_seed(cfg.seed, i))
    }))
}

/// The partition [`run_grid`] uses for `cfg`.
pub fn default_split(d: &Dataset, cfg: &GridConfig) -> Result<SplitIndices> {
    split(d, cfg.train_frac, cfg.validate_frac, split_seed(cfg.seed))
}

/// Canonical results.json body: pretty JSON plus a trailing newline.
pub fn results_json(results: &[CombinationResult]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(results).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Higher test accuracy first, then fewer features, then lower CV spread,
/// then name.
pub fn compare_results(a: &CombinationResult, b: &CombinationResult) -> Ordering {
    match (&a.outcome, &b.outcome) {
        (Some(x), Some(y)) => y
            .test_accuracy()
            .total_cmp(&x.test_accuracy())
            .then(x.n_selected.cmp(&y.n_selected))
            .then(x.cv.std.total_cmp(&y.cv.std))
            .then_with(|| a.name().cmp(&b.name())),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.name().cmp(&b.name()),
    }
}

pub fn select_best(results: &[CombinationResult]) -> Result<&CombinationResult> {
    results
        .iter()
        .filter(|r| r.is_ok())
        .min_by(|a, b| compare_results(a, b))
        .ok_or(Error::AllFailed)
}
