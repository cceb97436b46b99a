//! Wrapper feature selection: filter rankings seed binary metaheuristics
//! whose candidate masks are scored by a classifier.

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod mask;
pub mod metaheuristics;
pub mod par;
pub mod pipeline;
pub mod ranking;
pub mod rng;

pub use classifiers::{ClassifierKind, ClassifierSpec, TrainedModel};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use mask::FeatureMask;
pub use metaheuristics::{run_selector, Algorithm, SelectionResult, SelectorConfig};
pub use ranking::{RankMethod, RankedFeatures};
