//! Feature scoring against the label and the leading mask derived from it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, MinMaxScaler};
use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    Pearson,
    Spearman,
    Relief,
}

impl RankMethod {
    pub const ALL: [RankMethod; 3] = [RankMethod::Pearson, RankMethod::Spearman, RankMethod::Relief];

    pub fn name(self) -> &'static str {
        match self {
            RankMethod::Pearson => "pearson",
            RankMethod::Spearman => "spearman",
            RankMethod::Relief => "relief",
        }
    }

    /// Short label used in the result tables.
    pub fn table_label(self) -> &'static str {
        match self {
            RankMethod::Pearson => "PCC",
            RankMethod::Spearman => "SCC",
            RankMethod::Relief => "Relief",
        }
    }
}

impl fmt::Display for RankMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RankMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" | "pcc" => Ok(RankMethod::Pearson),
            "spearman" | "scc" => Ok(RankMethod::Spearman),
            "relief" => Ok(RankMethod::Relief),
            _ => Err(Error::InvalidParameter(format!("unknown ranking method `{s}`"))),
        }
    }
}

/// Pearson correlation with population moments.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two observations"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Relief weights over every row: each row's nearest same-class row
/// (hit) lowers a feature's weight by the squared difference, its nearest
/// other-class row (miss) raises it. Returned as `W / n_rows`.
///
/// Expects features already scaled to [0, 1]. Distance ties go to the lower
/// row index.
pub fn relief_weights(d: &Dataset) -> Result<Vec<f64>> {
    let counts = d.class_counts();
    if counts.contains(&0) {
        return Err(Error::SingleClass);
    }
    if let Some(class) = counts.iter().position(|&c| c < 2) {
        return Err(Error::ClassTooSmall {
            class: class as u8,
            count: counts[class],
            needed: 2,
        });
    }
    let n = d.n_rows();
    let contributions = par::map_range(n, |i| {
        let row = d.row(i);
        let mut hit = (f64::INFINITY, usize::MAX);
        let mut miss = (f64::INFINITY, usize::MAX);
        for j in (0..n).filter(|&j| j != i) {
            let dist = squared_distance(row, d.row(j));
            let slot = if d.label(j) == d.label(i) { &mut hit } else { &mut miss };
            if dist < slot.0 {
                *slot = (dist, j);
            }
        }
        let (h, m) = (d.row(hit.1), d.row(miss.1));
        row.iter()
            .enumerate()
            .map(|(f, &x)| (x - m[f]).powi(2) - (x - h[f]).powi(2))
            .collect::<Vec<f64>>()
    });
    let mut w = vec![0.0; d.n_cols()];
    for c in &contributions {
        for (acc, v) in w.iter_mut().zip(c) {
            *acc += v;
        }
    }
    Ok(w.into_iter().map(|v| v / n as f64).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedFeatures {
    pub method: RankMethod,
    pub scores: Vec<f64>,
    pub order: Vec<usize>,
}

impl RankedFeatures {
    /// Order features by descending score, ties by ascending index.
    pub fn from_scores(method: RankMethod, scores: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Self { method, scores, order }
    }

    pub fn n_features(&self) -> usize {
        self.scores.len()
    }

    /// 1-based rank of each feature.
    pub fn rank_of(&self, feature: usize) -> usize {
        self.order.iter().position(|&f| f == feature).expect("feature in order") + 1
    }
}

/// Score every feature against the label. Correlations are taken in
/// absolute value and a constant feature scores 0. Relief runs on a min-max
/// scaled copy of `d`.
pub fn rank_features(d: &Dataset, method: RankMethod) -> Result<RankedFeatures> {
    let scores = match method {
        RankMethod::Pearson | RankMethod::Spearman => {
            let y: Vec<f64> = d.labels().iter().map(|&l| f64::from(l)).collect();
            if y.iter().all(|&v| v == y[0]) {
                return Err(Error::SingleClass);
            }
            let score = |c: &usize| {
                let x = d.column(*c);
                let r = match method {
                    RankMethod::Pearson => pearson(&x, &y),
                    _ => spearman(&x, &y),
                };
                r.map(f64::abs).unwrap_or(0.0)
            };
            let cols: Vec<usize> = (0..d.n_cols()).collect();
            par::map(&cols, score)
        }
        RankMethod::Relief => {
            let scaled = MinMaxScaler::fit_all(d)?.transform(d)?;
            relief_weights(&scaled)?
        }
    };
    Ok(RankedFeatures::from_scores(method, scores))
}

pub fn default_lead_size(n_features: usize) -> usize {
    n_features.div_ceil(2)
}

/// Mask with the `k` top-ranked features set.
pub fn leading_mask(r: &RankedFeatures, k: usize) -> Result<FeatureMask> {
    let n = r.n_features();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "leading mask size {k} outside 1..={n}"
        )));
    }
    FeatureMask::from_indices(n, &r.order[..k])
}
