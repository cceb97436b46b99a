use serde::{Deserialize, Serialize};

use super::Projected;

/// Memorized training rows over the masked columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub width: usize,
    pub rows: Vec<f64>,
    pub labels: Vec<u8>,
}

impl Knn {
    pub(crate) fn fit(p: &Projected, k: usize) -> Self {
        Self {
            k,
            width: p.width,
            rows: p.data.clone(),
            labels: p.labels.clone(),
        }
    }

    /// Majority label of the k nearest rows by Euclidean distance. Distance
    /// ties go to the lower training row, vote ties to label 0.
    pub fn predict(&self, x: &[f64]) -> u8 {
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .chunks_exact(self.width)
            .enumerate()
            .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let k = self.k.min(dist.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
        }
        let ones = dist[..k].iter().filter(|&&(_, i)| self.labels[i] == 1).count();
        u8::from(2 * ones > k)
    }
}
