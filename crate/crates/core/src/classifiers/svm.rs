use serde::{Deserialize, Serialize};

use super::Projected;

/// Linear SVM on standardized features: `w · (x - mean) / scale + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl LinearSvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.weights)
            .zip(self.mean.iter().zip(&self.scale))
            .map(|((v, w), (m, s))| w * (v - m) / s)
            .sum::<f64>()
            + self.bias
    }

    /// Label 1 on the non-negative side, boundary included.
    pub fn predict(&self, x: &[f64]) -> u8 {
        u8::from(self.decision(x) >= 0.0)
    }

    /// Full-batch subgradient descent on
    /// `lambda/2 |w|^2 + mean(max(0, 1 - y (w·x + b)))` with y in {-1, +1},
    /// starting from zero. Also returns the objective before every epoch
    /// and after the last.
    pub(crate) fn fit(p: &Projected, epochs: usize, lr: f64, lambda: f64) -> (Self, Vec<f64>) {
        let n = p.n_rows();
        let width = p.width;
        let nf = n as f64;
        let mut mean = vec![0.0; width];
        for r in 0..n {
            for (m, v) in mean.iter_mut().zip(p.row(r)) {
                *m += v / nf;
            }
        }
        let mut scale = vec![0.0; width];
        for r in 0..n {
            for ((s, v), m) in scale.iter_mut().zip(p.row(r)).zip(&mean) {
                *s += (v - m) * (v - m) / nf;
            }
        }
        for s in scale.iter_mut() {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        let x: Vec<f64> = (0..n)
            .flat_map(|r| {
                p.row(r)
                    .iter()
                    .zip(&mean)
                    .zip(&scale)
                    .map(|((v, m), s)| (v - m) / s)
                    .collect::<Vec<_>>()
            })
            .collect();
        let y: Vec<f64> = p.labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

        let mut w = vec![0.0; width];
        let mut b = 0.0;
        let mut history = Vec::with_capacity(epochs + 1);
        let mut grad = vec![0.0; width];
        for _ in 0..epochs {
            let mut obj = 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
            grad.iter_mut().zip(&w).for_each(|(g, wv)| *g = lambda * wv);
            let mut grad_b = 0.0;
            for r in 0..n {
                let xr = &x[r * width..(r + 1) * width];
                let margin = y[r] * (xr.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b);
                if margin < 1.0 {
                    obj += (1.0 - margin) / nf;
                    for (g, v) in grad.iter_mut().zip(xr) {
                        *g -= y[r] * v / nf;
                    }
                    grad_b -= y[r] / nf;
                }
            }
            history.push(obj);
            for (wv, g) in w.iter_mut().zip(&grad) {
                *wv -= lr * g;
            }
            b -= lr * grad_b;
        }
        let model = Self { weights: w, bias: b, mean, scale };
        history.push(model.objective(&x, &y, lambda));
        (model, history)
    }

    fn objective(&self, x: &[f64], y: &[f64], lambda: f64) -> f64 {
        let width = self.weights.len();
        let n = y.len() as f64;
        let hinge: f64 = y
            .iter()
            .enumerate()
            .map(|(r, yr)| {
                let xr = &x[r * width..(r + 1) * width];
                let s = xr.iter().zip(&self.weights).map(|(a, c)| a * c).sum::<f64>() + self.bias;
                (1.0 - yr * s).max(0.0)
            })
            .sum();
        0.5 * lambda * self.weights.iter().map(|v| v * v).sum::<f64>() + hinge / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, Provenance};
    use crate::mask::FeatureMask;

    fn separable() -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let t = i as f64 / 20.0;
            rows.push(vec![t, 2.0 + t]);
            labels.push(1);
            rows.push(vec![t + 0.1, -1.0 - t]);
            labels.push(0);
        }
        Dataset::new(rows, labels, vec!["a".into(), "b".into()], Provenance::Loaded).unwrap()
    }

    fn projected(d: &Dataset) -> Projected {
        let rows: Vec<usize> = (0..d.n_rows()).collect();
        Projected::new(d, &rows, &FeatureMask::full(d.n_cols()), None)
    }

    #[test]
    fn sign_rule() {
        let m = LinearSvm { weights: vec![1.0], bias: -0.5, mean: vec![0.0], scale: vec![1.0] };
        assert_eq!(m.predict(&[0.2]), 0);
        assert_eq!(m.predict(&[0.5]), 1);
        assert_eq!(m.predict(&[0.9]), 1);
    }

    #[test]
    fn separable_training_accuracy_is_perfect() {
        let d = separable();
        let (m, _) = LinearSvm::fit(&projected(&d), 200, 0.01, 0.01);
        for r in 0..d.n_rows() {
            assert_eq!(m.predict(d.row(r)), d.label(r));
        }
        assert_eq!(m.weights.len(), 2);
    }

    #[test]
    fn objective_non_increasing_at_small_rate() {
        let d = separable();
        let (_, history) = LinearSvm::fit(&projected(&d), 300, 1e-3, 0.01);
        for w in history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
        assert!(history.last().unwrap() < &history[0]);
    }
}
