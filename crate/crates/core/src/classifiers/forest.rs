use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Projected;
use crate::par;
use crate::rng::{self, StreamRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    /// `feature` is a dataset column index; rows with value `<= threshold`
    /// go left.
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        class: u8,
    },
}

/// CART tree stored as a flat node array, root at index 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, row: &[f64]) -> u8 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left as usize).max(walk(nodes, right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

fn gini(ones: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = ones as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

fn majority(p: &Projected, rows: &[usize]) -> u8 {
    let ones = rows.iter().filter(|&&r| p.labels[r] == 1).count();
    u8::from(2 * ones > rows.len())
}

struct Grower<'a> {
    p: &'a Projected,
    max_depth: Option<usize>,
    m_try: usize,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl Grower<'_> {
    fn best_split_on(&self, rows: &[usize], f: usize, vals: &mut Vec<(f64, u8)>, best: &mut Option<BestSplit>) {
        let p = self.p;
        vals.clear();
        vals.extend(rows.iter().map(|&r| (p.row(r)[f], p.labels[r])));
        vals.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = vals.len();
        let total_ones = vals.iter().filter(|v| v.1 == 1).count();
        let mut left_ones = 0;
        for i in 0..n - 1 {
            left_ones += usize::from(vals[i].1 == 1);
            if vals[i].0 == vals[i + 1].0 {
                continue;
            }
            let nl = i + 1;
            let nr = n - nl;
            let imp = (nl as f64 * gini(left_ones, nl) + nr as f64 * gini(total_ones - left_ones, nr)) / n as f64;
            if best.as_ref().is_none_or(|b| imp < b.impurity) {
                let threshold = vals[i].0 + (vals[i + 1].0 - vals[i].0) / 2.0;
                *best = Some(BestSplit { feature: f, threshold, impurity: imp });
            }
        }
    }

    /// Try `m_try` random candidate features; if none of them varies in this
    /// node, keep drawing from the rest until one does.
    fn find_split(&self, rows: &[usize], rng: &mut StreamRng) -> Option<BestSplit> {
        let width = self.p.width;
        let order = sample(rng, width, width).into_vec();
        let mut best = None;
        let mut vals = Vec::with_capacity(rows.len());
        for (tried, &f) in order.iter().enumerate() {
            if tried >= self.m_try && best.is_some() {
                break;
            }
            self.best_split_on(rows, f, &mut vals, &mut best);
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, rng: &mut StreamRng) -> u32 {
        let idx = self.nodes.len() as u32;
        let ones = rows.iter().filter(|&&r| self.p.labels[r] == 1).count();
        let pure = ones == 0 || ones == rows.len();
        let depth_capped = self.max_depth.is_some_and(|m| depth >= m);
        let split = if pure || depth_capped || rows.len() < 2 { None } else { self.find_split(&rows, rng) };
        let Some(split) = split else {
            self.nodes.push(Node::Leaf { class: majority(self.p, &rows) });
            return idx;
        };
        self.nodes.push(Node::Leaf { class: 0 });
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.p.row(i)[split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[idx as usize] = Node::Split {
            feature: self.p.columns[split.feature],
            threshold: split.threshold,
            left,
            right,
        };
        idx
    }
}

pub(crate) fn fit_tree(p: &Projected, rows: Vec<usize>, max_depth: Option<usize>, rng: &mut StreamRng) -> DecisionTree {
    let m_try = (p.width as f64).sqrt().ceil() as usize;
    let mut g = Grower { p, max_depth, m_try: m_try.max(1), nodes: Vec::new() };
    g.grow(rows, 0, rng);
    DecisionTree { nodes: g.nodes }
}

/// Rows tree `t` trains on: a bootstrap sample, or every row when the
/// forest has a single tree.
pub(crate) fn tree_rows(n: usize, n_trees: usize, rng: &mut StreamRng) -> Vec<usize> {
    if n_trees == 1 {
        (0..n).collect()
    } else {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    }
}

impl RandomForest {
    pub(crate) fn fit(p: &Projected, n_trees: usize, max_depth: Option<usize>, seed: u64) -> Self {
        let trees = par::map_range(n_trees, |t| {
            let mut rng = rng::stream(seed, &[0x7EE, t as u64]);
            let rows = tree_rows(p.n_rows(), n_trees, &mut rng);
            fit_tree(p, rows, max_depth, &mut rng)
        });
        Self { trees }
    }

    /// Majority of tree votes; a tie goes to label 0.
    pub fn predict(&self, row: &[f64]) -> u8 {
        let ones = self.trees.iter().filter(|t| t.predict(row) == 1).count();
        u8::from(2 * ones > self.trees.len())
    }
}
