use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::features::FeatureMatrix;
use crate::rng::{stream, tag};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per split; all when `None`.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART with Gini impurity. Leaves hold the (weighted) minority fraction.
/// Among equally good splits the lowest feature index, then the lowest
/// threshold, wins; thresholds are midpoints between adjacent values.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

struct Grower<'a> {
    m: &'a FeatureMatrix,
    weights: &'a [f64],
    params: TreeParams,
    rng: Option<ChaCha8Rng>,
    nodes: Vec<Node>,
}

fn impurity(w0: f64, w1: f64) -> f64 {
    let w = w0 + w1;
    if w > 0.0 {
        w - (w0 * w0 + w1 * w1) / w
    } else {
        0.0
    }
}

impl Grower<'_> {
    fn class_weights(&self, rows: &[usize]) -> (f64, f64) {
        rows.iter().fold((0.0, 0.0), |(w0, w1), &r| {
            if self.m.labels()[r] == 1 {
                (w0, w1 + self.weights[r])
            } else {
                (w0 + self.weights[r], w1)
            }
        })
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.m.n_features();
        match (self.params.max_features, self.rng.as_mut()) {
            (Some(k), Some(rng)) if k < d => {
                let mut f = sample(rng, d, k).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    /// Best `(feature, threshold)` by weighted child impurity.
    fn best_split(&mut self, rows: &[usize]) -> Option<(usize, f64)> {
        let min_leaf = self.params.min_leaf;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        let (t0, t1) = self.class_weights(rows);
        for f in self.candidate_features() {
            let x = |r: usize| self.m.row(r)[f];
            sorted.sort_by(|&a, &b| x(a).total_cmp(&x(b)).then(a.cmp(&b)));
            let (mut l0, mut l1) = (0.0, 0.0);
            for i in 1..sorted.len() {
                let prev = sorted[i - 1];
                if self.m.labels()[prev] == 1 {
                    l1 += self.weights[prev];
                } else {
                    l0 += self.weights[prev];
                }
                let (lo, hi) = (x(prev), x(sorted[i]));
                if lo == hi || i < min_leaf || sorted.len() - i < min_leaf {
                    continue;
                }
                let cost = impurity(l0, l1) + impurity(t0 - l0, t1 - l1);
                if best.is_none_or(|b| cost < b.0) {
                    let mut thr = lo + (hi - lo) / 2.0;
                    if thr >= hi {
                        thr = lo;
                    }
                    best = Some((cost, f, thr));
                }
            }
        }
        best.map(|b| (b.1, b.2))
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let (w0, w1) = self.class_weights(&rows);
        let leaf = w1 / (w0 + w1);
        let at_limit = self.params.max_depth.is_some_and(|d| depth >= d)
            || rows.len() < 2 * self.params.min_leaf;
        let split = if w0 == 0.0 || w1 == 0.0 || at_limit {
            None
        } else {
            self.best_split(&rows)
        };
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(leaf));
        if let Some((feature, threshold)) = split {
            let (l, r): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&i| self.m.row(i)[feature] <= threshold);
            let left = self.grow(l, depth + 1);
            let right = self.grow(r, depth + 1);
            self.nodes[id] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        id
    }
}

impl DecisionTree {
    pub fn fit(m: &FeatureMatrix, params: TreeParams) -> Self {
        Self::fit_weighted(
            m,
            (0..m.n_rows()).collect(),
            &vec![1.0; m.n_rows()],
            params,
            None,
        )
    }

    /// Grows a tree on `rows` (repeats allowed) with per-row `weights`.
    pub(crate) fn fit_weighted(
        m: &FeatureMatrix,
        rows: Vec<usize>,
        weights: &[f64],
        params: TreeParams,
        rng: Option<ChaCha8Rng>,
    ) -> Self {
        let mut g = Grower {
            m,
            weights,
            params,
            rng,
            nodes: Vec::new(),
        };
        g.grow(rows, 0);
        DecisionTree { nodes: g.nodes }
    }

    pub fn score_row(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Bagged CART trees with √d features per split; the score is the mean
/// leaf minority fraction over trees.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(m: &FeatureMatrix, n_trees: usize, params: TreeParams, seed: u64) -> Self {
        let n = m.n_rows();
        let max_features = ((m.n_features() as f64).sqrt().floor() as usize).max(1);
        let params = TreeParams {
            max_features: Some(max_features),
            ..params
        };
        let weights = vec![1.0; n];
        let trees = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream(seed, tag::TREE, t as u64);
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                DecisionTree::fit_weighted(m, rows, &weights, params, Some(rng))
            })
            .collect();
        RandomForest { trees }
    }

    pub fn score_row(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.score_row(x)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Discrete AdaBoost over depth-1 stumps. The score is the normalised
/// weighted vote `Σ α h(x) / Σ α`, in [-1, 1].
#[derive(Debug, Clone)]
pub struct AdaBoost {
    stumps: Vec<(f64, DecisionTree)>,
}

impl AdaBoost {
    pub fn fit(m: &FeatureMatrix, n_rounds: usize) -> Self {
        let n = m.n_rows();
        let y: Vec<f64> = m
            .labels()
            .iter()
            .map(|&l| if l == 1 { 1.0 } else { -1.0 })
            .collect();
        let mut w = vec![1.0 / n as f64; n];
        let params = TreeParams {
            max_depth: Some(1),
            min_leaf: 1,
            max_features: None,
        };
        let mut stumps = Vec::new();
        for _ in 0..n_rounds {
            let stump = DecisionTree::fit_weighted(m, (0..n).collect(), &w, params, None);
            let h: Vec<f64> = m.rows().map(|r| vote(&stump, r)).collect();
            let err: f64 =
                (0..n).filter(|&i| h[i] != y[i]).map(|i| w[i]).sum::<f64>() / w.iter().sum::<f64>();
            if err >= 0.5 {
                break;
            }
            let err = err.max(1e-10);
            let alpha = 0.5 * ((1.0 - err) / err).ln();
            stumps.push((alpha, stump));
            if err <= 1e-10 {
                break;
            }
            for i in 0..n {
                w[i] *= (-alpha * y[i] * h[i]).exp();
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= total);
        }
        AdaBoost { stumps }
    }

    pub fn score_row(&self, x: &[f64]) -> f64 {
        let total: f64 = self.stumps.iter().map(|s| s.0).sum();
        if total <= 0.0 {
            return 0.0;
        }
        self.stumps.iter().map(|(a, t)| a * vote(t, x)).sum::<f64>() / total
    }

    pub fn n_stumps(&self) -> usize {
        self.stumps.len()
    }
}

fn vote(t: &DecisionTree, x: &[f64]) -> f64 {
    if t.score_row(x) >= 0.5 {
        1.0
    } else {
        -1.0
    }
}
