//! CART decision tree with Gini impurity and axis-aligned thresholds.

use serde::{Deserialize, Serialize};

use crate::nn::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeNode {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        distribution: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub n_features: usize,
    pub n_classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Minimum samples in each child of a split.
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: usize::MAX,
            min_leaf: 1,
        }
    }
}

/// Weighted Gini impurity numerator `n * (1 - sum p^2)`.
fn gini_mass(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    n as f64 - sq / n as f64
}

struct Builder<'a> {
    x: &'a Matrix,
    labels: &'a [usize],
    n_classes: usize,
    params: TreeParams,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.labels[i]] += 1;
        }
        c
    }

    fn leaf(&self, counts: &[usize], n: usize) -> TreeNode {
        TreeNode::Leaf {
            distribution: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        }
    }

    /// Best `(feature, threshold)`, lowest impurity first, then lowest
    /// feature, then lowest threshold.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..self.x.cols() {
            order.sort_by(|&a, &b| {
                self.x
                    .get(a, f)
                    .total_cmp(&self.x.get(b, f))
                    .then(a.cmp(&b))
            });
            let mut left = vec![0usize; self.n_classes];
            let mut right = self.counts(&order);
            for pos in 0..n - 1 {
                let c = self.labels[order[pos]];
                left[c] += 1;
                right[c] -= 1;
                let lo = self.x.get(order[pos], f);
                let hi = self.x.get(order[pos + 1], f);
                if lo >= hi {
                    continue;
                }
                let nl = pos + 1;
                let nr = n - nl;
                if nl < self.params.min_leaf || nr < self.params.min_leaf {
                    continue;
                }
                let impurity = gini_mass(&left, nl) + gini_mass(&right, nr);
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    let mut thr = lo + (hi - lo) / 2.0;
                    if thr >= hi {
                        thr = lo;
                    }
                    best = Some((impurity, f, thr));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&self, idx: &[usize], depth: usize) -> TreeNode {
        let n = idx.len();
        let counts = self.counts(idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.params.max_depth || n < 2 * self.params.min_leaf.max(1) {
            return self.leaf(&counts, n);
        }
        let Some((feature, threshold)) = self.best_split(idx) else {
            return self.leaf(&counts, n);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x.get(i, feature) <= threshold);
        TreeNode::Split {
            feature,
            threshold,
            left: Box::new(self.grow(&l, depth + 1)),
            right: Box::new(self.grow(&r, depth + 1)),
        }
    }
}

/// Grow a tree greedily. Splits with zero impurity gain are accepted so
/// that patterns such as XOR can be learned.
pub fn fit_tree(
    x: &Matrix,
    labels: &[usize],
    n_classes: usize,
    params: TreeParams,
) -> Result<DecisionTree> {
    if x.rows() == 0 {
        return Err(Error::invalid("cannot fit a tree on an empty set"));
    }
    if labels.len() != x.rows() {
        return Err(Error::shape("fit_tree labels", x.rows(), labels.len()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::invalid(format!(
            "label {bad} outside {n_classes} classes"
        )));
    }
    let builder = Builder {
        x,
        labels,
        n_classes,
        params,
    };
    let idx: Vec<usize> = (0..x.rows()).collect();
    Ok(DecisionTree {
        root: builder.grow(&idx, 0),
        n_features: x.cols(),
        n_classes,
    })
}

/// Index of the largest entry; ties go to the smaller index.
pub fn argmax(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p > dist[best] {
            best = i;
        }
    }
    best
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::shape(
                "DecisionTree::predict",
                self.n_features,
                x.len(),
            ));
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { distribution } => return Ok(argmax(distribution)),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn predict_rows(&self, x: &Matrix) -> Result<Vec<usize>> {
        x.row_iter().map(|r| self.predict(r)).collect()
    }

    pub fn depth(&self) -> usize {
        fn d(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }

    pub fn n_leaves(&self) -> usize {
        fn c(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Split { left, right, .. } => c(left) + c(right),
            }
        }
        c(&self.root)
    }
}
