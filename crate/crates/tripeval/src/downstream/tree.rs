//! Regression trees with exact greedy splits, used as boosting stages.

use rayon::prelude::*;

use crate::data::EncodedMatrix;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Split {
        feature: usize,
        /// Left branch takes rows with feature value <= threshold. The
        /// threshold is always an observed feature value, never a midpoint,
        /// so the comparison is exact.
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    #[cfg(test)]
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    /// left_sum^2/n_l + right_sum^2/n_r; larger means lower child SSE.
    score: f64,
}

/// Fit a tree to `residuals` over the rows listed in `indices`.
pub(crate) fn fit_tree(
    features: &EncodedMatrix,
    residuals: &[f64],
    indices: &[usize],
    params: &TreeParams,
) -> RegressionTree {
    let mut tree = RegressionTree { nodes: Vec::new() };
    let mut scratch = indices.to_vec();
    build(features, residuals, &mut scratch, 0, params, &mut tree.nodes);
    tree
}

fn build(
    features: &EncodedMatrix,
    residuals: &[f64],
    indices: &mut [usize],
    depth: usize,
    params: &TreeParams,
    nodes: &mut Vec<Node>,
) -> usize {
    let n = indices.len();
    let sum: f64 = indices.iter().map(|&i| residuals[i]).sum();
    let mean = sum / n as f64;

    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf { value: mean });
        nodes.len() - 1
    };

    if depth >= params.max_depth || n < 2 * params.min_samples_leaf {
        return make_leaf(nodes);
    }
    let uniform = indices
        .iter()
        .all(|&i| residuals[i] == residuals[indices[0]]);
    if uniform {
        return make_leaf(nodes);
    }

    let Some(best) = find_best_split(features, residuals, indices, sum, params) else {
        return make_leaf(nodes);
    };

    // Partition preserving relative order on each side, so child builds see
    // a deterministic layout.
    let mut left: Vec<usize> = Vec::with_capacity(n);
    let mut right: Vec<usize> = Vec::with_capacity(n);
    for &i in indices.iter() {
        if features.row(i)[best.feature] <= best.threshold {
            left.push(i);
        } else {
            right.push(i);
        }
    }

    let slot = nodes.len();
    nodes.push(Node::Leaf { value: 0.0 }); // reserved, patched below
    let left_id = build(features, residuals, &mut left, depth + 1, params, nodes);
    let right_id = build(features, residuals, &mut right, depth + 1, params, nodes);
    nodes[slot] = Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        left: left_id,
        right: right_id,
    };
    slot
}

fn find_best_split(
    features: &EncodedMatrix,
    residuals: &[f64],
    indices: &[usize],
    total_sum: f64,
    params: &TreeParams,
) -> Option<BestSplit> {
    let n = indices.len();
    let parent_score = total_sum * total_sum / n as f64;

    // Per-feature best splits computed independently, then reduced in
    // feature order so gain ties resolve to the lowest feature index and
    // lowest threshold.
    let per_feature: Vec<Option<(f64, f64)>> = (0..features.n_cols())
        .into_par_iter()
        .map(|feature| {
            let mut pairs: Vec<(f64, f64)> = indices
                .iter()
                .map(|&i| (features.row(i)[feature], residuals[i]))
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

            let mut best: Option<(f64, f64)> = None; // (score, threshold)
            let mut left_sum = 0.0;
            for t in 0..n - 1 {
                left_sum += pairs[t].1;
                if pairs[t].0 == pairs[t + 1].0 {
                    continue; // not a boundary between distinct values
                }
                let n_left = t + 1;
                let n_right = n - n_left;
                if n_left < params.min_samples_leaf || n_right < params.min_samples_leaf {
                    continue;
                }
                let right_sum = total_sum - left_sum;
                let score = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / n_right as f64;
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, pairs[t].0));
                }
            }
            best
        })
        .collect();

    let mut winner: Option<BestSplit> = None;
    for (feature, candidate) in per_feature.into_iter().enumerate() {
        if let Some((score, threshold)) = candidate {
            if winner.as_ref().is_none_or(|w| score > w.score) {
                winner = Some(BestSplit {
                    feature,
                    threshold,
                    score,
                });
            }
        }
    }
    winner.filter(|w| w.score > parent_score)
}
