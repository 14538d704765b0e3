//! CART regression tree with exhaustive squared-error split search.

use super::{check_shape, matrix_from_dataset, Matrix, Predictor};
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TreeHyper {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeHyper {
    fn default() -> Self {
        TreeHyper {
            max_depth: 4,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Fitted regression tree. Predictions are piecewise constant.
#[derive(Debug, Clone)]
pub struct RegressionTree {
    feature_names: Vec<String>,
    nodes: Vec<Node>,
}

/// Fit a CART regression tree on `ds` (numeric target required).
///
/// Splits minimize the summed squared error of the two children, searched
/// exhaustively over midpoints of consecutive distinct sorted values of
/// every feature. Cost ties keep the earliest candidate, i.e. the lowest
/// feature index, then the lowest threshold. A node whose target is
/// constant, whose depth hit `max_depth`, or that cannot honor `min_leaf`
/// becomes a leaf predicting the node mean.
pub fn fit_tree(ds: &Dataset, hyper: &TreeHyper) -> Result<RegressionTree> {
    let y = ds
        .target()
        .ok_or_else(|| Error::invalid("fit_tree needs a target column"))?;
    if hyper.min_leaf == 0 {
        return Err(Error::invalid("min_leaf must be at least 1"));
    }
    let feature_names = ds.feature_names();
    let x = matrix_from_dataset(ds, &feature_names)?;
    let trainer = Trainer {
        x: &x,
        y,
        hyper: hyper.clone(),
    };
    let mut nodes = Vec::new();
    let all_rows: Vec<usize> = (0..ds.n_rows()).collect();
    trainer.grow(&all_rows, 0, &mut nodes);
    Ok(RegressionTree {
        feature_names,
        nodes,
    })
}

/// Grow a tree on a pre-built matrix against an arbitrary target vector.
/// Boosting fits residuals through this path.
pub(crate) fn grow_on_matrix(
    x: &Matrix,
    y: &[f64],
    feature_names: &[String],
    hyper: &TreeHyper,
) -> RegressionTree {
    let trainer = Trainer {
        x,
        y,
        hyper: hyper.clone(),
    };
    let mut nodes = Vec::new();
    let all_rows: Vec<usize> = (0..x.n_rows()).collect();
    trainer.grow(&all_rows, 0, &mut nodes);
    RegressionTree {
        feature_names: feature_names.to_vec(),
        nodes,
    }
}

struct Trainer<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    hyper: TreeHyper,
}

struct Candidate {
    cost: f64,
    feature: usize,
    threshold: f64,
}

impl Trainer<'_> {
    /// Append the subtree for `rows` and return its node index.
    fn grow(&self, rows: &[usize], depth: usize, nodes: &mut Vec<Node>) -> usize {
        let mean = rows.iter().map(|&r| self.y[r]).sum::<f64>() / rows.len() as f64;
        let pure = rows.iter().all(|&r| self.y[r] == self.y[rows[0]]);
        if pure || depth >= self.hyper.max_depth || rows.len() < 2 * self.hyper.min_leaf {
            nodes.push(Node::Leaf { value: mean });
            return nodes.len() - 1;
        }
        let best = match self.best_split(rows) {
            Some(c) => c,
            None => {
                nodes.push(Node::Leaf { value: mean });
                return nodes.len() - 1;
            }
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.x.get(r, best.feature) <= best.threshold);
        let here = nodes.len();
        nodes.push(Node::Leaf { value: mean }); // placeholder
        let left = self.grow(&left_rows, depth + 1, nodes);
        let right = self.grow(&right_rows, depth + 1, nodes);
        nodes[here] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        here
    }

    /// Exhaustive search over (feature, midpoint) candidates. Returns the
    /// candidate with minimal child SSE, honoring `min_leaf`; `None` when no
    /// candidate is valid (e.g. all feature values tied).
    fn best_split(&self, rows: &[usize]) -> Option<Candidate> {
        let n = rows.len();
        let min_leaf = self.hyper.min_leaf;
        let mut best: Option<Candidate> = None;
        for feature in 0..self.x.n_cols() {
            let mut order: Vec<usize> = rows.to_vec();
            order.sort_by(|&a, &b| self.x.get(a, feature).total_cmp(&self.x.get(b, feature)));
            // prefix sums over the sorted order
            let mut sum = 0.0f64;
            let mut sumsq = 0.0f64;
            let total_sum: f64 = order.iter().map(|&r| self.y[r]).sum();
            let total_sumsq: f64 = order.iter().map(|&r| self.y[r] * self.y[r]).sum();
            for s in 1..n {
                let r = order[s - 1];
                sum += self.y[r];
                sumsq += self.y[r] * self.y[r];
                let v_prev = self.x.get(r, feature);
                let v_next = self.x.get(order[s], feature);
                if v_prev == v_next {
                    continue; // not a boundary between distinct values
                }
                if s < min_leaf || n - s < min_leaf {
                    continue;
                }
                let left_n = s as f64;
                let right_n = (n - s) as f64;
                let right_sum = total_sum - sum;
                let right_sumsq = total_sumsq - sumsq;
                let sse_left = (sumsq - sum * sum / left_n).max(0.0);
                let sse_right = (right_sumsq - right_sum * right_sum / right_n).max(0.0);
                let cost = sse_left + sse_right;
                let threshold = v_prev + 0.5 * (v_next - v_prev);
                let better = match &best {
                    None => true,
                    Some(b) => cost < b.cost,
                };
                if better {
                    best = Some(Candidate {
                        cost,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best
    }
}

impl RegressionTree {
    fn score_row(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Number of leaf nodes, equal to the number of distinct prediction
    /// values the tree can emit.
    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

impl Predictor for RegressionTree {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_shape(self, x)?;
        Ok(x.rows().map(|row| self.score_row(row)).collect())
    }
}
