//! Decision tree: greedy binary splits minimizing weighted Gini impurity.
//!
//! Candidate thresholds are midpoints between consecutive distinct feature
//! values, so the fitted tree depends only on the multiset of (row, label)
//! pairs, never on row order. A node becomes a leaf when it is pure, the
//! depth limit is reached, or no split strictly reduces impurity. Leaf and
//! split ties resolve toward the smaller class / earlier feature.

use crate::numerics::Matrix;

#[derive(Debug, Clone)]
pub(super) enum TreeNode {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / t;
            p * p
        })
        .sum::<f64>()
}

fn majority_class(counts: &[usize]) -> usize {
    let mut best = 0usize;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best // ties keep the smallest index because only strict improvements win
}

pub(super) fn fit(x: &Matrix, y: &[usize], n_classes: usize, max_depth: usize) -> TreeNode {
    let rows: Vec<usize> = (0..x.rows()).collect();
    grow(x, y, n_classes, &rows, max_depth)
}

fn grow(x: &Matrix, y: &[usize], n_classes: usize, rows: &[usize], depth_left: usize) -> TreeNode {
    let mut counts = vec![0usize; n_classes];
    for &r in rows {
        counts[y[r]] += 1;
    }
    let node_gini = gini(&counts, rows.len());
    if depth_left == 0 || node_gini == 0.0 {
        return TreeNode::Leaf {
            class: majority_class(&counts),
        };
    }

    // Best split over all features: sort values, sweep prefix class counts.
    let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)
    let total = rows.len() as f64;
    for feature in 0..x.cols() {
        let mut order: Vec<(f64, usize)> =
            rows.iter().map(|&r| (x.get(r, feature), y[r])).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_counts = vec![0usize; n_classes];
        let mut left_n = 0usize;
        let mut right_counts = counts.clone();
        for w in 0..order.len() - 1 {
            let (value, class) = order[w];
            left_counts[class] += 1;
            right_counts[class] -= 1;
            left_n += 1;
            let next_value = order[w + 1].0;
            if next_value == value {
                continue; // no boundary between equal values
            }
            let right_n = rows.len() - left_n;
            let weighted = (left_n as f64 / total) * gini(&left_counts, left_n)
                + (right_n as f64 / total) * gini(&right_counts, right_n);
            if best.is_none_or(|(g, _, _)| weighted < g) {
                best = Some((weighted, feature, 0.5 * (value + next_value)));
            }
        }
    }

    match best {
        Some((weighted, feature, threshold)) if weighted < node_gini => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| x.get(r, feature) <= threshold);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(grow(x, y, n_classes, &left_rows, depth_left - 1)),
                right: Box::new(grow(x, y, n_classes, &right_rows, depth_left - 1)),
            }
        }
        _ => TreeNode::Leaf {
            class: majority_class(&counts),
        },
    }
}

pub(super) fn predict(root: &TreeNode, x: &Matrix) -> Vec<usize> {
    (0..x.rows())
        .map(|r| {
            let mut node = root;
            loop {
                match node {
                    TreeNode::Leaf { class } => return *class,
                    TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        node = if x.get(r, *feature) <= *threshold {
                            left
                        } else {
                            right
                        };
                    }
                }
            }
        })
        .collect()
}
