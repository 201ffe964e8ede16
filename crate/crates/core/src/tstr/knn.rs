//! k-nearest-neighbors: memorize the training set, vote among the nearest
//! points by Euclidean distance.
//!
//! Points tied with the k-th smallest distance are all included in the
//! vote, which keeps predictions independent of training row order; vote
//! ties resolve to the smallest class index.

use crate::numerics::Matrix;

#[derive(Debug, Clone)]
pub(super) struct KnnState {
    x: Matrix,
    y: Vec<usize>,
    k: usize,
}

pub(super) fn fit(x: &Matrix, y: &[usize], k: usize) -> KnnState {
    KnnState {
        x: x.clone(),
        y: y.to_vec(),
        k,
    }
}

pub(super) fn predict(state: &KnnState, x: &Matrix, n_classes: usize) -> Vec<usize> {
    let n_train = state.x.rows();
    let k = state.k.min(n_train);
    let mut out = Vec::with_capacity(x.rows());
    let mut dists: Vec<f64> = vec![0.0; n_train];

    for r in 0..x.rows() {
        let probe = x.row(r);
        for (t, d) in dists.iter_mut().enumerate() {
            *d = probe
                .iter()
                .zip(state.x.row(t))
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
        }
        // k-th smallest squared distance.
        let mut order = dists.clone();
        let (_, kth, _) = order.select_nth_unstable_by(k - 1, f64::total_cmp);
        let kth = *kth;

        let mut votes = vec![0usize; n_classes];
        for (t, &d) in dists.iter().enumerate() {
            if d <= kth {
                votes[state.y[t]] += 1;
            }
        }
        let mut winner = 0usize;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[winner] {
                winner = c;
            }
        }
        out.push(winner);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_neighbor_of_a_training_point_is_itself() {
        let x = Matrix::from_vec(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let y = vec![0, 1, 0, 1];
        let state = fit(&x, &y, 1);
        assert_eq!(predict(&state, &x, 2), y);
    }

    #[test]
    fn equidistant_tie_votes_for_the_smaller_class() {
        // Probe at 0.5 sits exactly between classes 5 (at 0) and 2 (at 1).
        let x = Matrix::from_vec(2, 1, vec![0.0, 1.0]).unwrap();
        let y = vec![5, 2];
        let state = fit(&x, &y, 2);
        let probe = Matrix::from_vec(1, 1, vec![0.5]).unwrap();
        assert_eq!(predict(&state, &probe, 6), vec![2]);
    }

    #[test]
    fn k_larger_than_training_set_is_clamped() {
        let x = Matrix::from_vec(3, 1, vec![0.0, 0.1, 5.0]).unwrap();
        let y = vec![0, 0, 1];
        let state = fit(&x, &y, 50);
        let probe = Matrix::from_vec(1, 1, vec![0.0]).unwrap();
        assert_eq!(predict(&state, &probe, 2), vec![0]);
    }
}
