use ndarray::ArrayView2;

use super::OutlierScores;
use crate::error::Result;
use crate::neighbors::{dist, Backend};
use crate::nr::mean_shift;

/// Mean-shift rounds used by the MOD detector.
pub const MOD_ITERATIONS: usize = 3;

/// Displacement of every point after `iterations` rounds of mean-shift
/// over size-`k` neighborhoods (self included).
pub fn score_mod(x: ArrayView2<'_, f64>, k: usize, iterations: usize) -> Result<OutlierScores> {
    score_mod_with(x, k, iterations, Backend::Auto)
}

pub fn score_mod_with(
    x: ArrayView2<'_, f64>,
    k: usize,
    iterations: usize,
    backend: Backend,
) -> Result<OutlierScores> {
    let shifted = mean_shift(x, k, iterations, backend)?.shifted;
    let x = x.as_standard_layout();
    let scores = x
        .outer_iter()
        .zip(shifted.outer_iter())
        .map(|(a, b)| dist(a.as_slice().unwrap(), b.as_slice().unwrap()))
        .collect();
    OutlierScores::new(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::testutil::random_matrix;
    use ndarray::{array, Array2};

    #[test]
    fn identical_points_do_not_move() {
        let x = Array2::from_elem((6, 2), -2.0);
        assert!(score_mod(x.view(), 3, 3).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn far_point_moves_most() {
        let x = array![[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [0.1, 0.1], [9.0, 9.0]];
        assert_eq!(score_mod(x.view(), 3, 3).unwrap().argmax(), 4);
    }

    #[test]
    fn equals_composed_mean_shift() {
        let x = random_matrix(100, 3, 12);
        let got = score_mod(x.view(), 7, 3).unwrap();
        let mut cur = x.clone();
        for _ in 0..3 {
            cur = mean_shift(cur.view(), 7, 1, Backend::Brute).unwrap().shifted;
        }
        for i in 0..100 {
            let want: f64 = x
                .row(i)
                .iter()
                .zip(cur.row(i))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert_eq!(got[i], want);
        }
        assert!(score_mod(x.view(), 101, 3).is_err());
    }
}
