use ndarray::ArrayView2;

use super::{neighbor_table, OutlierScores};
use crate::error::{Error, Result};
use crate::neighbors::{Backend, NeighborList};

/// Negated in-degree in the directed k-NN graph, so points that nobody
/// picks as a neighbor score highest.
pub fn score_odin(x: ArrayView2<'_, f64>, k: usize) -> Result<OutlierScores> {
    score_odin_with(x, k, Backend::Auto)
}

pub fn score_odin_with(x: ArrayView2<'_, f64>, k: usize, backend: Backend) -> Result<OutlierScores> {
    let table = neighbor_table(x, k, backend)?;
    odin_from_table(&table, k)
}

/// Raw in-degrees of the k-NN graph built from `table`.
pub fn in_degrees(table: &[NeighborList], k: usize) -> Vec<usize> {
    let mut indeg = vec![0usize; table.len()];
    for l in table {
        for &j in &l.indices[..k] {
            indeg[j] += 1;
        }
    }
    indeg
}

pub(crate) fn odin_from_table(table: &[NeighborList], k: usize) -> Result<OutlierScores> {
    Error::check_k(k, 1, table.len().saturating_sub(1))?;
    OutlierScores::new(in_degrees(table, k).into_iter().map(|c| 0.0 - c as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::testutil::{brute_sorted_neighbors, random_matrix};
    use crate::neighbors::knn_all;
    use ndarray::array;

    #[test]
    fn isolated_point() {
        let x = array![[0.0, 0.0], [0.1, 0.0], [5.0, 5.0]];
        let s = score_odin(x.view(), 1).unwrap();
        assert_eq!(s.as_slice(), &[-1.0, -2.0, 0.0]);
        assert!(s[2].is_sign_positive());
    }

    #[test]
    fn degrees_sum_to_nk() {
        let x = random_matrix(120, 3, 5);
        for k in [1, 4, 9] {
            let table = knn_all(x.view(), k, false, Backend::Auto).unwrap();
            assert_eq!(in_degrees(&table, k).iter().sum::<usize>(), 120 * k);
            let s = odin_from_table(&table, k).unwrap();
            assert!(s.iter().all(|&v| (-119.0..=0.0).contains(&v)));
        }
    }

    #[test]
    fn brute_force_graph() {
        let x = random_matrix(200, 2, 6);
        let k = 5;
        let mut indeg = vec![0.0; 200];
        for i in 0..200 {
            for j in brute_sorted_neighbors(&x, i).into_iter().take(k) {
                indeg[j] += 1.0;
            }
        }
        let got = score_odin(x.view(), k).unwrap();
        for i in 0..200 {
            assert_eq!(got[i], -indeg[i]);
        }
    }
}
