//! Labeled numeric datasets: loading, validation, and the standard
//! pre-processing pipeline (duplicate removal, then z-score normalization).

mod arff;
mod csv_io;
mod synth;

use std::collections::HashMap;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

pub use arff::{load_arff, parse_arff, ArffOptions};
pub use csv_io::{load_csv, read_csv, write_csv};
pub use synth::synth_collective;

/// An `n × d` matrix of finite reals with optional binary outlier labels
/// (`0` normal, `1` outlier) and optional attribute names.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    data: Array2<f64>,
    labels: Option<Vec<u8>>,
    names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(data: Array2<f64>, labels: Option<Vec<u8>>) -> Result<Self> {
        Self::with_names(data, labels, None)
    }

    pub fn with_names(
        data: Array2<f64>,
        labels: Option<Vec<u8>>,
        names: Option<Vec<String>>,
    ) -> Result<Self> {
        let (n, d) = data.dim();
        if n == 0 || d == 0 {
            return Err(Error::Empty(format!("dataset has shape {n}x{d}")));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: pos });
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: labels.len(),
                });
            }
            if let Some(bad) = labels.iter().find(|&&l| l > 1) {
                return Err(Error::InvalidData(format!("label {bad} is not 0 or 1")));
            }
        }
        if let Some(names) = &names {
            if names.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    found: names.len(),
                });
            }
        }
        Ok(LabeledDataset {
            data,
            labels,
            names,
        })
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn n_points(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.data.ncols()
    }

    pub fn n_outliers(&self) -> usize {
        self.labels
            .as_ref()
            .map_or(0, |l| l.iter().filter(|&&v| v == 1).count())
    }

    fn select_rows(&self, rows: &[usize]) -> Self {
        LabeledDataset {
            data: self.data.select(Axis(0), rows),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&r| l[r]).collect()),
            names: self.names.clone(),
        }
    }
}

/// Bitwise key of a feature vector. `-0.0` and `0.0` are different keys.
pub(crate) fn row_key(row: impl IntoIterator<Item = f64>) -> Vec<u64> {
    row.into_iter().map(f64::to_bits).collect()
}

/// Removes exact duplicate rows, keeping the first occurrence.
pub fn dedupe(ds: &LabeledDataset) -> LabeledDataset {
    dedupe_with_map(ds).0
}

/// Like [`dedupe`], also returning for every original row the index of
/// the row that represents it in the deduplicated dataset.
pub fn dedupe_with_map(ds: &LabeledDataset) -> (LabeledDataset, Vec<usize>) {
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(ds.n_points());
    let mut kept = Vec::new();
    let mut map = Vec::with_capacity(ds.n_points());
    for (i, row) in ds.data.outer_iter().enumerate() {
        let next = kept.len();
        let slot = *seen.entry(row_key(row.iter().copied())).or_insert(next);
        if slot == next {
            kept.push(i);
        }
        map.push(slot);
    }
    if kept.len() < ds.n_points() {
        log::info!("removed {} duplicate rows", ds.n_points() - kept.len());
    }
    (ds.select_rows(&kept), map)
}

/// Centers every column and scales it to unit population standard
/// deviation. Zero-variance columns become all zeros.
pub fn zscore_normalize(ds: &LabeledDataset) -> LabeledDataset {
    let n = ds.n_points() as f64;
    let mut data = ds.data.clone();
    for (j, mut col) in data.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n;
        col.mapv_inplace(|v| v - mean);
        let sd = (col.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        if sd > 0.0 {
            col.mapv_inplace(|v| v / sd);
        } else {
            log::warn!("column {j} has zero variance; mapped to zeros");
            col.fill(0.0);
        }
    }
    LabeledDataset {
        data,
        labels: ds.labels.clone(),
        names: ds.names.clone(),
    }
}

/// The default pre-processing: [`dedupe`] followed by [`zscore_normalize`].
pub fn preprocess(ds: &LabeledDataset, dedupe_rows: bool, normalize: bool) -> LabeledDataset {
    let ds = if dedupe_rows { dedupe(ds) } else { ds.clone() };
    if normalize {
        zscore_normalize(&ds)
    } else {
        ds
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn ds(data: Array2<f64>, labels: Option<Vec<u8>>) -> LabeledDataset {
        LabeledDataset::new(data, labels).unwrap()
    }

    #[test]
    fn rejects_invalid() {
        assert!(LabeledDataset::new(Array2::zeros((0, 2)), None).is_err());
        assert!(LabeledDataset::new(array![[1.0, f64::NAN]], None).is_err());
        assert!(LabeledDataset::new(array![[1.0], [2.0]], Some(vec![0])).is_err());
        assert!(LabeledDataset::new(array![[1.0], [2.0]], Some(vec![0, 2])).is_err());
    }

    #[test]
    fn dedupe_keeps_first() {
        let d = ds(array![[1.0, 2.0], [1.0, 2.0], [3.0, 4.0]], None);
        assert_eq!(dedupe(&d).data(), array![[1.0, 2.0], [3.0, 4.0]]);

        let d = ds(array![[1.0, 2.0], [1.0, 2.0]], Some(vec![0, 1]));
        let (out, map) = dedupe_with_map(&d);
        assert_eq!(out.labels(), Some(&[0u8][..]));
        assert_eq!(map, vec![0, 0]);
    }

    #[test]
    fn dedupe_matches_brute_force_scan() {
        let d = ds(
            array![[0.0], [1.0], [0.0], [2.0], [1.0], [3.0]],
            Some(vec![1, 0, 0, 1, 1, 0]),
        );
        let out = dedupe(&d);
        // O(n^2) first-occurrence scan
        let rows: Vec<f64> = d.data().column(0).to_vec();
        let keep: Vec<usize> = (0..rows.len())
            .filter(|&i| (0..i).all(|j| rows[j].to_bits() != rows[i].to_bits()))
            .collect();
        assert_eq!(keep, vec![0, 1, 3, 5]);
        assert_eq!(out.data().column(0).to_vec(), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(out.labels(), Some(&[1u8, 0, 1, 0][..]));
    }

    #[test]
    fn no_duplicates_is_identity() {
        let d = ds(array![[1.0], [2.0]], None);
        assert_eq!(dedupe(&d), d);
    }

    #[test]
    fn zscore_hand_computed() {
        let d = ds(array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]], None);
        let z = zscore_normalize(&d);
        // mean 2, population sd sqrt(2/3)
        let sd = (2.0f64 / 3.0).sqrt();
        assert!((sd - 0.8165).abs() < 1e-4);
        let expect = [-1.0 / sd, 0.0, 1.0 / sd];
        for (a, b) in z.data().column(0).iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((z.data()[[2, 0]] - 1.2247).abs() < 1e-4);
        assert_eq!(z.data().column(1).to_vec(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn zscore_idempotent() {
        let d = ds(array![[1.0, -3.0], [2.0, 0.5], [7.0, 2.0], [0.0, 9.0]], None);
        let once = zscore_normalize(&d);
        let twice = zscore_normalize(&once);
        for (a, b) in once.data().iter().zip(twice.data().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
