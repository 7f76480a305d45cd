use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Loads a comma-separated numeric file.
///
/// `label_column` names the column holding `0`/`1` labels. Without a
/// header line it is read as a zero-based column index.
pub fn load_csv(
    path: impl AsRef<Path>,
    has_header: bool,
    label_column: Option<&str>,
) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, has_header, label_column)
}

pub fn read_csv<R: Read>(
    reader: R,
    has_header: bool,
    label_column: Option<&str>,
) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Option<Vec<String>> = if has_header {
        let h = rdr.headers().map_err(|e| csv_err(0, e))?;
        Some(h.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(i + 1, e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push(rec.iter().map(str::to_owned).collect());
    }
    let width = match (&header, rows.first()) {
        (Some(h), _) => h.len(),
        (None, Some(r)) => r.len(),
        (None, None) => 0,
    };
    if rows.is_empty() || width == 0 {
        return Err(Error::Empty("CSV has no data rows".into()));
    }

    let label_idx = match label_column {
        None => None,
        Some(name) => Some(match &header {
            Some(h) => h
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::MissingAttribute(name.to_owned()))?,
            None => name
                .parse::<usize>()
                .ok()
                .filter(|&i| i < width)
                .ok_or_else(|| Error::MissingAttribute(name.to_owned()))?,
        }),
    };

    let column_name = |j: usize| -> String {
        header
            .as_ref()
            .map_or_else(|| j.to_string(), |h| h[j].clone())
    };

    let d = width - usize::from(label_idx.is_some());
    let mut values = Vec::with_capacity(rows.len() * d);
    let mut labels = label_idx.map(|_| Vec::with_capacity(rows.len()));
    for (i, row) in rows.iter().enumerate() {
        let line = i + 1 + usize::from(has_header);
        if row.len() != width {
            return Err(Error::Ragged {
                row: line,
                expected: width,
                found: row.len(),
            });
        }
        for (j, cell) in row.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: line,
                column: column_name(j),
                message: format!("`{cell}` is not a number"),
            })?;
            if Some(j) == label_idx {
                let l = match v {
                    0.0 => 0,
                    1.0 => 1,
                    _ => {
                        return Err(Error::Parse {
                            row: line,
                            column: column_name(j),
                            message: format!("label `{cell}` is not 0 or 1"),
                        })
                    }
                };
                labels.as_mut().unwrap().push(l);
            } else {
                values.push(v);
            }
        }
    }

    let names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != label_idx)
            .map(|(_, s)| s)
            .collect()
    });
    let data = Array2::from_shape_vec((rows.len(), d), values)
        .map_err(|e| Error::InvalidData(e.to_string()))?;
    LabeledDataset::with_names(data, labels, names)
}

fn csv_err(row: usize, e: csv::Error) -> Error {
    Error::Parse {
        row,
        column: "-".into(),
        message: e.to_string(),
    }
}

/// Writes `ds` with a header line. Labels, when present, go to a trailing
/// `outlier` column. Values use the shortest round-trip representation.
pub fn write_csv<W: Write>(ds: &LabeledDataset, mut out: W) -> std::io::Result<()> {
    let mut header: Vec<String> = match ds.names() {
        Some(n) => n.to_vec(),
        None => (0..ds.n_features()).map(|j| format!("x{j}")).collect(),
    };
    if ds.labels().is_some() {
        header.push("outlier".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for (i, row) in ds.data().outer_iter().enumerate() {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = ds.labels() {
            cells.push(l[i].to_string());
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_numeric() {
        let ds = read_csv("1,2\n3,4\n5,6\n".as_bytes(), false, None).unwrap();
        assert_eq!(ds.n_points(), 3);
        assert_eq!(ds.n_features(), 2);
        assert!(ds.labels().is_none());
    }

    #[test]
    fn label_column() {
        let src = "a,outlier,b\n1,0,2\n3,1,4\n";
        let ds = read_csv(src.as_bytes(), true, Some("outlier")).unwrap();
        assert_eq!(ds.labels(), Some(&[0u8, 1][..]));
        assert_eq!(ds.names().unwrap(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.data()[[1, 1]], 4.0);
    }

    #[test]
    fn bad_cell_is_named() {
        let err = read_csv("x,y\n1,2\n3,abc\n".as_bytes(), true, None).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "y");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_and_empty() {
        assert!(matches!(
            read_csv("1,2\n3\n".as_bytes(), false, None),
            Err(Error::Ragged { .. })
        ));
        assert!(matches!(
            read_csv("".as_bytes(), false, None),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            read_csv("a,b\n".as_bytes(), true, None),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn missing_label_column() {
        assert!(matches!(
            read_csv("a,b\n1,2\n".as_bytes(), true, Some("c")),
            Err(Error::MissingAttribute(_))
        ));
    }
}
