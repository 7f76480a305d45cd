//! A reader for the dense subset of the ARFF format: `%` comments,
//! case-insensitive `@relation`/`@attribute`/`@data`, numeric and nominal
//! attributes only.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArffOptions {
    /// Nominal attribute carrying the class.
    pub label_attribute: String,
    /// Class value that marks an outlier; every other value is normal.
    pub outlier_value: String,
    /// Attributes dropped from the feature matrix (e.g. `id`). Names not
    /// present in the file are ignored.
    pub exclude: Vec<String>,
}

impl Default for ArffOptions {
    fn default() -> Self {
        ArffOptions {
            label_attribute: "outlier".into(),
            outlier_value: "yes".into(),
            exclude: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum AttrKind {
    Numeric,
    Nominal(Vec<String>),
    Other(String),
}

#[derive(Debug)]
struct Attribute {
    name: String,
    kind: AttrKind,
}

pub fn load_arff(path: impl AsRef<Path>, opts: &ArffOptions) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_arff(&text, opts)
}

pub fn parse_arff(text: &str, opts: &ArffOptions) -> Result<LabeledDataset> {
    let mut attrs: Vec<Attribute> = Vec::new();
    let mut lines = text.lines().enumerate();
    let mut in_data = false;

    for (no, raw) in lines.by_ref() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            continue;
        } else if lower.starts_with("@attribute") {
            attrs.push(parse_attribute(&line["@attribute".len()..], no + 1)?);
        } else if lower.starts_with("@data") {
            in_data = true;
            break;
        } else {
            return Err(Error::Arff {
                line: no + 1,
                message: format!("unexpected header line `{line}`"),
            });
        }
    }
    if !in_data {
        return Err(Error::Arff {
            line: text.lines().count(),
            message: "no @data section".into(),
        });
    }
    if attrs.is_empty() {
        return Err(Error::Arff {
            line: 1,
            message: "no @attribute declarations".into(),
        });
    }

    let label_idx = attrs
        .iter()
        .position(|a| a.name == opts.label_attribute)
        .ok_or_else(|| Error::MissingAttribute(opts.label_attribute.clone()))?;
    let features: Vec<usize> = (0..attrs.len())
        .filter(|&j| j != label_idx && !opts.exclude.contains(&attrs[j].name))
        .collect();
    for &j in &features {
        if attrs[j].kind != AttrKind::Numeric {
            return Err(Error::InvalidData(format!(
                "attribute `{}` is not numeric; exclude it explicitly",
                attrs[j].name
            )));
        }
    }
    if features.is_empty() {
        return Err(Error::Empty("no numeric feature attributes".into()));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (no, raw) in lines {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('{') {
            return Err(Error::Arff {
                line: no + 1,
                message: "sparse rows are not supported".into(),
            });
        }
        let cells = split_row(line).map_err(|message| Error::Arff {
            line: no + 1,
            message,
        })?;
        if cells.len() != attrs.len() {
            return Err(Error::Ragged {
                row: no + 1,
                expected: attrs.len(),
                found: cells.len(),
            });
        }
        for &j in &features {
            let cell = &cells[j];
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: no + 1,
                column: attrs[j].name.clone(),
                message: format!("`{cell}` is not a number"),
            })?;
            values.push(v);
        }
        let label = &cells[label_idx];
        if let AttrKind::Nominal(allowed) = &attrs[label_idx].kind {
            if !allowed.contains(label) {
                return Err(Error::Parse {
                    row: no + 1,
                    column: attrs[label_idx].name.clone(),
                    message: format!("`{label}` is not a declared nominal value"),
                });
            }
        }
        labels.push(u8::from(*label == opts.outlier_value));
    }
    if labels.is_empty() {
        return Err(Error::Empty("ARFF @data section has no rows".into()));
    }

    let names = features.iter().map(|&j| attrs[j].name.clone()).collect();
    let data = Array2::from_shape_vec((labels.len(), features.len()), values)
        .map_err(|e| Error::InvalidData(e.to_string()))?;
    LabeledDataset::with_names(data, Some(labels), Some(names))
}

fn strip_comment(line: &str) -> &str {
    // '%' outside quotes starts a comment
    let mut quote = None;
    for (i, c) in line.char_indices() {
        match (quote, c) {
            (None, '%') => return &line[..i],
            (None, '\'' | '"') => quote = Some(c),
            (Some(q), c) if c == q => quote = None,
            _ => {}
        }
    }
    line
}

fn parse_attribute(rest: &str, line: usize) -> Result<Attribute> {
    let rest = rest.trim_start();
    let err = |message: String| Error::Arff { line, message };
    let (name, tail) = match rest.chars().next() {
        Some(q @ ('\'' | '"')) => {
            let end = rest[1..]
                .find(q)
                .ok_or_else(|| err("unterminated attribute name".into()))?;
            (rest[1..=end].to_owned(), &rest[end + 2..])
        }
        Some(_) => {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            (rest[..end].to_owned(), &rest[end..])
        }
        None => return Err(err("attribute without a name".into())),
    };
    let ty = tail.trim();
    if ty.is_empty() {
        return Err(err(format!("attribute `{name}` has no type")));
    }
    let kind = if ty.starts_with('{') {
        let inner = ty
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| err("unterminated nominal specification".into()))?;
        AttrKind::Nominal(split_row(inner).map_err(err)?)
    } else {
        match ty.to_ascii_lowercase().as_str() {
            "numeric" | "real" | "integer" => AttrKind::Numeric,
            other => AttrKind::Other(other.to_owned()),
        }
    };
    Ok(Attribute { name, kind })
}

/// Splits on commas outside quotes, unquoting and trimming each cell.
fn split_row(line: &str) -> std::result::Result<Vec<String>, String> {
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut was_quoted = false;
    for c in line.chars() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => cur.push(c),
            None => match c {
                '\'' | '"' if cur.trim().is_empty() => {
                    cur.clear();
                    quote = Some(c);
                    was_quoted = true;
                }
                ',' => {
                    cells.push(finish(&mut cur, was_quoted));
                    was_quoted = false;
                }
                _ => cur.push(c),
            },
        }
    }
    if quote.is_some() {
        return Err("unterminated quote".into());
    }
    cells.push(finish(&mut cur, was_quoted));
    Ok(cells)
}

fn finish(cur: &mut String, quoted: bool) -> String {
    let s = std::mem::take(cur);
    if quoted {
        s.trim_end().to_owned()
    } else {
        s.trim().to_owned()
    }
}
