use std::path::Path;

use super::OutlierScores;
use crate::error::{Error, Result};

/// Reads scores produced by an outside detector: one decimal real per
/// line, LF or CRLF. Blank trailing lines are ignored.
pub fn external_scores(path: impl AsRef<Path>, expected_n: usize) -> Result<OutlierScores> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores(&text, Some(expected_n))
}

pub fn parse_scores(text: &str, expected_n: Option<usize>) -> Result<OutlierScores> {
    let mut scores = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            row: i + 1,
            column: "score".into(),
            message: format!("`{line}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::NonFinite { index: scores.len() });
        }
        scores.push(v);
    }
    if let Some(n) = expected_n {
        if scores.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: scores.len(),
            });
        }
    }
    OutlierScores::new(scores)
}

/// Writes one score per line in shortest round-trip form.
pub fn format_scores(scores: &[f64]) -> String {
    let mut out = String::with_capacity(scores.len() * 20);
    for s in scores {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}
