//! Turning rankings and expression tables into fixed-weight bitstrings.

use std::collections::HashMap;

use super::format::Dataset;
use crate::error::{Error, Result};
use crate::numeric::OccupationVector;

/// One bitstring per ranking: 1s at the row's first `n` items (ids 1..=m).
pub fn ingest_rankings(rows: &[Vec<usize>], m: usize, n: usize) -> Result<Dataset> {
    let mut records = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        if row.len() < n {
            return Err(Error::InvalidArgument(format!("ranking {r} has {} items, need {n}", row.len())));
        }
        if let Some(&bad) = row.iter().find(|&&id| id == 0 || id > m) {
            return Err(Error::InvalidArgument(format!("ranking {r}: unknown item id {bad} (items are 1..={m})")));
        }
        let mut bits = vec![0u8; m];
        for &id in &row[..n] {
            if bits[id - 1] == 1 {
                return Err(Error::InvalidArgument(format!("ranking {r}: item {id} repeated in the top {n}")));
            }
            bits[id - 1] = 1;
        }
        records.push(OccupationVector::new(bits));
    }
    Dataset::new(m, n, false, records)
}

/// Rows of a PrefLib strict-order file: lines `count: item,item,…`, each
/// expanded `count` times. `#` lines are metadata.
pub fn parse_preflib(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |reason: String| Error::Parse { line: idx + 1, reason };
        let (count, order) = line.split_once(':').ok_or_else(|| perr("expected 'count: item,item,...'".into()))?;
        let count: usize = count.trim().parse().map_err(|_| perr(format!("bad count '{}'", count.trim())))?;
        if order.contains('{') {
            return Err(perr("tied ranks are not a strict order".into()));
        }
        let items = parse_ids(order).map_err(perr)?;
        for _ in 0..count {
            rows.push(items.clone());
        }
    }
    Ok(rows)
}

/// Rows of a plain CSV of rankings, one comma-separated item list per line.
pub fn parse_rankings_csv(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        rows.push(parse_ids(line).map_err(|reason| Error::Parse { line: idx + 1, reason })?);
    }
    Ok(rows)
}

fn parse_ids(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| format!("bad item id '{t}'")))
        .collect()
}

/// Score table: a header row of item ids, then one row of scores per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpressionTable {
    pub items: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

pub fn parse_expression_csv(text: &str) -> Result<ExpressionTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).from_reader(text.as_bytes());
    let items: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, reason: e.to_string() })?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let row = rec
            .iter()
            .map(|cell| {
                let cell = cell.trim();
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::Parse { line, reason: format!("bad score '{cell}'") })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(ExpressionTable { items, rows })
}

/// 1s at the `n` universe items with the largest |score| per row (largest
/// signed score when `signed`); ties go to the lower universe index.
pub fn ingest_expression_table(
    table: &ExpressionTable,
    universe: &[String],
    n: usize,
    signed: bool,
) -> Result<Dataset> {
    let m = universe.len();
    if n > m {
        return Err(Error::InvalidArgument(format!("cannot pick {n} of {m} universe items")));
    }
    let column: HashMap<&str, usize> = table.items.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let cols = universe
        .iter()
        .map(|item| {
            column
                .get(item.as_str())
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("universe item '{item}' has no column")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::with_capacity(table.rows.len());
    for (r, row) in table.rows.iter().enumerate() {
        let mut scored = Vec::with_capacity(m);
        for (u, &c) in cols.iter().enumerate() {
            let s = row.get(c).copied().flatten().filter(|s| !s.is_nan()).ok_or_else(|| {
                Error::InvalidArgument(format!("row {r}: missing score for '{}'", universe[u]))
            })?;
            scored.push((if signed { s } else { s.abs() }, u));
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut bits = vec![0u8; m];
        for &(_, u) in &scored[..n] {
            bits[u] = 1;
        }
        records.push(OccupationVector::new(bits));
    }
    Dataset::new(m, n, false, records)
}
