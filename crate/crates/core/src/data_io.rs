//! CSV ingestion, train/test splitting, feature scaling and report files.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use crate::error::{Error, Result};

/// A labelled dataset: raw features, binary labels, column names and the
/// label mapping recorded when string labels were encountered.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Vec<u8>,
    pub feature_names: Vec<String>,
    /// `(value mapped to 0, value mapped to 1)` when labels were not 0/1.
    pub label_mapping: Option<(String, String)>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }
}

/// Which column of the CSV carries the class label.
#[derive(Debug, Clone)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    Last,
}

/// Parse a comma-separated numeric file. Ragged rows, non-numeric feature
/// cells and label columns with more than two distinct values are rejected
/// with the offending line.
pub fn load_csv(path: &Path, label: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, label, has_header)
}

fn parse_csv(text: &str, label: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let header: Option<Vec<String>> = if has_header {
        let (_, line) = lines.next().ok_or_else(|| Error::CsvParse {
            line: 1,
            message: "file is empty".into(),
        })?;
        Some(line.split(',').map(|s| s.trim().to_string()).collect())
    } else {
        None
    };

    let mut width = header.as_ref().map(|h| h.len());
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if let Some(w) = width {
            if fields.len() != w {
                return Err(Error::CsvParse {
                    line: lineno,
                    message: format!("expected {w} fields, found {}", fields.len()),
                });
            }
        } else {
            width = Some(fields.len());
        }
        rows.push((lineno, fields));
    }
    let width = width.ok_or_else(|| Error::CsvParse {
        line: 1,
        message: "file has no data rows".into(),
    })?;
    if rows.is_empty() {
        return Err(Error::CsvParse {
            line: 1,
            message: "file has no data rows".into(),
        });
    }
    if width < 2 {
        return Err(Error::CsvParse {
            line: rows[0].0,
            message: "need at least one feature column and one label column".into(),
        });
    }

    let label_idx = match label {
        LabelColumn::Index(i) => {
            if *i >= width {
                return Err(Error::InvalidConfig(format!(
                    "label column {i} out of range for {width} columns"
                )));
            }
            *i
        }
        LabelColumn::Name(name) => match &header {
            Some(h) => h.iter().position(|c| c == name).ok_or_else(|| {
                Error::InvalidConfig(format!("label column '{name}' not found in header"))
            })?,
            None => {
                return Err(Error::InvalidConfig(
                    "label column by name requires a header".into(),
                ))
            }
        },
        LabelColumn::Last => width - 1,
    };

    // Labels: exact 0/1 numerics, else two distinct strings in first-seen order.
    let numeric_binary = rows.iter().all(|(_, f)| {
        f[label_idx]
            .parse::<f64>()
            .map(|v| v == 0.0 || v == 1.0)
            .unwrap_or(false)
    });
    let mut label_mapping = None;
    let mut y = Vec::with_capacity(rows.len());
    if numeric_binary {
        for (_, fields) in &rows {
            y.push(u8::from(fields[label_idx].parse::<f64>().unwrap() == 1.0));
        }
    } else {
        let mut seen: Vec<String> = Vec::new();
        for (lineno, fields) in &rows {
            let v = &fields[label_idx];
            if !seen.contains(v) {
                if seen.len() == 2 {
                    return Err(Error::CsvParse {
                        line: *lineno,
                        message: format!("label column has more than two distinct values ('{v}')"),
                    });
                }
                seen.push(v.clone());
            }
            y.push(u8::from(seen.iter().position(|s| s == v).unwrap() == 1));
        }
        let second = seen.get(1).cloned().unwrap_or_default();
        label_mapping = Some((seen[0].clone(), second));
    }

    let d = width - 1;
    let feature_names: Vec<String> = match &header {
        Some(h) => h
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != label_idx)
            .map(|(_, name)| name.clone())
            .collect(),
        None => (1..=d).map(|i| format!("x{i}")).collect(),
    };

    let mut x = Array2::zeros((rows.len(), d));
    for (r, (lineno, fields)) in rows.iter().enumerate() {
        let mut c = 0;
        for (i, field) in fields.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            x[[r, c]] = field.parse::<f64>().map_err(|_| Error::CsvParse {
                line: *lineno,
                message: format!("non-numeric value '{field}' in column {}", i + 1),
            })?;
            c += 1;
        }
    }

    Ok(Dataset {
        x,
        y,
        feature_names,
        label_mapping,
    })
}

/// Parse a CSV of features only (no label column), for prediction inputs.
pub fn load_features_csv(path: &Path, has_header: bool) -> Result<(Array2<f64>, Vec<String>)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let header: Option<Vec<String>> = if has_header {
        lines
            .next()
            .map(|(_, l)| l.split(',').map(|s| s.trim().to_string()).collect())
    } else {
        None
    };
    let mut width = header.as_ref().map(|h| h.len());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').map(|s| s.trim()).collect();
        match width {
            Some(w) if fields.len() != w => {
                return Err(Error::CsvParse {
                    line: lineno,
                    message: format!("expected {w} fields, found {}", fields.len()),
                })
            }
            None => width = Some(fields.len()),
            _ => {}
        }
        let row = fields
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.parse::<f64>().map_err(|_| Error::CsvParse {
                    line: lineno,
                    message: format!("non-numeric value '{f}' in column {}", i + 1),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let d = width.ok_or_else(|| Error::CsvParse {
        line: 1,
        message: "file has no data rows".into(),
    })?;
    if rows.is_empty() {
        return Err(Error::CsvParse {
            line: 1,
            message: "file has no data rows".into(),
        });
    }
    let names = header.unwrap_or_else(|| (1..=d).map(|i| format!("x{i}")).collect());
    let mut x = Array2::zeros((rows.len(), d));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            x[[i, j]] = v;
        }
    }
    Ok((x, names))
}

/// Write a dataset back out with a header row; the label lands in the last
/// column. Floats are printed in shortest round-trip form, so a
/// `write_csv`/`load_csv` cycle reproduces the contents exactly.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&ds.feature_names.join(","));
    out.push_str(",label\n");
    for i in 0..ds.n() {
        for j in 0..ds.d() {
            out.push_str(&format!("{},", ds.x[[i, j]]));
        }
        out.push_str(&format!("{}\n", ds.y[i]));
    }
    std::fs::write(path, out).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Uniform random train/test split without replacement; both halves keep the
/// original row order.
pub fn split(ds: &Dataset, train_size: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = ds.n();
    if train_size == 0 || train_size >= n {
        return Err(Error::InvalidConfig(format!(
            "train size must lie in [1, {}), got {train_size}",
            n
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates so the draw is stable across library versions.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
    let mut train_idx: Vec<usize> = indices[..train_size].to_vec();
    let mut test_idx: Vec<usize> = indices[train_size..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((take_rows(ds, &train_idx), take_rows(ds, &test_idx)))
}

fn take_rows(ds: &Dataset, idx: &[usize]) -> Dataset {
    let d = ds.d();
    let mut x = Array2::zeros((idx.len(), d));
    let mut y = Vec::with_capacity(idx.len());
    for (r, &i) in idx.iter().enumerate() {
        x.row_mut(r).assign(&ds.x.row(i));
        y.push(ds.y[i]);
    }
    Dataset {
        x,
        y,
        feature_names: ds.feature_names.clone(),
        label_mapping: ds.label_mapping.clone(),
    }
}

#[derive(Debug, Clone)]
struct ColumnScale {
    /// Euclidean norm of the training column; recorded for protocol
    /// fidelity even though min-max absorbs it.
    norm: f64,
    /// Min and max of the unit-normed training column.
    lo: f64,
    hi: f64,
    /// Raw value of a constant column, kept to build placeholder ranges.
    constant: Option<f64>,
}

/// Per-column transform to `[0, 1]`: divide by the training Euclidean norm,
/// then min-max over the training values; out-of-range values clamp at
/// prediction time. Constant columns cannot be scaled and are dropped from
/// the modeled set.
#[derive(Debug, Clone)]
pub struct Scaler {
    cols: Vec<ColumnScale>,
}

impl Scaler {
    pub fn fit(x: ArrayView2<'_, f64>) -> Result<Self> {
        let (n, d) = x.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidConfig("cannot scale an empty matrix".into()));
        }
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let col = x.column(j);
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("scaler input"));
            }
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if min == max {
                cols.push(ColumnScale {
                    norm: 1.0,
                    lo: 0.0,
                    hi: 1.0,
                    constant: Some(min),
                });
            } else {
                let norm = if norm > 0.0 { norm } else { 1.0 };
                cols.push(ColumnScale {
                    norm,
                    lo: min / norm,
                    hi: max / norm,
                    constant: None,
                });
            }
        }
        if cols.iter().all(|c| c.constant.is_some()) {
            return Err(Error::InvalidConfig(
                "every column is constant; nothing to model".into(),
            ));
        }
        Ok(Self { cols })
    }

    pub fn num_features(&self) -> usize {
        self.cols.len()
    }

    /// Original indices of the columns that stay in the model.
    pub fn kept_indices(&self) -> Vec<usize> {
        self.cols
            .iter()
            .enumerate()
            .filter(|(_, c)| c.constant.is_none())
            .map(|(j, _)| j)
            .collect()
    }

    /// Original indices of dropped (constant) columns.
    pub fn dropped_indices(&self) -> Vec<usize> {
        self.cols
            .iter()
            .enumerate()
            .filter(|(_, c)| c.constant.is_some())
            .map(|(j, _)| j)
            .collect()
    }

    /// Map raw values of the kept columns into `[0, 1]`, clamping anything
    /// outside the training range.
    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let kept = self.kept_indices();
        let n = x.nrows();
        let mut out = Array2::zeros((n, kept.len()));
        for (c, &j) in kept.iter().enumerate() {
            let col = &self.cols[j];
            for i in 0..n {
                let v = x[[i, j]] / col.norm;
                out[[i, c]] = ((v - col.lo) / (col.hi - col.lo)).clamp(0.0, 1.0);
            }
        }
        out
    }

    /// Effective raw-space `(min, max)` per original feature, suitable for a
    /// [`crate::model::SpamModel`]. Dropped columns get a placeholder range;
    /// their coefficient rows are zero so the range is never used.
    pub fn feature_ranges(&self) -> Vec<(f64, f64)> {
        self.cols
            .iter()
            .map(|c| match c.constant {
                Some(v) => (v, v + 1.0),
                None => (c.norm * c.lo, c.norm * c.hi),
            })
            .collect()
    }
}
