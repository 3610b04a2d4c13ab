//! Serialization helpers. JSON goes through `serde_json::Value`, whose map
//! keeps keys sorted, so equal inputs give byte-identical text.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};
use tblim::core_model::{BasisKind, ModelParams};
use tblim::operators::DenseOperator;

/// A float as JSON; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn complex_list<'a>(zs: impl IntoIterator<Item = &'a Complex64>) -> Value {
    Value::Array(zs.into_iter().map(|&z| complex(z)).collect())
}

/// A float as CSV text, formatted like its JSON counterpart.
pub fn cell(x: f64) -> String {
    match serde_json::Number::from_f64(x) {
        Some(v) => v.to_string(),
        None => x.to_string(),
    }
}

pub fn basis_name(b: BasisKind) -> &'static str {
    match b {
        BasisKind::PositionPlus => "position-plus",
        BasisKind::PositionMinus => "position-minus",
        BasisKind::MomentumPlus => "momentum-plus",
        BasisKind::MomentumMinus => "momentum-minus",
    }
}

pub fn parse_basis(s: &str) -> Option<BasisKind> {
    Some(match s {
        "position-plus" => BasisKind::PositionPlus,
        "position-minus" => BasisKind::PositionMinus,
        "momentum-plus" => BasisKind::MomentumPlus,
        "momentum-minus" => BasisKind::MomentumMinus,
        _ => return None,
    })
}

pub fn params_json(p: &ModelParams) -> Value {
    json!({
        "n": p.n(),
        "K": p.band_limit(),
        "L": p.time_limit(),
        "parity": p.parity().to_string(),
    })
}

/// Row-major matrix with its basis tag and dimensions.
pub fn matrix_json(op: &DenseOperator) -> Value {
    let m = op.matrix();
    let data: Vec<Value> = (0..m.nrows())
        .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
        .collect();
    json!({
        "basis": basis_name(op.basis()),
        "rows": m.nrows(),
        "cols": m.ncols(),
        "data": data,
    })
}

/// Inverse of [`matrix_json`].
pub fn matrix_from_json(v: &Value) -> Result<DenseOperator> {
    let basis = v["basis"]
        .as_str()
        .and_then(parse_basis)
        .context("matrix has no valid basis tag")?;
    let rows = v["rows"].as_u64().context("matrix has no row count")? as usize;
    let cols = v["cols"].as_u64().context("matrix has no column count")? as usize;
    let data = v["data"].as_array().context("matrix has no data")?;
    anyhow::ensure!(data.len() == rows, "matrix has {} rows, header says {rows}", data.len());
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    for (i, row) in data.iter().enumerate() {
        let row = row.as_array().context("matrix row is not an array")?;
        anyhow::ensure!(row.len() == cols, "row {i} has {} entries, header says {cols}", row.len());
        for (j, z) in row.iter().enumerate() {
            let pair = z.as_array().filter(|p| p.len() == 2).context("entry is not a [re, im] pair")?;
            let re = pair[0].as_f64().context("entry is not numeric")?;
            let im = pair[1].as_f64().context("entry is not numeric")?;
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(DenseOperator::from_matrix(m, basis))
}

/// A CSV table: a header and rows of already formatted cells.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

pub fn to_json_text(v: &Value) -> Result<String> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    Ok(text)
}
