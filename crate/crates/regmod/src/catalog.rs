//! Instance catalog: JSON schema loading plus the built-in entries shipped
//! under `data/catalog/`.
//!
//! Schema (one JSON object per instance):
//! `{"family": string, "p": int, "kappa0": int?, "M": [[num]]?, "A": [[num]]?,
//!   "b": [num]?, "lambda": num?, "box_radius": num?}`
//! with optional extensions `"name"`, `"base"` (canonical base point) and
//! `"pieces"` (plq tables, `lo`/`hi` may be null for ±∞).

use nalgebra::{DMatrix, DVector};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::instance::{
    Family, FunctionInstance, NonsmoothPart, PlqPiece, SmoothPart, DEFAULT_BOX_RADIUS,
};

const BUILTIN_SOURCES: &[(&str, &str)] = &[
    ("zq3", include_str!("../data/catalog/zq3.json")),
    ("zq3-nonneg", include_str!("../data/catalog/zq3-nonneg.json")),
    ("bilinear-4x4", include_str!("../data/catalog/bilinear-4x4.json")),
    ("lasso-toy", include_str!("../data/catalog/lasso-toy.json")),
    ("quartic-gap", include_str!("../data/catalog/quartic-gap.json")),
    ("half-square", include_str!("../data/catalog/half-square.json")),
    ("neg-half-square", include_str!("../data/catalog/neg-half-square.json")),
    ("abs", include_str!("../data/catalog/abs.json")),
    ("sparse-indicator", include_str!("../data/catalog/sparse-indicator.json")),
    ("huber", include_str!("../data/catalog/huber.json")),
    ("hinge", include_str!("../data/catalog/hinge.json")),
];

/// All built-in catalog instances, in catalog order.
pub fn all() -> Vec<FunctionInstance> {
    BUILTIN_SOURCES
        .iter()
        .map(|(name, src)| load_json(src).unwrap_or_else(|e| panic!("builtin `{name}`: {e}")))
        .collect()
}

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN_SOURCES.iter().map(|(n, _)| *n).collect()
}

/// Look up a built-in instance by name.
pub fn builtin(name: &str) -> Result<FunctionInstance> {
    for (n, src) in BUILTIN_SOURCES {
        if *n == name {
            return load_json(src);
        }
    }
    Err(Error::config(
        "instance",
        format!(
            "unknown instance `{name}`; built-ins: {}",
            builtin_names().join(", ")
        ),
    ))
}

/// Resolve an instance argument: a built-in name, or a path to a JSON file.
pub fn resolve(arg: &str) -> Result<FunctionInstance> {
    if BUILTIN_SOURCES.iter().any(|(n, _)| *n == arg) {
        return builtin(arg);
    }
    let path = std::path::Path::new(arg);
    if path.exists() {
        return load_file(path);
    }
    Err(Error::config(
        "instance",
        format!("`{arg}` is neither a built-in instance nor an existing file"),
    ))
}

pub fn load_file(path: &std::path::Path) -> Result<FunctionInstance> {
    let text = std::fs::read_to_string(path)?;
    let mut inst = load_json(&text)?;
    if inst.name == "unnamed" {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            inst.name = stem.to_string();
        }
    }
    Ok(inst)
}

/// Parse and fully validate one instance record; unknown family names and
/// schema violations are rejected with the offending field path.
pub fn load_json(text: &str) -> Result<FunctionInstance> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::config("<document>", format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::config("<document>", "instance record must be a JSON object"))?;

    for key in obj.keys() {
        if !matches!(
            key.as_str(),
            "name" | "family" | "p" | "kappa0" | "M" | "A" | "b" | "lambda" | "box_radius"
                | "pieces" | "base"
        ) {
            return Err(Error::config(key, "unknown field"));
        }
    }

    let family_str = req_str(obj, "family")?;
    let name = opt_str(obj, "name")?.unwrap_or_else(|| "unnamed".to_string());
    let box_radius = opt_num(obj, "box_radius")?.unwrap_or(DEFAULT_BOX_RADIUS);

    let (family, p, smooth, nonsmooth) = match family_str.as_str() {
        "quadratic" => {
            let p = req_dim(obj)?;
            let m = req_matrix(obj, "M", p, p)?;
            (Family::Quadratic, p, SmoothPart::Quadratic { m_bar: m }, NonsmoothPart::Zero)
        }
        "least-squares" => {
            let p = req_dim(obj)?;
            let (a, b) = req_least_squares(obj, p)?;
            (Family::LeastSquares, p, SmoothPart::LeastSquares { a, b }, NonsmoothPart::Zero)
        }
        "l1" => {
            let p = req_dim(obj)?;
            let lambda = req_num(obj, "lambda")?;
            (Family::L1, p, SmoothPart::None, NonsmoothPart::L1 { lambda })
        }
        "quadratic-l1" => {
            let p = req_dim(obj)?;
            let m = req_matrix(obj, "M", p, p)?;
            let lambda = req_num(obj, "lambda")?;
            (
                Family::QuadraticL1,
                p,
                SmoothPart::Quadratic { m_bar: m },
                NonsmoothPart::L1 { lambda },
            )
        }
        "least-squares-l1" => {
            let p = req_dim(obj)?;
            let (a, b) = req_least_squares(obj, p)?;
            let lambda = req_num(obj, "lambda")?;
            (
                Family::LeastSquaresL1,
                p,
                SmoothPart::LeastSquares { a, b },
                NonsmoothPart::L1 { lambda },
            )
        }
        "zero-norm-quadratic" | "zero-norm-quadratic-nonneg" => {
            let p = req_dim(obj)?;
            let m = req_matrix(obj, "M", p, p)?;
            let kappa0 = req_kappa(obj, p)?;
            if family_str == "zero-norm-quadratic" {
                (
                    Family::ZeroNormQuadratic,
                    p,
                    SmoothPart::Quadratic { m_bar: m },
                    NonsmoothPart::SparseIndicator { kappa0 },
                )
            } else {
                (
                    Family::ZeroNormQuadraticNonneg,
                    p,
                    SmoothPart::Quadratic { m_bar: m },
                    NonsmoothPart::SparseNonneg { kappa0 },
                )
            }
        }
        "bilinear-sparse" => {
            let p = req_dim(obj)?;
            let a = req_square_matrix(obj, "A")?;
            let n = a.nrows();
            if n == 0 || p % (2 * n) != 0 {
                return Err(Error::config("p", "must equal 2*n*m for the n x n matrix A"));
            }
            let m_cols = p / (2 * n);
            let block = n * m_cols;
            let kappa0 = req_kappa(obj, block)?;
            let m_bar = bilinear_coupling(&a, m_cols);
            (
                Family::BilinearSparse,
                p,
                SmoothPart::Quadratic { m_bar },
                NonsmoothPart::BlockSparse { block, kappa0 },
            )
        }
        "sparse-indicator" => {
            let p = req_dim(obj)?;
            let kappa0 = req_kappa(obj, p)?;
            (
                Family::SparseIndicator,
                p,
                SmoothPart::None,
                NonsmoothPart::SparseIndicator { kappa0 },
            )
        }
        "plq" => {
            let pieces = req_pieces(obj)?;
            (Family::Plq, 1, SmoothPart::None, NonsmoothPart::Plq { pieces })
        }
        "quartic-gap" => {
            let p = opt_dim(obj)?.unwrap_or(1);
            if p != 1 {
                return Err(Error::config("p", "quartic-gap is a scalar family"));
            }
            (Family::QuarticGap, 1, SmoothPart::QuarticBranch, NonsmoothPart::Zero)
        }
        other => {
            return Err(Error::config("family", format!("unknown family `{other}`")));
        }
    };

    let base = match obj.get("base") {
        None => vec![0.0; p],
        Some(v) => {
            let b = vector_from(v, "base")?;
            if b.len() != p {
                return Err(Error::config("base", format!("length must be p = {p}")));
            }
            b
        }
    };

    FunctionInstance::new(name, family, p, smooth, nonsmooth, box_radius, base)
}

/// `M̄ = [[0, B], [Bᵀ, 0]]` with `B = I_m ⊗ A`, so that
/// `½ zᵀ M̄ z = ⟨U, AV⟩` for `z = (vec U, vec V)` in column-major layout.
fn bilinear_coupling(a: &DMatrix<f64>, m_cols: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let block = n * m_cols;
    let p = 2 * block;
    let mut m = DMatrix::zeros(p, p);
    for j in 0..m_cols {
        for r in 0..n {
            for c in 0..n {
                let row = j * n + r;
                let col = block + j * n + c;
                m[(row, col)] = a[(r, c)];
                m[(col, row)] = a[(r, c)];
            }
        }
    }
    m
}

fn req_str(obj: &serde_json::Map<String, Value>, key: &str) -> Result<String> {
    obj.get(key)
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::config(key, "required string field"))
}

fn opt_str(obj: &serde_json::Map<String, Value>, key: &str) -> Result<Option<String>> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(Error::config(key, "must be a string")),
    }
}

fn req_num(obj: &serde_json::Map<String, Value>, key: &str) -> Result<f64> {
    obj.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::config(key, "required numeric field"))
}

fn opt_num(obj: &serde_json::Map<String, Value>, key: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::config(key, "must be a number")),
    }
}

fn req_dim(obj: &serde_json::Map<String, Value>) -> Result<usize> {
    opt_dim(obj)?.ok_or_else(|| Error::config("p", "required positive integer"))
}

fn opt_dim(obj: &serde_json::Map<String, Value>) -> Result<Option<usize>> {
    match obj.get("p") {
        None => Ok(None),
        Some(v) => {
            let n = v
                .as_u64()
                .ok_or_else(|| Error::config("p", "must be a positive integer"))?;
            if n == 0 {
                return Err(Error::config("p", "must be positive"));
            }
            Ok(Some(n as usize))
        }
    }
}

fn req_kappa(obj: &serde_json::Map<String, Value>, p: usize) -> Result<usize> {
    let k = obj
        .get("kappa0")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::config("kappa0", "required positive integer"))?;
    let k = k as usize;
    if k < 1 || k > p {
        return Err(Error::config(
            "kappa0",
            format!("must satisfy 1 <= kappa0 <= {p}"),
        ));
    }
    Ok(k)
}

fn vector_from(v: &Value, path: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::config(path, "must be an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| Error::config(format!("{path}[{i}]"), "must be a number"))
        })
        .collect()
}

fn req_matrix(
    obj: &serde_json::Map<String, Value>,
    key: &str,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<f64>> {
    let m = any_matrix(obj, key)?;
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::config(key, format!("must be {rows} x {cols}")));
    }
    Ok(m)
}

fn req_square_matrix(obj: &serde_json::Map<String, Value>, key: &str) -> Result<DMatrix<f64>> {
    let m = any_matrix(obj, key)?;
    if m.nrows() != m.ncols() {
        return Err(Error::config(key, "must be square"));
    }
    Ok(m)
}

fn any_matrix(obj: &serde_json::Map<String, Value>, key: &str) -> Result<DMatrix<f64>> {
    let rows = obj
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::config(key, "required matrix (array of rows)"))?;
    if rows.is_empty() {
        return Err(Error::config(key, "matrix must be nonempty"));
    }
    let mut data: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let row = vector_from(r, &format!("{key}[{i}]"))?;
        if let Some(first) = data.first() {
            if row.len() != first.len() {
                return Err(Error::config(
                    format!("{key}[{i}]"),
                    "rows must have equal length",
                ));
            }
        }
        data.push(row);
    }
    let nrows = data.len();
    let ncols = data[0].len();
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| data[i][j]))
}

fn req_least_squares(
    obj: &serde_json::Map<String, Value>,
    p: usize,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let a = any_matrix(obj, "A")?;
    if a.ncols() != p {
        return Err(Error::config("A", format!("must have p = {p} columns")));
    }
    let b = vector_from(
        obj.get("b")
            .ok_or_else(|| Error::config("b", "required vector"))?,
        "b",
    )?;
    if b.len() != a.nrows() {
        return Err(Error::config("b", "length must match the rows of A"));
    }
    Ok((a, DVector::from_vec(b)))
}

fn req_pieces(obj: &serde_json::Map<String, Value>) -> Result<Vec<PlqPiece>> {
    let arr = obj
        .get("pieces")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::config("pieces", "required array of pieces"))?;
    let mut pieces = Vec::with_capacity(arr.len());
    for (i, v) in arr.iter().enumerate() {
        let path = format!("pieces[{i}]");
        let po = v
            .as_object()
            .ok_or_else(|| Error::config(&path, "piece must be an object"))?;
        let bound = |key: &str, default: f64| -> Result<f64> {
            match po.get(key) {
                None | Some(Value::Null) => Ok(default),
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| Error::config(format!("{path}.{key}"), "must be a number")),
            }
        };
        let coeff = |key: &str| -> Result<f64> {
            po.get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::config(format!("{path}.{key}"), "required number"))
        };
        pieces.push(PlqPiece {
            lo: bound("lo", f64::NEG_INFINITY)?,
            hi: bound("hi", f64::INFINITY)?,
            a: coeff("a")?,
            b: coeff("b")?,
            c: coeff("c")?,
        });
    }
    Ok(pieces)
}
