//! JSON matrix files and report serialization.
//!
//! A matrix file is `{"rows": r, "cols": c, "data": [...]}` with row-major
//! data given either as `[re, im]` pairs or, for real matrices, as plain
//! numbers. Floats are written with 17 significant digits so that every
//! value re-parses to the same bits.

use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numkit::{self, c64, ComplexMatrix};

#[derive(Deserialize)]
#[serde(untagged)]
enum Data {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Data,
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let raw: RawMatrix =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix file: {e}")))?;
    matrix_from_raw(raw)
}

fn matrix_from_raw(raw: RawMatrix) -> Result<ComplexMatrix> {
    let data: Vec<_> = match raw.data {
        Data::Real(v) => v.into_iter().map(|x| c64(x, 0.0)).collect(),
        Data::Complex(v) => v.into_iter().map(|[re, im]| c64(re, im)).collect(),
    };
    let expected = raw.rows.checked_mul(raw.cols);
    if expected != Some(data.len()) {
        return Err(Error::Parse(format!(
            "matrix file declares {}x{} but holds {} entries",
            raw.rows,
            raw.cols,
            data.len()
        )));
    }
    if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Parse("matrix file holds a non-finite entry".into()));
    }
    numkit::from_row_major(raw.rows, raw.cols, &data)
}

/// Parses a matrix embedded in a larger JSON document.
pub fn matrix_from_value(v: &Value) -> Result<ComplexMatrix> {
    let raw: RawMatrix = serde_json::from_value(v.clone())
        .map_err(|e| Error::Parse(format!("matrix object: {e}")))?;
    matrix_from_raw(raw)
}

/// A file read from disk together with its SHA-256 digest.
pub struct Input {
    pub name: String,
    pub path: String,
    pub sha256: String,
    pub text: String,
}

pub fn read_input(name: &str, path: &Path) -> Result<Input> {
    let bytes =
        std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Parse(format!("{}: not valid UTF-8", path.display())))?;
    Ok(Input {
        name: name.to_string(),
        path: path.display().to_string(),
        sha256,
        text,
    })
}

impl Input {
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        parse_matrix(&self.text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", self.path)),
            other => other,
        })
    }

    pub fn json(&self) -> Value {
        json!({ "name": self.name, "path": self.path, "sha256": self.sha256 })
    }
}

/// A float as JSON; non-finite values become the strings `"inf"`, `"-inf"`
/// and `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Matrix as a matrix-file object; real matrices use the plain layout.
pub fn matrix_value(a: &ComplexMatrix) -> Value {
    let (r, c) = a.shape();
    let real = a.iter().all(|z| z.im == 0.0);
    let mut data = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            let z = a[(i, j)];
            data.push(if real {
                num(z.re)
            } else {
                Value::Array(vec![num(z.re), num(z.im)])
            });
        }
    }
    let mut m = Map::new();
    m.insert("rows".into(), r.into());
    m.insert("cols".into(), c.into());
    m.insert("data".into(), Value::Array(data));
    Value::Object(m)
}

/// Compact JSON formatter writing floats as `d.dddddddddddddddde±x`.
struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes with full float precision and a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    serde::Serialize::serialize(v, &mut ser).expect("serializing a JSON value cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}

pub fn write_matrix(path: &Path, a: &ComplexMatrix) -> Result<()> {
    std::fs::write(path, to_json_string(&matrix_value(a)))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
