//! Text formats: `.hpx` documents for (equivariant) Hilbert–Poincaré
//! complexes and complexes with boundary, `.smf` documents for oriented
//! simplicial manifolds, and generator profile strings.
//!
//! Both document formats are JSON. Matrix entries are either a number or an
//! `[re, im]` pair; matrices are arrays of rows.

mod hpx;
mod smf;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::Profile;
use crate::ktheory::FiniteGroup;
use crate::spectral::CMatrix;

pub use hpx::{parse_hpx, write_cwb, write_hpx, HpxDocument, HpxInstance};
pub use smf::{parse_smf, write_smf, SmfDocument, SmfInstance};

/// Parse a generator profile such as `n=2,max_dim=6,group=z3`.
pub fn parse_profile(text: &str) -> Result<Profile> {
    text.parse()
}

/// Largest matrix dimension accepted in a document.
pub const MAX_DOCUMENT_DIM: usize = 4096;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Pair(Vec<f64>),
}

impl Entry {
    fn value(&self) -> Result<Complex64> {
        match self {
            Entry::Real(x) => Ok(Complex64::new(*x, 0.0)),
            Entry::Pair(v) => match v.as_slice() {
                [re] => Ok(Complex64::new(*re, 0.0)),
                [re, im] => Ok(Complex64::new(*re, *im)),
                _ => Err(Error::Parse(format!("matrix entry has {} components, expected [re, im]", v.len()))),
            },
        }
    }
}

pub type MatrixDoc = Vec<Vec<Entry>>;

pub(crate) fn matrix_from_doc(doc: &MatrixDoc, rows: usize, cols: usize, what: &str) -> Result<CMatrix> {
    // an empty matrix may be written as [] whatever its formal shape
    if doc.is_empty() && (rows == 0 || cols == 0) {
        return Ok(CMatrix::zeros(rows, cols));
    }
    if doc.len() != rows {
        return Err(Error::Parse(format!("{what} has {} rows, expected {rows}", doc.len())));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in doc.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Parse(format!("{what} row {i} has {} entries, expected {cols}", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            let z = e.value()?;
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Parse(format!("{what} has a non-finite entry at ({i}, {j})")));
            }
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

pub(crate) fn matrix_to_doc(m: &CMatrix) -> MatrixDoc {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Entry::Pair(vec![m[(i, j)].re, m[(i, j)].im])).collect())
        .collect()
}

/// A finite group: either `{"cyclic": m}` or an explicit multiplication
/// table with optional element names.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Elements>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mult: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Elements {
    Count(usize),
    Names(Vec<String>),
}

impl GroupDoc {
    pub(crate) fn build(&self) -> Result<Arc<FiniteGroup>> {
        let group = match (&self.cyclic, &self.mult) {
            (Some(m), None) => {
                if *m == 0 || *m > crate::ktheory::MAX_GROUP_ORDER {
                    return Err(Error::Parse(format!("cyclic group order {m} out of range")));
                }
                FiniteGroup::cyclic(*m)
            }
            (None, Some(table)) => {
                if table.len() > crate::ktheory::MAX_GROUP_ORDER {
                    return Err(Error::Parse(format!("group of order {} is too large", table.len())));
                }
                FiniteGroup::from_table(table.clone())
            }
            _ => return Err(Error::Parse("a group needs exactly one of \"cyclic\" and \"mult\"".into())),
        }
        .map_err(|e| Error::Parse(e.to_string()))?;
        let declared = match &self.elements {
            None => None,
            Some(Elements::Count(c)) => Some(*c),
            Some(Elements::Names(names)) => Some(names.len()),
        };
        if let Some(c) = declared {
            if c != group.order() {
                return Err(Error::Parse(format!(
                    "group lists {c} elements but its table has order {}",
                    group.order()
                )));
            }
        }
        Ok(Arc::new(group))
    }

    pub(crate) fn describe(group: &FiniteGroup) -> GroupDoc {
        let m = group.order();
        if FiniteGroup::cyclic(m).is_ok_and(|c| &c == group) {
            GroupDoc {
                cyclic: Some(m),
                ..GroupDoc::default()
            }
        } else {
            GroupDoc {
                cyclic: None,
                elements: Some(Elements::Count(m)),
                mult: Some(group.table().to_vec()),
            }
        }
    }
}

/// Render a document with one matrix row or list per line.
pub(crate) fn to_pretty_json<T: Serialize>(doc: &T) -> String {
    let value = serde_json::to_value(doc).expect("documents serialise");
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    out
}

/// Nesting depth of arrays holding only arrays and scalars; objects count
/// as unbounded.
fn depth(v: &serde_json::Value) -> usize {
    match v {
        serde_json::Value::Array(items) => 1 + items.iter().map(depth).max().unwrap_or(0),
        serde_json::Value::Object(_) => usize::MAX / 2,
        _ => 0,
    }
}

fn write_value(v: &serde_json::Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent + 1);
    match v {
        serde_json::Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(x, indent + 1, out);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        serde_json::Value::Array(items) if !items.is_empty() && depth(v) > 2 => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad);
                write_value(x, indent + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        _ => out.push_str(&serde_json::to_string(v).unwrap()),
    }
}
