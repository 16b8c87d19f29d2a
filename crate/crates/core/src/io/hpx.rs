use serde::{Deserialize, Serialize};

use super::{matrix_from_doc, matrix_to_doc, to_pretty_json, Elements, GroupDoc, MatrixDoc, MAX_DOCUMENT_DIM};
use crate::bordism::ComplexWithBoundary;
use crate::error::{Error, Result};
use crate::hpcomplex::{ChainComplex, DualityOperator, HilbertPoincareComplex};
use crate::ktheory::GroupAction;

/// A `.hpx` document. `b[k − 1]` is `b_k` and `S[k]` is `S_k: E_{n−k} → E_k`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HpxDocument {
    pub n: usize,
    pub dims: Vec<usize>,
    pub b: Vec<MatrixDoc>,
    #[serde(rename = "S")]
    pub s: Vec<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<HpxGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_split: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HpxGroup {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Elements>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mult: Option<Vec<Vec<usize>>>,
    /// `action[g][k]` is `ρ(g)` on degree `k`.
    pub action: Vec<Vec<MatrixDoc>>,
}

#[derive(Clone, Debug)]
pub enum HpxInstance {
    Closed(HilbertPoincareComplex),
    WithBoundary(ComplexWithBoundary),
}

fn structure(e: Error) -> Error {
    match e {
        Error::Parse(_) => e,
        other => Error::Parse(other.to_string()),
    }
}

impl HpxGroup {
    fn group_doc(&self) -> GroupDoc {
        GroupDoc {
            cyclic: self.cyclic,
            elements: self.elements.clone(),
            mult: self.mult.clone(),
        }
    }
}

impl HpxDocument {
    pub fn build(&self) -> Result<HpxInstance> {
        let n = self.n;
        let dims = &self.dims;
        if n > MAX_DOCUMENT_DIM {
            return Err(Error::Parse(format!("top degree {n} exceeds the limit {MAX_DOCUMENT_DIM}")));
        }
        if dims.len() != n + 1 {
            return Err(Error::Parse(format!("\"dims\" has {} entries, expected n + 1 = {}", dims.len(), n + 1)));
        }
        if let Some(&d) = dims.iter().find(|&&d| d > MAX_DOCUMENT_DIM) {
            return Err(Error::Parse(format!("dimension {d} exceeds the limit {MAX_DOCUMENT_DIM}")));
        }
        if self.b.len() != n {
            return Err(Error::Parse(format!("\"b\" has {} matrices, expected n = {n}", self.b.len())));
        }
        if self.s.len() != n + 1 {
            return Err(Error::Parse(format!("\"S\" has {} blocks, expected n + 1 = {}", self.s.len(), n + 1)));
        }
        let b = (1..=n)
            .map(|k| matrix_from_doc(&self.b[k - 1], dims[k - 1], dims[k], &format!("b_{k}")))
            .collect::<Result<Vec<_>>>()?;
        let s = (0..=n)
            .map(|k| matrix_from_doc(&self.s[k], dims[k], dims[n - k], &format!("S_{k}")))
            .collect::<Result<Vec<_>>>()?;
        let complex = ChainComplex::new(dims.clone(), b).map_err(structure)?;
        let duality = DualityOperator::new(dims, s).map_err(structure)?;
        match (&self.group, &self.boundary_split) {
            (Some(_), Some(_)) => Err(Error::Parse(
                "a document with \"boundary_split\" cannot carry a group action".into(),
            )),
            (None, Some(split)) => Ok(HpxInstance::WithBoundary(
                ComplexWithBoundary::new(complex, duality, split.clone()).map_err(structure)?,
            )),
            (group, None) => {
                let action = match group {
                    None => None,
                    Some(g) => {
                        let group = g.group_doc().build()?;
                        if g.action.len() != group.order() {
                            return Err(Error::Parse(format!(
                                "action lists {} elements, group has order {}",
                                g.action.len(),
                                group.order()
                            )));
                        }
                        let mut matrices = Vec::with_capacity(group.order());
                        for (e, per) in g.action.iter().enumerate() {
                            if per.len() != n + 1 {
                                return Err(Error::Parse(format!(
                                    "action of element {e} lists {} degrees, expected {}",
                                    per.len(),
                                    n + 1
                                )));
                            }
                            matrices.push(
                                (0..=n)
                                    .map(|k| matrix_from_doc(&per[k], dims[k], dims[k], &format!("rho({e}) in degree {k}")))
                                    .collect::<Result<Vec<_>>>()?,
                            );
                        }
                        Some(GroupAction::new(group, matrices, dims).map_err(structure)?)
                    }
                };
                Ok(HpxInstance::Closed(
                    HilbertPoincareComplex::new(complex, duality, action).map_err(structure)?,
                ))
            }
        }
    }

    pub fn from_hp(hp: &HilbertPoincareComplex) -> Self {
        let n = hp.top_degree();
        HpxDocument {
            n,
            dims: hp.dims().to_vec(),
            b: (1..=n).map(|k| matrix_to_doc(hp.complex().differential(k))).collect(),
            s: hp.duality().blocks().iter().map(matrix_to_doc).collect(),
            group: hp.action().map(|a| {
                let GroupDoc { cyclic, elements, mult } = GroupDoc::describe(a.group());
                HpxGroup {
                    cyclic,
                    elements,
                    mult,
                    action: a
                    .matrices()
                    .iter()
                    .map(|per| per.iter().map(matrix_to_doc).collect())
                    .collect(),
                }
            }),
            boundary_split: None,
        }
    }

    pub fn from_cwb(cwb: &ComplexWithBoundary) -> Self {
        let c = cwb.complex();
        let n = c.top_degree();
        HpxDocument {
            n,
            dims: c.dims().to_vec(),
            b: (1..=n).map(|k| matrix_to_doc(c.differential(k))).collect(),
            s: cwb.duality().blocks().iter().map(matrix_to_doc).collect(),
            group: None,
            boundary_split: Some(cwb.boundary().to_vec()),
        }
    }
}

/// Parse and validate the shapes of a `.hpx` document. Every failure is
/// reported as [`Error::Parse`]; mathematical validity is left to the
/// verifiers.
pub fn parse_hpx(text: &str) -> Result<HpxInstance> {
    let doc: HpxDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.build()
}

pub fn write_hpx(hp: &HilbertPoincareComplex) -> String {
    to_pretty_json(&HpxDocument::from_hp(hp))
}

pub fn write_cwb(cwb: &ComplexWithBoundary) -> String {
    to_pretty_json(&HpxDocument::from_cwb(cwb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, generate_with_boundary, Profile};

    const SPHERE: &str = r#"{"n": 2, "dims": [1, 0, 1], "b": [[[]], []], "S": [[[1]], [], [[[1, 0]]]]}"#;

    #[test]
    fn sphere_model() {
        let HpxInstance::Closed(hp) = parse_hpx(SPHERE).unwrap() else { panic!() };
        assert_eq!(hp.dims(), &[1, 0, 1]);
    }

    #[test]
    fn shape_errors_are_parse_errors() {
        for bad in [
            r#"{"n": 0, "dims": [2], "b": [], "S": [[[1, 0]]]}"#,
            r#"{"n": 1, "dims": [1], "b": [], "S": [[[1]]]}"#,
            r#"{"n": 0, "dims": [1], "b": [], "S": [[[1, 2, 3]]]}"#,
            r#"{"n": 0, "dims": [1], "b": [], "S": [[[1]]], "extra": 1}"#,
            r#"{"n": 0, "dims": [1], "b": [], "S": [[[1]]], "group": {"cyclic": 2, "action": [[[[1]]]]}}"#,
            r#"{"n": 0, "dims": [1], "b": [], "S": [[[1]]], "group": {"cyclic": 2, "mult": [[0]], "action": []}}"#,
            r#"{"n": 1, "dims": [1, 1], "b": [[[1]]], "S": [[[1]], [[1]]], "boundary_split": [[0], [0]]}"#,
            "not json",
        ] {
            assert!(matches!(parse_hpx(bad), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn round_trip() {
        for seed in 0..5 {
            let hp = generate(seed, &Profile { n: 2, max_dim: 5, group: Some(3) });
            let HpxInstance::Closed(back) = parse_hpx(&write_hpx(&hp)).unwrap() else { panic!() };
            assert_eq!(back.total_b(), hp.total_b());
            assert_eq!(back.total_s(), hp.total_s());
            assert_eq!(back.action().unwrap().matrices(), hp.action().unwrap().matrices());
            let cwb = generate_with_boundary(seed, &Profile::default());
            let HpxInstance::WithBoundary(back) = parse_hpx(&write_cwb(&cwb)).unwrap() else { panic!() };
            assert_eq!(back.boundary(), cwb.boundary());
        }
    }
}
