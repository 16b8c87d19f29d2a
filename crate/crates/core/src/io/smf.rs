use serde::{Deserialize, Serialize};

use super::{to_pretty_json, GroupDoc};
use crate::error::{Error, Result};
use crate::simplicial::{OrientedSimplicialManifold, SimplicialAction};

/// Largest number of vertices or facets accepted in a `.smf` document.
pub const MAX_SIMPLICES: usize = 100_000;
/// Largest manifold dimension accepted in a `.smf` document.
pub const MAX_MANIFOLD_DIM: usize = 10;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FacetDoc {
    pub verts: Vec<u32>,
    pub sign: i64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDoc {
    pub group: GroupDoc,
    /// `vertex_maps[g][i]` is the image of `vertices[i]` under `g`.
    pub vertex_maps: Vec<Vec<u32>>,
}

/// A `.smf` document.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SmfDocument {
    pub dim: usize,
    pub vertices: Vec<u32>,
    pub facets: Vec<FacetDoc>,
    /// True for a manifold with boundary; defaults to closed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub boundary: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionDoc>,
}

#[derive(Clone, Debug)]
pub struct SmfInstance {
    pub manifold: OrientedSimplicialManifold,
    pub action: Option<SimplicialAction>,
}

impl SmfDocument {
    pub fn build(&self) -> Result<SmfInstance> {
        if self.dim > MAX_MANIFOLD_DIM {
            return Err(Error::Parse(format!("dimension {} exceeds the limit {MAX_MANIFOLD_DIM}", self.dim)));
        }
        if self.vertices.len() > MAX_SIMPLICES || self.facets.len() > MAX_SIMPLICES {
            return Err(Error::Parse("document exceeds the simplex limit".into()));
        }
        let facets = self.facets.iter().map(|f| (f.verts.clone(), f.sign)).collect();
        let manifold = OrientedSimplicialManifold::new(self.dim, self.vertices.clone(), facets, self.boundary)
            .map_err(|e| Error::Parse(e.to_string()))?;
        let action = match &self.action {
            None => None,
            Some(a) => {
                let group = a.group.build()?;
                Some(
                    SimplicialAction::new(&manifold, group, a.vertex_maps.clone())
                        .map_err(|e| Error::Parse(e.to_string()))?,
                )
            }
        };
        Ok(SmfInstance { manifold, action })
    }

    pub fn from_instance(m: &OrientedSimplicialManifold, action: Option<&SimplicialAction>) -> Self {
        SmfDocument {
            dim: m.dim(),
            vertices: m.vertices().to_vec(),
            facets: m
                .facets()
                .iter()
                .map(|f| FacetDoc {
                    verts: f.verts.clone(),
                    sign: f.sign,
                })
                .collect(),
            boundary: m.has_boundary(),
            action: action.map(|a| ActionDoc {
                group: GroupDoc::describe(a.group()),
                vertex_maps: a.vertex_maps().to_vec(),
            }),
        }
    }
}

/// Parse a `.smf` document into a validated manifold and action. Every
/// failure is reported as [`Error::Parse`].
pub fn parse_smf(text: &str) -> Result<SmfInstance> {
    let doc: SmfDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.build()
}

pub fn write_smf(m: &OrientedSimplicialManifold, action: Option<&SimplicialAction>) -> String {
    to_pretty_json(&SmfDocument::from_instance(m, action))
}
